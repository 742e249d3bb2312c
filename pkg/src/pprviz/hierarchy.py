"""Supergraph hierarchy: size-constrained Louvain clustering and tree queries.

Clustering works on the undirected view of the graph and repeatedly merges
clusters of supernodes, bounded so no cluster ever exceeds ``k`` members.
Levels are added until at most ``k`` supernodes remain; a virtual root always
sits on top.  Builds are deterministic: nodes are visited in ascending ID and
ties go to the lowest target cluster.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .graphio import DirectedGraph

MAX_SWEEPS = 20


@dataclass
class ModularityAccumulators:
    """Leaf-edge counters for one partition of the current supernode graph.

    w[c]: leaf edges with both endpoints inside cluster c.
    w_in[c]: leaf-edge endpoint count of cluster c (self-loop counts twice).
    node_w_in[v]: endpoint count of a single supernode v.
    cross[v]: leaf-edge weights from supernode v to each cluster.
    """
    w: dict
    w_in: dict
    node_w_in: dict
    cross: dict

    def w_cr(self, mover: int, target: int) -> float:
        return self.cross.get(mover, {}).get(target, 0.0)


def modularity_gain(acc: ModularityAccumulators, mover: int, target: int,
                    m_undirected: int) -> float:
    """Modularity change of moving one supernode into a target cluster."""
    two_m = 2.0 * m_undirected
    w_t = acc.w.get(target, 0.0)
    w_in_t = acc.w_in.get(target, 0.0)
    w_in_v = acc.node_w_in.get(mover, 0.0)
    w_cr = acc.w_cr(mover, target)
    after = (w_t + w_cr) / two_m - ((w_in_t + w_in_v) / two_m) ** 2
    before = w_t / two_m - (w_in_t / two_m) ** 2 - (w_in_v / two_m) ** 2
    return after - before


def partition_modularity(partition, intra_w, w_in, m_undirected: int) -> float:
    """Modularity of a whole partition, for brute-force comparisons.

    partition: iterable of clusters (iterables of node ids);
    intra_w(cluster): leaf edges inside the cluster; w_in[v]: endpoint counts.
    """
    two_m = 2.0 * m_undirected
    total = 0.0
    for cluster in partition:
        cl = list(cluster)
        total += intra_w(cl) / two_m - (sum(w_in[v] for v in cl) / two_m) ** 2
    return total


def _merge_pass(adj_w, node_w_in, k: int):
    """One clustering level: merge supernodes into clusters of size <= k.

    adj_w: per-node dict {neighbor: leaf-edge weight} (no self entries);
    node_w_in: per-node leaf-edge endpoint counts.  Returns clusters as
    lists of node ids, ordered by smallest member.
    """
    count = len(adj_w)
    # total leaf edges = endpoint count / 2, constant across levels
    m_und = sum(node_w_in) / 2.0
    cl_of = list(range(count))
    members = [[i] for i in range(count)]
    w_in_cl = [float(x) for x in node_w_in]
    two_m = 2.0 * m_und
    for _ in range(MAX_SWEEPS):
        merged_any = False
        for v in range(count):
            s = cl_of[v]
            if not members[s]:
                continue
            w_cr = {}
            for u in members[s]:
                for nbr, w in adj_w[u].items():
                    t = cl_of[nbr]
                    if t != s:
                        w_cr[t] = w_cr.get(t, 0.0) + w
            if not w_cr:
                continue
            size_s = len(members[s])
            if size_s == 1 and len(w_cr) == 1:
                # lone supernode with a single neighboring cluster joins it
                # outright (gain sign ignored), still capped at k members
                (t,) = w_cr.keys()
                if size_s + len(members[t]) <= k:
                    _merge(cl_of, members, w_in_cl, s, t)
                    merged_any = True
                continue
            best_t, best_gain = -1, 0.0
            for t in sorted(w_cr):
                if size_s + len(members[t]) > k:
                    continue
                gain = w_cr[t] / two_m - w_in_cl[t] * w_in_cl[s] / (two_m * m_und)
                if gain > best_gain:
                    best_gain, best_t = gain, t
            if best_t >= 0:
                _merge(cl_of, members, w_in_cl, s, best_t)
                merged_any = True
        if not merged_any:
            break
    clusters = [sorted(ms) for ms in members if ms]
    clusters.sort(key=lambda ms: ms[0])
    return clusters


def _merge(cl_of, members, w_in_cl, s, t):
    for u in members[s]:
        cl_of[u] = t
    members[t].extend(members[s])
    members[s] = []
    w_in_cl[t] += w_in_cl[s]
    w_in_cl[s] = 0.0


def _chunk_fallback(count: int, k: int):
    # disconnected levels that refuse to merge are packed by ascending id so
    # the hierarchy still narrows to <= k supernodes
    return [list(range(i, min(i + k, count))) for i in range(0, count, k)]


class SupergraphHierarchy:
    """Tree over dense node IDs.  Leaves are graph nodes (level 0); each
    supernode has 1..k children; a virtual root tops the coarsest level.

    Supernodes get global IDs n, n+1, ... assigned level by level; the root
    has the largest ID.  Leaf sets are contiguous slices of ``order``.
    """

    def __init__(self, n: int, k: int, level_children: list, order):
        # level_children[l]: for each level-(l+1) supernode (local index),
        # the list of local child indices at level l (level-0 locals = leaf ids)
        self.n = n
        self.k = k
        self.level_children = level_children
        self.order = np.asarray(order, dtype=np.int64)
        self.num_levels = len(level_children)  # supernode levels incl. root
        self._level_offsets = [n]
        for children in level_children:
            self._level_offsets.append(self._level_offsets[-1] + len(children))
        self.root_id = self._level_offsets[-1] - 1
        self._spans = self._compute_spans()
        self._super_edges = None
        self._parent_maps = None

    # -- id arithmetic -----------------------------------------------------

    def level_of(self, gid: int) -> int:
        if gid < 0 or gid > self.root_id:
            raise KeyError(f"unknown node id {gid}")
        if gid < self.n:
            return 0
        for lvl in range(1, self.num_levels + 1):
            if gid < self._level_offsets[lvl]:
                return lvl
        raise KeyError(f"unknown node id {gid}")

    def _local(self, gid: int, lvl: int) -> int:
        return gid - self._level_offsets[lvl - 1]

    def _gid(self, lvl: int, local: int) -> int:
        if lvl == 0:
            return local
        return self._level_offsets[lvl - 1] + local

    def is_leaf(self, gid: int) -> bool:
        return self.level_of(gid) == 0

    def children(self, gid: int):
        lvl = self.level_of(gid)
        if lvl == 0:
            return []
        locals_ = self.level_children[lvl - 1][self._local(gid, lvl)]
        return [self._gid(lvl - 1, c) for c in locals_]

    def parent(self, gid: int):
        lvl = self.level_of(gid)
        if gid == self.root_id:
            return None
        if self._parent_maps is None:
            self._parent_maps = []
            for children in self.level_children:
                pm = {}
                for local, kids in enumerate(children):
                    for c in kids:
                        pm[c] = local
                self._parent_maps.append(pm)
        local = gid if lvl == 0 else self._local(gid, lvl)
        return self._gid(lvl + 1, self._parent_maps[lvl][local])

    def _compute_spans(self):
        # spans[l][local] = [start, end) into self.order
        self._leaf_pos = np.empty(self.n, dtype=np.int64)
        self._leaf_pos[self.order] = np.arange(self.n)
        spans = [None]
        prev = [(int(self._leaf_pos[i]), int(self._leaf_pos[i]) + 1)
                for i in range(self.n)]
        spans[0] = prev
        for children in self.level_children:
            cur = []
            for kids in children:
                lo = min(spans[-1][c][0] for c in kids)
                hi = max(spans[-1][c][1] for c in kids)
                cur.append((lo, hi))
            spans.append(cur)
        return spans

    def leaf_count(self, gid: int) -> int:
        lvl = self.level_of(gid)
        lo, hi = self._spans[lvl][self._local(gid, lvl) if lvl else gid]
        return hi - lo

    def leaf_set(self, gid: int) -> np.ndarray:
        lvl = self.level_of(gid)
        lo, hi = self._spans[lvl][self._local(gid, lvl) if lvl else gid]
        return self.order[lo:hi]

    def internal_ids(self):
        return list(range(self.n, self.root_id + 1))

    def ancestor_at_level(self, lvl: int) -> np.ndarray:
        """Map leaf id -> global id of its level-``lvl`` ancestor."""
        out = np.empty(self.n, dtype=np.int64)
        if lvl == 0:
            out[:] = np.arange(self.n)
            return out
        for local, (lo, hi) in enumerate(self._spans[lvl]):
            out[self.order[lo:hi]] = self._gid(lvl, local)
        return out

    # -- super-edges --------------------------------------------------------

    def compute_super_edges(self, graph: DirectedGraph) -> None:
        """Project every leaf edge upward: parent gid -> sorted child pairs."""
        edges = {gid: set() for gid in self.internal_ids()}
        for lvl in range(self.num_levels):  # children live at level lvl
            anc = self.ancestor_at_level(lvl)
            parent_of = np.empty(self.n, dtype=np.int64)
            panc = self.ancestor_at_level(lvl + 1)
            parent_of[:] = panc
            for u in range(self.n):
                au = anc[u]
                pu = parent_of[u]
                for v in graph.out_neighbors(u):
                    if parent_of[v] == pu and anc[v] != au:
                        edges[int(pu)].add((int(au), int(anc[v])))
        self._super_edges = {gid: sorted(pairs) for gid, pairs in edges.items()}

    def super_edges_at(self, parent_gid: int):
        if self.is_leaf(parent_gid):
            raise ValueError(f"node {parent_gid} is a leaf, not a supernode")
        if self._super_edges is None:
            raise RuntimeError("super edges not computed; call compute_super_edges")
        return list(self._super_edges.get(parent_gid, []))

    # -- persistence ---------------------------------------------------------

    def to_json(self) -> dict:
        parent = []
        # level-0 entries follow the leaf permutation so leaf sets stay
        # contiguous; higher levels use local supernode indices
        first = np.empty(self.n, dtype=np.int64)
        for local, kids in enumerate(self.level_children[0]):
            for leaf in kids:
                first[leaf] = local
        parent.append([int(first[leaf]) for leaf in self.order])
        for lvl in range(1, self.num_levels):
            arr = [0] * len(self.level_children[lvl - 1])
            for local, kids in enumerate(self.level_children[lvl]):
                for c in kids:
                    arr[c] = local
            parent.append(arr)
        return {
            "k": self.k,
            "levels": self.num_levels,
            "parent": parent,
            "order": [int(x) for x in self.order],
        }

    @classmethod
    def from_json(cls, doc: dict) -> "SupergraphHierarchy":
        order = doc["order"]
        n = len(order)
        parent = doc["parent"]
        levels = doc["levels"]
        level_children = []
        first = {}
        for pos, leaf in enumerate(order):
            first.setdefault(parent[0][pos], []).append(leaf)
        count1 = max(first) + 1
        level_children.append([sorted(first.get(i, [])) for i in range(count1)])
        for lvl in range(1, levels):
            groups = {}
            for child_local, parent_local in enumerate(parent[lvl]):
                groups.setdefault(parent_local, []).append(child_local)
            count = max(groups) + 1
            level_children.append([sorted(groups.get(i, [])) for i in range(count)])
        return cls(n, doc["k"], level_children, order)

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json(), fh)

    @classmethod
    def load(cls, path) -> "SupergraphHierarchy":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_json(json.load(fh))


def build_hierarchy(graph: DirectedGraph, k: int) -> SupergraphHierarchy:
    """Cluster the graph bottom-up until <= k supernodes remain, then add a
    virtual root.  Graphs with n <= k get the root directly over the leaves."""
    if k < 2:
        raise ValueError(f"fanout bound k must be >= 2, got {k}")
    n = graph.node_count
    pairs, und_deg = graph.undirected_view()

    level_children = []
    # current level state: weighted undirected supernode graph
    count = n
    adj_w = [dict() for _ in range(n)]
    for u, v in pairs:
        if u != v:
            adj_w[u][v] = adj_w[u].get(v, 0.0) + 1.0
            adj_w[v][u] = adj_w[v].get(u, 0.0) + 1.0
    node_w_in = [float(d) for d in und_deg]
    # leaf lists per current-level supernode, kept in leaf DFS order
    leaf_lists = [[i] for i in range(n)]

    while count > k:
        clusters = _merge_pass(adj_w, node_w_in, k)
        if len(clusters) == count:
            clusters = _chunk_fallback(count, k)
        level_children.append(clusters)
        # aggregate to the next level
        cl_of = {}
        for ci, ms in enumerate(clusters):
            for u in ms:
                cl_of[u] = ci
        new_count = len(clusters)
        new_adj = [dict() for _ in range(new_count)]
        new_w_in = [0.0] * new_count
        for ci, ms in enumerate(clusters):
            for u in ms:
                new_w_in[ci] += node_w_in[u]
                for nbr, w in adj_w[u].items():
                    cj = cl_of[nbr]
                    if cj != ci:
                        new_adj[ci][cj] = new_adj[ci].get(cj, 0.0) + w
        leaf_lists = [sum((leaf_lists[u] for u in ms), []) for ms in clusters]
        adj_w, node_w_in, count = new_adj, new_w_in, new_count

    # virtual root over whatever remains (possibly the raw leaves)
    level_children.append([list(range(count))])
    order = sum(leaf_lists, [])
    hier = SupergraphHierarchy(n, k, level_children, order)
    hier.compute_super_edges(graph)
    return hier
