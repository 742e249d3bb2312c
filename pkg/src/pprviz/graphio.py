"""Directed graph container and edge-list / binary-cache I/O.

Graphs are stored in CSR form (out- and in-adjacency) over dense node IDs
[0, n).  Loading remaps arbitrary integer IDs, collapses duplicate edges,
optionally mirrors every edge, and gives each sink node a self-loop so that
every node has out-degree >= 1.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

CACHE_MAGIC = b"PVGZ1"


@dataclass
class DirectedGraph:
    node_count: int
    edge_count: int
    out_indptr: np.ndarray  # int64, len n+1
    out_indices: np.ndarray  # int64, len m, sorted per row
    in_indptr: np.ndarray
    in_indices: np.ndarray
    out_degree: np.ndarray = field(default=None)  # int64, len n

    def __post_init__(self):
        if self.out_degree is None:
            self.out_degree = np.diff(self.out_indptr)

    @property
    def n(self) -> int:
        return self.node_count

    @property
    def m(self) -> int:
        return self.edge_count

    def out_neighbors(self, v: int) -> np.ndarray:
        return self.out_indices[self.out_indptr[v]:self.out_indptr[v + 1]]

    def in_neighbors(self, v: int) -> np.ndarray:
        return self.in_indices[self.in_indptr[v]:self.in_indptr[v + 1]]

    def edges(self):
        """Yield all directed edges (u, v) in row order."""
        for u in range(self.node_count):
            for v in self.out_neighbors(u):
                yield u, int(v)

    def undirected_view(self):
        """Unique undirected edges {u, v} (self-loops once) and per-node
        undirected degree (self-loop counts 2 endpoint incidences)."""
        pairs = set()
        for u, v in self.edges():
            pairs.add((u, v) if u <= v else (v, u))
        deg = np.zeros(self.node_count, dtype=np.int64)
        for u, v in pairs:
            deg[u] += 1
            deg[v] += 1
        return sorted(pairs), deg

    def __eq__(self, other):
        if not isinstance(other, DirectedGraph):
            return NotImplemented
        return (
            self.node_count == other.node_count
            and self.edge_count == other.edge_count
            and np.array_equal(self.out_indptr, other.out_indptr)
            and np.array_equal(self.out_indices, other.out_indices)
            and np.array_equal(self.in_indptr, other.in_indptr)
            and np.array_equal(self.in_indices, other.in_indices)
        )


def _csr_from_sets(adj: list, n: int):
    indptr = np.zeros(n + 1, dtype=np.int64)
    for v in range(n):
        indptr[v + 1] = indptr[v] + len(adj[v])
    indices = np.empty(indptr[-1], dtype=np.int64)
    for v in range(n):
        indices[indptr[v]:indptr[v + 1]] = sorted(adj[v])
    return indptr, indices


def _build(edge_set: set, n: int) -> DirectedGraph:
    out_adj = [set() for _ in range(n)]
    for u, v in edge_set:
        out_adj[u].add(v)
    # dangling fix: sinks get a self-loop so out-degree >= 1 everywhere
    for v in range(n):
        if not out_adj[v]:
            out_adj[v].add(v)
    in_adj = [set() for _ in range(n)]
    for u in range(n):
        for v in out_adj[u]:
            in_adj[v].add(u)
    out_indptr, out_indices = _csr_from_sets(out_adj, n)
    in_indptr, in_indices = _csr_from_sets(in_adj, n)
    return DirectedGraph(n, int(out_indptr[-1]), out_indptr, out_indices,
                         in_indptr, in_indices)


def load_edge_list(path, symmetrize: bool = False):
    """Parse a 'src dst' text file into a DirectedGraph.

    Returns (graph, original_ids) where original_ids[dense] is the input ID.
    Lines starting with '#' are comments.  Raises ValueError with the line
    number on malformed input and on an empty graph.
    """
    raw_edges = []
    ids = set()
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected 'src dst', got {line!r}")
            try:
                u, v = int(parts[0]), int(parts[1])
            except ValueError:
                raise ValueError(f"{path}:{lineno}: non-integer node id in {line!r}") from None
            if u < 0 or v < 0:
                raise ValueError(f"{path}:{lineno}: negative node id in {line!r}")
            raw_edges.append((u, v))
            ids.add(u)
            ids.add(v)
    if not raw_edges:
        raise ValueError(f"{path}: empty graph")
    original_ids = sorted(ids)
    remap = {orig: dense for dense, orig in enumerate(original_ids)}
    edge_set = set()
    for u, v in raw_edges:
        a, b = remap[u], remap[v]
        edge_set.add((a, b))
        if symmetrize:
            edge_set.add((b, a))
    graph = _build(edge_set, len(original_ids))
    return graph, original_ids


def neighbors(graph: DirectedGraph, v: int, direction: str = "out"):
    """Adjacency list of v as a (stable, sorted) Python list."""
    if not 0 <= v < graph.node_count:
        raise IndexError(f"node {v} out of range [0, {graph.node_count})")
    if direction == "out":
        return graph.out_neighbors(v).tolist()
    if direction == "in":
        return graph.in_neighbors(v).tolist()
    raise ValueError(f"direction must be 'out' or 'in', got {direction!r}")


def write_edge_list(graph: DirectedGraph, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for u, v in graph.edges():
            fh.write(f"{u} {v}\n")


def save_graph_cache(graph: DirectedGraph, path) -> None:
    """Binary cache: magic, u64 n, u64 m, then u64 CSR offset/target arrays
    for out and in adjacency, all little-endian."""
    with open(path, "wb") as fh:
        fh.write(CACHE_MAGIC)
        fh.write(struct.pack("<QQ", graph.node_count, graph.edge_count))
        for arr in (graph.out_indptr, graph.out_indices,
                    graph.in_indptr, graph.in_indices):
            fh.write(arr.astype("<u8").tobytes())


def load_graph_cache(path) -> DirectedGraph:
    with open(path, "rb") as fh:
        magic = fh.read(len(CACHE_MAGIC))
        if magic != CACHE_MAGIC:
            raise ValueError(f"{path}: bad magic {magic!r}, expected {CACHE_MAGIC!r}")
        n, m = struct.unpack("<QQ", fh.read(16))
        def read(count):
            buf = fh.read(8 * count)
            if len(buf) != 8 * count:
                raise ValueError(f"{path}: truncated graph cache")
            return np.frombuffer(buf, dtype="<u8").astype(np.int64)
        out_indptr = read(n + 1)
        out_indices = read(m)
        in_indptr = read(n + 1)
        in_indices = read(m)
    return DirectedGraph(int(n), int(m), out_indptr, out_indices, in_indptr, in_indices)
