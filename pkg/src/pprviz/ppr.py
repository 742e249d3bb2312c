"""PPR-family computations over a DirectedGraph.

Provides the near-exact power-iteration solver (the oracle every estimate is
checked against), the degree-weighted global PageRank used to gate backward
refinement, grouped forward/backward pushes, the combined tau-gated
bidirectional estimator, and the walk-refined variant.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse

from . import _kernels
from .graphio import DirectedGraph
from .hierarchy import SupergraphHierarchy

DPR_MAGIC = b"PVDPR1"


@dataclass(frozen=True)
class PprParams:
    alpha: float = 0.2
    epsilon: float = 1.0 - 1.0 / math.e
    k: int = 25
    delta: float | None = None        # defaults to 1/(10k)
    p_f: float | None = None          # defaults to 1/n
    pi_tolerance: float = 1e-9

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must be in (0,1), got {self.alpha}")
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError(f"epsilon must be in (0,1), got {self.epsilon}")
        if self.k < 2:
            raise ValueError(f"k must be >= 2, got {self.k}")
        if self.delta is not None and self.delta <= 0.0:
            raise ValueError(f"delta must be positive, got {self.delta}")

    def resolved_delta(self) -> float:
        return self.delta if self.delta is not None else 1.0 / (10.0 * self.k)

    def resolved_p_f(self, n: int) -> float:
        return self.p_f if self.p_f is not None else 1.0 / n


def _reverse_transition(graph: DirectedGraph) -> sparse.csr_matrix:
    """Column-stochastic matrix A with A[v,u] = 1/d(u) per edge u->v, so
    power iteration is x <- alpha*e + (1-alpha) * A @ x."""
    cached = getattr(graph, "_reverse_transition", None)
    if cached is not None:
        return cached
    n = graph.node_count
    src = np.repeat(np.arange(n, dtype=np.int64), graph.out_degree)
    dst = graph.out_indices
    vals = 1.0 / graph.out_degree[src]
    mat = sparse.csr_matrix((vals, (dst, src)), shape=(n, n))
    graph._reverse_transition = mat
    return mat


def pi_block(graph: DirectedGraph, params: PprParams,
             start: np.ndarray) -> np.ndarray:
    """Power iteration for one or many start distributions (columns of
    ``start``).  Iterates until the largest entry change drops below
    ``pi_tolerance``."""
    mat = _reverse_transition(graph)
    x = start.copy()
    one_minus = 1.0 - params.alpha
    restart = params.alpha * start
    while True:
        x_next = restart + one_minus * (mat @ x)
        delta = np.abs(x_next - x).max()
        x = x_next
        if delta < params.pi_tolerance:
            return x


def ppr_single_source_pi(graph: DirectedGraph, params: PprParams,
                         source: int) -> np.ndarray:
    """Dense PPR vector from one source node."""
    n = graph.node_count
    if not 0 <= source < n:
        raise IndexError(f"source {source} out of range [0, {n})")
    e = np.zeros(n)
    e[source] = 1.0
    return pi_block(graph, params, e)


def ppr_matrix(graph: DirectedGraph, params: PprParams,
               sources=None, block: int = 128) -> np.ndarray:
    """PPR rows for the given sources (default: all nodes), via blocked PI."""
    n = graph.node_count
    if sources is None:
        sources = np.arange(n)
    sources = np.asarray(sources, dtype=np.int64)
    out = np.empty((len(sources), n))
    for lo in range(0, len(sources), block):
        chunk = sources[lo:lo + block]
        start = np.zeros((n, len(chunk)))
        start[chunk, np.arange(len(chunk))] = 1.0
        out[lo:lo + len(chunk)] = pi_block(graph, params, start).T
    return out


def exact_level_dppr(graph: DirectedGraph, params: PprParams,
                     leaf_set_a, leaf_set_b) -> float:
    """Brute-force degree-weighted proximity between two leaf sets:
    sum over (s in A, t in B) of ppr(s,t)*d(s), averaged over |A|*|B|.
    Computed with per-source power iteration; independent of any push code.
    """
    a = np.asarray(leaf_set_a, dtype=np.int64)
    b = np.asarray(leaf_set_b, dtype=np.int64)
    if a.size == 0 or b.size == 0:
        raise ValueError("leaf sets must be non-empty")
    rows = ppr_matrix(graph, params, sources=a)
    weighted = rows * graph.out_degree[a][:, None]
    return float(weighted[:, b].sum() / (a.size * b.size))


# -- degree-weighted global PageRank ----------------------------------------

@dataclass
class DprIndex:
    tau: np.ndarray          # per leaf node
    tau_star: float          # gating threshold 1/sqrt(k*n)

    def save(self, path) -> None:
        with open(path, "wb") as fh:
            fh.write(DPR_MAGIC)
            fh.write(struct.pack("<Qd", self.tau.shape[0], self.tau_star))
            fh.write(self.tau.astype("<f8").tobytes())

    @classmethod
    def load(cls, path) -> "DprIndex":
        with open(path, "rb") as fh:
            magic = fh.read(len(DPR_MAGIC))
            if magic != DPR_MAGIC:
                raise ValueError(f"{path}: bad magic {magic!r}")
            n, tau_star = struct.unpack("<Qd", fh.read(16))
            tau = np.frombuffer(fh.read(8 * n), dtype="<f8").copy()
        return cls(tau=tau, tau_star=tau_star)


def compute_dpr(graph: DirectedGraph, params: PprParams) -> DprIndex:
    """Global degree-weighted PageRank: one power iteration whose start
    distribution puts mass d(v)/m on every node.  Sums to 1."""
    start = graph.out_degree / graph.edge_count
    tau = pi_block(graph, params, start)
    tau_star = 1.0 / math.sqrt(params.k * graph.node_count)
    return DprIndex(tau=tau, tau_star=tau_star)


# -- scopes ------------------------------------------------------------------

@dataclass
class ScopeView:
    """One visualization scope: the children of a supernode, with the leaf
    bookkeeping the push kernels need."""
    child_ids: list
    slot_of: np.ndarray        # leaf -> child slot, -1 outside the scope
    leaf_sets: list
    leaf_counts: np.ndarray    # float, per child
    mean_out_degree: np.ndarray

    @property
    def size(self) -> int:
        return len(self.child_ids)

    def mean_tau(self, dpr: DprIndex) -> np.ndarray:
        taus = np.empty(self.size)
        for i, leaves in enumerate(self.leaf_sets):
            taus[i] = dpr.tau[leaves].mean()
        return taus

    def max_tau(self, dpr: DprIndex) -> np.ndarray:
        maxs = np.empty(self.size)
        for i, leaves in enumerate(self.leaf_sets):
            maxs[i] = dpr.tau[leaves].max()
        return maxs


def scope_view(graph: DirectedGraph, hierarchy: SupergraphHierarchy,
               scope: int) -> ScopeView:
    if hierarchy.is_leaf(scope):
        raise ValueError(f"scope {scope} is a leaf node")
    child_ids = hierarchy.children(scope)
    return _scope_from_leaf_sets(
        graph, child_ids, [hierarchy.leaf_set(c) for c in child_ids])


def singleton_scope(graph: DirectedGraph) -> ScopeView:
    """Whole-graph scope with every node as its own child (single-level mode)."""
    ids = list(range(graph.node_count))
    return _scope_from_leaf_sets(
        graph, ids, [np.array([i], dtype=np.int64) for i in ids])


def _scope_from_leaf_sets(graph, child_ids, leaf_sets) -> ScopeView:
    slot_of = np.full(graph.node_count, -1, dtype=np.int64)
    counts = np.empty(len(child_ids))
    mean_deg = np.empty(len(child_ids))
    for i, leaves in enumerate(leaf_sets):
        slot_of[leaves] = i
        counts[i] = len(leaves)
        mean_deg[i] = graph.out_degree[leaves].mean()
    return ScopeView(child_ids=list(child_ids), slot_of=slot_of,
                     leaf_sets=list(leaf_sets), leaf_counts=counts,
                     mean_out_degree=mean_deg)


# -- grouped pushes -----------------------------------------------------------

@dataclass
class ResidueState:
    """Estimates and residues after a (possibly truncated) push run.

    ``est_node`` keeps per-node un-aggregated estimate mass so partial-state
    invariants can be checked; ``estimates`` aggregates it per scope child.
    """
    scope: ScopeView
    est_node: np.ndarray
    residues: np.ndarray
    pushes: int
    converted_mass: float
    initial_mass: float
    sweep_sums: np.ndarray
    threshold: float = 0.0
    degree_scaled: bool = True   # forward pushes compare against d(v)*r_max

    @property
    def estimates(self) -> np.ndarray:
        """Per-child estimate: mean of est_node over each child's leaves."""
        mask = self.scope.slot_of >= 0
        sums = np.bincount(self.scope.slot_of[mask],
                           weights=self.est_node[mask],
                           minlength=self.scope.size)
        return sums / self.scope.leaf_counts

    def estimates_by_id(self) -> dict:
        vals = self.estimates
        return {cid: float(vals[i]) for i, cid in enumerate(self.scope.child_ids)}

    def frontier(self, out_degree: np.ndarray) -> np.ndarray:
        """Nodes still violating the active threshold (empty after a full run)."""
        limit = out_degree * self.threshold if self.degree_scaled else self.threshold
        return np.flatnonzero(self.residues > limit)


def _child_slot(scope: ScopeView, child: int) -> int:
    try:
        return scope.child_ids.index(child)
    except ValueError:
        raise ValueError(f"{child} is not a child of this scope") from None


def gfp(graph: DirectedGraph, hierarchy: SupergraphHierarchy, scope: int,
        source: int, r_max: float, alpha: float = 0.2,
        max_pushes: int = -1, record_sweeps: int = 0,
        scope_cache: ScopeView | None = None) -> ResidueState:
    """Grouped forward push from one child of the scope.

    Residues start at d(v)/|F(source)| on the source's leaves and are pushed
    along out-edges until every residue is at most d(v)*r_max.
    """
    if r_max <= 0:
        raise ValueError(f"r_max must be positive, got {r_max}")
    view = scope_cache if scope_cache is not None else scope_view(graph, hierarchy, scope)
    slot = _child_slot(view, source)
    return _run_gfp(graph, view, slot, r_max, alpha, max_pushes, record_sweeps)


def _run_gfp(graph, view, slot, r_max, alpha, max_pushes=-1, record_sweeps=0):
    n = graph.node_count
    deg = graph.out_degree.astype(np.float64)
    res = np.zeros(n)
    leaves = view.leaf_sets[slot]
    res[leaves] = deg[leaves] / len(leaves)
    initial = float(res.sum())
    est = np.zeros(n)
    sweep_sums = np.zeros(record_sweeps)
    pushes, converted, sweeps = _kernels.forward_push(
        graph.out_indptr, graph.out_indices, deg, alpha, r_max, res, est,
        max_pushes, sweep_sums)
    return ResidueState(scope=view, est_node=est, residues=res, pushes=pushes,
                        converted_mass=converted, initial_mass=initial,
                        sweep_sums=sweep_sums[:sweeps], threshold=r_max,
                        degree_scaled=True)


def gbp(graph: DirectedGraph, hierarchy: SupergraphHierarchy, scope: int,
        target: int, r_b_max: float, alpha: float = 0.2,
        max_pushes: int = -1, record_sweeps: int = 0,
        scope_cache: ScopeView | None = None) -> ResidueState:
    """Grouped backward push toward one child of the scope.

    Residues start at 1/|F(target)| on the target's leaves and are pushed
    along in-edges until every residue is at most r_b_max.
    """
    if r_b_max <= 0:
        raise ValueError(f"r_b_max must be positive, got {r_b_max}")
    view = scope_cache if scope_cache is not None else scope_view(graph, hierarchy, scope)
    slot = _child_slot(view, target)
    return _run_gbp(graph, view, slot, r_b_max, alpha, max_pushes, record_sweeps)


def _run_gbp(graph, view, slot, r_b_max, alpha, max_pushes=-1, record_sweeps=0):
    n = graph.node_count
    deg = graph.out_degree.astype(np.float64)
    res = np.zeros(n)
    leaves = view.leaf_sets[slot]
    res[leaves] = 1.0 / len(leaves)
    initial = float(res.sum())
    est = np.zeros(n)
    sweep_sums = np.zeros(record_sweeps)
    pushes, converted, sweeps = _kernels.backward_push(
        graph.in_indptr, graph.in_indices, deg, alpha, r_b_max, res, est,
        max_pushes, sweep_sums)
    return ResidueState(scope=view, est_node=est, residues=res, pushes=pushes,
                        converted_mass=converted, initial_mass=initial,
                        sweep_sums=sweep_sums[:sweeps], threshold=r_b_max,
                        degree_scaled=False)


# -- tau-gated bidirectional estimation ---------------------------------------

@dataclass
class TauPushStats:
    gfp_calls: int = 0
    gbp_calls: int = 0
    gfp_pushes: int = 0
    gbp_pushes: int = 0
    walks: int = 0
    cache_hits: int = 0
    refined_children: list = field(default_factory=list)


@dataclass
class TauPushResult:
    child_ids: list
    matrix: np.ndarray
    stats: TauPushStats


def forward_threshold(params: PprParams, m: int, tau: float) -> float:
    return params.epsilon * params.resolved_delta() / (m * tau)


def backward_threshold(params: PprParams, view: ScopeView, target_slot: int) -> float:
    others = [i for i in range(view.size) if i != target_slot]
    d_max = max(view.mean_out_degree[i] for i in others)
    return params.epsilon * params.resolved_delta() / d_max


def tau_push(graph: DirectedGraph, hierarchy: SupergraphHierarchy,
             dpr: DprIndex, params: PprParams, scope: int,
             gate: str = "mean", gbp_cache=None,
             scope_cache: ScopeView | None = None,
             workers: int = 1) -> TauPushResult:
    """Estimate the pairwise child proximity matrix for one scope.

    Forward pushes run from every child with a threshold tied to the global
    gating value tau = 1/sqrt(k*n); children whose (mean-leaf) global rank
    exceeds tau get their column recomputed by backward pushes, whose
    threshold is tied to the largest sibling mean degree.
    """
    view = scope_cache if scope_cache is not None else scope_view(graph, hierarchy, scope)
    return tau_push_view(graph, dpr, params, view, gate=gate,
                         gbp_cache=gbp_cache, workers=workers)


def _gfp_rows(graph, view, r_max, alpha, stats, workers=1):
    """One forward-push row per child.  The per-source states share nothing
    mutable, so rows may be computed concurrently; assembly order is fixed by
    the child index either way."""
    c = view.size
    matrix = np.zeros((c, c))

    def run(i):
        return _run_gfp(graph, view, i, r_max, alpha)

    if workers > 1 and c > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=workers) as pool:
            states = list(pool.map(run, range(c)))
    else:
        states = [run(i) for i in range(c)]
    for i, state in enumerate(states):
        matrix[i, :] = state.estimates
        stats.gfp_calls += 1
        stats.gfp_pushes += state.pushes
    return matrix


def tau_push_view(graph: DirectedGraph, dpr: DprIndex, params: PprParams,
                  view: ScopeView, gate: str = "mean",
                  gbp_cache=None, workers: int = 1) -> TauPushResult:
    if view.size < 2:
        raise ValueError("scope has fewer than 2 children")
    tau = dpr.tau_star
    r_max = forward_threshold(params, graph.edge_count, tau)
    stats = TauPushStats()
    matrix = _gfp_rows(graph, view, r_max, params.alpha, stats, workers)
    child_tau = view.max_tau(dpr) if gate == "max" else view.mean_tau(dpr)
    for j in range(view.size):
        if child_tau[j] > tau:
            stats.refined_children.append(view.child_ids[j])
            matrix[:, j] = _refined_column(graph, view, j, params, stats, gbp_cache)
            stats.gbp_calls += 1
    return TauPushResult(child_ids=list(view.child_ids), matrix=matrix, stats=stats)


def _refined_column(graph, view, j, params, stats, gbp_cache):
    r_b_max = backward_threshold(params, view, j)
    cached = None
    if gbp_cache is not None and len(view.leaf_sets[j]) == 1:
        cached = gbp_cache.lookup(int(view.leaf_sets[j][0]),
                                  r_b_required=r_b_max, n=graph.node_count)
    if cached is not None:
        stats.cache_hits += 1
        est_node = cached
    else:
        state = _run_gbp(graph, view, j, r_b_max, params.alpha)
        stats.gbp_pushes += state.pushes
        est_node = state.est_node
    mask = view.slot_of >= 0
    sums = np.bincount(view.slot_of[mask], weights=est_node[mask],
                       minlength=view.size)
    return sums / view.leaf_counts


def gfp_only(graph: DirectedGraph, hierarchy: SupergraphHierarchy,
             dpr: DprIndex, params: PprParams, scope: int,
             scope_cache: ScopeView | None = None,
             workers: int = 1) -> TauPushResult:
    """Ablation: no backward refinement; the forward threshold is tightened
    to the largest child gating value so every column is already accurate."""
    view = scope_cache if scope_cache is not None else scope_view(graph, hierarchy, scope)
    if view.size < 2:
        raise ValueError(f"scope {scope} has fewer than 2 children")
    child_tau = view.mean_tau(dpr)
    tau_eff = float(child_tau.max())
    r_max = forward_threshold(params, graph.edge_count, tau_eff)
    stats = TauPushStats()
    matrix = _gfp_rows(graph, view, r_max, params.alpha, stats, workers)
    return TauPushResult(child_ids=list(view.child_ids), matrix=matrix, stats=stats)


def gfra(graph: DirectedGraph, hierarchy: SupergraphHierarchy,
         params: PprParams, scope: int, seed: int,
         scope_cache: ScopeView | None = None) -> TauPushResult:
    """Forward pushes plus residue-weighted restart walks.

    The walk budget per source is r_sum * W / gamma with gamma the smallest
    child leaf count; each landing inside the scope adds
    r_sum/(walks*|F(child)|) to that child's estimate.  Unbiased, and the
    accuracy target holds per pair with probability >= 1 - p_f.
    """
    view = scope_cache if scope_cache is not None else scope_view(graph, hierarchy, scope)
    if view.size < 2:
        raise ValueError(f"scope {scope} has fewer than 2 children")
    n = graph.node_count
    eps = params.epsilon
    delta = params.resolved_delta()
    p_f = params.resolved_p_f(n)
    walk_budget = (2.0 + 2.0 * eps / 3.0) * math.log(1.0 / p_f) / (eps * eps * delta)
    gamma = float(view.leaf_counts.min())
    mean_deg_sum = float(view.mean_out_degree.sum())
    r_max = math.sqrt(gamma * mean_deg_sum / (graph.edge_count * walk_budget))
    stats = TauPushStats()
    c = view.size
    matrix = np.zeros((c, c))
    for i in range(c):
        state = _run_gfp(graph, view, i, r_max, params.alpha)
        matrix[i, :] = state.estimates
        stats.gfp_calls += 1
        stats.gfp_pushes += state.pushes
        r_sum = float(state.residues.sum())
        if r_sum <= 0.0:
            continue
        num_walks = int(math.ceil(r_sum * walk_budget / gamma))
        start_nodes = np.flatnonzero(state.residues > 0.0)
        weights = state.residues[start_nodes]
        start_cum = np.cumsum(weights) / r_sum
        start_cum[-1] = 1.0
        counts = _kernels.residue_walks(
            graph.out_indptr, graph.out_indices, view.slot_of, c,
            start_nodes, start_cum, params.alpha, num_walks,
            np.uint64((seed ^ (i * 0x9E3779B9)) & 0xFFFFFFFFFFFFFFFF))
        stats.walks += num_walks
        matrix[i, :] += counts * (r_sum / num_walks) / view.leaf_counts
    return TauPushResult(child_ids=list(view.child_ids), matrix=matrix, stats=stats)


def pi_oracle_matrix(graph: DirectedGraph, params: PprParams,
                     view: ScopeView) -> TauPushResult:
    """Near-exact child proximity matrix from per-source power iterations
    over every leaf of the scope (the slow reference engine)."""
    c = view.size
    matrix = np.zeros((c, c))
    leaves_all = np.concatenate(view.leaf_sets)
    rows = ppr_matrix(graph, params, sources=leaves_all)
    weights = graph.out_degree[leaves_all].astype(np.float64)
    slot_src = view.slot_of[leaves_all]
    mask = view.slot_of >= 0
    cols = np.zeros((len(leaves_all), c))
    inside = np.flatnonzero(mask)
    slot_dst = view.slot_of[inside]
    for r in range(len(leaves_all)):
        cols[r] = np.bincount(slot_dst, weights=rows[r, inside], minlength=c)
    weighted = cols * weights[:, None]
    for i in range(c):
        rows_i = weighted[slot_src == i]
        matrix[i, :] = rows_i.sum(axis=0) / (view.leaf_counts[i] * view.leaf_counts)
    return TauPushResult(child_ids=list(view.child_ids), matrix=matrix,
                         stats=TauPushStats())


def meets_accuracy(estimate: float, exact: float, epsilon: float,
                   delta: float, slack: float = 1e-9) -> bool:
    """Two-regime accuracy test: absolute below the threshold, relative above."""
    err = abs(estimate - exact)
    if exact < delta:
        return err <= epsilon * delta + slack
    return err <= epsilon * exact + slack
