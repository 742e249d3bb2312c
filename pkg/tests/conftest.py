import numpy as np
import pytest

from pprviz.graphio import DirectedGraph, load_edge_list
from pprviz.ppr import PprParams, ppr_matrix


def write_edges(path, edges):
    with open(path, "w", encoding="utf-8") as fh:
        for u, v in edges:
            fh.write(f"{u} {v}\n")


def make_graph(tmp_path, edges, symmetrize=True, name="g.el"):
    p = tmp_path / name
    write_edges(p, edges)
    graph, ids = load_edge_list(p, symmetrize=symmetrize)
    return graph


# -- corpus ---------------------------------------------------------------

def path_edges(n):
    return [(i, i + 1) for i in range(n - 1)]


def cycle_edges(n):
    return [(i, (i + 1) % n) for i in range(n)]


def clique_edges(n):
    return [(i, j) for i in range(n) for j in range(i + 1, n)]


def star_edges(n):
    return [(0, i) for i in range(1, n)]


def two_triangles_edges(bridge=False):
    edges = [(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3)]
    if bridge:
        edges.append((2, 3))
    return edges


def sbm2_edges(n, seed, p_in=0.35, p_out=0.03):
    rng = np.random.default_rng(seed)
    half = n // 2
    edges = []
    for i in range(n):
        for j in range(i + 1, n):
            same = (i < half) == (j < half)
            if rng.random() < (p_in if same else p_out):
                edges.append((i, j))
    # keep it connected enough for a single community structure test
    for i in range(n - 1):
        if rng.random() < 0.02:
            edges.append((i, i + 1))
    return edges


def powerlaw_edges(n, seed, attach=3):
    import networkx as nx
    g = nx.barabasi_albert_graph(n, attach, seed=seed)
    return list(g.edges())


CORPUS = {
    "path10": lambda: path_edges(10),
    "path47": lambda: path_edges(47),
    "cycle16": lambda: cycle_edges(16),
    "cycle100": lambda: cycle_edges(100),
    "clique12": lambda: clique_edges(12),
    "clique30": lambda: clique_edges(30),
    "star20": lambda: star_edges(20),
    "star64": lambda: star_edges(64),
    "sbm60": lambda: sbm2_edges(60, seed=123),
    "sbm200": lambda: sbm2_edges(200, seed=456),
    "plaw100": lambda: powerlaw_edges(100, seed=789),
    "plaw500": lambda: powerlaw_edges(500, seed=321),
}

SMALL_CORPUS = ["path10", "cycle16", "clique12", "star20", "path47"]


@pytest.fixture(scope="session")
def corpus(tmp_path_factory):
    graphs = {}
    base = tmp_path_factory.mktemp("corpus")
    for name, gen in CORPUS.items():
        p = base / f"{name}.el"
        write_edges(p, gen())
        graph, _ = load_edge_list(p, symmetrize=True)
        graphs[name] = graph
    return graphs


@pytest.fixture(scope="session")
def oracle_cache():
    """Session cache of full PPR matrices keyed by (graph, alpha, tolerance)."""
    cache = {}

    def get(graph: DirectedGraph, params: PprParams) -> np.ndarray:
        key = (id(graph), params.alpha, params.pi_tolerance)
        if key not in cache:
            cache[key] = ppr_matrix(graph, params)
        return cache[key]

    return get


def oracle_level_matrix(graph, pi_full, leaf_sets):
    """All-pairs exact child proximity from a full PPR matrix: the mean of
    ppr(s,t)*d(s) over the leaf-set product, vectorized."""
    dppr = pi_full * graph.out_degree[:, None]
    c = len(leaf_sets)
    out = np.zeros((c, c))
    col_sums = np.stack([dppr[:, leaves].sum(axis=1) for leaves in leaf_sets],
                        axis=1)  # n x c
    for i, leaves in enumerate(leaf_sets):
        out[i, :] = col_sums[leaves].sum(axis=0)
        out[i, :] /= len(leaves) * np.array([len(ls) for ls in leaf_sets])
    return out
