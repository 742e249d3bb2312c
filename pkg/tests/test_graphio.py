import numpy as np
import pytest

from pprviz.graphio import (load_edge_list, load_graph_cache, neighbors,
                            save_graph_cache, write_edge_list)

from conftest import CORPUS, write_edges


def test_two_node_cycle(tmp_path):
    p = tmp_path / "g.el"
    p.write_text("0 1\n1 0\n")
    g, ids = load_edge_list(p)
    assert g.node_count == 2
    assert g.edge_count == 2
    assert g.out_degree.tolist() == [1, 1]
    assert ids == [0, 1]


def test_dangling_node_gets_self_loop(tmp_path):
    p = tmp_path / "g.el"
    p.write_text("0 1\n")
    g, _ = load_edge_list(p, symmetrize=False)
    assert g.edge_count == 2
    assert g.out_degree[1] == 1
    assert neighbors(g, 1, "out") == [1]


def test_duplicates_collapsed_and_comments(tmp_path):
    p = tmp_path / "g.el"
    p.write_text("0 1\n0 1\n# comment\n")
    g, _ = load_edge_list(p)
    assert g.edge_count == 2  # one real edge + dangling self-loop on 1


def test_malformed_line_reports_lineno(tmp_path):
    p = tmp_path / "g.el"
    p.write_text("0 1\n0 one two\n")
    with pytest.raises(ValueError, match=":2"):
        load_edge_list(p)
    p.write_text("0 x\n")
    with pytest.raises(ValueError, match=":1"):
        load_edge_list(p)


def test_empty_file_rejected(tmp_path):
    p = tmp_path / "g.el"
    p.write_text("# nothing here\n")
    with pytest.raises(ValueError, match="empty graph"):
        load_edge_list(p)


def test_crlf_and_whitespace(tmp_path):
    p = tmp_path / "g.el"
    p.write_bytes(b"0 1\r\n1\t0\r\n")
    g, _ = load_edge_list(p)
    assert g.edge_count == 2


def test_symmetrize_mirrors_edges(tmp_path):
    p = tmp_path / "g.el"
    p.write_text("0 1\n")
    g, _ = load_edge_list(p, symmetrize=True)
    assert g.edge_count == 2
    assert neighbors(g, 1, "out") == [0]
    assert neighbors(g, 1, "in") == [0]


def test_remap_is_dense_and_sorted(tmp_path):
    p = tmp_path / "g.el"
    p.write_text("5 9\n9 100\n")
    g, ids = load_edge_list(p)
    assert ids == [5, 9, 100]
    assert g.node_count == 3


def test_neighbors_examples(tmp_path):
    p = tmp_path / "g.el"
    p.write_text("0 1\n1 0\n")
    g, _ = load_edge_list(p)
    assert neighbors(g, 0, "out") == [1]
    assert neighbors(g, 1, "in") == [0]
    with pytest.raises(IndexError):
        neighbors(g, 2, "out")
    with pytest.raises(ValueError):
        neighbors(g, 0, "sideways")


def test_self_loop_only_node(tmp_path):
    p = tmp_path / "g.el"
    p.write_text("0 0\n1 0\n")
    g, _ = load_edge_list(p, symmetrize=False)
    assert neighbors(g, 0, "out") == [0]


def test_round_trip_identical(tmp_path):
    for name, gen in list(CORPUS.items())[:4]:
        p = tmp_path / f"{name}.el"
        write_edges(p, gen())
        g1, _ = load_edge_list(p, symmetrize=True)
        q = tmp_path / f"{name}.out.el"
        write_edge_list(g1, q)
        g2, _ = load_edge_list(q, symmetrize=False)
        assert g1 == g2


def test_adjacency_consistency(corpus):
    for g in corpus.values():
        assert int(g.out_degree.sum()) == g.edge_count
        assert g.out_degree.min() >= 1
        for v in range(min(g.node_count, 40)):
            assert len(neighbors(g, v, "out")) == g.out_degree[v]
            for u in neighbors(g, v, "out"):
                assert v in neighbors(g, u, "in")


def test_binary_cache_round_trip(tmp_path, corpus):
    g = corpus["cycle16"]
    path = tmp_path / "g.bin"
    save_graph_cache(g, path)
    g2 = load_graph_cache(path)
    assert g == g2
    assert np.array_equal(g.out_degree, g2.out_degree)


def test_binary_cache_bad_magic(tmp_path):
    path = tmp_path / "g.bin"
    path.write_bytes(b"NOPE!" + b"\x00" * 64)
    with pytest.raises(ValueError, match="magic"):
        load_graph_cache(path)
