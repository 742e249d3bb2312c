import math

import numpy as np
import pytest

from pprviz.pdist import (PDistMatrix, accuracy_params_for_pdist,
                          build_pdist_matrix, dppr_to_pdist)


def test_lower_boundary():
    assert dppr_to_pdist(math.exp(-1), 10) == pytest.approx(2.0)


def test_lower_clamp():
    assert dppr_to_pdist(1.0, 10) == pytest.approx(2.0)


def test_upper_clamp():
    assert dppr_to_pdist(math.exp(-5), 10) == pytest.approx(2 * math.log(10))


def test_zero_maps_to_upper_clamp():
    assert dppr_to_pdist(0.0, 100) == pytest.approx(2 * math.log(100))


def test_negative_rejected():
    with pytest.raises(ValueError):
        dppr_to_pdist(-1e-9, 10)


def test_degenerate_small_n_clamp():
    # for n=2 the upper clamp (2 ln 2) sits below the lower clamp and wins
    assert dppr_to_pdist(0.8888888888888888, 2) == pytest.approx(2 * math.log(2))


def test_monotone_non_increasing():
    zs = np.logspace(-8, 2, 200)
    vals = [dppr_to_pdist(z, 50) for z in zs]
    assert all(vals[i + 1] <= vals[i] + 1e-12 for i in range(len(vals) - 1))


def test_build_matrix_symmetrizes():
    dppr = np.array([[0.0, 0.5], [0.6, 0.0]])
    delta = build_pdist_matrix(dppr, 100)
    raw = 1 - math.log(1.1)
    assert raw < 2
    assert delta.values[0, 1] == pytest.approx(2.0)
    assert delta.values[1, 0] == pytest.approx(2.0)
    assert delta.values[0, 0] == 0.0


def test_build_matrix_all_zero():
    delta = build_pdist_matrix(np.zeros((3, 3)), 100)
    off = delta.values[~np.eye(3, dtype=bool)]
    assert np.allclose(off, 2 * math.log(100))


def test_build_matrix_asymmetric_input_symmetric_output():
    rng = np.random.default_rng(0)
    dppr = rng.random((5, 5)) * 0.1
    delta = build_pdist_matrix(dppr, 64)
    assert np.array_equal(delta.values, delta.values.T)
    assert np.all(np.diag(delta.values) == 0.0)


def test_build_matrix_rejects_non_square():
    with pytest.raises(ValueError):
        build_pdist_matrix(np.zeros((2, 3)), 10)


def test_range_invariant():
    rng = np.random.default_rng(1)
    for n in (10, 100, 1000):
        dppr = rng.random((6, 6))
        delta = build_pdist_matrix(dppr, n)
        off = delta.values[~np.eye(6, dtype=bool)]
        assert (off >= 2.0 - 1e-12).all()
        assert (off <= 2 * math.log(n) + 1e-12).all()


def test_accuracy_params_examples():
    eps, delta = accuracy_params_for_pdist(0.5, 1.0)
    assert delta == pytest.approx(0.5)
    assert eps == pytest.approx(1 - math.exp(-1))
    eps, delta = accuracy_params_for_pdist(1.0, 3.0)
    assert delta == pytest.approx(math.exp(-2) / 2)
    assert eps == pytest.approx(1 - math.exp(-2))


def test_accuracy_params_vanishing_theta():
    eps, _ = accuracy_params_for_pdist(1e-12, 2.0)
    assert eps == pytest.approx(0.0, abs=1e-10)


def test_csv_round_trip(tmp_path):
    delta = build_pdist_matrix(np.full((3, 3), 0.01), 20)
    path = tmp_path / "delta.csv"
    delta.to_csv(path)
    back = np.loadtxt(path, delimiter=",")
    assert np.array_equal(back, delta.values)


def test_upper_clamp_attr():
    delta = PDistMatrix(values=np.zeros((2, 2)), n_context=50)
    assert delta.upper_clamp() == pytest.approx(2 * math.log(50))
