import math

import numpy as np
import pytest

from pprviz.metrics import (ULCV_ALPHA_LIMIT, MetricReport,
                            check_aesthetic_bounds, nd_upper_bound,
                            node_distribution, ulcv, ulcv_upper_bound)
from pprviz.pdist import PDistMatrix


def test_nd_two_points():
    assert node_distribution([[0, 0], [1, 0]]) == pytest.approx(1.0)


def test_nd_unit_equilateral():
    coords = [[0, 0], [1, 0], [0.5, math.sqrt(3) / 2]]
    assert node_distribution(coords) == pytest.approx(3.0)


def test_nd_coincident_is_infinite():
    assert math.isinf(node_distribution([[0, 0], [0, 0], [1, 1]]))


def test_nd_needs_two_points():
    with pytest.raises(ValueError):
        node_distribution([[0, 0]])


def test_ulcv_equal_lengths_zero():
    coords = [[0, 0], [1, 0], [2, 0]]
    assert ulcv(coords, [(0, 1), (1, 2)]) == pytest.approx(0.0)


def test_ulcv_population_std():
    coords = [[0, 0], [1, 0], [4, 0]]
    # lengths 1 and 3: mean 2, population std 1
    assert ulcv(coords, [(0, 1), (1, 2)]) == pytest.approx(0.5)


def test_ulcv_single_edge_zero():
    assert ulcv([[0, 0], [2, 0]], [(0, 1)]) == pytest.approx(0.0)


def test_ulcv_undefined_cases():
    assert ulcv([[0, 0], [1, 0]], []) is None
    assert ulcv([[0, 0], [0, 0]], [(0, 1)]) is None


def test_metric_invariances():
    rng = np.random.default_rng(4)
    coords = rng.uniform(-2, 2, size=(7, 2))
    edges = [(0, 1), (2, 3), (4, 5), (5, 6)]
    nd0 = node_distribution(coords)
    u0 = ulcv(coords, edges)
    theta = 0.7
    rot = np.array([[math.cos(theta), -math.sin(theta)],
                    [math.sin(theta), math.cos(theta)]])
    moved = coords @ rot.T + np.array([3.0, -1.0])
    assert node_distribution(moved) == pytest.approx(nd0, rel=1e-9)
    assert ulcv(moved, edges) == pytest.approx(u0, rel=1e-9)
    scaled = coords * 2.0
    assert node_distribution(scaled) == pytest.approx(nd0 / 4.0, rel=1e-9)
    assert ulcv(scaled, edges) == pytest.approx(u0, rel=1e-9)


def test_nd_bound_example():
    assert nd_upper_bound(10, 20) == pytest.approx(0.215 * math.e * 20 + 1.75)
    assert nd_upper_bound(10, 20) == pytest.approx(13.4386, abs=1e-3)


def test_ulcv_bound_alpha_limit():
    assert ULCV_ALPHA_LIMIT == pytest.approx(0.2432, abs=1e-3)
    assert ulcv_upper_bound(0.25) is None
    bound = ulcv_upper_bound(0.2)
    assert bound == pytest.approx((math.log(1 / 0.32) - 1) / 4)


def test_check_bounds_report(tmp_path):
    vals = np.array([[0.0, 2.0, 3.0], [2.0, 0.0, 2.5], [3.0, 2.5, 0.0]])
    delta = PDistMatrix(values=vals, n_context=10)
    report = check_aesthetic_bounds(delta, n=10, m=20, alpha=0.2,
                                    edges=[(0, 1), (1, 2)])
    assert report.nd == pytest.approx(1 / 4 + 1 / 9 + 1 / 6.25)
    assert report.nd_within is True
    lengths = np.array([2.0, 2.5])
    assert report.ulcv == pytest.approx(lengths.std() / lengths.mean())
    assert report.ulcv_bound is not None
    assert report.ulcv_within is not None


def test_check_bounds_alpha_above_limit():
    vals = np.array([[0.0, 2.0], [2.0, 0.0]])
    delta = PDistMatrix(values=vals, n_context=10)
    report = check_aesthetic_bounds(delta, n=10, m=4, alpha=0.25,
                                    edges=[(0, 1)])
    assert report.ulcv_bound is None
    assert report.ulcv_within is None


def test_report_json_encoding():
    report = MetricReport(nd=math.inf, ulcv=None, nd_bound=5.0,
                          ulcv_bound=None, nd_within=False, ulcv_within=None)
    doc = report.to_json()
    assert doc["nd"] == "inf"
    assert doc["ulcv"] is None
    assert doc["within_bounds"] == {"nd": False, "ulcv": None}
