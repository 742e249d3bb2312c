"""Aesthetic layout metrics and their analytic upper bounds.

Two readability scores: the sum of inverse squared pairwise distances
(crowding; infinite when nodes overlap) and the coefficient of variation of
edge lengths (distortion).  When distances come straight from the clamped
log-scale matrix, both admit closed-form upper bounds that depend only on the
graph size and the restart probability.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .pdist import PDistMatrix

# largest restart probability for which the edge-length bound applies
ULCV_ALPHA_LIMIT = 0.5 - math.sqrt(0.25 - 1.0 / (2.0 * math.e))


@dataclass
class MetricReport:
    nd: float | None            # None when fewer than 2 points
    ulcv: float | None          # None when undefined (no edges / zero mean)
    nd_bound: float
    ulcv_bound: float | None    # None when alpha is above the limit
    nd_within: bool | None
    ulcv_within: bool | None

    def to_json(self) -> dict:
        def enc(x):
            if x is None:
                return None
            if math.isinf(x):
                return "inf"
            return x
        return {
            "nd": enc(self.nd),
            "ulcv": enc(self.ulcv),
            "nd_bound": enc(self.nd_bound),
            "ulcv_bound": enc(self.ulcv_bound),
            "within_bounds": {"nd": self.nd_within, "ulcv": self.ulcv_within},
        }


def node_distribution(coords) -> float:
    """Sum of 1/dist^2 over all point pairs; +inf if any pair coincides."""
    coords = np.asarray(coords, dtype=np.float64)
    if coords.shape[0] < 2:
        raise ValueError("node distribution needs at least 2 points")
    diff = coords[:, None, :] - coords[None, :, :]
    sq = (diff ** 2).sum(axis=2)
    iu = np.triu_indices(coords.shape[0], k=1)
    vals = sq[iu]
    if np.any(vals == 0.0):
        return math.inf
    return float((1.0 / vals).sum())


def ulcv(coords, edges) -> float | None:
    """Population std of edge lengths over their mean; None if undefined."""
    coords = np.asarray(coords, dtype=np.float64)
    edges = [(int(a), int(b)) for a, b in edges]
    if not edges:
        return None
    lengths = np.array([np.linalg.norm(coords[a] - coords[b]) for a, b in edges])
    mean = lengths.mean()
    if mean == 0.0:
        return None
    return float(lengths.std() / mean)


def nd_upper_bound(n: int, m: int) -> float:
    return 0.215 * math.e * m + 0.0175 * n * n


def ulcv_upper_bound(alpha: float) -> float | None:
    if alpha > ULCV_ALPHA_LIMIT:
        return None
    return (math.log(1.0 / (2.0 * alpha * (1.0 - alpha))) - 1.0) / 4.0


def check_aesthetic_bounds(delta: PDistMatrix, n: int, m: int, alpha: float,
                           edges=None) -> MetricReport:
    """Score the distance matrix itself against the analytic bounds.

    Distances are taken to be the matrix entries (the bounds' hypothesis);
    the edge-length score uses matrix entries of the given graph edges.
    Self-loops and duplicate undirected pairs are ignored.
    """
    c = delta.size
    nd_val = None
    if c >= 2:
        iu = np.triu_indices(c, k=1)
        vals = delta.values[iu]
        nd_val = math.inf if np.any(vals == 0.0) else float((1.0 / vals ** 2).sum())
    ndb = nd_upper_bound(n, m)
    ulb = ulcv_upper_bound(alpha)
    ulcv_val = None
    if edges:
        pairs = {(min(a, b), max(a, b)) for a, b in edges if a != b}
        if pairs:
            lengths = np.array([delta.values[a, b] for a, b in sorted(pairs)])
            mean = lengths.mean()
            if mean > 0:
                ulcv_val = float(lengths.std() / mean)
    nd_within = None if nd_val is None else bool(nd_val <= ndb)
    ulcv_within = None
    if ulb is not None and ulcv_val is not None:
        ulcv_within = bool(ulcv_val <= ulb)
    return MetricReport(nd=nd_val, ulcv=ulcv_val, nd_bound=ndb,
                        ulcv_bound=ulb, nd_within=nd_within,
                        ulcv_within=ulcv_within)


def layout_metric_report(coords, edges, n: int, m: int, alpha: float) -> MetricReport:
    """Score an embedded layout (after normalization) and attach the bounds
    for reference; bound checks are meaningful for raw distance matrices, so
    here they compare the layout's own scores."""
    coords = np.asarray(coords, dtype=np.float64)
    nd_val = node_distribution(coords) if coords.shape[0] >= 2 else None
    ulcv_val = ulcv(coords, edges) if edges else None
    ndb = nd_upper_bound(n, m)
    ulb = ulcv_upper_bound(alpha)
    nd_within = None if nd_val is None else bool(nd_val <= ndb)
    ulcv_within = None
    if ulb is not None and ulcv_val is not None:
        ulcv_within = bool(ulcv_val <= ulb)
    return MetricReport(nd=nd_val, ulcv=ulcv_val, nd_bound=ndb,
                        ulcv_bound=ulb, nd_within=nd_within,
                        ulcv_within=ulcv_within)


def report_to_json_str(report: MetricReport) -> str:
    return json.dumps(report.to_json(), separators=(",", ":"))
