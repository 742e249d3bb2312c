"""Clamped log-scale node distances from degree-weighted proximity values."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass
class PDistMatrix:
    values: np.ndarray    # symmetric, zero diagonal
    n_context: int        # node count of the underlying graph (sets the clamp)

    @property
    def size(self) -> int:
        return self.values.shape[0]

    def upper_clamp(self) -> float:
        return 2.0 * math.log(self.n_context)

    def to_csv(self, path) -> None:
        np.savetxt(path, self.values, delimiter=",", fmt="%.17g")


def dppr_to_pdist(z: float, n: int) -> float:
    """Distance for a symmetrized proximity value z: min(max(1 - ln z, 2), 2 ln n).

    z = 0 (unreachable pair) maps to the upper clamp.  The log is natural;
    for n below e^1 the upper clamp degenerates below the lower one, and the
    outer min is applied last, exactly as written.
    """
    if z < 0:
        raise ValueError(f"proximity must be non-negative, got {z}")
    upper = 2.0 * math.log(n)
    if z == 0.0:
        return upper
    return min(max(1.0 - math.log(z), 2.0), upper)


def build_pdist_matrix(dppr: np.ndarray, n: int) -> PDistMatrix:
    """Symmetrize a pairwise proximity matrix into clamped distances."""
    dppr = np.asarray(dppr, dtype=np.float64)
    if dppr.ndim != 2 or dppr.shape[0] != dppr.shape[1]:
        raise ValueError(f"proximity matrix must be square, got {dppr.shape}")
    c = dppr.shape[0]
    values = np.zeros((c, c))
    for i in range(c):
        for j in range(i + 1, c):
            d = dppr_to_pdist(max(dppr[i, j] + dppr[j, i], 0.0), n)
            values[i, j] = d
            values[j, i] = d
    return PDistMatrix(values=values, n_context=n)


def accuracy_params_for_pdist(theta: float, sigma: float):
    """Proximity-level accuracy targets (epsilon, delta) that make distance
    errors bounded by theta (relatively below sigma, absolutely above)."""
    delta = math.exp(1.0 - sigma) / 2.0
    epsilon = 1.0 - math.exp(-2.0 * theta)
    return epsilon, delta


def distance_error_within(exact: float, estimate: float, theta: float,
                          sigma: float, slack: float = 1e-9) -> bool:
    """Check the two-regime distance accuracy contract."""
    err = abs(exact - estimate)
    if exact < sigma:
        return err <= theta * exact + slack
    return err <= theta * sigma + slack
