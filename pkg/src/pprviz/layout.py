"""2-D embedding of a distance matrix by stress majorization.

Each iteration solves a weighted-Laplacian linear system whose solution
provably never increases the normalized stress.  Node 0 is anchored to pin
down the translation degeneracy; the reduced (c-1)-sized system is solved by
dense Cholesky, cheap for the small matrices a visualization scope produces.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .pdist import PDistMatrix


@dataclass
class Layout:
    coords: np.ndarray
    stress: float
    iterations: int
    loss_history: list = field(default_factory=list)


def loss(delta: PDistMatrix, coords: np.ndarray) -> float:
    """Normalized stress: sum over pairs of (1 - dist/target)^2.
    Coincident points are legal and contribute 1 per pair."""
    coords = np.asarray(coords, dtype=np.float64)
    c = delta.size
    if coords.shape != (c, 2):
        raise ValueError(f"coords shape {coords.shape} does not match {c} targets")
    total = 0.0
    for i in range(c):
        for j in range(i + 1, c):
            d = np.linalg.norm(coords[i] - coords[j])
            total += (1.0 - d / delta.values[i, j]) ** 2
    return total


def _pair_distances(coords: np.ndarray) -> np.ndarray:
    diff = coords[:, None, :] - coords[None, :, :]
    return np.sqrt((diff ** 2).sum(axis=2))


def _loss_from_dist(delta: np.ndarray, dist: np.ndarray) -> float:
    c = delta.shape[0]
    iu = np.triu_indices(c, k=1)
    return float(((1.0 - dist[iu] / delta[iu]) ** 2).sum())


def stress_majorization(delta: PDistMatrix, max_iters: int = 200,
                        rel_tol: float = 1e-7, seed: int = 42) -> Layout:
    """Embed a distance matrix into the plane.

    Starts from a seeded uniform layout in a square whose side matches the
    distance upper clamp, then iterates weighted-Laplacian solves until the
    relative loss improvement drops below ``rel_tol``.
    """
    c = delta.size
    if c == 0:
        raise ValueError("cannot lay out an empty distance matrix")
    if c == 1:
        return Layout(coords=np.zeros((1, 2)), stress=0.0, iterations=0,
                      loss_history=[0.0])
    rng = np.random.default_rng(seed)
    half = math.log(max(delta.n_context, 2))
    coords = rng.uniform(-half, half, size=(c, 2))
    # coincident start points would zero out majorization weights
    for i in range(c):
        for j in range(i + 1, c):
            if np.all(coords[i] == coords[j]):
                coords[j] = coords[j] + 1e-9 * (j + 1)

    dvals = delta.values
    lw = weighted_laplacian(dvals)
    chol = cho_factor(lw[1:, 1:])

    dist = _pair_distances(coords)
    history = [_loss_from_dist(dvals, dist)]
    iterations = 0
    for _ in range(max_iters):
        coords = majorization_step(dvals, lw, chol, coords, dist)
        dist = _pair_distances(coords)
        iterations += 1
        history.append(_loss_from_dist(dvals, dist))
        prev, cur = history[-2], history[-1]
        if prev <= 0 or (prev - cur) / prev < rel_tol:
            break
    return Layout(coords=coords, stress=history[-1], iterations=iterations,
                  loss_history=history)


def weighted_laplacian(dvals: np.ndarray) -> np.ndarray:
    """Laplacian with off-diagonal -1/delta^2 and row sums zero."""
    c = dvals.shape[0]
    off = ~np.eye(c, dtype=bool)
    weights = np.zeros((c, c))
    weights[off] = 1.0 / dvals[off] ** 2
    lw = -weights
    np.fill_diagonal(lw, weights.sum(axis=1))
    return lw


def majorizer_matrix(dvals: np.ndarray, dist: np.ndarray) -> np.ndarray:
    """Iteration matrix from the previous positions; entries are exactly zero
    where points coincide."""
    c = dvals.shape[0]
    off = ~np.eye(c, dtype=bool)
    ly = np.zeros((c, c))
    nz = off & (dist > 0)
    ly[nz] = -1.0 / (dvals[nz] * dist[nz])
    np.fill_diagonal(ly, -ly.sum(axis=1))
    return ly


def majorization_step(dvals, lw, chol, coords, dist=None) -> np.ndarray:
    """One anchored solve: node 0 keeps its position, the rest minimize the
    majorizing bound.  The result solves the full singular system exactly."""
    if dist is None:
        dist = _pair_distances(coords)
    ly = majorizer_matrix(dvals, dist)
    rhs = ly @ coords
    new_coords = np.empty_like(coords)
    new_coords[0] = coords[0]
    new_coords[1:] = cho_solve(chol, rhs[1:] - np.outer(lw[1:, 0], coords[0]))
    return new_coords


def normalize_layout(coords: np.ndarray) -> np.ndarray:
    """Translate the centroid to the origin and scale so the largest absolute
    coordinate is 1.  Single points and fully coincident layouts just center."""
    coords = np.asarray(coords, dtype=np.float64)
    if coords.ndim != 2 or coords.shape[1] != 2 or coords.shape[0] < 1:
        raise ValueError(f"expected (c, 2) coordinates, got {coords.shape}")
    centered = coords - coords.mean(axis=0)
    scale = np.abs(centered).max()
    if scale > 0:
        centered = centered / scale
    return centered


def layout_to_json(ids, coords) -> dict:
    return {"ids": [int(i) for i in ids],
            "xy": [[float(x), float(y)] for x, y in np.asarray(coords)]}


def layout_from_json(doc: dict):
    return doc["ids"], np.asarray(doc["xy"], dtype=np.float64)


def save_layout_json(ids, coords, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(layout_to_json(ids, coords), fh)


def layout_to_svg(ids, coords, edges, leaf_counts=None, labels=None,
                  size: int = 640) -> str:
    """Render circles plus straight edges; arrowheads only on directed pairs
    whose reverse edge is absent.  Coordinates are expected normalized."""
    coords = np.asarray(coords, dtype=np.float64)
    pad = 0.15
    span = 2.0 + 2 * pad

    def sx(x):
        return (x + 1.0 + pad) / span * size

    def sy(y):
        return (y + 1.0 + pad) / span * size

    idx = {int(v): i for i, v in enumerate(ids)}
    if leaf_counts is None:
        leaf_counts = [1] * len(ids)
    radii = np.sqrt(np.asarray(leaf_counts, dtype=np.float64))
    radii = radii / radii.max() * 0.05 * size if len(radii) else radii
    edge_set = {(int(a), int(b)) for a, b in edges}
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'viewBox="0 0 {size} {size}">',
        '<defs><marker id="arrow" markerWidth="8" markerHeight="8" refX="7" '
        'refY="3" orient="auto"><path d="M0,0 L7,3 L0,6 z" fill="#555"/>'
        "</marker></defs>",
    ]
    drawn = set()
    for a, b in sorted(edge_set):
        if (a, b) in drawn:
            continue
        symmetric = (b, a) in edge_set
        drawn.add((a, b))
        if symmetric:
            drawn.add((b, a))
        i, j = idx[a], idx[b]
        x1, y1 = sx(coords[i, 0]), sy(coords[i, 1])
        x2, y2 = sx(coords[j, 0]), sy(coords[j, 1])
        marker = "" if symmetric else ' marker-end="url(#arrow)"'
        parts.append(f'<line x1="{x1:.2f}" y1="{y1:.2f}" x2="{x2:.2f}" '
                     f'y2="{y2:.2f}" stroke="#555" stroke-width="1"{marker}/>')
    for i, v in enumerate(ids):
        x, y = sx(coords[i, 0]), sy(coords[i, 1])
        r = radii[i] if len(radii) else 4.0
        label = labels[i] if labels else str(v)
        parts.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="{r:.2f}" '
                     f'fill="#4c83b6" stroke="#1f3a57"><title>{label}</title></circle>')
    parts.append("</svg>")
    return "\n".join(parts)
