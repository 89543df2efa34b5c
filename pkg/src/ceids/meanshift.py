"""Hard mean-shift clustering with a truncated Gaussian kernel."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import pdist

from .errors import DegenerateDataError, EmptyDatasetError, EmptyNeighborhoodError

# 32 MB of float64 per distance block
_BLOCK_ELEMS = 4_000_000


@dataclass
class MeanShiftModel:
    bandwidth: float
    modes: np.ndarray
    populations: np.ndarray
    fit_subsample_size: int
    cutoff: float = 3.0

    @property
    def n_clusters(self) -> int:
        return self.modes.shape[0]


def estimate_bandwidth(data, seed: int, fraction: float = 1 / 3, cap: int = 2000, bins: int = 50) -> float:
    """Histogram mode of pairwise distances within a shuffled subsample.

    Takes ``ceil(n * fraction)`` points (at least 2, at most ``cap``) and
    returns the midpoint of the most populated of ``bins`` equal-width bins.
    Falls back to the smallest nonzero distance if that comes out as 0.
    """
    x = np.asarray(data, dtype=float)
    n = x.shape[0]
    if n < 2:
        raise EmptyDatasetError("bandwidth estimation needs at least 2 points")
    if np.all(x == x[0]):
        raise DegenerateDataError("all points are identical")
    rng = np.random.default_rng(seed)
    m = min(max(2, math.ceil(n * fraction)), cap, n)
    sub = x[rng.permutation(n)[:m]]
    d = pdist(sub)
    if d.max() == 0:
        dist = np.sqrt(((x - sub[0]) ** 2).sum(axis=1))
        return float(dist[dist > 0].min())
    counts, edges = np.histogram(d, bins=bins)
    k = int(np.argmax(counts))
    h = 0.5 * (edges[k] + edges[k + 1])
    if h <= 0:
        h = float(d[d > 0].min())
    return float(h)


def _kernel_weights(sq_dist: np.ndarray, h: float, cutoff: float) -> np.ndarray:
    w = np.exp(-sq_dist / (2.0 * h * h))
    w[sq_dist > (cutoff * h) ** 2] = 0.0
    return w


def shift(x, data, h: float, cutoff: float = 3.0) -> np.ndarray:
    """One mean-shift step: Gaussian-weighted mean of the neighbours of ``x``.

    Neighbours are the data points within ``cutoff * h`` of ``x``.
    """
    x = np.asarray(x, dtype=float)
    data = np.asarray(data, dtype=float)
    diff = data - x
    sq = np.einsum("ij,ij->i", diff, diff)
    w = _kernel_weights(sq, h, cutoff)
    total = w.sum()
    if total == 0:
        raise EmptyNeighborhoodError(f"no data within {cutoff * h:g} of the query point")
    return (w @ data) / total


def _sq_dists(a: np.ndarray, b: np.ndarray, b_sq: np.ndarray) -> np.ndarray:
    a_sq = np.einsum("ij,ij->i", a, a)
    sq = a_sq[:, None] + b_sq[None, :] - 2.0 * (a @ b.T)
    np.maximum(sq, 0.0, out=sq)
    return sq


def _shift_all(points: np.ndarray, data: np.ndarray, data_sq: np.ndarray, h: float, cutoff: float):
    """Shift every row of ``points``; rows with empty neighbourhoods stay put."""
    out = points.copy()
    empty = np.zeros(points.shape[0], dtype=bool)
    step = max(1, _BLOCK_ELEMS // max(1, data.shape[0]))
    for start in range(0, points.shape[0], step):
        block = points[start:start + step]
        w = _kernel_weights(_sq_dists(block, data, data_sq), h, cutoff)
        total = w.sum(axis=1)
        ok = total > 0
        out[start:start + step][ok] = (w[ok] @ data) / total[ok, None]
        empty[start:start + step] = ~ok
    return out, empty


def _converge(points, data, data_sq, h, cutoff, tol, max_iter):
    points = points.copy()
    active = np.arange(points.shape[0])
    for _ in range(max_iter):
        if active.size == 0:
            break
        moved, empty = _shift_all(points[active], data, data_sq, h, cutoff)
        step = np.sqrt(((moved - points[active]) ** 2).sum(axis=1))
        points[active] = moved
        active = active[(step >= tol) & ~empty]
    return points


def _group(points: np.ndarray, radius: float) -> np.ndarray:
    """Greedy leader grouping in index order; returns a group id per point."""
    labels = np.full(points.shape[0], -1)
    gid = 0
    for i in range(points.shape[0]):
        if labels[i] >= 0:
            continue
        free = np.flatnonzero(labels < 0)
        d = np.sqrt(((points[free] - points[i]) ** 2).sum(axis=1))
        labels[free[d <= radius]] = gid
        gid += 1
    return labels


def fit(data, h: float, tol: float = 1e-4, max_iter: int = 300, cutoff: float = 3.0,
        subsample: int | None = 5000, seed: int = 0) -> MeanShiftModel:
    """Seed a shift from every (subsampled) point and merge the fixed points.

    Converged points closer than ``h / 2`` are merged into one mode (the
    population-weighted centroid, re-converged); merging repeats until all
    modes are more than ``h / 2`` apart. Modes are ordered by descending
    basin population, ties by first appearance.
    """
    x = np.asarray(data, dtype=float)
    if x.ndim != 2 or x.shape[0] == 0:
        raise EmptyDatasetError("mean-shift needs a non-empty 2-D dataset")
    if not h > 0:
        raise ValueError("bandwidth must be positive")
    if subsample is not None and x.shape[0] > subsample:
        rng = np.random.default_rng(seed)
        x = x[np.sort(rng.choice(x.shape[0], size=subsample, replace=False))]
    x_sq = np.einsum("ij,ij->i", x, x)
    merge_radius = h / 2.0

    converged = _converge(x, x, x_sq, h, cutoff, tol, max_iter)
    labels = _group(converged, merge_radius)
    n_groups = labels.max() + 1
    pops = np.bincount(labels, minlength=n_groups).astype(float)
    modes = np.stack([converged[labels == g].mean(axis=0) for g in range(n_groups)])
    modes = _converge(modes, x, x_sq, h, cutoff, tol, max_iter)

    while modes.shape[0] > 1:
        d = np.sqrt(_sq_dists(modes, modes, np.einsum("ij,ij->i", modes, modes)))
        np.fill_diagonal(d, np.inf)
        i, j = np.unravel_index(np.argmin(d), d.shape)
        if d[i, j] > merge_radius:
            break
        i, j = min(i, j), max(i, j)
        merged = (pops[i] * modes[i] + pops[j] * modes[j]) / (pops[i] + pops[j])
        modes[i] = _converge(merged[None, :], x, x_sq, h, cutoff, tol, max_iter)[0]
        pops[i] += pops[j]
        modes = np.delete(modes, j, axis=0)
        pops = np.delete(pops, j)

    order = np.argsort(-pops, kind="stable")
    return MeanShiftModel(float(h), modes[order], pops[order].astype(np.int64), int(x.shape[0]), float(cutoff))


def assign_batch(model: MeanShiftModel, x) -> np.ndarray:
    """Nearest-mode index for every row; ties go to the lowest index."""
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[None, :]
    out = np.empty(x.shape[0], dtype=np.int64)
    # exact differences (not the dot-product expansion) keep equidistant ties exact
    step = max(1, _BLOCK_ELEMS // max(1, model.modes.size))
    for start in range(0, x.shape[0], step):
        block = x[start:start + step]
        sq = ((block[:, None, :] - model.modes[None, :, :]) ** 2).sum(axis=2)
        out[start:start + step] = np.argmin(sq, axis=1)
    return out


def assign(model: MeanShiftModel, x) -> tuple[int, np.ndarray]:
    """Return ``(cluster index, membership vector)`` for one point.

    Membership is hard: 1 for the nearest mode, 0 for every other.
    """
    idx = int(assign_batch(model, x)[0])
    u = np.zeros(model.n_clusters)
    u[idx] = 1.0
    return idx, u


def memberships(model: MeanShiftModel, x) -> np.ndarray:
    idx = assign_batch(model, x)
    u = np.zeros((idx.shape[0], model.n_clusters))
    u[np.arange(idx.shape[0]), idx] = 1.0
    return u
