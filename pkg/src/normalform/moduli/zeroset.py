"""Grid exploration of the zero set of an obstruction map."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from ..calculus.maps import FD_STEP_SCALE, DifferentiableMap
from ..errors import DimensionMismatch, DomainError, NonFinite

ZERO_TOL = 1e-10
MAX_GRID_DIM = 4
POLISH_ITER = 60
EXTRA_POLISH = 2


@dataclass
class ZeroSet:
    points: np.ndarray
    spacing: float
    radius: float
    center: np.ndarray
    grid: int
    seeds: int
    max_residual: float

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return self.points.shape[0]

    def to_dict(self) -> dict:
        return {
            "points": self.points.tolist(),
            "count": len(self),
            "spacing": self.spacing,
            "radius": self.radius,
            "grid": self.grid,
            "seeds": self.seeds,
            "max_residual": self.max_residual,
        }


def _evaluate(s: DifferentiableMap, X: np.ndarray) -> np.ndarray:
    if s.batch is not None:
        return np.asarray(s.batch(X), dtype=float).reshape(X.shape[0], s.dim_out)
    out = np.full((X.shape[0], s.dim_out), np.nan)
    for i, x in enumerate(X):
        try:
            out[i] = s(x)
        except (DomainError, NonFinite):
            pass
    return out


def _jacobians(s: DifferentiableMap, X: np.ndarray) -> np.ndarray:
    """Stacked Jacobians ``(N, c, k)``; central differences on the batch path."""
    if s.batch is None:
        return np.array([s.jacobian(x) for x in X]).reshape(X.shape[0], s.dim_out, s.dim_in)
    J = np.empty((X.shape[0], s.dim_out, s.dim_in))
    h = FD_STEP_SCALE * np.maximum(1.0, np.linalg.norm(X, axis=1))
    for j in range(s.dim_in):
        Xp, Xm = X.copy(), X.copy()
        Xp[:, j] += h
        Xm[:, j] -= h
        J[:, :, j] = (_evaluate(s, Xp) - _evaluate(s, Xm)) / (Xp[:, j] - Xm[:, j])[:, None]
    return J


def _polish(s: DifferentiableMap, X: np.ndarray, tol: float) -> tuple[np.ndarray, np.ndarray]:
    """Minimum-norm Gauss-Newton on all points at once, a few steps past convergence."""
    X = X.copy()
    vals = _evaluate(s, X)
    res = np.linalg.norm(vals, axis=1)
    extra = np.zeros(X.shape[0], dtype=int)
    active = np.isfinite(res) & (extra < EXTRA_POLISH)
    for _ in range(POLISH_ITER + EXTRA_POLISH):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        J = _jacobians(s, X[idx])
        step = np.einsum("nkc,nc->nk", np.linalg.pinv(J, rcond=1e-12), vals[idx])
        X[idx] -= step
        vals[idx] = _evaluate(s, X[idx])
        res[idx] = np.linalg.norm(vals[idx], axis=1)
        done = res[idx] <= tol
        extra[idx[done]] += 1
        active[idx] = np.isfinite(res[idx]) & (extra[idx] < EXTRA_POLISH)
    return X, res


def _dedupe(X: np.ndarray, radius: float) -> np.ndarray:
    """Greedy thinning in lexicographic order: keep a point unless an earlier kept
    point lies within ``radius``."""
    if X.shape[0] == 0:
        return X
    order = np.lexsort(X.T[::-1])
    X = X[order]
    tree = cKDTree(X)
    removed = np.zeros(X.shape[0], dtype=bool)
    keep = []
    for i in range(X.shape[0]):
        if removed[i]:
            continue
        keep.append(i)
        removed[tree.query_ball_point(X[i], radius)] = True
    return X[keep]


def explore_zero_set(
    s: DifferentiableMap,
    radius: float,
    grid: int,
    tol: float = ZERO_TOL,
    center=None,
) -> ZeroSet:
    """Zero points of ``s`` in the box ``center + [-radius, radius]^k``.

    Grid nodes whose value is below the local variation over one cell are
    polished by Gauss-Newton; converged points inside the box are thinned at
    half the grid spacing.
    """
    k = s.dim_in
    if k > MAX_GRID_DIM:
        raise DimensionMismatch(f"grid exploration supports at most {MAX_GRID_DIM} dimensions, got {k}")
    if grid < 2:
        raise ValueError("grid needs at least two nodes per axis")
    center = np.zeros(k) if center is None else np.asarray(center, dtype=float).reshape(k)
    h = 2.0 * radius / (grid - 1)
    if k == 0:
        val = s(np.zeros(0)) if s.dim_out else np.zeros(0)
        r = float(np.linalg.norm(val))
        pts = np.zeros((1 if r <= tol else 0, 0))
        return ZeroSet(pts, h, radius, center, grid, 1, r if pts.shape[0] else 0.0)

    axis = np.linspace(-radius, radius, grid)
    mesh = np.meshgrid(*([axis] * k), indexing="ij")
    X = center + np.stack([m.reshape(-1) for m in mesh], axis=1)
    vals = _evaluate(s, X)
    if s.dim_out == 0:
        pts = _dedupe(X, h / 2)
        return ZeroSet(pts, h, radius, center, grid, X.shape[0], 0.0)

    shape = (grid,) * k
    grad_sq = np.zeros(X.shape[0])
    for c in range(s.dim_out):
        comp = np.nan_to_num(vals[:, c].reshape(shape), nan=0.0)
        grads = np.gradient(comp, h) if k > 1 else [np.gradient(comp, h)]
        for g in grads:
            grad_sq += g.reshape(-1) ** 2
    bound = np.sqrt(grad_sq) * h * np.sqrt(k) + tol
    res = np.linalg.norm(vals, axis=1)
    seeds = np.flatnonzero(np.isfinite(res) & (res <= bound))

    Y, res = _polish(s, X[seeds], tol)
    inside = np.all(np.abs(Y - center) <= radius + 1e-12, axis=1)
    ok = inside & np.isfinite(res) & (res <= tol)
    pts = _dedupe(Y[ok], h / 2)
    max_res = float(np.linalg.norm(_evaluate(s, pts), axis=1).max()) if pts.shape[0] else 0.0
    return ZeroSet(pts, h, radius, center, grid, int(seeds.size), max_res)
