"""Deterministic quasi-random samples in balls and on spheres."""

from __future__ import annotations

import numpy as np
from scipy.special import ndtri
from scipy.stats import qmc


def _halton(n: int, d: int, seed: int) -> np.ndarray:
    u = qmc.Halton(d=d, scramble=True, seed=seed).random(n)
    return np.clip(u, 1e-12, 1.0 - 1e-12)


def _directions(u: np.ndarray) -> np.ndarray:
    g = ndtri(u)
    norms = np.linalg.norm(g, axis=1, keepdims=True)
    norms[norms == 0] = 1.0
    return g / norms


def sphere_points(n: int, dim: int, radius: float = 1.0, seed: int = 0) -> np.ndarray:
    """``n`` points on the sphere of the given radius in ``R^dim``."""
    if dim == 0:
        return np.zeros((n, 0))
    if dim == 1:
        return radius * np.where(np.arange(n) % 2 == 0, 1.0, -1.0).reshape(n, 1)
    return radius * _directions(_halton(n, dim, seed))


def ball_points(n: int, dim: int, radius: float = 1.0, seed: int = 0) -> np.ndarray:
    """``n`` points filling the closed ball of the given radius in ``R^dim``."""
    if dim == 0:
        return np.zeros((n, 0))
    u = _halton(n, dim + 1, seed)
    if dim == 1:
        return radius * (2.0 * u[:, :1] - 1.0)
    r = radius * u[:, -1:] ** (1.0 / dim)
    return r * _directions(u[:, :dim])


def cube_points(n: int, lower, upper, seed: int = 0) -> np.ndarray:
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    if lower.size == 0:
        return np.zeros((n, 0))
    return qmc.scale(_halton(n, lower.size, seed), lower, upper)
