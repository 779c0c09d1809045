"""Newton solvers and locally invertible maps."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..errors import (
    DimensionMismatch,
    DomainError,
    NewtonFailure,
    NoConvergence,
    NonFinite,
    RadiusNotFound,
    SingularJacobian,
)
from ..sampling import sphere_points, ball_points
from .maps import DifferentiableMap, _vector

NEWTON_TOL = 1e-12
NEWTON_MAX_ITER = 50
MAX_HALVINGS = 20
# relative singular-value cutoff for declaring a Jacobian singular
SINGULAR_RTOL = 1e-13


@dataclass
class NewtonResult:
    x: np.ndarray
    iterations: int
    residuals: list = field(default_factory=list)


def _newton_step(J: np.ndarray, r: np.ndarray, iteration: int) -> np.ndarray:
    if J.shape[0] != J.shape[1]:
        raise DimensionMismatch(f"Newton needs a square Jacobian, got {J.shape}")
    if J.size == 0:
        return np.zeros(0)
    s = np.linalg.svd(J, compute_uv=False)
    if s[-1] <= SINGULAR_RTOL * max(1.0, s[0]):
        raise SingularJacobian(iteration)
    return np.linalg.solve(J, -r)


def newton_solve(
    F: Callable[[np.ndarray], np.ndarray],
    J: Callable[[np.ndarray], np.ndarray],
    y,
    x0,
    tol: float = NEWTON_TOL,
    max_iter: int = NEWTON_MAX_ITER,
) -> NewtonResult:
    """Damped Newton iteration for ``F(x) = y``.

    A step is halved (at most 20 times) until the residual decreases.  Once the
    tolerance is met one extra step is attempted and kept if it helps.
    """
    x = np.array(x0, dtype=float).reshape(-1)
    y = np.asarray(y, dtype=float).reshape(-1)

    def residual(z):
        r = np.asarray(F(z), dtype=float).reshape(-1) - y
        if not np.all(np.isfinite(r)):
            raise NonFinite("non-finite residual")
        return r

    r = residual(x)
    res = float(np.linalg.norm(r))
    history = [res]
    for it in range(1, max_iter + 1):
        if res <= tol:
            # one polishing step; ignore it if it does not help
            try:
                dx = _newton_step(np.asarray(J(x), dtype=float), r, it)
                xn = x + dx
                rn = residual(xn)
                if np.linalg.norm(rn) < res:
                    x, r, res = xn, rn, float(np.linalg.norm(rn))
                    history.append(res)
            except (NewtonFailure, NonFinite, DomainError):
                pass
            return NewtonResult(x, it - 1, history)
        dx = _newton_step(np.asarray(J(x), dtype=float), r, it)
        t = 1.0
        accepted = False
        for _ in range(MAX_HALVINGS + 1):
            xn = x + t * dx
            try:
                rn = residual(xn)
            except (NonFinite, DomainError):
                t *= 0.5
                continue
            resn = float(np.linalg.norm(rn))
            if resn < res:
                accepted = True
                break
            t *= 0.5
        if not accepted:
            raise NoConvergence(history, "damped Newton step failed to reduce the residual")
        x, r, res = xn, rn, resn
        history.append(res)
    if res <= tol:
        return NewtonResult(x, max_iter, history)
    raise NoConvergence(history)


def newton_invert(
    f: DifferentiableMap, y, x0, tol: float = NEWTON_TOL, max_iter: int = NEWTON_MAX_ITER
) -> np.ndarray:
    """Solve ``f(x) = y`` starting from ``x0``."""
    if f.dim_in != f.dim_out:
        raise DimensionMismatch("newton_invert needs dim_in == dim_out")
    y = _vector(y, f.dim_out, "target")
    x0 = _vector(x0, f.dim_in, "initial guess")
    return newton_solve(f, f.jacobian, y, x0, tol, max_iter).x


def parametrized_newton(
    f: DifferentiableMap,
    p,
    y,
    x0,
    tol: float = NEWTON_TOL,
    max_iter: int = NEWTON_MAX_ITER,
) -> np.ndarray:
    """Solve ``f(p, x) = y`` for ``x`` with the parameter ``p`` frozen."""
    p = np.atleast_1d(np.asarray(p, dtype=float)).reshape(-1)
    x0 = np.atleast_1d(np.asarray(x0, dtype=float)).reshape(-1)
    k = p.size
    if k + x0.size != f.dim_in:
        raise DimensionMismatch("parameter and unknown do not add up to the map's input")
    if x0.size != f.dim_out:
        raise DimensionMismatch("unknown and output dimensions differ")
    if f.lower is not None and np.any(p < f.lower[:k]):
        raise DomainError(f"parameter {p.tolist()} outside the domain box")
    if f.upper is not None and np.any(p > f.upper[:k]):
        raise DomainError(f"parameter {p.tolist()} outside the domain box")
    y = _vector(y, f.dim_out, "target")
    res = newton_solve(
        lambda x: f(np.concatenate([p, x])),
        lambda x: f.jacobian(np.concatenate([p, x]))[:, k:],
        y, x0, tol, max_iter,
    )
    return res.x


class LocalDiffeo:
    """A map that is invertible near ``base``, inverted by Newton's method.

    The validity radius is shrunk by halves from the requested value until 32
    points on the sphere of that radius all round-trip within ``10 * tol``.
    """

    def __init__(
        self,
        forward: DifferentiableMap,
        base=None,
        radius: float = 0.5,
        tol: float = NEWTON_TOL,
        max_iter: int = NEWTON_MAX_ITER,
        inverse: Callable[[np.ndarray], np.ndarray] | None = None,
        adapt: bool = True,
        seed: int = 0,
        min_radius: float = 1e-6,
    ):
        if forward.dim_in != forward.dim_out:
            raise DimensionMismatch("a local diffeomorphism needs dim_in == dim_out")
        self.forward = forward
        self.dim = forward.dim_in
        self.base = np.zeros(self.dim) if base is None else _vector(base, self.dim, "base")
        self.tol = tol
        self.max_iter = max_iter
        self.seed = seed
        self._inverse = inverse
        self.image_base = forward(self.base)
        J0 = forward.jacobian(self.base)
        if self.dim:
            s = np.linalg.svd(J0, compute_uv=False)
            if s[-1] <= SINGULAR_RTOL * max(1.0, s[0]):
                raise SingularJacobian(0, "Jacobian at the base point is singular")
            self._J0inv = np.linalg.inv(J0)
        else:
            self._J0inv = np.zeros((0, 0))
        self.radius = self._find_radius(radius, min_radius) if adapt else float(radius)

    def __call__(self, x) -> np.ndarray:
        return self.forward(x)

    def jacobian(self, x) -> np.ndarray:
        return self.forward.jacobian(x)

    def inverse(self, y, x0=None) -> np.ndarray:
        y = _vector(y, self.dim, "target")
        if self._inverse is not None:
            return np.asarray(self._inverse(y), dtype=float).reshape(-1)
        if x0 is None:
            x0 = self.base + self._J0inv @ (y - self.image_base)
        return newton_invert(self.forward, y, x0, self.tol, self.max_iter)

    def round_trip_residual(self, x) -> float:
        x = _vector(x, self.dim)
        return float(np.linalg.norm(self.inverse(self.forward(x)) - x))

    def _round_trips(self, points: np.ndarray) -> bool:
        for x in points:
            try:
                if self.round_trip_residual(x) > 10 * self.tol:
                    return False
            except (NewtonFailure, NonFinite, DomainError):
                return False
        return True

    def _find_radius(self, radius: float, min_radius: float) -> float:
        if self.dim == 0:
            return float(radius)
        r = float(radius)
        while r >= min_radius:
            pts = self.base + sphere_points(32, self.dim, r, self.seed)
            if self._round_trips(pts):
                return r
            r *= 0.5
        raise RadiusNotFound(f"no validity radius above {min_radius}")

    def verify_round_trip(self, n: int = 100, seed: int | None = None) -> float:
        """Largest round-trip error over ``n`` quasi-random points of the validity ball."""
        if self.dim == 0:
            return 0.0
        pts = self.base + ball_points(n, self.dim, self.radius, self.seed if seed is None else seed)
        return max(self.round_trip_residual(x) for x in pts)
