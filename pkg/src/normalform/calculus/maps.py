"""Differentiable maps between coordinate spaces."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from ..errors import DimensionMismatch, DomainError, NonFinite
from .dual import jacobian_dual
from .expression import compile_node, node_to_str, parse

FD_STEP_SCALE = np.finfo(float).eps ** (1.0 / 3.0)


def _vector(x, dim: int, name: str = "point") -> np.ndarray:
    v = np.atleast_1d(np.asarray(x, dtype=float)).reshape(-1)
    if v.size != dim:
        raise DimensionMismatch(f"{name} has length {v.size}, expected {dim}")
    return v


@dataclass(frozen=True)
class DifferentiableMap:
    """``R^dim_in -> R^dim_out`` with an exact Jacobian when available.

    Without ``jac`` the Jacobian falls back to central differences.  ``lower`` and
    ``upper`` optionally bound a domain box; evaluation outside it raises.
    """

    dim_in: int
    dim_out: int
    func: Callable[[np.ndarray], np.ndarray]
    jac: Callable[[np.ndarray], np.ndarray] | None = None
    lower: np.ndarray | None = None
    upper: np.ndarray | None = None
    batch: Callable[[np.ndarray], np.ndarray] | None = field(default=None, repr=False)
    name: str = ""
    source: tuple = ()

    def in_domain(self, x) -> bool:
        x = _vector(x, self.dim_in)
        if self.lower is not None and np.any(x < self.lower):
            return False
        if self.upper is not None and np.any(x > self.upper):
            return False
        return True

    def _check(self, x) -> np.ndarray:
        x = _vector(x, self.dim_in)
        if not np.all(np.isfinite(x)):
            raise NonFinite("non-finite evaluation point")
        if not self.in_domain(x):
            raise DomainError(f"point {x.tolist()} outside the domain box")
        return x

    def __call__(self, x) -> np.ndarray:
        x = self._check(x)
        y = np.asarray(self.func(x), dtype=float).reshape(-1)
        if y.size != self.dim_out:
            raise DimensionMismatch(f"map returned {y.size} values, expected {self.dim_out}")
        if not np.all(np.isfinite(y)):
            raise NonFinite(f"non-finite value at {x.tolist()}")
        return y

    def jacobian(self, x) -> np.ndarray:
        x = self._check(x)
        if self.jac is None:
            return jacobian_fd(self, x)
        J = np.asarray(self.jac(x), dtype=float).reshape(self.dim_out, self.dim_in)
        if not np.all(np.isfinite(J)):
            raise NonFinite(f"non-finite Jacobian at {x.tolist()}")
        return J

    def evaluate_batch(self, X) -> np.ndarray:
        """Evaluate at the rows of ``X`` (shape ``(N, dim_in)``)."""
        X = np.asarray(X, dtype=float).reshape(-1, self.dim_in)
        if self.batch is not None and (self.lower is None and self.upper is None):
            Y = np.asarray(self.batch(X), dtype=float).reshape(X.shape[0], self.dim_out)
            if not np.all(np.isfinite(Y)):
                raise NonFinite("non-finite value in batch evaluation")
            return Y
        return np.array([self(x) for x in X]).reshape(X.shape[0], self.dim_out)

    @classmethod
    def linear(cls, A, b=None, name: str = "linear") -> "DifferentiableMap":
        A = np.atleast_2d(np.asarray(A, dtype=float))
        c = np.zeros(A.shape[0]) if b is None else np.asarray(b, dtype=float).reshape(-1)
        return cls(
            A.shape[1], A.shape[0], lambda x: A @ x + c, lambda x: A,
            batch=lambda X: X @ A.T + c, name=name,
        )

    @classmethod
    def identity(cls, n: int) -> "DifferentiableMap":
        return cls.linear(np.eye(n), name="identity")

    def translated(self, m) -> "DifferentiableMap":
        """``x -> f(m + x) - f(m)``."""
        m = _vector(m, self.dim_in, "base point")
        fm = self(m)
        jac = None if self.jac is None else (lambda x: self.jacobian(m + x))
        return DifferentiableMap(
            self.dim_in, self.dim_out, lambda x: self(m + x) - fm, jac,
            name=f"{self.name} at base",
        )


def jacobian_fd(f: DifferentiableMap, x, h: float | None = None) -> np.ndarray:
    """Central-difference Jacobian.

    The default step ``eps^(1/3) * max(1, |x|)`` balances truncation against
    rounding for central differences.
    """
    x = _vector(x, f.dim_in)
    if h is None:
        h = FD_STEP_SCALE * max(1.0, float(np.linalg.norm(x)))
    J = np.empty((f.dim_out, f.dim_in))
    for i in range(f.dim_in):
        xp = x.copy()
        xm = x.copy()
        xp[i] += h
        xm[i] -= h
        if not (f.in_domain(xp) and f.in_domain(xm)):
            raise DomainError(f"difference stencil leaves the domain box at {x.tolist()}")
        J[:, i] = (f(xp) - f(xm)) / (xp[i] - xm[i])
    if not np.all(np.isfinite(J)):
        raise NonFinite("non-finite finite-difference Jacobian")
    return J


def mixed_close(a, b, tol: float = 1e-5) -> bool:
    """Elementwise ``|a - b| <= tol * (1 + |b|)``."""
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    return bool(np.all(np.abs(a - b) <= tol * (1.0 + np.abs(b))))


def mixed_error(a, b) -> float:
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    if a.size == 0:
        return 0.0
    return float(np.max(np.abs(a - b) / (1.0 + np.abs(b))))


def parse_expression_map(source, variables: Sequence[str], name: str = "") -> DifferentiableMap:
    """Build a map from expression strings.

    ``source`` is either a list of output expressions or one string with outputs
    separated by ``;``.  Derivatives come from dual-number propagation.
    """
    if isinstance(source, str):
        exprs = [s for s in (p.strip() for p in source.split(";")) if s]
    else:
        exprs = [str(s) for s in source]
    variables = [str(v) for v in variables]
    if len(set(variables)) != len(variables):
        raise DimensionMismatch("duplicate variable names")
    trees = [parse(e, variables) for e in exprs]
    fns = [compile_node(t) for t in trees]
    n = len(variables)

    def outputs(env):
        return [fn(env) for fn in fns]

    def func(x):
        return np.array([float(v) for v in outputs(list(x))])

    def jac(x):
        return jacobian_dual(outputs, x)[1]

    def batch(X):
        cols = [X[:, i] for i in range(n)]
        out = np.empty((X.shape[0], len(fns)))
        for k, fn in enumerate(fns):
            out[:, k] = fn(cols)
        return out

    return DifferentiableMap(
        n, len(fns), func, jac, batch=batch, name=name or "; ".join(exprs),
        source=(tuple(exprs), tuple(variables)),
    )


def expression_strings(f: DifferentiableMap) -> list[str]:
    """Canonical, fully parenthesized forms of an expression map's outputs."""
    if not f.source:
        return []
    exprs, variables = f.source
    return [node_to_str(parse(e, variables)) for e in exprs]
