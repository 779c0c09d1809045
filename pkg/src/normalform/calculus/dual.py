"""Forward-mode dual numbers carrying a full gradient vector."""

from __future__ import annotations

import math

import numpy as np

from ..errors import DomainError


class Dual:
    """``val + grad . eps`` with ``eps_i eps_j = 0``."""

    __slots__ = ("val", "grad")

    def __init__(self, val: float, grad):
        self.val = float(val)
        self.grad = np.asarray(grad, dtype=float)

    @classmethod
    def variable(cls, val: float, index: int, size: int) -> "Dual":
        g = np.zeros(size)
        g[index] = 1.0
        return cls(val, g)

    def _coerce(self, other) -> "Dual":
        if isinstance(other, Dual):
            return other
        return Dual(other, np.zeros_like(self.grad))

    def __add__(self, other):
        o = self._coerce(other)
        return Dual(self.val + o.val, self.grad + o.grad)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        return Dual(self.val - o.val, self.grad - o.grad)

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        o = self._coerce(other)
        return Dual(self.val * o.val, self.grad * o.val + self.val * o.grad)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o.val == 0.0:
            raise DomainError("division by zero")
        inv = 1.0 / o.val
        return Dual(self.val * inv, (self.grad * o.val - self.val * o.grad) * inv * inv)

    def __rtruediv__(self, other):
        return self._coerce(other) / self

    def __neg__(self):
        return Dual(-self.val, -self.grad)

    def __pos__(self):
        return self

    def __pow__(self, n: int):
        if not isinstance(n, (int, np.integer)):
            raise TypeError("only integer powers are supported")
        n = int(n)
        if n == 0:
            return Dual(1.0, np.zeros_like(self.grad))
        if n < 0 and self.val == 0.0:
            raise DomainError("negative power of zero")
        return Dual(self.val**n, n * self.val ** (n - 1) * self.grad)

    def sin(self):
        return Dual(math.sin(self.val), math.cos(self.val) * self.grad)

    def cos(self):
        return Dual(math.cos(self.val), -math.sin(self.val) * self.grad)

    def exp(self):
        e = math.exp(self.val)
        return Dual(e, e * self.grad)

    def __repr__(self):
        return f"Dual({self.val!r}, {self.grad.tolist()!r})"


def dsin(a):
    return a.sin() if isinstance(a, Dual) else np.sin(a)


def dcos(a):
    return a.cos() if isinstance(a, Dual) else np.cos(a)


def dexp(a):
    return a.exp() if isinstance(a, Dual) else np.exp(a)


def jacobian_dual(fn, x) -> tuple[np.ndarray, np.ndarray]:
    """Value and Jacobian of ``fn`` (list of outputs from list of inputs) at ``x``."""
    x = np.asarray(x, dtype=float)
    n = x.size
    args = [Dual.variable(x[i], i, n) for i in range(n)]
    outs = fn(args)
    val = np.empty(len(outs))
    jac = np.zeros((len(outs), n))
    for k, o in enumerate(outs):
        if isinstance(o, Dual):
            val[k] = o.val
            jac[k] = o.grad
        else:
            val[k] = float(o)
    return val, jac
