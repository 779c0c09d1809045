"""Representations of finite groups and tori, and pairs of them acting on a map."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..errors import DimensionMismatch
from .groups import TWO_PI, FiniteGroup, TorusGroup

ROT = np.array([[0.0, -1.0], [1.0, 0.0]])


def wrap_angles(d: np.ndarray) -> np.ndarray:
    """Map angle differences to ``(-pi, pi]``."""
    return d - TWO_PI * np.round(d / TWO_PI)


class FiniteRep:
    """Matrices indexed by the elements of a finite group."""

    kind = "finite"

    def __init__(self, group: FiniteGroup, matrices: Sequence[np.ndarray]):
        self.group = group
        self.matrices = [np.asarray(M, dtype=float) for M in matrices]
        if len(self.matrices) != group.order:
            raise DimensionMismatch("need one matrix per group element")
        self.dim = self.matrices[0].shape[0] if self.matrices else 0
        for M in self.matrices:
            if M.shape != (self.dim, self.dim):
                raise DimensionMismatch("representation matrices must be square and equal-sized")

    def matrix(self, g) -> np.ndarray:
        return self.matrices[int(g)]

    def act(self, g, x) -> np.ndarray:
        return self.matrices[int(g)] @ np.asarray(x, dtype=float)

    def displacement(self, g, x, y) -> np.ndarray:
        return self.act(g, x) - np.asarray(y, dtype=float)

    def haar_nodes(self) -> list:
        return list(self.group.elements)

    def check_elements(self) -> list:
        return list(self.group.elements)

    def generator_elements(self) -> list:
        return list(self.group.generators)

    def lie_generators(self) -> list[np.ndarray]:
        return []

    def orbit_tangent(self, x) -> np.ndarray:
        return np.zeros((self.dim, 0))

    def representation_residual(self) -> float:
        G = self.group
        worst = 0.0
        for a in G.elements:
            for b in G.elements:
                R = self.matrices[G.mul(a, b)] - self.matrices[a] @ self.matrices[b]
                worst = max(worst, float(np.abs(R).max()) if R.size else 0.0)
        return worst

    def stabilizer_elements(self, x, tol: float = 1e-9) -> frozenset:
        x = np.asarray(x, dtype=float)
        scale = max(1.0, float(np.linalg.norm(x)))
        return frozenset(
            g for g in self.group.elements if np.linalg.norm(self.act(g, x) - x) <= tol * scale
        )

    def linear_stabilizer(self, x, tol: float = 1e-9):
        return self.stabilizer_elements(x, tol)

    def restricted(self, H) -> "FiniteRep":
        """Restriction to a subgroup given by parent element ids (or a subgroup)."""
        if isinstance(H, FiniteGroup):
            sub, ids = H, H.parent_ids
        else:
            sub = self.group.subgroup(H)
            ids = sub.parent_ids
        return FiniteRep(sub, [self.matrices[i] for i in ids])

    def describe(self) -> dict:
        return {"kind": "finite", "dim": self.dim, "order": self.group.order}


class TorusRep:
    """Torus action by rotation blocks with integer weights.

    Coordinates are ``2 * B`` rotated coordinates followed by ``fixed_dims``
    coordinates that are left alone by the linear part.  An integer ``shift``
    matrix (``fixed_dims x rank``) makes the action affine on those coordinates,
    ``x_f -> x_f + shift @ theta``; such coordinates are angles taken mod ``2 pi``.
    """

    kind = "torus"

    def __init__(self, group: TorusGroup, weights, fixed_dims: int = 0, shift=None):
        self.group = group
        R = group.ambient_rank
        W = np.asarray(weights, dtype=np.int64).reshape(-1, R)
        self.weights = W
        self.fixed_dims = int(fixed_dims)
        if shift is None:
            shift = np.zeros((self.fixed_dims, R), dtype=np.int64)
        self.shift = np.asarray(shift, dtype=np.int64).reshape(self.fixed_dims, R)
        self.n_blocks = W.shape[0]
        self.dim = 2 * self.n_blocks + self.fixed_dims
        self.angle_mask = np.zeros(self.dim, dtype=bool)
        self.angle_mask[2 * self.n_blocks:] = np.any(self.shift != 0, axis=1)

    def matrix(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float).reshape(-1)
        M = np.eye(self.dim)
        for b in range(self.n_blocks):
            a = float(self.weights[b] @ theta)
            c, s = np.cos(a), np.sin(a)
            M[2 * b: 2 * b + 2, 2 * b: 2 * b + 2] = [[c, -s], [s, c]]
        return M

    def shift_vector(self, theta) -> np.ndarray:
        v = np.zeros(self.dim)
        v[2 * self.n_blocks:] = self.shift @ np.asarray(theta, dtype=float).reshape(-1)
        return v

    def act(self, theta, x) -> np.ndarray:
        return self.matrix(theta) @ np.asarray(x, dtype=float) + self.shift_vector(theta)

    def displacement(self, theta, x, y) -> np.ndarray:
        d = self.act(theta, x) - np.asarray(y, dtype=float)
        d[self.angle_mask] = wrap_angles(d[self.angle_mask])
        return d

    def generator(self, xi) -> np.ndarray:
        """Linear part of the infinitesimal action of a Lie algebra vector."""
        xi = np.asarray(xi, dtype=float).reshape(-1)
        A = np.zeros((self.dim, self.dim))
        for b in range(self.n_blocks):
            A[2 * b: 2 * b + 2, 2 * b: 2 * b + 2] = float(self.weights[b] @ xi) * ROT
        return A

    def lie_generators(self) -> list[np.ndarray]:
        return [self.generator(xi) for xi in self.group.lie_basis.T]

    def orbit_tangent(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        cols = [self.generator(xi) @ x + self.shift_vector(xi) for xi in self.group.lie_basis.T]
        return np.array(cols).T.reshape(self.dim, len(cols))

    def haar_nodes(self) -> list:
        return self.group.haar_nodes()

    def check_elements(self) -> list:
        return self.group.sample_elements(8)

    def generator_elements(self) -> list:
        return self.group.sample_elements(4)

    def representation_residual(self) -> float:
        els = self.group.sample_elements(4, seed=1)
        worst = 0.0
        for a in els:
            for b in els:
                R = self.matrix(a + b) - self.matrix(a) @ self.matrix(b)
                worst = max(worst, float(np.abs(R).max()))
        return worst

    def _active_rows(self, x, tol: float) -> list:
        x = np.asarray(x, dtype=float)
        scale = max(1.0, float(np.linalg.norm(x)))
        return [
            self.weights[b]
            for b in range(self.n_blocks)
            if np.linalg.norm(x[2 * b: 2 * b + 2]) > tol * scale
        ]

    def linear_stabilizer(self, x, tol: float = 1e-9) -> TorusGroup:
        rows = self._active_rows(x, tol)
        R = self.group.ambient_rank
        own = TorusGroup(R, np.array(rows, dtype=np.int64).reshape(-1, R))
        return own.intersect(self.group)

    def stabilizer_elements(self, x, tol: float = 1e-9) -> TorusGroup:
        rows = self._active_rows(x, tol) + [s for s in self.shift if np.any(s)]
        R = self.group.ambient_rank
        own = TorusGroup(R, np.array(rows, dtype=np.int64).reshape(-1, R))
        return own.intersect(self.group)

    def restricted(self, H: TorusGroup) -> "TorusRep":
        return TorusRep(H, self.weights, self.fixed_dims, self.shift)

    def describe(self) -> dict:
        return {
            "kind": "torus",
            "dim": self.dim,
            "weights": self.weights.tolist(),
            "fixed_dims": self.fixed_dims,
            "shift": self.shift.tolist(),
            "group": self.group.describe(),
        }


class SubRep:
    """The linear part of a representation restricted to an invariant subspace,
    written in the coordinates of a basis ``B`` (columns)."""

    def __init__(self, parent, B):
        self.parent = parent
        self.B = np.asarray(B, dtype=float).reshape(parent.dim, -1)
        self.Binv = np.linalg.pinv(self.B) if self.B.size else np.zeros((0, parent.dim))
        self.dim = self.B.shape[1]
        self.kind = parent.kind
        self.group = parent.group

    def matrix(self, g) -> np.ndarray:
        return self.Binv @ self.parent.matrix(g) @ self.B

    def act(self, g, x) -> np.ndarray:
        return self.matrix(g) @ np.asarray(x, dtype=float)

    def displacement(self, g, x, y) -> np.ndarray:
        return self.act(g, x) - np.asarray(y, dtype=float)

    def haar_nodes(self) -> list:
        return self.parent.haar_nodes()

    def check_elements(self) -> list:
        return self.parent.check_elements()

    def generator_elements(self) -> list:
        return self.parent.generator_elements()

    def lie_generators(self) -> list[np.ndarray]:
        return [self.Binv @ A @ self.B for A in self.parent.lie_generators()]

    def orbit_tangent(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        cols = [A @ x for A in self.lie_generators()]
        return np.array(cols).T.reshape(self.dim, len(cols))

    def representation_residual(self) -> float:
        return self.parent.representation_residual()

    def stabilizer_elements(self, x, tol: float = 1e-9):
        return self.parent.linear_stabilizer(self.B @ np.asarray(x, dtype=float), tol)

    linear_stabilizer = stabilizer_elements

    def restricted(self, H) -> "SubRep":
        return SubRep(self.parent.restricted(H), self.B)

    def describe(self) -> dict:
        return {"kind": self.kind, "dim": self.dim, "restricted_from": self.parent.describe()}


def trivial_rep(group, dim: int):
    """The trivial action of ``group`` on ``R^dim``."""
    if isinstance(group, FiniteGroup):
        return FiniteRep(group, [np.eye(dim)] * group.order)
    return TorusRep(group, np.zeros((0, group.ambient_rank)), dim)


@dataclass
class GroupAction:
    """Actions of one compact group on the domain and the target of a map."""

    rep_domain: object
    rep_target: object

    def __post_init__(self):
        if self.rep_domain.group is not self.rep_target.group:
            a, b = self.rep_domain.group, self.rep_target.group
            same = (
                isinstance(a, TorusGroup)
                and isinstance(b, TorusGroup)
                and a.ambient_rank == b.ambient_rank
                and a.key == b.key
            )
            if not same:
                raise DimensionMismatch("domain and target representations use different groups")

    @property
    def group(self):
        return self.rep_domain.group

    @classmethod
    def finite_from_generators(cls, generators_domain, generators_target) -> "GroupAction":
        """Close block-diagonal (domain, target) generator pairs into a finite group."""
        gd = [np.atleast_2d(np.asarray(g, dtype=float)) for g in generators_domain]
        gt = [np.atleast_2d(np.asarray(g, dtype=float)) for g in generators_target]
        if len(gd) != len(gt) or not gd:
            raise DimensionMismatch("need the same positive number of domain and target generators")
        n, m = gd[0].shape[0], gt[0].shape[0]
        blocks = []
        for a, b in zip(gd, gt):
            M = np.zeros((n + m, n + m))
            M[:n, :n] = a
            M[n:, n:] = b
            blocks.append(M)
        G, mats = FiniteGroup.from_matrices(blocks)
        return cls(FiniteRep(G, [M[:n, :n] for M in mats]), FiniteRep(G, [M[n:, n:] for M in mats]))

    def restricted(self, H) -> "GroupAction":
        rd = self.rep_domain.restricted(H)
        if isinstance(H, frozenset) or isinstance(H, (list, tuple, set)):
            H = rd.group
        return GroupAction(rd, self.rep_target.restricted(H))

    def describe(self) -> dict:
        return {"domain": self.rep_domain.describe(), "target": self.rep_target.describe()}
