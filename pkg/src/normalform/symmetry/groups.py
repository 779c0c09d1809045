"""Compact groups: finite groups with explicit tables and closed subgroups of tori."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from ..errors import DimensionMismatch
from ..sampling import cube_points
from .lattice import hermite_normal_form, lattice_contains, smith_normal_form

DEDUPE_TOL = 1e-9
MAX_ORDER = 4096
TWO_PI = 2.0 * np.pi


class FiniteGroup:
    """A finite group given by its multiplication table (element 0 is the identity)."""

    def __init__(self, table, generators: Sequence[int] = (), parent_ids: Sequence[int] | None = None):
        self.table = np.asarray(table, dtype=np.int64)
        n = self.table.shape[0]
        if self.table.shape != (n, n):
            raise DimensionMismatch("multiplication table must be square")
        self.order = n
        self.identity = 0
        inv = np.full(n, -1, dtype=np.int64)
        for a in range(n):
            hits = np.flatnonzero(self.table[a] == 0)
            if hits.size != 1:
                raise ValueError(f"element {a} has no unique inverse")
            inv[a] = hits[0]
        self.inverse = inv
        self.generators = tuple(int(g) for g in generators) or tuple(range(1, n))
        self.parent_ids = None if parent_ids is None else tuple(int(p) for p in parent_ids)

    def __repr__(self):
        return f"FiniteGroup(order={self.order})"

    @property
    def kind(self) -> str:
        return "finite"

    @property
    def lie_dim(self) -> int:
        return 0

    @property
    def elements(self) -> range:
        return range(self.order)

    def mul(self, a: int, b: int) -> int:
        return int(self.table[a, b])

    def inv(self, a: int) -> int:
        return int(self.inverse[a])

    def check_axioms(self) -> bool:
        n = self.order
        T = self.table
        if not np.array_equal(T[0], np.arange(n)) or not np.array_equal(T[:, 0], np.arange(n)):
            return False
        for row in T:
            if len(set(row.tolist())) != n:
                return False
        if n <= 64:
            # (ab)c == a(bc) for all triples
            left = T[T, :]  # left[a, b, c] = T[T[a, b], c]
            right = T[:, T]  # right[a, b, c] = T[a, T[b, c]]
            return bool(np.array_equal(left, right))
        return True

    @classmethod
    def from_matrices(cls, generators: Sequence[np.ndarray], tol: float = DEDUPE_TOL):
        """Close a set of invertible matrices under multiplication.

        Returns the abstract group and the list of element matrices.
        """
        gens = [np.asarray(g, dtype=float) for g in generators]
        if not gens:
            raise ValueError("at least one generator is required")
        d = gens[0].shape[0]
        for g in gens:
            if g.shape != (d, d):
                raise DimensionMismatch("generator matrices must be square and equally sized")
        mats = [np.eye(d)]

        def find(M):
            for i, E in enumerate(mats):
                if np.max(np.abs(E - M)) <= tol:
                    return i
            return -1

        gen_ids = []
        queue = [0]
        for g in gens:
            i = find(g)
            if i < 0:
                mats.append(g)
                i = len(mats) - 1
                queue.append(i)
            gen_ids.append(i)
        while queue:
            a = queue.pop(0)
            for g in gens:
                P = mats[a] @ g
                if find(P) < 0:
                    mats.append(P)
                    queue.append(len(mats) - 1)
                    if len(mats) > MAX_ORDER:
                        raise ValueError("generated group is too large or infinite")
        n = len(mats)
        table = np.empty((n, n), dtype=np.int64)
        for a in range(n):
            for b in range(n):
                idx = find(mats[a] @ mats[b])
                if idx < 0:
                    raise ValueError("generated set is not closed; generators may be inexact")
                table[a, b] = idx
        gen_ids = [i for i in dict.fromkeys(gen_ids) if i != 0]
        return cls(table, gen_ids), mats

    @classmethod
    def cyclic(cls, n: int) -> "FiniteGroup":
        return cls(np.add.outer(np.arange(n), np.arange(n)) % n, [1] if n > 1 else [])

    @classmethod
    def symmetric(cls, k: int):
        """Symmetric group on ``k`` letters with its permutation matrices."""
        perms = list(itertools.permutations(range(k)))
        index = {p: i for i, p in enumerate(perms)}
        n = len(perms)
        table = np.empty((n, n), dtype=np.int64)
        for a, p in enumerate(perms):
            for b, q in enumerate(perms):
                table[a, b] = index[tuple(p[q[i]] for i in range(k))]
        mats = []
        for p in perms:
            P = np.zeros((k, k))
            P[list(p), list(range(k))] = 1.0
            mats.append(P)
        gens = [index[tuple([1, 0] + list(range(2, k)))], index[tuple(list(range(1, k)) + [0])]] if k > 1 else []
        return cls(table, gens), mats

    def closure(self, elements) -> frozenset:
        """Subgroup generated by ``elements``."""
        S = {0} | {int(e) for e in elements}
        frontier = list(S)
        while frontier:
            a = frontier.pop()
            for b in list(S):
                for c in (self.mul(a, b), self.mul(b, a)):
                    if c not in S:
                        S.add(c)
                        frontier.append(c)
        return frozenset(S)

    def conjugate(self, H, g: int) -> frozenset:
        gi = self.inv(g)
        return frozenset(self.mul(self.mul(g, h), gi) for h in H)

    def is_subgroup(self, H) -> bool:
        H = frozenset(H)
        if 0 not in H:
            return False
        return all(self.mul(a, self.inv(b)) in H for a in H for b in H)

    @cached_property
    def subgroups(self) -> list[frozenset]:
        """All subgroups, found by joining cyclic subgroups until nothing new appears."""
        if self.order > 64:
            raise ValueError("subgroup enumeration is limited to groups of order <= 64")
        cyclic = {self.closure([g]) for g in self.elements}
        found = set(cyclic) | {frozenset([0])}
        frontier = list(found)
        while frontier:
            H = frontier.pop()
            for C in cyclic:
                if C <= H:
                    continue
                J = self.closure(H | C)
                if J not in found:
                    found.add(J)
                    frontier.append(J)
        return sorted(found, key=lambda H: (len(H), sorted(H)))

    @cached_property
    def subgroup_classes(self) -> list[list[frozenset]]:
        """Conjugacy classes of subgroups, ordered by subgroup order."""
        classes: list[list[frozenset]] = []
        seen: set = set()
        for H in self.subgroups:
            if H in seen:
                continue
            cls_ = sorted({self.conjugate(H, g) for g in self.elements}, key=sorted)
            seen.update(cls_)
            classes.append(cls_)
        return classes

    def class_index(self, H) -> int:
        H = frozenset(H)
        for i, cls_ in enumerate(self.subgroup_classes):
            if H in cls_:
                return i
        raise ValueError("not a subgroup")

    def class_leq(self, i: int, j: int) -> bool:
        """(H_i) <= (H_j): some conjugate of H_i lies in H_j."""
        Hj = self.subgroup_classes[j][0]
        return any(H <= Hj for H in self.subgroup_classes[i])

    def partial_order_table(self) -> list[list[bool]]:
        n = len(self.subgroup_classes)
        return [[self.class_leq(i, j) for j in range(n)] for i in range(n)]

    def subgroup(self, elements) -> "FiniteGroup":
        """The subgroup as a group in its own right; ``parent_ids`` maps back."""
        ids = sorted(set(int(e) for e in elements))
        if ids[0] != 0 or not self.is_subgroup(ids):
            raise ValueError("elements do not form a subgroup containing the identity")
        local = {g: i for i, g in enumerate(ids)}
        table = np.array([[local[self.mul(a, b)] for b in ids] for a in ids], dtype=np.int64)
        return FiniteGroup(table, list(range(1, len(ids))), ids)

    def describe(self) -> dict:
        return {"kind": "finite", "order": self.order}


@dataclass(frozen=True, eq=False)
class TorusGroup:
    """Closed subgroup ``{theta in T^n : M theta in 2 pi Z^k}`` of the torus ``T^n``.

    ``M`` is an integer matrix (the annihilating character lattice); the empty
    matrix gives the whole torus and the identity gives the trivial group.
    """

    ambient_rank: int
    annihilator: np.ndarray

    def __post_init__(self):
        M = np.asarray(self.annihilator).reshape(-1, self.ambient_rank)
        object.__setattr__(self, "annihilator", hermite_normal_form(M, self.ambient_rank))

    @classmethod
    def full(cls, rank: int) -> "TorusGroup":
        return cls(rank, np.zeros((0, rank), dtype=np.int64))

    @classmethod
    def trivial(cls, rank: int) -> "TorusGroup":
        return cls(rank, np.eye(rank, dtype=np.int64))

    @property
    def kind(self) -> str:
        return "torus"

    @cached_property
    def _smith(self):
        D, U, V = smith_normal_form(self.annihilator, self.ambient_rank)
        diag = [int(D[i, i]) for i in range(min(D.shape))]
        r = sum(1 for d in diag if d != 0)
        return diag[:r], V

    @property
    def lie_dim(self) -> int:
        return self.ambient_rank - len(self._smith[0])

    @property
    def lie_basis(self) -> np.ndarray:
        """Integer vectors spanning the Lie algebra (columns)."""
        diag, V = self._smith
        return V[:, len(diag):].astype(float)

    @property
    def component_orders(self) -> list[int]:
        return list(self._smith[0])

    @property
    def component_count(self) -> int:
        return int(np.prod(self.component_orders)) if self.component_orders else 1

    @cached_property
    def components(self) -> list[np.ndarray]:
        """One representative angle vector per connected component."""
        diag, V = self._smith
        reps = []
        for js in itertools.product(*[range(d) for d in diag]):
            theta_p = np.zeros(self.ambient_rank)
            theta_p[: len(diag)] = [TWO_PI * j / d for j, d in zip(js, diag)]
            reps.append(V.astype(float) @ theta_p)
        return reps

    def element(self, component: int, t) -> np.ndarray:
        return self.components[component] + self.lie_basis @ np.asarray(t, dtype=float).reshape(-1)

    def contains(self, theta, tol: float = 1e-9) -> bool:
        if self.annihilator.size == 0:
            return True
        v = self.annihilator.astype(float) @ np.asarray(theta, dtype=float) / TWO_PI
        return bool(np.all(np.abs(v - np.round(v)) <= tol))

    def intersect(self, other: "TorusGroup") -> "TorusGroup":
        return TorusGroup(self.ambient_rank, np.vstack([self.annihilator, other.annihilator]))

    def is_subgroup_of(self, other: "TorusGroup") -> bool:
        return all(lattice_contains(self.annihilator, row) for row in other.annihilator)

    @property
    def key(self) -> tuple:
        return tuple(tuple(int(v) for v in row) for row in self.annihilator)

    @property
    def type_id(self) -> str:
        rows = ";".join(",".join(str(v) for v in row) for row in self.annihilator)
        return f"T{self.lie_dim}[{rows}]"

    def haar_nodes(self, per_circle: int = 64) -> list[np.ndarray]:
        d = self.lie_dim
        grid = TWO_PI * np.arange(per_circle) / per_circle
        ts = list(itertools.product(grid, repeat=d)) if d else [()]
        basis = self.lie_basis
        nodes = []
        for c in self.components:
            for t in ts:
                nodes.append(c + (basis @ np.asarray(t, dtype=float) if d else 0.0))
        return nodes

    def sample_elements(self, n: int = 16, seed: int = 0) -> list[np.ndarray]:
        d = self.lie_dim
        out = [c.copy() for c in self.components]
        if d:
            ts = cube_points(n, np.zeros(d), np.full(d, TWO_PI), seed)
            for c in self.components:
                out.extend(c + self.lie_basis @ t for t in ts)
        return out

    def describe(self) -> dict:
        return {
            "kind": "torus",
            "ambient_rank": self.ambient_rank,
            "dim": self.lie_dim,
            "components": self.component_count,
            "annihilator": self.annihilator.tolist(),
        }
