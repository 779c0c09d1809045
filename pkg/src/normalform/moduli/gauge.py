"""Discrete abelian gauge theory on small cell complexes.

Connections are angles on edges, gauge transformations angles on vertices,
``A -> A + d0 theta``; the curvature map ``A -> sin(d1 A)`` vanishes exactly on
flat connections (face holonomy ``d1 A`` in ``2 pi Z``) near the trivial one.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..calculus.maps import DifferentiableMap
from ..errors import NotAComplex
from ..symmetry.groups import TorusGroup
from ..symmetry.reps import GroupAction, TorusRep


@dataclass(frozen=True)
class CellComplex:
    """Vertices ``0..V-1``, oriented edges ``(tail, head)`` and faces given as
    boundary words ``[(edge, +1 | -1), ...]``."""

    n_vertices: int
    edges: tuple
    faces: tuple
    name: str = ""

    @property
    def d0(self) -> np.ndarray:
        D = np.zeros((len(self.edges), self.n_vertices))
        for e, (tail, head) in enumerate(self.edges):
            D[e, head] += 1.0
            D[e, tail] -= 1.0
        return D

    @property
    def d1(self) -> np.ndarray:
        D = np.zeros((len(self.faces), len(self.edges)))
        for f, word in enumerate(self.faces):
            for e, sign in word:
                D[f, e] += sign
        return D

    def check(self) -> None:
        if np.any(self.d1 @ self.d0):
            raise NotAComplex(f"boundary of boundary is not zero on {self.name or 'complex'}")

    @property
    def euler_characteristic(self) -> int:
        return self.n_vertices - len(self.edges) + len(self.faces)

    def curvature_map(self) -> DifferentiableMap:
        d1 = self.d1
        return DifferentiableMap(
            len(self.edges), len(self.faces),
            lambda A: np.sin(d1 @ A),
            lambda A: np.cos(d1 @ A)[:, None] * d1,
            batch=lambda X: np.sin(X @ d1.T),
            name=f"curvature on {self.name}",
        )

    def gauge_action(self) -> GroupAction:
        G = TorusGroup.full(self.n_vertices)
        empty = np.zeros((0, self.n_vertices), dtype=np.int64)
        rep_d = TorusRep(G, empty, len(self.edges), self.d0.astype(np.int64))
        rep_t = TorusRep(G, empty, len(self.faces))
        return GroupAction(rep_d, rep_t)


def rose_torus() -> CellComplex:
    """Torus with one vertex, edges ``a, b`` and one face ``a b a^-1 b^-1``."""
    c = CellComplex(1, ((0, 0), (0, 0)), (((0, 1), (1, 1), (0, -1), (1, -1)),), "torus")
    c.check()
    return c


def wedge_sphere() -> CellComplex:
    """Sphere with two vertices, two parallel edges and two faces bounded by both."""
    c = CellComplex(2, ((0, 1), (0, 1)), (((0, 1), (1, -1)), ((1, 1), (0, -1))), "sphere")
    c.check()
    return c
