"""Haar averaging, invariant complements, stabilizers, orbit types and slices."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import DimensionMismatch, NotInvariantInput, RadiusNotFound
from ..linear_core import Subspace, factorize_regular
from ..sampling import ball_points, sphere_points
from .groups import FiniteGroup, TorusGroup

INVARIANCE_TOL = 1e-9


def haar_average_matrix(rep_pair, A) -> np.ndarray:
    """``mean_g rho_target(g)^{-1} A rho_domain(g)`` over Haar measure.

    Exact for finite groups; for tori a trapezoidal rule with 64 nodes per circle.
    """
    rep_d, rep_t = rep_pair
    A = np.asarray(A, dtype=float)
    if A.shape != (rep_t.dim, rep_d.dim):
        raise DimensionMismatch(f"matrix shape {A.shape} does not match ({rep_t.dim}, {rep_d.dim})")
    nodes = rep_d.haar_nodes()
    acc = np.zeros_like(A)
    for g in nodes:
        acc += np.linalg.solve(rep_t.matrix(g), A @ rep_d.matrix(g)) if A.size else 0.0
    return acc / len(nodes)


def commutation_residual(rep_pair, A) -> float:
    """How far ``A`` is from intertwining the two actions (elements and generators)."""
    rep_d, rep_t = rep_pair
    A = np.asarray(A, dtype=float)
    if A.size == 0:
        return 0.0
    worst = 0.0
    for g in rep_d.check_elements():
        worst = max(worst, float(np.abs(rep_t.matrix(g) @ A - A @ rep_d.matrix(g)).max()))
    for Xd, Xt in zip(rep_d.lie_generators(), rep_t.lie_generators()):
        worst = max(worst, float(np.abs(Xt @ A - A @ Xd).max()))
    return worst


def invariance_residual(basis, rep) -> float:
    """Largest component of ``rho(g) V`` (or ``X V`` for Lie generators) outside ``V``."""
    B = np.asarray(basis, dtype=float).reshape(rep.dim, -1)
    if B.shape[1] == 0 or rep.dim == 0:
        return 0.0
    Q = np.linalg.qr(B)[0]
    P = Q @ Q.T
    worst = 0.0
    for g in rep.check_elements():
        M = rep.matrix(g) @ B
        worst = max(worst, float(np.abs(M - P @ M).max()))
    for X in rep.lie_generators():
        M = X @ B
        worst = max(worst, float(np.abs(M - P @ M).max()))
    return worst


def invariant_complement(V: Subspace, rep, tol: float = INVARIANCE_TOL) -> Subspace:
    """A complement of the invariant subspace ``V`` that is itself invariant.

    The orthogonal projector onto ``V`` is averaged over the group; the averaged
    projector is an equivariant projector onto ``V`` and its kernel is the
    complement.  When that kernel is ``V``'s orthogonal complement (always the
    case for orthogonal actions) the orthogonal complement's basis is returned.
    """
    if V.ambient_dim != rep.dim:
        raise DimensionMismatch("subspace and representation dimensions differ")
    res = invariance_residual(V.basis, rep)
    if res > tol:
        raise NotInvariantInput(f"subspace is not invariant (residual {res:.3e})")
    if V.dim == V.ambient_dim:
        return Subspace.zero(V.ambient_dim)
    P_avg = haar_average_matrix((rep, rep), V.projector())
    W = factorize_regular(P_avg).kernel
    if W.dim != V.ambient_dim - V.dim:
        raise NotInvariantInput("averaged projector has the wrong rank")
    perp = V.orthogonal_complement()
    if perp.same_as(W, 1e-10):
        return perp
    # non-orthogonal actions: the kernel is invariant but not orthogonal to V
    return Subspace(W.ambient_dim, W.basis)


@dataclass
class Stabilizer:
    """A stabilizer subgroup of ``group``: element ids (finite) or a torus subgroup."""

    group: object
    subgroup: object
    class_id: str = ""

    @property
    def kind(self) -> str:
        return "finite" if isinstance(self.group, FiniteGroup) else "torus"

    @property
    def lie_dim(self) -> int:
        return 0 if self.kind == "finite" else self.subgroup.lie_dim

    @property
    def order(self) -> int:
        """Number of elements (finite) or of connected components (torus)."""
        return len(self.subgroup) if self.kind == "finite" else self.subgroup.component_count

    def contains(self, g, tol: float = 1e-9) -> bool:
        if self.kind == "finite":
            return int(g) in self.subgroup
        return self.subgroup.contains(g, tol)

    def is_full(self) -> bool:
        if self.kind == "finite":
            return len(self.subgroup) == self.group.order
        return self.subgroup.key == self.group.key

    def as_group(self):
        if self.kind == "finite":
            return self.group.subgroup(self.subgroup)
        return self.subgroup

    def restriction_key(self):
        """Argument accepted by ``rep.restricted``."""
        return self.subgroup if self.kind == "torus" else frozenset(self.subgroup)

    def to_dict(self) -> dict:
        if self.kind == "finite":
            return {
                "kind": "finite",
                "elements": sorted(int(g) for g in self.subgroup),
                "order": self.order,
                "orbit_type": self.class_id,
            }
        return {
            "kind": "torus",
            "dim": self.lie_dim,
            "components": self.order,
            "annihilator": self.subgroup.annihilator.tolist(),
            "orbit_type": self.class_id,
        }


def _finite_class_id(G: FiniteGroup, H) -> str:
    return f"C{G.class_index(H)}"


def stabilizer_of(rep, x, tol: float = 1e-9) -> Stabilizer:
    """Elements fixing ``x`` (finite) or the closed torus subgroup fixing ``x``."""
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.size != rep.dim:
        raise DimensionMismatch("point and representation dimensions differ")
    H = rep.stabilizer_elements(x, tol)
    if isinstance(rep.group, FiniteGroup):
        cid = _finite_class_id(rep.group, H) if rep.group.order <= 64 else ""
        return Stabilizer(rep.group, frozenset(H), cid)
    return Stabilizer(rep.group, H, H.type_id)


@dataclass
class OrbitType:
    class_id: str
    order: int
    lie_dim: int
    representative: list
    table: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "class_id": self.class_id,
            "order": self.order,
            "lie_dim": self.lie_dim,
            "representative": self.representative,
            "table": self.table,
        }


def orbit_type_table(group) -> dict:
    """Subgroup classes and their partial order ``(H) <= (K)``."""
    if isinstance(group, FiniteGroup):
        classes = group.subgroup_classes
        return {
            "classes": [
                {"id": f"C{i}", "order": len(c[0]), "size": len(c), "representative": sorted(c[0])}
                for i, c in enumerate(classes)
            ],
            "leq": group.partial_order_table(),
        }
    return {"classes": [], "leq": [], "note": "torus subgroups are compared by lattice containment"}


def orbit_type_of(rep, x, tol: float = 1e-9) -> OrbitType:
    st = stabilizer_of(rep, x, tol)
    if st.kind == "finite":
        return OrbitType(
            st.class_id, st.order, 0, sorted(int(g) for g in st.subgroup), orbit_type_table(rep.group)
        )
    return OrbitType(st.class_id, st.order, st.lie_dim, st.subgroup.annihilator.tolist())


def orbit_type_leq(group, a: Stabilizer, b: Stabilizer) -> bool:
    """``(a) <= (b)``: a conjugate of ``a`` lies in ``b``."""
    if isinstance(group, FiniteGroup):
        return group.class_leq(group.class_index(a.subgroup), group.class_index(b.subgroup))
    return a.subgroup.is_subgroup_of(b.subgroup)


@dataclass
class SliceData:
    base: np.ndarray
    normal: Subspace
    orbit_tangent: Subspace
    stabilizer: Stabilizer
    radius: float
    sl1_residual: float
    sl2_min_distance: float
    group_samples: int
    slice_samples: int
    shrinks: int

    def embed(self, t) -> np.ndarray:
        return self.base + self.normal.basis @ np.asarray(t, dtype=float)

    def to_dict(self) -> dict:
        return {
            "base": self.base.tolist(),
            "slice_dim": self.normal.dim,
            "slice_basis": self.normal.basis.T.tolist(),
            "orbit_tangent_dim": self.orbit_tangent.dim,
            "stabilizer": self.stabilizer.to_dict(),
            "radius": self.radius,
            "sl1_residual": self.sl1_residual,
            # no element outside the stabilizer was sampled: nothing to separate
            "sl2_min_distance": self.sl2_min_distance if np.isfinite(self.sl2_min_distance) else None,
            "sl2_scope": f"{self.group_samples} group elements x {self.slice_samples} slice points",
        }


def _disc_distance(d: np.ndarray, N: np.ndarray, r: float) -> float:
    """Distance from the displacement ``d`` to the disc of radius ``r`` in span ``N``."""
    t = N.T @ d
    nt = np.linalg.norm(t)
    if nt > r:
        t = t * (r / nt)
    return float(np.linalg.norm(d - N @ t))


def linear_slice(
    rep,
    m,
    radius: float = 0.5,
    tol: float = 1e-9,
    max_shrinks: int = 10,
    group_samples: int = 64,
    seed: int = 0,
) -> SliceData:
    """Slice through ``m``: the invariant complement of the orbit tangent under the
    stabilizer, cut to a radius at which sampled translates of the slice by
    elements outside the stabilizer miss the slice."""
    m = np.asarray(m, dtype=float).reshape(-1)
    st = stabilizer_of(rep, m, tol)
    T = Subspace.span(rep.orbit_tangent(m), rep.dim)
    rep_m = rep.restricted(st.restriction_key())
    N = invariant_complement(T, rep_m)
    sl1 = invariance_residual(N.basis, rep_m) if N.dim else 0.0
    for h in rep_m.check_elements():
        sl1 = max(sl1, float(np.linalg.norm(rep_m.displacement(h, m, m))))

    if isinstance(rep.group, FiniteGroup):
        others = [g for g in rep.group.elements if not st.contains(g)]
    else:
        others = [g for g in rep.group.sample_elements(group_samples, seed) if not st.contains(g)]
    r = float(radius)
    for shrink in range(max_shrinks + 1):
        pts = np.vstack([ball_points(64, N.dim, r, seed), sphere_points(32, N.dim, r, seed)])
        best = np.inf
        for g in others:
            for t in pts:
                d = rep.displacement(g, m + N.basis @ t, m)
                best = min(best, _disc_distance(d, N.basis, r))
        if best > tol:
            return SliceData(m, N, T, st, r, sl1, float(best), len(others), len(pts), shrink)
        r *= 0.5
    raise RadiusNotFound(f"sampled slice condition still fails at radius {r * 2:.3e}")
