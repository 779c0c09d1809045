"""Equivariant local normal forms at fixed points and along slices."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from ..calculus.maps import DifferentiableMap, _vector
from ..errors import EquivarianceViolation, NotFixedPoint
from ..linear_core import Subspace, factorize_regular
from ..normal_form import NormalFormData, NormalFormSettings, Splitting, normal_form_at
from ..sampling import ball_points
from .core import (
    SliceData,
    Stabilizer,
    invariance_residual,
    invariant_complement,
    linear_slice,
    stabilizer_of,
)
from .groups import TWO_PI, FiniteGroup
from .reps import GroupAction, SubRep

EQUIVARIANCE_TOL = 1e-8
SUBSPACE_TOL = 1e-9
EQUIVARIANCE_SAMPLES = 100


def equivariance_residual(f: DifferentiableMap, action: GroupAction, points, elements=None):
    """Largest ``|rho_target(g) f(x) - f(g . x)|`` over points and group elements,
    with the worst (point, element) pair."""
    rd, rt = action.rep_domain, action.rep_target
    elements = rd.check_elements() if elements is None else elements
    worst, witness = 0.0, None
    for g in elements:
        for x in points:
            res = float(np.linalg.norm(rt.act(g, f(x)) - f(rd.act(g, x))))
            if res > worst:
                worst = res
                witness = {"point": np.asarray(x).tolist(), "element": np.asarray(g).tolist()}
    return worst, witness


def _prefer(candidate: Subspace, preferred: Subspace) -> Subspace:
    return preferred if candidate.same_as(preferred, 1e-10) else candidate


@dataclass
class EquivariantNormalFormData:
    normal_form: NormalFormData
    action: GroupAction
    rep_kernel: SubRep
    rep_coimage: SubRep
    rep_cokernel: SubRep
    rep_image: SubRep
    fs_equivariance_residual: float
    map_equivariance_residual: float
    subspace_residuals: dict

    def chart_matrix(self, g) -> np.ndarray:
        """Action on chart coordinates ``(u1, u2)``."""
        k, r = self.rep_kernel.dim, self.rep_coimage.dim
        M = np.zeros((k + r, k + r))
        M[:k, :k] = self.rep_kernel.matrix(g)
        M[k:, k:] = self.rep_coimage.matrix(g)
        return M

    def to_report(self) -> dict:
        rep = self.normal_form.to_report()
        rep["equivariance"] = {
            "fs_residual": self.fs_equivariance_residual,
            "map_residual": self.map_equivariance_residual,
            "subspace_residuals": self.subspace_residuals,
        }
        return rep


def equivariant_normal_form_fixed_point(
    f: DifferentiableMap,
    m,
    action: GroupAction,
    settings: NormalFormSettings | None = None,
    tol: float = SUBSPACE_TOL,
    equivariance_tol: float = EQUIVARIANCE_TOL,
    n_samples: int = EQUIVARIANCE_SAMPLES,
) -> EquivariantNormalFormData:
    """Normal form at a point fixed by the whole group, built from invariant complements."""
    settings = settings or NormalFormSettings()
    m = _vector(m, f.dim_in, "base point")
    rd, rt = action.rep_domain, action.rep_target
    scale = max(1.0, float(np.linalg.norm(m)))
    for g in rd.check_elements():
        if np.linalg.norm(rd.displacement(g, m, m)) > tol * scale:
            raise NotFixedPoint(f"base point is moved by group element {np.asarray(g).tolist()}")
    T = rd.orbit_tangent(m)
    if T.size and np.abs(T).max() > tol * scale:
        raise NotFixedPoint("base point has a nontrivial orbit under the identity component")

    pts = m + ball_points(n_samples, f.dim_in, settings.radius, settings.seed + 7)
    fscale = max(1.0, float(np.linalg.norm(f(m))))
    map_res, witness = equivariance_residual(f, action, pts)
    if map_res > equivariance_tol * fscale:
        raise EquivarianceViolation("map is not equivariant on samples", witness, map_res)

    linear = factorize_regular(f.jacobian(m), settings.rank_tol)
    K, U = linear.kernel, linear.image
    C = _prefer(invariant_complement(K, rd, tol), linear.coimage)
    W = _prefer(invariant_complement(U, rt, tol), linear.cokernel)
    sub_res = {
        "kernel": invariance_residual(K.basis, rd),
        "coimage": invariance_residual(C.basis, rd),
        "image": invariance_residual(U.basis, rt),
        "cokernel": invariance_residual(W.basis, rt),
    }
    bad = {k: v for k, v in sub_res.items() if v > tol}
    if bad:
        raise EquivarianceViolation(f"decomposition is not invariant: {bad}", None, max(bad.values()))
    split = Splitting(K.basis, C.basis, W.basis, U.basis)
    nf = normal_form_at(f, m, settings, splitting=split)

    reps = SubRep(rd, K.basis), SubRep(rd, C.basis), SubRep(rt, W.basis), SubRep(rt, U.basis)
    data = EquivariantNormalFormData(nf, action, *reps, 0.0, map_res, sub_res)
    fs = nf.singular_part
    worst, witness = 0.0, None
    for g in rd.check_elements():
        R = data.chart_matrix(g)
        Rw = reps[2].matrix(g)
        for u in ball_points(n_samples, f.dim_in, nf.radius, settings.seed + 8):
            res = float(np.linalg.norm(Rw @ fs(u) - fs(R @ u))) if split.c else 0.0
            if res > worst:
                worst, witness = res, {"point": u.tolist(), "element": np.asarray(g).tolist()}
    if worst > equivariance_tol * fscale:
        raise EquivarianceViolation("singular part is not equivariant", witness, worst)
    data.fs_equivariance_residual = worst
    return data


@dataclass
class TubePoint:
    element: np.ndarray
    slice_coords: np.ndarray
    residual: float


def tube_inverse(rep, sl: SliceData, x, group_rep=None, max_iter: int = 50) -> TubePoint:
    """Write ``x = g . (m + N t)`` with ``t`` small.

    Finite groups are searched exhaustively; for tori the angle is found by
    Gauss-Newton on the component of ``g^{-1} x - m`` along the orbit.
    """
    x = np.asarray(x, dtype=float)
    m, N = sl.base, sl.normal.basis
    group = rep.group
    if isinstance(group, FiniteGroup):
        best = None
        for g in group.elements:
            d = rep.displacement(group.inv(g), x, m)
            t = N.T @ d
            res = float(np.linalg.norm(d - N @ t))
            key = (round(res, 12), float(np.linalg.norm(t)))
            if best is None or key < best[0]:
                best = (key, TubePoint(np.array([g]), t, res))
        return best[1]
    L = group.lie_basis
    Tb = sl.orbit_tangent.basis
    ld = L.shape[1]
    # several starting angles: the orbit-orthogonality equation also holds at
    # the far side of the orbit
    per_axis = 8 if ld <= 2 else 4
    grid = TWO_PI * np.arange(per_axis) / per_axis
    starts = [np.array(t) for t in itertools.product(grid, repeat=ld)] if ld else [np.zeros(0)]
    best = None
    for c, tau0 in itertools.product(group.components, starts):
        tau = tau0.copy()
        for _ in range(max_iter):
            theta = c + L @ tau
            y = rep.act(-theta, x)
            d = rep.displacement(-theta, x, m)
            r = Tb.T @ d
            if np.linalg.norm(r) <= 1e-13:
                break
            cols = [-(rep.generator(xi) @ y + rep.shift_vector(xi)) for xi in L.T]
            Jr = Tb.T @ np.array(cols).T.reshape(rep.dim, -1)
            step = np.linalg.lstsq(Jr, -r, rcond=None)[0]
            tau = tau + step
            if np.linalg.norm(step) <= 1e-15:
                break
        theta = c + L @ tau
        d = rep.displacement(-theta, x, m)
        t = N.T @ d
        res = float(np.linalg.norm(d - N @ t))
        key = (round(res, 12), float(np.linalg.norm(t)))
        if best is None or key < best[0]:
            best = (key, TubePoint(theta, t, res))
    return best[1]


@dataclass
class EquivariantResult:
    target_stabilizer: Stabilizer
    point_stabilizer: Stabilizer
    slice: SliceData
    slice_map: DifferentiableMap
    fixed_point: EquivariantNormalFormData
    tube_residual: float
    tube_samples: int
    slice_rep: object = None

    @property
    def classification(self):
        return self.fixed_point.normal_form.classification

    def to_report(self) -> dict:
        rep = self.fixed_point.to_report()
        rep["slice"] = self.slice.to_dict()
        rep["target_stabilizer"] = self.target_stabilizer.to_dict()
        rep["point_stabilizer"] = self.point_stabilizer.to_dict()
        rep["tube"] = {"residual": self.tube_residual, "samples": self.tube_samples}
        return rep


def equivariant_normal_form(
    f: DifferentiableMap,
    m,
    action: GroupAction,
    settings: NormalFormSettings | None = None,
    tol: float = SUBSPACE_TOL,
    tube_samples: int = 32,
) -> EquivariantResult:
    """Slice for the stabilizer of ``f(m)`` through ``m``, then the fixed-point normal
    form of the slice map under the stabilizer of ``m``."""
    settings = settings or NormalFormSettings()
    m = _vector(m, f.dim_in, "base point")
    mu = f(m)
    G_mu = stabilizer_of(action.rep_target, mu, tol)
    act_mu = action.restricted(G_mu.restriction_key())
    sl = linear_slice(act_mu.rep_domain, m, settings.radius, tol, seed=settings.seed)
    G_m = sl.stabilizer
    act_m = act_mu.restricted(G_m.restriction_key())
    N = sl.normal.basis
    d = N.shape[1]

    slice_map = DifferentiableMap(
        d, f.dim_out,
        lambda t: f(m + N @ t),
        lambda t: f.jacobian(m + N @ t) @ N,
        name="slice restriction",
    )
    slice_action = GroupAction(SubRep(act_m.rep_domain, N), act_m.rep_target)
    fp = equivariant_normal_form_fixed_point(
        slice_map, np.zeros(d), slice_action, settings.with_radius(min(settings.radius, sl.radius)), tol
    )

    rep_mu = act_mu.rep_domain
    worst = 0.0
    pts = m + ball_points(tube_samples, f.dim_in, sl.radius / 4, settings.seed + 9)
    for x in pts:
        tp = tube_inverse(rep_mu, sl, x)
        g = tp.element[0] if isinstance(rep_mu.group, FiniteGroup) else tp.element
        back = rep_mu.displacement(g, m + N @ tp.slice_coords, x)
        value = act_mu.rep_target.act(g, slice_map(tp.slice_coords)) - f(x)
        worst = max(worst, tp.residual, float(np.linalg.norm(back)), float(np.linalg.norm(value)))
    return EquivariantResult(G_mu, G_m, sl, slice_map, fp, worst, len(pts), rep_mu)
