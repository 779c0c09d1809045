"""Kuranishi charts and deformation complexes at a solution of ``f = f(m)``."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..calculus.maps import DifferentiableMap, _vector, jacobian_fd
from ..errors import CorrespondenceFailure, EquivarianceViolation, VerificationFailure
from ..linear_core import ChainFamily, Subspace, chain_uniform_regularity
from ..normal_form import NormalFormSettings, level_set_points
from ..sampling import ball_points
from ..symmetry.core import Stabilizer, stabilizer_of
from ..symmetry.equivariant import EquivariantResult, equivariant_normal_form, tube_inverse
from ..symmetry.reps import GroupAction, SubRep

CORRESPONDENCE_TOL = 1e-8
EQUIVARIANCE_TOL = 1e-8


@dataclass
class DeformationComplex:
    d0: np.ndarray
    d1: np.ndarray
    homology: list
    euler_characteristic: int
    lie_dim_mu: int
    lie_dim_m: int

    @property
    def dims(self) -> list:
        return [self.d0.shape[1], self.d0.shape[0], self.d1.shape[0]]

    def to_dict(self) -> dict:
        return {
            "dims": self.dims,
            "d0": self.d0.tolist(),
            "d1": self.d1.tolist(),
            "homology": self.homology,
            "euler_characteristic": self.euler_characteristic,
        }


def deformation_complex(f: DifferentiableMap, m, action: GroupAction, tol: float = 1e-9) -> DeformationComplex:
    """``0 -> Lie(G_mu) -> T_m M -> T_mu N -> 0`` with the orbit map and ``Df(m)``.

    Homology is computed by the chain decomposition; the identities
    ``h0 = dim Lie(G_m)`` and ``h0 - h1 + h2 = sum of signed dimensions`` are checked.
    """
    m = _vector(m, f.dim_in, "base point")
    G_mu = stabilizer_of(action.rep_target, f(m), tol)
    rep_mu = action.rep_domain.restricted(G_mu.restriction_key())
    d0 = rep_mu.orbit_tangent(m).reshape(f.dim_in, -1)
    d1 = f.jacobian(m)
    C = ChainFamily.constant([d0, d1], [d0.shape[1], f.dim_in, f.dim_out])
    cert = chain_uniform_regularity(C, [np.zeros(1)])
    G_m = stabilizer_of(rep_mu, m, tol)
    h = list(cert.homology)
    expected = d0.shape[1] - f.dim_in + f.dim_out
    if cert.euler_characteristic != expected:
        raise VerificationFailure("Euler characteristic disagrees with the dimension count")
    if h[0] != G_m.lie_dim:
        raise VerificationFailure(f"h0 = {h[0]} but the stabilizer has dimension {G_m.lie_dim}")
    return DeformationComplex(d0, d1, h, cert.euler_characteristic, d0.shape[1], G_m.lie_dim)


@dataclass
class KuranishiChart:
    radius: float
    E: Subspace
    F: Subspace
    H: Stabilizer
    rep_E: SubRep
    rep_F: SubRep
    s: DifferentiableMap
    equivariant: EquivariantResult
    E_ambient: np.ndarray
    s_zero_residual: float
    s_derivative_norm: float
    equivariance_residual: float
    correspondence_residual: float
    correspondence_samples: int

    @property
    def virtual_dimension(self) -> int:
        return virtual_dimension(self)

    def kappa(self, x) -> np.ndarray:
        """Chart coordinates ``(u1, u2)`` of a point near the base, through the tube."""
        eq = self.equivariant
        tp = tube_inverse(eq.slice_rep, eq.slice, x)
        return eq.fixed_point.normal_form.charts.kappa(tp.slice_coords)

    def to_dict(self) -> dict:
        H = self.H
        return {
            "E_dim": self.E.dim,
            "F_dim": self.F.dim,
            "H": {"kind": H.kind, "dim": H.lie_dim, "order": H.order},
            "virtual_dimension": self.virtual_dimension,
            "radius": self.radius,
            "E_basis": self.E_ambient.T.tolist(),
            "checks": {
                "s_zero_residual": self.s_zero_residual,
                "s_derivative_norm": self.s_derivative_norm,
                "equivariance_residual": self.equivariance_residual,
                "correspondence_residual": self.correspondence_residual,
                "correspondence_samples": self.correspondence_samples,
            },
        }


def virtual_dimension(chart: KuranishiChart) -> int:
    return chart.E.dim - chart.F.dim - chart.H.lie_dim


def kuranishi_chart(
    f: DifferentiableMap,
    m,
    action: GroupAction,
    settings: NormalFormSettings | None = None,
    tol: float = CORRESPONDENCE_TOL,
    n_correspondence: int = 50,
) -> KuranishiChart:
    """``(V, E, F, H, s)`` from the equivariant normal form at ``m``, with the
    level-set correspondence checked on sampled solutions."""
    settings = settings or NormalFormSettings()
    m = _vector(m, f.dim_in, "base point")
    eq = equivariant_normal_form(f, m, action, settings)
    fp = eq.fixed_point
    nf = fp.normal_form
    k = nf.splitting.k
    E = Subspace(nf.splitting.K.shape[0], nf.splitting.K)
    F = Subspace(nf.splitting.W.shape[0], nf.splitting.W)
    s = nf.obstruction()
    rep_E, rep_F = fp.rep_kernel, fp.rep_cokernel
    fscale = max(1.0, float(np.linalg.norm(nf.value)))

    s0 = float(np.linalg.norm(s(np.zeros(k)))) if F.dim else 0.0
    Ds = jacobian_fd(s, np.zeros(k)) if k else np.zeros((F.dim, 0))
    ds = float(np.linalg.norm(Ds, 2)) if Ds.size else 0.0
    if s0 > settings.fs_zero_tol * fscale or ds > settings.dfs_tol * fscale:
        raise VerificationFailure("obstruction map does not vanish to first order at 0", None, max(s0, ds))

    worst, witness = 0.0, None
    if F.dim and k:
        for g in rep_E.check_elements():
            RE, RF = rep_E.matrix(g), rep_F.matrix(g)
            for x in ball_points(100, k, nf.radius, settings.seed + 10):
                res = float(np.linalg.norm(RF @ s(x) - s(RE @ x)))
                if res > worst:
                    worst, witness = res, {"point": x.tolist(), "element": np.asarray(g).tolist()}
    if worst > EQUIVARIANCE_TOL * fscale:
        raise EquivarianceViolation("obstruction map is not equivariant", witness, worst)

    mu = f(m)
    level = DifferentiableMap(f.dim_in, f.dim_out, lambda x: f(x) - mu, f.jacobian, name="level")
    starts = m + ball_points(n_correspondence, f.dim_in, eq.slice.radius / 4, settings.seed + 11)
    corr, count = 0.0, 0
    rep_mu = eq.slice_rep
    charts = nf.charts
    for z in level_set_points(level, starts):
        tp = tube_inverse(rep_mu, eq.slice, z)
        if np.linalg.norm(tp.slice_coords) > nf.radius / 2:
            continue
        u = charts.kappa(tp.slice_coords)
        count += 1
        res = max(
            tp.residual,
            float(np.linalg.norm(u[k:])) if u[k:].size else 0.0,
            float(np.linalg.norm(s(u[:k]))) if F.dim else 0.0,
        )
        corr = max(corr, res)
        if res > tol:
            raise CorrespondenceFailure("solution does not land on the zero set of s", z.tolist(), res)

    return KuranishiChart(
        radius=nf.radius, E=E, F=F, H=eq.point_stabilizer, rep_E=rep_E, rep_F=rep_F, s=s,
        equivariant=eq, E_ambient=eq.slice.normal.basis @ nf.splitting.K,
        s_zero_residual=s0, s_derivative_norm=ds, equivariance_residual=worst,
        correspondence_residual=corr, correspondence_samples=count,
    )
