"""Local normal forms of nonlinear maps at a point.

Near a base point ``m`` the domain is split as ``kernel + coimage`` and the
target as ``cokernel + image`` of the Jacobian ``J = Df(m)``.  With
``ft(x) = f(m + x) - f(m)``, ``x = K x1 + C x2`` and ``T = pr_img J |coimg``:

    psi(x1, x2) = (x1, T^{-1} pr_img ft(x))
    phi(y1, y2) = (y1 + pr_coker ft(psi^{-1}(0, T^{-1} y2)), y2)

The chart ``kappa`` is ``psi`` after translating ``m`` to the origin and the
chart ``rho`` is ``phi^{-1}`` after translating ``f(m)``.  In these charts

    rho(f(kappa^{-1}(u))) = (f_s(u), T u2)

where the singular part ``f_s`` takes values in the cokernel, vanishes on
``u1 = 0`` and has zero derivative at the origin.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .calculus.maps import DifferentiableMap, _vector, jacobian_fd
from .calculus.newton import LocalDiffeo, newton_solve
from .errors import (
    DimensionMismatch,
    DomainError,
    NewtonFailure,
    NonFinite,
    VerificationFailure,
)
from .linear_core import DEFAULT_TOL, LinearNormalForm, factorize_regular, numerical_rank
from .sampling import ball_points


@dataclass(frozen=True)
class NormalFormSettings:
    radius: float = 0.5
    samples: int = 200
    conjugacy_tol: float = 1e-8
    fs_zero_tol: float = 1e-9
    fs_zero_samples: int = 50
    dfs_tol: float = 1e-6
    rank_tol: float = DEFAULT_TOL
    newton_tol: float = 1e-12
    newton_max_iter: int = 50
    min_radius: float = 1e-6
    classify_samples: int = 64
    report_samples: int = 20
    seed: int = 0

    def with_radius(self, radius: float) -> "NormalFormSettings":
        return replace(self, radius=radius)


@dataclass(frozen=True)
class PointClassification:
    kind: str
    rank: int

    def __str__(self) -> str:
        if self.kind == "Subimmersion":
            return f"Subimmersion({self.rank})"
        return self.kind

    def to_dict(self) -> dict:
        return {"kind": self.kind, "rank": self.rank, "label": str(self)}


@dataclass(frozen=True)
class Splitting:
    """Bases for ``domain = span K + span C`` and ``target = span W + span U``.

    ``K`` spans the kernel and ``U`` the image of the Jacobian; ``C`` and ``W``
    are complements.  They need not be orthogonal.
    """

    K: np.ndarray
    C: np.ndarray
    W: np.ndarray
    U: np.ndarray

    @classmethod
    def orthogonal(cls, nf: LinearNormalForm) -> "Splitting":
        return cls(nf.kernel.basis, nf.coimage.basis, nf.cokernel.basis, nf.image.basis)

    @property
    def k(self) -> int:
        return self.K.shape[1]

    @property
    def r(self) -> int:
        return self.C.shape[1]

    @property
    def c(self) -> int:
        return self.W.shape[1]

    def domain_dual(self) -> tuple[np.ndarray, np.ndarray]:
        B = np.hstack([self.K, self.C])
        L = np.linalg.inv(B) if B.size else np.zeros((0, 0))
        return L[: self.k], L[self.k:]

    def target_dual(self) -> tuple[np.ndarray, np.ndarray]:
        B = np.hstack([self.W, self.U])
        L = np.linalg.inv(B) if B.size else np.zeros((0, 0))
        return L[: self.c], L[self.c:]


def _classify_rank(rank: int, dim_in: int, dim_out: int) -> str | None:
    if rank == dim_out:
        return "Submersion"
    if rank == dim_in:
        return "Immersion"
    return None


def classify_point(
    f: DifferentiableMap,
    m,
    neighborhood_samples=None,
    tol: float = DEFAULT_TOL,
    radius: float = 0.5,
    n_samples: int = 64,
    seed: int = 0,
) -> PointClassification:
    """Submersion / Immersion from the rank at ``m``; otherwise constant rank on
    the neighbourhood samples gives a subimmersion."""
    m = _vector(m, f.dim_in)
    r = numerical_rank(np.linalg.svd(f.jacobian(m), compute_uv=False), tol)
    kind = _classify_rank(r, f.dim_in, f.dim_out)
    if kind is not None:
        return PointClassification(kind, r)
    if neighborhood_samples is None:
        neighborhood_samples = m + ball_points(n_samples, f.dim_in, radius / 2, seed)
    for p in np.asarray(neighborhood_samples, dtype=float).reshape(-1, f.dim_in):
        try:
            J = f.jacobian(p)
        except DomainError:
            continue
        if numerical_rank(np.linalg.svd(J, compute_uv=False), tol) != r:
            return PointClassification("General", r)
    return PointClassification("Subimmersion", r)


class _Charts:
    """The maps built from one splitting at one base point (no verification)."""

    def __init__(self, f: DifferentiableMap, m: np.ndarray, split: Splitting, settings: NormalFormSettings):
        self.f = f
        self.m = m
        self.fm = f(m)
        self.split = split
        self.settings = settings
        self.Lk, self.Lc = split.domain_dual()
        self.Lw, self.Lu = split.target_dual()
        J = f.jacobian(m)
        self.T_hat = self.Lu @ J @ split.C
        self.T_hat_inv = np.linalg.inv(self.T_hat) if split.r else np.zeros((0, 0))

    def ft(self, x: np.ndarray) -> np.ndarray:
        return self.f(self.m + x) - self.fm

    def point(self, u1: np.ndarray, x2: np.ndarray) -> np.ndarray:
        return self.split.K @ u1 + self.split.C @ x2

    def solve_x2(self, u1: np.ndarray, target: np.ndarray, x2_0: np.ndarray) -> np.ndarray:
        """Solve ``pr_img ft(K u1 + C x2) = target`` for ``x2``."""
        if self.split.r == 0:
            return np.zeros(0)
        K, C = self.split.K, self.split.C
        res = newton_solve(
            lambda x2: self.Lu @ self.ft(K @ u1 + C @ x2),
            lambda x2: self.Lu @ self.f.jacobian(self.m + K @ u1 + C @ x2) @ C,
            target, x2_0, self.settings.newton_tol, self.settings.newton_max_iter,
        )
        return res.x

    # psi works on displacement coordinates x (origin at m)
    def psi(self, x: np.ndarray) -> np.ndarray:
        u1 = self.Lk @ x
        u2 = self.T_hat_inv @ (self.Lu @ self.ft(x)) if self.split.r else np.zeros(0)
        return np.concatenate([u1, u2])

    def psi_inverse(self, u: np.ndarray) -> np.ndarray:
        k = self.split.k
        u1, u2 = u[:k], u[k:]
        x2 = self.solve_x2(u1, self.T_hat @ u2, u2)
        return self.point(u1, x2)

    def phi_correction(self, y2: np.ndarray) -> np.ndarray:
        if self.split.c == 0:
            return np.zeros(0)
        x = self.psi_inverse(np.concatenate([np.zeros(self.split.k), self.T_hat_inv @ y2]))
        return self.Lw @ self.ft(x)

    def phi(self, v: np.ndarray) -> np.ndarray:
        c = self.split.c
        return np.concatenate([v[:c] + self.phi_correction(v[c:]), v[c:]])

    def phi_inverse(self, v: np.ndarray) -> np.ndarray:
        c = self.split.c
        return np.concatenate([v[:c] - self.phi_correction(v[c:]), v[c:]])

    def kappa(self, z) -> np.ndarray:
        return self.psi(np.asarray(z, dtype=float) - self.m)

    def kappa_inverse(self, u) -> np.ndarray:
        return self.m + self.psi_inverse(np.asarray(u, dtype=float))

    def kappa_jacobian(self, z) -> np.ndarray:
        rows = [self.Lk]
        if self.split.r:
            rows.append(self.T_hat_inv @ self.Lu @ self.f.jacobian(np.asarray(z, dtype=float)))
        return np.vstack(rows)

    def target_coords(self, y) -> np.ndarray:
        d = np.asarray(y, dtype=float) - self.fm
        return np.concatenate([self.Lw @ d, self.Lu @ d])

    def rho(self, y) -> np.ndarray:
        return self.phi_inverse(self.target_coords(y))

    def rho_inverse(self, v) -> np.ndarray:
        w = self.phi(np.asarray(v, dtype=float))
        c = self.split.c
        return self.fm + self.split.W @ w[:c] + self.split.U @ w[c:]

    def rho_jacobian(self, y) -> np.ndarray:
        c, k = self.split.c, self.split.k
        v = self.target_coords(y)
        top = self.Lw.copy()
        if self.split.r and c:
            x0 = self.psi_inverse(np.concatenate([np.zeros(k), self.T_hat_inv @ v[c:]]))
            A0 = self.Lu @ self.f.jacobian(self.m + x0) @ self.split.C
            dcorr = self.Lw @ self.f.jacobian(self.m + x0) @ self.split.C @ np.linalg.inv(A0)
            top = top - dcorr @ self.Lu
        return np.vstack([top, self.Lu])

    def f_hat(self, u) -> np.ndarray:
        k = self.split.k
        return np.concatenate([np.zeros(self.split.c), self.T_hat @ np.asarray(u)[k:]])

    def singular_part(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        if self.split.c == 0:
            return np.zeros(0)
        k = self.split.k
        x = self.psi_inverse(u)
        x0 = self.psi_inverse(np.concatenate([np.zeros(k), u[k:]]))
        return self.Lw @ (self.ft(x) - self.ft(x0))

    def singular_jacobian(self, u) -> np.ndarray:
        """Exact derivative of ``f_s`` from implicit differentiation of ``x2(u)``."""
        u = np.asarray(u, dtype=float)
        k, r, c = self.split.k, self.split.r, self.split.c
        n = k + r
        if c == 0:
            return np.zeros((0, n))
        K, C = self.split.K, self.split.C
        x = self.psi_inverse(u)
        Jx = self.f.jacobian(self.m + x)
        if r:
            A = self.Lu @ Jx @ C
            dx2_du1 = -np.linalg.solve(A, self.Lu @ Jx @ K)
            dx2_du2 = np.linalg.solve(A, self.T_hat)
            dx = np.hstack([K + C @ dx2_du1, C @ dx2_du2])
            x0 = self.psi_inverse(np.concatenate([np.zeros(k), u[k:]]))
            J0 = self.f.jacobian(self.m + x0)
            A0 = self.Lu @ J0 @ C
            d0 = np.hstack([np.zeros((c, k)), self.Lw @ J0 @ C @ np.linalg.solve(A0, self.T_hat)])
        else:
            dx = K
            d0 = np.zeros((c, n))
        return self.Lw @ Jx @ dx - d0


@dataclass
class NormalFormData:
    base: np.ndarray
    value: np.ndarray
    linear: LinearNormalForm
    splitting: Splitting
    core_map: np.ndarray
    kappa: LocalDiffeo
    rho: LocalDiffeo
    singular_part: DifferentiableMap
    radius: float
    classification: PointClassification
    verification: dict
    settings: NormalFormSettings
    charts: _Charts = field(repr=False)

    @property
    def dims(self) -> dict:
        s = self.splitting
        return {"ker": s.k, "coimg": s.r, "img": s.r, "coker": s.c}

    def kappa_inverse(self, u) -> np.ndarray:
        return self.charts.kappa_inverse(u)

    def rho_inverse(self, v) -> np.ndarray:
        return self.charts.rho_inverse(v)

    def f_hat(self, u) -> np.ndarray:
        return self.charts.f_hat(u)

    def conjugacy_residual(self, u) -> float:
        u = np.asarray(u, dtype=float)
        lhs = self.charts.rho(self.charts.f(self.charts.kappa_inverse(u)))
        rhs = self.f_hat(u)
        rhs[: self.splitting.c] += self.singular_part(u)
        return float(np.linalg.norm(lhs - rhs))

    def obstruction(self) -> DifferentiableMap:
        """``x1 -> f_s(x1, 0)`` on kernel coordinates."""
        k, r = self.splitting.k, self.splitting.r
        fs = self.singular_part
        ch = self.charts
        batch = None
        if r == 0 and ch.f.batch is not None:
            # no coimage: f_s(u1) = pr_coker ft(K u1), which vectorizes
            def batch(U):
                vals = ch.f.evaluate_batch(ch.m + U @ ch.split.K.T) - ch.fm
                return vals @ ch.Lw.T

        return DifferentiableMap(
            k, self.splitting.c,
            lambda x1: fs(np.concatenate([x1, np.zeros(r)])),
            lambda x1: fs.jacobian(np.concatenate([x1, np.zeros(r)]))[:, :k],
            batch=batch,
            name="obstruction",
        )

    def fs_samples(self, n: int | None = None) -> list:
        n = self.settings.report_samples if n is None else n
        pts = ball_points(n, self.base.size, self.radius, self.settings.seed + 1)
        return [list(u) + list(self.singular_part(u)) for u in pts]

    def to_report(self) -> dict:
        return {
            "classification": str(self.classification),
            "dims": self.dims,
            "radius": self.radius,
            "verification": {
                "max_conjugacy_residual": self.verification["max_conjugacy_residual"],
                "max_fs_zero_residual": self.verification["max_fs_zero_residual"],
                "dfs_norm": self.verification["dfs_norm"],
            },
            "fs_samples": self.fs_samples(),
        }


def _verify(charts: _Charts, fs: DifferentiableMap, radius: float, settings: NormalFormSettings) -> dict:
    n = charts.m.size
    k, r = charts.split.k, charts.split.r
    scale = max(1.0, float(np.linalg.norm(charts.fm)))
    pts = ball_points(settings.samples, n, radius, settings.seed)
    worst_conj, worst_pt = 0.0, None
    for u in pts:
        x = charts.kappa_inverse(u)
        lhs = charts.rho(charts.f(x))
        rhs = charts.f_hat(u)
        rhs[: charts.split.c] += fs(u)
        res = max(float(np.linalg.norm(lhs - rhs)), float(np.linalg.norm(charts.kappa(x) - u)))
        if res > worst_conj:
            worst_conj, worst_pt = res, u
    if worst_conj > settings.conjugacy_tol * scale:
        raise VerificationFailure("conjugacy identity violated", worst_pt.tolist(), worst_conj)

    worst_zero = 0.0
    if r:
        for t in ball_points(settings.fs_zero_samples, r, radius, settings.seed + 2):
            val = fs(np.concatenate([np.zeros(k), t]))
            worst_zero = max(worst_zero, float(np.linalg.norm(val)) if val.size else 0.0)
            if worst_zero > settings.fs_zero_tol * scale:
                raise VerificationFailure("singular part does not vanish on the coimage", t.tolist(), worst_zero)

    D = jacobian_fd(fs, np.zeros(n))
    dfs = float(np.linalg.norm(D, 2)) if D.size else 0.0
    if dfs > settings.dfs_tol * scale:
        raise VerificationFailure("derivative of the singular part is not zero", [0.0] * n, dfs)
    D_exact = fs.jacobian(np.zeros(n))
    return {
        "max_conjugacy_residual": worst_conj,
        "max_fs_zero_residual": worst_zero,
        "dfs_norm": dfs,
        "dfs_exact_norm": float(np.linalg.norm(D_exact, 2)) if D_exact.size else 0.0,
        "samples": int(settings.samples),
    }


def _build(f, m, split: Splitting, linear: LinearNormalForm, classification, settings) -> NormalFormData:
    charts = _Charts(f, m, split, settings)
    n = m.size
    fs = DifferentiableMap(n, split.c, charts.singular_part, charts.singular_jacobian, name="f_s")
    kappa_map = DifferentiableMap(n, n, charts.kappa, charts.kappa_jacobian, name="kappa")
    rho_map = DifferentiableMap(f.dim_out, f.dim_out, charts.rho, charts.rho_jacobian, name="rho")
    radius = settings.radius
    last_error: Exception | None = None
    while radius >= settings.min_radius:
        try:
            verification = _verify(charts, fs, radius, settings)
        except (NewtonFailure, VerificationFailure, DomainError, NonFinite) as exc:
            last_error = exc
            radius *= 0.5
            continue
        kappa = LocalDiffeo(kappa_map, m, radius, settings.newton_tol, inverse=charts.kappa_inverse, adapt=False)
        rho = LocalDiffeo(rho_map, charts.fm, radius, settings.newton_tol, inverse=charts.rho_inverse, adapt=False)
        verification["radius_halvings"] = int(round(np.log2(settings.radius / radius)))
        return NormalFormData(
            base=m, value=charts.fm, linear=linear, splitting=split, core_map=charts.T_hat,
            kappa=kappa, rho=rho, singular_part=fs, radius=radius,
            classification=classification, verification=verification, settings=settings,
            charts=charts,
        )
    sample = getattr(last_error, "sample", None)
    residual = getattr(last_error, "residual", None)
    raise VerificationFailure(
        f"no verified radius above {settings.min_radius}: {last_error}", sample, residual
    )


def normal_form_at(
    f: DifferentiableMap,
    m,
    settings: NormalFormSettings | None = None,
    splitting: Splitting | None = None,
) -> NormalFormData:
    """Construct and verify the local normal form of ``f`` at ``m``."""
    settings = settings or NormalFormSettings()
    m = _vector(m, f.dim_in, "base point")
    J = f.jacobian(m)
    linear = factorize_regular(J, settings.rank_tol)
    split = splitting or Splitting.orthogonal(linear)
    if split.k != linear.kernel.dim or split.c != linear.cokernel.dim:
        raise DimensionMismatch("splitting does not match the Jacobian's kernel and cokernel")
    classification = classify_point(
        f, m, tol=settings.rank_tol, radius=settings.radius,
        n_samples=settings.classify_samples, seed=settings.seed,
    )
    return _build(f, m, split, linear, classification, settings)


@dataclass
class ReducedProblem:
    kernel_dim: int
    x2: DifferentiableMap
    reduced_map: DifferentiableMap
    normal_form: NormalFormData
    agreement_residual: float
    radius: float

    def to_report(self, n: int | None = None) -> dict:
        n = self.normal_form.settings.report_samples if n is None else n
        pts = ball_points(n, self.kernel_dim, self.radius, self.normal_form.settings.seed + 3)
        return {
            "dims": self.normal_form.dims,
            "radius": self.radius,
            "agreement_residual": self.agreement_residual,
            "reduced_samples": [list(x) + list(self.reduced_map(x)) for x in pts],
            "x2_samples": [list(x) + list(self.x2(x)) for x in pts],
        }


def lyapunov_schmidt(
    f: DifferentiableMap, m, settings: NormalFormSettings | None = None, nf: NormalFormData | None = None
) -> ReducedProblem:
    """Solve the image equation for the coimage coordinate and project the rest
    onto the cokernel; the result must agree with ``f_s(x1, 0)``."""
    settings = settings or NormalFormSettings()
    nf = nf or normal_form_at(f, m, settings)
    charts = nf.charts
    k, r, c = nf.splitting.k, nf.splitting.r, nf.splitting.c
    K, C = nf.splitting.K, nf.splitting.C

    def x2_of(x1):
        return charts.solve_x2(np.asarray(x1, dtype=float), np.zeros(r), np.zeros(r))

    def x2_jac(x1):
        if r == 0:
            return np.zeros((0, k))
        J = f.jacobian(charts.m + charts.point(x1, x2_of(x1)))
        return -np.linalg.solve(charts.Lu @ J @ C, charts.Lu @ J @ K)

    def reduced(x1):
        x1 = np.asarray(x1, dtype=float)
        return charts.Lw @ charts.ft(charts.point(x1, x2_of(x1)))

    def reduced_jac(x1):
        x1 = np.asarray(x1, dtype=float)
        J = f.jacobian(charts.m + charts.point(x1, x2_of(x1)))
        return charts.Lw @ J @ (K + C @ x2_jac(x1))

    x2_map = DifferentiableMap(k, r, x2_of, x2_jac, name="x2")
    red = DifferentiableMap(k, c, reduced, reduced_jac, name="reduced")
    obstruction = nf.obstruction()
    worst, worst_pt = 0.0, None
    scale = max(1.0, float(np.linalg.norm(nf.value)))
    for x1 in ball_points(settings.fs_zero_samples, k, nf.radius, settings.seed + 4):
        d = float(np.linalg.norm(red(x1) - obstruction(x1))) if c else 0.0
        if d > worst:
            worst, worst_pt = d, x1
    if worst > settings.conjugacy_tol * scale:
        raise VerificationFailure(
            "reduced map disagrees with the singular part", worst_pt.tolist(), worst
        )
    return ReducedProblem(k, x2_map, red, nf, worst, nf.radius)


def level_set_points(
    g: DifferentiableMap,
    starts: np.ndarray,
    tol: float = 1e-10,
    max_iter: int = 100,
) -> list[np.ndarray]:
    """Minimum-norm Gauss-Newton projection of each start onto ``g = 0``."""
    out = []
    for x in np.asarray(starts, dtype=float).reshape(-1, g.dim_in):
        x = x.copy()
        try:
            for _ in range(max_iter):
                val = g(x)
                if np.linalg.norm(val) <= tol:
                    out.append(x)
                    break
                x = x - np.linalg.pinv(g.jacobian(x), rcond=1e-12) @ val
        except (DomainError, NonFinite):
            continue
    return out


@dataclass
class RelativeNormalForm:
    normal_form: NormalFormData
    f_bar: DifferentiableMap
    f_P: DifferentiableMap
    preimage_residual: float
    preimage_samples: int

    def to_report(self) -> dict:
        rep = self.normal_form.to_report()
        rep["relative"] = {
            "preimage_residual": self.preimage_residual,
            "preimage_samples": self.preimage_samples,
        }
        return rep


def relative_normal_form(
    f: DifferentiableMap,
    m,
    P_chart: LocalDiffeo | None = None,
    Z: Sequence[int] = (),
    settings: NormalFormSettings | None = None,
    preimage_tol: float = 1e-8,
) -> RelativeNormalForm:
    """Normal form of ``f`` relative to a submanifold ``P`` of the target.

    ``P_chart`` maps a neighbourhood of ``f(m)`` so that ``P`` becomes the set of
    points whose coordinates outside the index set ``Z`` vanish.
    """
    settings = settings or NormalFormSettings()
    m = _vector(m, f.dim_in, "base point")
    chart = P_chart or LocalDiffeo(DifferentiableMap.identity(f.dim_out), adapt=False)
    Z = sorted(int(i) for i in Z)
    Zc = [i for i in range(f.dim_out) if i not in Z]

    def f_bar_val(x):
        return chart(f(x))[Zc]

    def f_bar_jac(x):
        return (chart.jacobian(f(x)) @ f.jacobian(x))[Zc]

    f_bar = DifferentiableMap(f.dim_in, len(Zc), f_bar_val, f_bar_jac, name="f_bar")
    off = float(np.linalg.norm(f_bar(m))) if Zc else 0.0
    if off > preimage_tol:
        raise DomainError(f"f(m) does not lie on the submanifold (distance {off:.3e})")
    nf = normal_form_at(f_bar, m, settings)
    charts = nf.charts
    f_P = DifferentiableMap(
        f.dim_in, len(Z),
        lambda u: chart(f(charts.kappa_inverse(u)))[Z],
        name="f_P",
    )
    starts = m + ball_points(settings.fs_zero_samples, f.dim_in, nf.radius / 2, settings.seed + 5)
    worst = 0.0
    found = 0
    k = nf.splitting.k
    for z in level_set_points(f_bar, starts):
        if np.linalg.norm(z - m) > nf.radius / 2:
            continue
        u = charts.kappa(z)
        if np.linalg.norm(u) > nf.radius:
            continue
        found += 1
        s_val = nf.singular_part(np.concatenate([u[:k], np.zeros(nf.splitting.r)]))
        worst = max(worst, float(np.linalg.norm(u[k:])) if u[k:].size else 0.0)
        worst = max(worst, float(np.linalg.norm(s_val)) if s_val.size else 0.0)
    if worst > preimage_tol:
        raise VerificationFailure("preimage of the submanifold does not match the normal form", None, worst)
    return RelativeNormalForm(nf, f_bar, f_P, worst, found)
