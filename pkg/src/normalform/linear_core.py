"""Regular-operator factorizations of matrices and matrix families.

Every matrix ``T`` (``m x n``) is split as

    T = P @ [[0, 0], [0, core]] @ Q

where ``Q`` stacks orthonormal bases of ``ker T`` and ``coimg T = (ker T)^perp``
(rows), and ``P`` places orthonormal bases of ``coker T = (img T)^perp`` and
``img T`` side by side (columns).  The numerical rank uses a cutoff relative to
the largest singular value.

Families ``p -> T_p`` are checked for uniform regularity on an explicit, finite
set of parameter samples; certificates never claim more than those samples.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .errors import (
    BaseNotRegular,
    DimensionMismatch,
    DomainError,
    ExtendedSingular,
    NonFinite,
    NotAComplex,
    SingularBlock,
)

DEFAULT_TOL = 1e-10
# residual threshold for identities that hold exactly in exact arithmetic
CHECK_TOL = 1e-8


def as_matrix(T, name="matrix") -> np.ndarray:
    """Coerce to a finite 2-D float array."""
    A = np.asarray(T, dtype=float)
    if A.ndim == 1:
        A = A.reshape(1, -1) if A.size else A.reshape(0, 0)
    if A.ndim != 2:
        raise DimensionMismatch(f"{name} must be two-dimensional, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise NonFinite(f"{name} has non-finite entries")
    return A


def spectral_norm(A: np.ndarray) -> float:
    if A.size == 0:
        return 0.0
    return float(np.linalg.norm(A, 2))


def _singular_values(A: np.ndarray) -> np.ndarray:
    if A.size == 0:
        return np.zeros(0)
    return np.linalg.svd(A, compute_uv=False)


def canonical_signs(B: np.ndarray, threshold: float = 1e-8) -> np.ndarray:
    """Flip columns so that the first non-negligible entry of each is positive."""
    B = np.array(B, dtype=float, copy=True)
    for j in range(B.shape[1]):
        col = B[:, j]
        idx = np.flatnonzero(np.abs(col) > threshold * max(1.0, np.abs(col).max()))
        if idx.size and col[idx[0]] < 0:
            B[:, j] = -col
    return B + 0.0  # no negative zeros in reports


@dataclass(frozen=True)
class Subspace:
    """A linear subspace given by an orthonormal basis (columns of ``basis``)."""

    ambient_dim: int
    basis: np.ndarray

    def __post_init__(self):
        B = np.asarray(self.basis, dtype=float)
        B = B.reshape(self.ambient_dim, -1) if self.ambient_dim else B.reshape(0, 0)
        object.__setattr__(self, "basis", B)

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    @classmethod
    def zero(cls, ambient_dim: int) -> "Subspace":
        return cls(ambient_dim, np.zeros((ambient_dim, 0)))

    @classmethod
    def full(cls, ambient_dim: int) -> "Subspace":
        return cls(ambient_dim, np.eye(ambient_dim))

    @classmethod
    def span(cls, vectors, ambient_dim: int | None = None, tol: float = DEFAULT_TOL) -> "Subspace":
        """Orthonormal basis of the column span of ``vectors``."""
        V = np.asarray(vectors, dtype=float)
        if ambient_dim is None:
            ambient_dim = V.shape[0]
        V = V.reshape(ambient_dim, -1)
        if V.shape[1] == 0 or not np.any(V):
            return cls.zero(ambient_dim)
        U, s, _ = np.linalg.svd(V, full_matrices=False)
        r = int(np.sum(s > tol * s[0]))
        return cls(ambient_dim, canonical_signs(U[:, :r]))

    def projector(self) -> np.ndarray:
        return self.basis @ self.basis.T

    def orthogonal_complement(self) -> "Subspace":
        if self.dim == 0:
            return Subspace.full(self.ambient_dim)
        U, _, _ = np.linalg.svd(self.basis, full_matrices=True)
        return Subspace(self.ambient_dim, canonical_signs(U[:, self.dim:]))

    def distance_to(self, v: np.ndarray) -> float:
        v = np.asarray(v, dtype=float)
        return float(np.linalg.norm(v - self.projector() @ v))

    def contains(self, vectors, tol: float = CHECK_TOL) -> bool:
        V = np.asarray(vectors, dtype=float).reshape(self.ambient_dim, -1)
        if V.shape[1] == 0:
            return True
        R = V - self.projector() @ V
        return bool(np.linalg.norm(R) <= tol * max(1.0, np.linalg.norm(V)))

    def same_as(self, other: "Subspace", tol: float = CHECK_TOL) -> bool:
        return self.dim == other.dim and bool(
            np.linalg.norm(self.projector() - other.projector()) <= tol
        )

    def orthonormality_residual(self) -> float:
        if self.dim == 0:
            return 0.0
        return float(np.abs(self.basis.T @ self.basis - np.eye(self.dim)).max())

    def to_dict(self) -> dict:
        return {"ambient_dim": self.ambient_dim, "dim": self.dim, "basis": self.basis.T.tolist()}


@dataclass(frozen=True)
class LinearNormalForm:
    matrix: np.ndarray
    kernel: Subspace
    coimage: Subspace
    image: Subspace
    cokernel: Subspace
    core: np.ndarray
    singular_values: np.ndarray
    tol: float = DEFAULT_TOL

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape

    @property
    def rank(self) -> int:
        return self.core.shape[0]

    @property
    def index(self) -> int:
        return self.kernel.dim - self.cokernel.dim

    @property
    def basis_domain(self) -> np.ndarray:
        """``Q``: maps a domain vector to its (kernel, coimage) coordinates."""
        return np.vstack([self.kernel.basis.T, self.coimage.basis.T])

    @property
    def basis_target(self) -> np.ndarray:
        """``P``: maps (cokernel, image) coordinates to a target vector."""
        return np.hstack([self.cokernel.basis, self.image.basis])

    def middle(self) -> np.ndarray:
        m, n = self.shape
        M = np.zeros((m, n))
        r = self.rank
        if r:
            M[m - r:, n - r:] = self.core
        return M

    def reconstruct(self) -> np.ndarray:
        return self.basis_target @ self.middle() @ self.basis_domain

    def reconstruction_residual(self) -> float:
        return float(np.linalg.norm(self.reconstruct() - self.matrix))

    def orthogonality_residual(self) -> float:
        m, n = self.shape
        res = 0.0
        if n:
            Q = self.basis_domain
            res = max(res, float(np.abs(Q @ Q.T - np.eye(n)).max()))
        if m:
            P = self.basis_target
            res = max(res, float(np.abs(P.T @ P - np.eye(m)).max()))
        return res

    def core_inverse(self) -> np.ndarray:
        return np.linalg.inv(self.core) if self.rank else np.zeros((0, 0))

    def to_dict(self) -> dict:
        return {
            "shape": list(self.shape),
            "rank": self.rank,
            "index": self.index,
            "dims": {
                "ker": self.kernel.dim,
                "coimg": self.coimage.dim,
                "img": self.image.dim,
                "coker": self.cokernel.dim,
            },
            "kernel": self.kernel.basis.T.tolist(),
            "coimage": self.coimage.basis.T.tolist(),
            "image": self.image.basis.T.tolist(),
            "cokernel": self.cokernel.basis.T.tolist(),
            "core": self.core.tolist(),
            "singular_values": self.singular_values.tolist(),
            "reconstruction_residual": self.reconstruction_residual(),
            "orthogonality_residual": self.orthogonality_residual(),
            "tol": self.tol,
        }


def numerical_rank(s: np.ndarray, tol: float) -> int:
    if s.size == 0 or s[0] <= 0.0:
        return 0
    return int(np.sum(s > tol * s[0]))


def factorize_regular(T, tol: float = DEFAULT_TOL) -> LinearNormalForm:
    """Factorize ``T`` into kernel/coimage/image/cokernel bases and an invertible core."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    A = as_matrix(T, "T")
    m, n = A.shape
    if m == 0 or n == 0:
        return LinearNormalForm(
            A, Subspace.full(n), Subspace.zero(n), Subspace.zero(m), Subspace.full(m),
            np.zeros((0, 0)), np.zeros(0), tol,
        )
    U, s, Vh = np.linalg.svd(A, full_matrices=True)
    r = numerical_rank(s, tol)
    V = Vh.T
    coimg = V[:, :r].copy()
    img = U[:, :r].copy()
    # flip coimage/image columns in pairs so the core keeps a positive diagonal
    for j in range(r):
        col = coimg[:, j]
        idx = np.flatnonzero(np.abs(col) > 1e-8 * np.abs(col).max())
        if idx.size and col[idx[0]] < 0:
            coimg[:, j] *= -1
            img[:, j] *= -1
    ker = canonical_signs(V[:, r:])
    coker = canonical_signs(U[:, r:])
    core = img.T @ A @ coimg
    return LinearNormalForm(
        A, Subspace(n, ker), Subspace(n, coimg), Subspace(m, img), Subspace(m, coker),
        core, s, tol,
    )


def fredholm_index(T, tol: float = DEFAULT_TOL) -> int:
    """``dim ker T - dim coker T`` from the numerical rank."""
    return factorize_regular(T, tol).index


# --- block matrices ---------------------------------------------------------


class Blocks(NamedTuple):
    b11: np.ndarray
    b12: np.ndarray
    b21: np.ndarray
    b22: np.ndarray

    @classmethod
    def split(cls, M, row_split: int, col_split: int | None = None) -> "Blocks":
        M = as_matrix(M)
        c = row_split if col_split is None else col_split
        return cls(M[:row_split, :c], M[:row_split, c:], M[row_split:, :c], M[row_split:, c:])

    def assemble(self) -> np.ndarray:
        return np.block([[self.b11, self.b12], [self.b21, self.b22]])


def block_inverse_schur(B: Blocks, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Inverse of ``A11`` from the blocks of ``B = A^{-1}``: ``B11 - B12 B22^{-1} B21``."""
    b11, b12, b21, b22 = (as_matrix(b) for b in B)
    if b22.shape[0] != b22.shape[1]:
        raise SingularBlock(f"B22 is not square: shape {b22.shape}")
    if b22.size == 0:
        return b11.copy()
    scale = max(1.0, spectral_norm(Blocks(b11, b12, b21, b22).assemble()))
    smin = _singular_values(b22).min()
    if smin <= tol * scale:
        raise SingularBlock(f"B22 is not invertible (smallest singular value {smin:.3e})")
    return b11 - b12 @ np.linalg.solve(b22, b21)


@dataclass
class ProjectionCertificate:
    precondition_ok: bool
    b22_norm: float
    idempotent_ab: bool = False
    idempotent_ba: bool = False
    image_match: bool = False
    kernel_match: bool = False
    residuals: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return (
            self.precondition_ok
            and self.idempotent_ab
            and self.idempotent_ba
            and self.image_match
            and self.kernel_match
        )

    def to_dict(self) -> dict:
        return {
            "precondition_ok": self.precondition_ok,
            "b22_norm": self.b22_norm,
            "idempotent_ab": self.idempotent_ab,
            "idempotent_ba": self.idempotent_ba,
            "image_match": self.image_match,
            "kernel_match": self.kernel_match,
            "residuals": self.residuals,
            "passed": self.passed,
        }


def projection_case_check(A: Blocks, B: Blocks, tol: float = DEFAULT_TOL) -> ProjectionCertificate:
    """Check the ``B22 = 0`` case: ``A11 B11`` and ``B11 A11`` are idempotent and
    ``img(A11 B11) = img A11``, ``ker(B11 A11) = ker A11``."""
    a11 = as_matrix(A.b11)
    b11 = as_matrix(B.b11)
    b22 = as_matrix(B.b22)
    scale = max(1.0, spectral_norm(Blocks(*(as_matrix(b) for b in B)).assemble()))
    b22_norm = spectral_norm(b22)
    cert = ProjectionCertificate(precondition_ok=b22_norm <= tol * scale, b22_norm=b22_norm)
    if not cert.precondition_ok:
        return cert
    AB = a11 @ b11
    BA = b11 @ a11
    size = max(1.0, spectral_norm(a11) * spectral_norm(b11))
    r_ab = float(np.linalg.norm(AB @ AB - AB)) if AB.size else 0.0
    r_ba = float(np.linalg.norm(BA @ BA - BA)) if BA.size else 0.0
    cert.idempotent_ab = r_ab <= CHECK_TOL * size**2
    cert.idempotent_ba = r_ba <= CHECK_TOL * size**2
    img_ab = factorize_regular(AB, tol).image if AB.size else Subspace.zero(AB.shape[0])
    img_a = factorize_regular(a11, tol).image if a11.size else Subspace.zero(a11.shape[0])
    ker_ba = factorize_regular(BA, tol).kernel if BA.size else Subspace.full(BA.shape[1])
    ker_a = factorize_regular(a11, tol).kernel if a11.size else Subspace.full(a11.shape[1])
    r_img = float(np.linalg.norm(img_ab.projector() - img_a.projector())) if img_a.ambient_dim else 0.0
    r_ker = float(np.linalg.norm(ker_ba.projector() - ker_a.projector())) if ker_a.ambient_dim else 0.0
    cert.image_match = img_ab.dim == img_a.dim and r_img <= CHECK_TOL
    cert.kernel_match = ker_ba.dim == ker_a.dim and r_ker <= CHECK_TOL
    cert.residuals = {
        "idempotent_ab": r_ab,
        "idempotent_ba": r_ba,
        "image": r_img,
        "kernel": r_ker,
    }
    return cert


# --- operator families -----------------------------------------------------


@dataclass
class OperatorFamily:
    """A continuous family ``p -> T_p`` of matrices, base point ``p = 0``."""

    parameter_dim: int
    sampler: Callable[[np.ndarray], np.ndarray]
    tol: float = DEFAULT_TOL
    box: float | None = None

    def sample(self, p) -> np.ndarray:
        p = np.atleast_1d(np.asarray(p, dtype=float))
        if p.shape != (self.parameter_dim,):
            raise DimensionMismatch(f"parameter must have length {self.parameter_dim}")
        if self.box is not None and np.any(np.abs(p) > self.box):
            raise DomainError(f"parameter {p.tolist()} outside box of half-width {self.box}")
        return as_matrix(self.sampler(p), "T_p")

    @classmethod
    def constant(cls, T, tol: float = DEFAULT_TOL) -> "OperatorFamily":
        T = as_matrix(T)
        return cls(1, lambda p: T, tol)

    @cached_property
    def base(self) -> LinearNormalForm:
        try:
            return factorize_regular(self.sample(np.zeros(self.parameter_dim)), self.tol)
        except (NonFinite, DimensionMismatch) as exc:
            raise BaseNotRegular(f"factorization at p = 0 failed: {exc}") from exc


def _samples_array(samples, parameter_dim: int) -> list[np.ndarray]:
    out = []
    for p in samples:
        p = np.atleast_1d(np.asarray(p, dtype=float))
        if p.shape != (parameter_dim,):
            raise DimensionMismatch(f"sample {p.tolist()} does not have length {parameter_dim}")
        out.append(p)
    return out


@dataclass
class Certificate:
    samples: list
    verdicts: list
    condition_numbers: list
    inverse_norms: list
    tolerances: dict
    kernel_semicontinuity: list
    image_semicontinuity: list

    @property
    def certified(self) -> bool:
        return all(self.verdicts)

    @property
    def semicontinuity_violations(self) -> list[int]:
        return [
            i
            for i, (k, im) in enumerate(zip(self.kernel_semicontinuity, self.image_semicontinuity))
            if not (k and im)
        ]

    def to_dict(self) -> dict:
        return {
            "samples": self.samples,
            "verdicts": self.verdicts,
            "condition_numbers": self.condition_numbers,
            "inverse_norms": self.inverse_norms,
            "tolerances": self.tolerances,
            "kernel_semicontinuity": self.kernel_semicontinuity,
            "image_semicontinuity": self.image_semicontinuity,
            "certified": self.certified,
            "scope": "finite sample set",
        }


def _compressed(base: LinearNormalForm, Tp: np.ndarray) -> np.ndarray:
    return base.image.basis.T @ Tp @ base.coimage.basis


def _invertibility(M: np.ndarray, tol: float, scale: float) -> tuple[bool, float, float]:
    """(invertible?, inverse norm, condition number) of a square matrix."""
    if M.size == 0:
        return True, 0.0, 1.0
    s = _singular_values(M)
    smin, smax = float(s.min()), float(s.max())
    ok = smin > tol * max(scale, np.finfo(float).tiny)
    inv_norm = 1.0 / smin if smin > 0 else float("inf")
    cond = smax / smin if smin > 0 else float("inf")
    return ok, inv_norm, cond


def certify_uniform_regularity(
    F: OperatorFamily, samples: Sequence, tol: float | None = None
) -> Certificate:
    """Check invertibility of ``pr_img(T0) T_p |coimg(T0)`` at every sample.

    Kernel upper and image lower semicontinuity are recorded as diagnostics only.
    """
    tol = F.tol if tol is None else tol
    base = F.base
    scale = spectral_norm(base.matrix)
    ps = _samples_array(samples, F.parameter_dim)
    verdicts, conds, inv_norms, ker_ok, img_ok = [], [], [], [], []
    for p in ps:
        Tp = F.sample(p)
        if Tp.shape != base.shape:
            raise DimensionMismatch(f"T_p has shape {Tp.shape}, base has {base.shape}")
        ok, inv_norm, cond = _invertibility(_compressed(base, Tp), tol, scale)
        verdicts.append(bool(ok))
        inv_norms.append(inv_norm)
        conds.append(cond)
        nf_p = factorize_regular(Tp, tol)
        ker_ok.append(base.kernel.contains(nf_p.kernel.basis))
        img_ok.append(nf_p.image.contains(base.image.basis))
    return Certificate(
        samples=[p.tolist() for p in ps],
        verdicts=verdicts,
        condition_numbers=conds,
        inverse_norms=inv_norms,
        tolerances={"rank": tol, "semicontinuity": CHECK_TOL},
        kernel_semicontinuity=ker_ok,
        image_semicontinuity=img_ok,
    )


def canonical_bordering(nf: LinearNormalForm) -> tuple[np.ndarray, np.ndarray]:
    """``T+`` = inclusion of the cokernel, ``T-`` = projection onto the kernel."""
    return nf.cokernel.basis.copy(), nf.kernel.basis.T.copy()


@dataclass
class ExtendedCertificate:
    samples: list
    verdicts: list
    gamma_condition_numbers: list
    consistent: list
    index_consistent: list
    s_minus_plus_norm_at_zero: float
    gamma_at_zero: np.ndarray
    tolerances: dict

    @property
    def passed(self) -> bool:
        return (
            self.s_minus_plus_norm_at_zero <= self.tolerances["s_minus_plus"]
            and all(self.verdicts)
            and all(self.consistent)
            and all(self.index_consistent)
        )

    def to_dict(self) -> dict:
        return {
            "samples": self.samples,
            "verdicts": self.verdicts,
            "condition_numbers": self.gamma_condition_numbers,
            "consistent": self.consistent,
            "index_consistent": self.index_consistent,
            "s_minus_plus_norm_at_zero": self.s_minus_plus_norm_at_zero,
            "gamma_at_zero": self.gamma_at_zero.tolist(),
            "tolerances": self.tolerances,
            "passed": self.passed,
        }


def extended_operator(Tp: np.ndarray, Tplus: np.ndarray, Tminus: np.ndarray) -> np.ndarray:
    zp, zm = Tplus.shape[1], Tminus.shape[0]
    return np.block([[Tp, Tplus], [Tminus, np.zeros((zm, zp))]])


def extended_operator_test(
    F: OperatorFamily, Tplus, Tminus, samples: Sequence, tol: float | None = None
) -> ExtendedCertificate:
    """Invert the bordered matrix ``[[T_p, T+], [T-, 0]]`` at every sample and test the
    invertibility of the associated ``Gamma_p`` block."""
    tol = F.tol if tol is None else tol
    base = F.base
    m, n = base.shape
    Tplus = as_matrix(np.asarray(Tplus, dtype=float).reshape(m, -1), "T+")
    Tminus = as_matrix(np.asarray(Tminus, dtype=float).reshape(-1, n), "T-")
    zp, zm = Tplus.shape[1], Tminus.shape[0]
    if n + zp != m + zm:
        raise DimensionMismatch(
            f"bordered operator is not square: ({m}+{zm}) x ({n}+{zp})"
        )
    K0, W0 = base.kernel.basis, base.cokernel.basis
    ps = _samples_array(samples, F.parameter_dim)
    zero = np.zeros(F.parameter_dim)
    ref = certify_uniform_regularity(F, ps, tol)

    def blocks_at(p, idx):
        E = extended_operator(F.sample(p), Tplus, Tminus)
        ok, _, _ = _invertibility(E, tol, spectral_norm(E))
        if not ok:
            raise ExtendedSingular(f"extended operator singular at sample {p.tolist()}", idx)
        Einv = np.linalg.inv(E)
        return Einv[:n, :m], Einv[:n, m:], Einv[n:, :m], Einv[n:, m:], spectral_norm(Einv)

    def gamma(S, Sm, Sp, Smp):
        return np.block([[K0.T @ S @ W0, K0.T @ Sm], [Sp @ W0, Smp]])

    S0, Sm0, Sp0, Smp0, inv_norm0 = blocks_at(zero, -1)
    smp_norm = spectral_norm(Smp0)
    smp_tol = tol * max(1.0, inv_norm0)
    gamma0 = gamma(S0, Sm0, Sp0, Smp0)

    verdicts, conds, consistent, index_ok = [], [], [], []
    for i, p in enumerate(ps):
        S, Sm, Sp, Smp, _ = blocks_at(p, i)
        G = gamma(S, Sm, Sp, Smp)
        ok, _, cond = _invertibility(G, tol, max(1.0, spectral_norm(G)))
        verdicts.append(bool(ok))
        conds.append(cond)
        consistent.append(bool(ok) == ref.verdicts[i])
        if ok:
            index_ok.append(fredholm_index(F.sample(p), tol) == zm - zp)
        else:
            index_ok.append(True)
    return ExtendedCertificate(
        samples=[p.tolist() for p in ps],
        verdicts=verdicts,
        gamma_condition_numbers=conds,
        consistent=consistent,
        index_consistent=index_ok,
        s_minus_plus_norm_at_zero=smp_norm,
        gamma_at_zero=gamma0,
        tolerances={"rank": tol, "s_minus_plus": smp_tol},
    )


# --- chains ----------------------------------------------------------------


@dataclass
class ChainFamily:
    """Spaces ``X_0 .. X_N`` with maps ``T_{i,p}: X_i -> X_{i+1}``."""

    spaces: list
    map_fn: Callable[[int, np.ndarray], np.ndarray]
    parameter_dim: int = 1

    @classmethod
    def constant(cls, matrices: Sequence, spaces: Sequence[int] | None = None) -> "ChainFamily":
        mats = [as_matrix(M) for M in matrices]
        if spaces is None:
            spaces = [mats[0].shape[1]] + [M.shape[0] for M in mats]
        return cls(list(spaces), lambda i, p: mats[i], 1)

    def maps(self, i: int, p) -> np.ndarray:
        N = len(self.spaces) - 1
        if i < 0:
            return np.zeros((self.spaces[0], 0))
        if i >= N:
            return np.zeros((0, self.spaces[N]))
        M = as_matrix(self.map_fn(i, np.atleast_1d(np.asarray(p, dtype=float))), f"T_{i}")
        expected = (self.spaces[i + 1], self.spaces[i])
        if M.shape != expected:
            raise DimensionMismatch(f"map {i} has shape {M.shape}, expected {expected}")
        return M


@dataclass
class ChainCertificate:
    homology: list
    image_dims: list
    coimage_dims: list
    decomposition_exact: list
    samples: list
    laplace_verdicts: list
    compressed_verdicts: list
    euler_characteristic: int
    harmonic: list = field(default_factory=list, repr=False)

    @property
    def certified(self) -> bool:
        return all(all(v) for v in self.laplace_verdicts) and all(
            all(v) for v in self.compressed_verdicts
        )

    def to_dict(self) -> dict:
        return {
            "homology": self.homology,
            "image_dims": self.image_dims,
            "coimage_dims": self.coimage_dims,
            "decomposition_exact": self.decomposition_exact,
            "samples": self.samples,
            "laplace_verdicts": self.laplace_verdicts,
            "compressed_verdicts": self.compressed_verdicts,
            "euler_characteristic": self.euler_characteristic,
            "certified": self.certified,
        }


def _null_space(M: np.ndarray, ncols: int, tol: float) -> np.ndarray:
    if M.shape[0] == 0 or ncols == 0:
        return np.eye(ncols)
    return factorize_regular(M, tol).kernel.basis


def chain_uniform_regularity(C: ChainFamily, samples: Sequence, tol: float = DEFAULT_TOL) -> ChainCertificate:
    """Hodge-type decomposition ``X_i = img T_{i-1} + coimg T_i + H_i`` at ``p = 0`` and
    per-sample invertibility of the Laplace-type operators and compressed maps."""
    N = len(C.spaces) - 1
    zero = np.zeros(C.parameter_dim)
    T0 = [C.maps(i, zero) for i in range(-1, N + 1)]  # T0[i + 1] is T_{i,0}

    def t0(i):
        return T0[i + 1]

    for i in range(N - 1):
        prod = t0(i + 1) @ t0(i)
        bound = CHECK_TOL * max(1.0, spectral_norm(t0(i + 1)) * spectral_norm(t0(i)))
        if prod.size and np.linalg.norm(prod) > bound:
            raise NotAComplex(f"T_{i + 1} T_{i} = {np.linalg.norm(prod):.3e} != 0 at p = 0")

    nfs = {i: factorize_regular(t0(i), tol) for i in range(-1, N + 1)}
    ps = _samples_array(samples, C.parameter_dim)
    homology, img_dims, coimg_dims, exact, harmonic = [], [], [], [], []
    lap_v, comp_v = [[] for _ in ps], [[] for _ in ps]
    for i in range(N + 1):
        dim = C.spaces[i]
        A, B = t0(i - 1), t0(i)
        H = _null_space(np.vstack([B, A.T]), dim, tol)
        h = H.shape[1]
        ri, rc = nfs[i - 1].rank, nfs[i].rank
        homology.append(h)
        img_dims.append(ri)
        coimg_dims.append(rc)
        exact.append(ri + rc + h == dim)
        harmonic.append(H)
        lap0 = B.T @ B + A @ A.T
        R = factorize_regular(lap0, tol).image.basis if dim else np.zeros((0, 0))
        scale = spectral_norm(lap0)
        for k, p in enumerate(ps):
            Bp, Ap = C.maps(i, p), C.maps(i - 1, p)
            lap_p = B.T @ Bp + Ap @ A.T
            ok, _, _ = _invertibility(R.T @ lap_p @ R, tol, scale)
            lap_v[k].append(bool(ok))
            ok2, _, _ = _invertibility(_compressed(nfs[i], Bp), tol, spectral_norm(B))
            comp_v[k].append(bool(ok2))
    euler = int(sum((-1) ** i * h for i, h in enumerate(homology)))
    return ChainCertificate(
        homology=homology,
        image_dims=img_dims,
        coimage_dims=coimg_dims,
        decomposition_exact=exact,
        samples=[p.tolist() for p in ps],
        laplace_verdicts=lap_v,
        compressed_verdicts=comp_v,
        euler_characteristic=euler,
        harmonic=harmonic,
    )
