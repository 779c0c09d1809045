"""Orbit-type stratification of sampled zero sets."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from ..symmetry.core import Stabilizer, orbit_type_leq, stabilizer_of
from ..symmetry.groups import FiniteGroup
from ..symmetry.reps import SubRep, TorusRep

LABEL_TOL = 1e-8
PCA_NEIGHBORS = 12
PCA_THRESHOLD = 0.1
FRONTIER_FACTOR = 3.0
APPROX_FACTOR = 2.0


@dataclass
class Stratum:
    type_id: str
    stabilizer: Stabilizer
    points: np.ndarray
    dim_estimate: int
    local_dims: list

    @property
    def size(self) -> int:
        return self.points.shape[0]

    def to_dict(self) -> dict:
        return {"type_id": self.type_id, "size": self.size, "dim_estimate": self.dim_estimate}


@dataclass
class StratificationReport:
    strata: list
    labels: np.ndarray
    frontier: list
    approximation: dict
    unwitnessed: list
    spacing: float
    epsilon: float
    notes: list = field(default_factory=list)

    @property
    def type_ids(self) -> list:
        return [s.type_id for s in self.strata]

    @property
    def dims(self) -> list:
        return [s.dim_estimate for s in self.strata]

    @property
    def frontier_passed(self) -> bool:
        return all(v != "fail" for row in self.frontier for v in row)

    @property
    def approximation_passed(self) -> bool:
        return all(a["witnessed"] for a in self.approximation.values())

    def to_dict(self) -> dict:
        return {
            "strata": [s.to_dict() for s in self.strata],
            "frontier": self.frontier,
            "approximation": self.approximation,
            "unwitnessed": self.unwitnessed,
            "spacing": self.spacing,
            "epsilon": self.epsilon,
            "notes": self.notes,
        }


def _flatten(rep):
    """Underlying representation and the composed basis of nested subspaces."""
    B = None
    while isinstance(rep, SubRep):
        B = rep.B if B is None else rep.B @ B
        rep = rep.parent
    return rep, B


def _signatures(rep, X: np.ndarray, tol: float) -> list:
    """A hashable key per point that determines its stabilizer."""
    n = X.shape[0]
    scale = np.maximum(1.0, np.linalg.norm(X, axis=1))
    if isinstance(rep.group, FiniteGroup):
        cols = []
        for g in rep.group.elements:
            D = X @ (rep.matrix(g) - np.eye(rep.dim)).T
            cols.append(np.linalg.norm(D, axis=1) <= tol * scale)
        M = np.array(cols).T.reshape(n, -1)
        return [row.tobytes() for row in M]
    base, B = _flatten(rep)
    if isinstance(base, TorusRep):
        Y = X if B is None else X @ B.T
        yscale = np.maximum(1.0, np.linalg.norm(Y, axis=1))
        blocks = [
            np.linalg.norm(Y[:, 2 * b: 2 * b + 2], axis=1) > tol * yscale for b in range(base.n_blocks)
        ]
        M = np.array(blocks).T.reshape(n, -1)
        return [row.tobytes() for row in M]
    return [np.round(x, 12).tobytes() for x in X]


def label_points(rep, X: np.ndarray, tol: float = LABEL_TOL) -> tuple[list, dict]:
    """Stabilizer per point, computed once per signature."""
    keys = _signatures(rep, X, tol)
    cache: dict = {}
    labels = []
    for key, x in zip(keys, X):
        if key not in cache:
            cache[key] = stabilizer_of(rep, x, tol)
        labels.append(cache[key])
    return labels, cache


def local_dimensions(X: np.ndarray, k: int = PCA_NEIGHBORS, threshold: float = PCA_THRESHOLD) -> np.ndarray:
    """Principal-component count of each point's ``k``-neighbour cloud; eigenvalues are
    normalized by the largest and counted when at least ``threshold``."""
    n = X.shape[0]
    if n < 2:
        return np.zeros(n, dtype=int)
    kk = min(k + 1, n)
    _, idx = cKDTree(X).query(X, kk)
    idx = np.asarray(idx).reshape(n, kk)
    clouds = X[idx]
    clouds = clouds - clouds.mean(axis=1, keepdims=True)
    cov = np.einsum("nki,nkj->nij", clouds, clouds) / kk
    ev = np.linalg.eigvalsh(cov)
    top = ev[:, -1:]
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = np.where(top > 1e-24, ev / top, 0.0)
    return (ratio >= threshold).sum(axis=1)


def _mode(values) -> int:
    if len(values) == 0:
        return 0
    counts = Counter(int(v) for v in values)
    best = max(counts.values())
    return min(d for d, c in counts.items() if c == best)


def _min_distances(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    return cKDTree(B).query(A)[0]


def stratify(
    points: np.ndarray,
    rep_E,
    spacing: float,
    tol: float = LABEL_TOL,
    k: int = PCA_NEIGHBORS,
    threshold: float = PCA_THRESHOLD,
    base_point=None,
) -> StratificationReport:
    """Group zero points by orbit type, estimate stratum dimensions, and check the
    frontier condition and the approximation property at ``base_point``.

    Frontier verdicts for strata ``A != B``: ``none`` when no two samples lie within
    ``eps = 3 * spacing``; on contact, ``pass`` when the orbit types are strictly
    ordered and the less symmetric stratum is not swallowed by an ``eps``-neighbourhood
    of the more symmetric one, ``fail`` otherwise.
    """
    X = np.asarray(points, dtype=float)
    if X.ndim != 2:
        X = X.reshape(-1, rep_E.dim)
    eps = FRONTIER_FACTOR * spacing
    base = np.zeros(rep_E.dim) if base_point is None else np.asarray(base_point, dtype=float)
    if X.shape[0] == 0:
        return StratificationReport([], np.zeros(0, dtype=int), [], {}, [], spacing, eps)

    order = np.lexsort(X.T[::-1]) if X.shape[1] else np.arange(X.shape[0])
    X = X[order]
    stabs, _ = label_points(rep_E, X, tol)
    groups: dict = {}
    for i, st in enumerate(stabs):
        groups.setdefault(st.class_id, (st, []))[1].append(i)

    group = rep_E.group
    # most symmetric first, then by id for determinism
    keyed = sorted(groups.items(), key=lambda kv: (-kv[1][0].lie_dim, -kv[1][0].order, kv[0]))
    strata, labels = [], np.empty(X.shape[0], dtype=int)
    for j, (tid, (st, idx)) in enumerate(keyed):
        P = X[idx]
        ld = local_dimensions(P, k, threshold)
        strata.append(Stratum(tid, st, P, _mode(ld), ld.tolist()))
        labels[idx] = j

    n = len(strata)
    frontier = [["-"] * n for _ in range(n)]
    for a in range(n):
        for b in range(a + 1, n):
            A, B = strata[a], strata[b]
            dAB = _min_distances(A.points, B.points)
            if dAB.min() > eps:
                frontier[a][b] = frontier[b][a] = "none"
                continue
            a_le_b = orbit_type_leq(group, A.stabilizer, B.stabilizer)
            b_le_a = orbit_type_leq(group, B.stabilizer, A.stabilizer)
            if a_le_b == b_le_a:
                verdict = "fail"
            else:
                low, high = (A, B) if a_le_b else (B, A)
                swallowed = _min_distances(low.points, high.points).max() <= eps
                verdict = "fail" if swallowed else "pass"
            frontier[a][b] = frontier[b][a] = verdict

    approximation = {}
    for S in strata:
        dist = float(np.linalg.norm(S.points - base, axis=1).min())
        approximation[S.type_id] = {
            "distance": dist,
            "bound": APPROX_FACTOR * spacing,
            "witnessed": dist <= APPROX_FACTOR * spacing,
        }
    unwitnessed = _unwitnessed(rep_E, base, [s.stabilizer for s in strata], tol)
    notes = ["dimensions are principal-component estimates on nearest-neighbour clouds"]
    return StratificationReport(strata, labels[np.argsort(order)], frontier, approximation,
                                unwitnessed, spacing, eps, notes)


def _unwitnessed(rep, base, present: list, tol: float) -> list:
    """Orbit types below the base point's type that no sample exhibits."""
    if not isinstance(rep.group, FiniteGroup) or rep.group.order > 64:
        return []
    G = rep.group
    top = G.class_index(stabilizer_of(rep, base, tol).subgroup)
    seen = {G.class_index(st.subgroup) for st in present}
    return [f"C{i}" for i in range(len(G.subgroup_classes)) if G.class_leq(i, top) and i not in seen]
