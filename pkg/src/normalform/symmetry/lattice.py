"""Integer lattice normal forms (Smith and Hermite) on exact Python integers."""

from __future__ import annotations

import numpy as np


def _to_int_rows(M) -> list[list[int]]:
    A = np.asarray(M)
    if A.ndim == 1:
        A = A.reshape(1, -1)
    if A.size and not np.all(np.asarray(A, dtype=float) == np.round(np.asarray(A, dtype=float))):
        raise ValueError("lattice matrices must have integer entries")
    return [[int(round(float(v))) for v in row] for row in A]


def _identity(n: int) -> list[list[int]]:
    return [[int(i == j) for j in range(n)] for i in range(n)]


def smith_normal_form(M, ncols: int | None = None):
    """Return ``(D, U, V)`` with ``U @ M @ V = D`` diagonal, ``U`` and ``V`` unimodular
    and each diagonal entry dividing the next (non-negative)."""
    A = _to_int_rows(M)
    m = len(A)
    n = len(A[0]) if m else (ncols or 0)
    U = _identity(m)
    V = _identity(n)

    def swap_rows(i, j):
        A[i], A[j] = A[j], A[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for row in A:
            row[i], row[j] = row[j], row[i]
        for row in V:
            row[i], row[j] = row[j], row[i]

    def add_row(dst, src, q):  # row_dst += q * row_src
        A[dst] = [a + q * b for a, b in zip(A[dst], A[src])]
        U[dst] = [a + q * b for a, b in zip(U[dst], U[src])]

    def add_col(dst, src, q):
        for row in A:
            row[dst] += q * row[src]
        for row in V:
            row[dst] += q * row[src]

    t = 0
    while t < min(m, n):
        nz = [(abs(A[i][j]), i, j) for i in range(t, m) for j in range(t, n) if A[i][j] != 0]
        if not nz:
            break
        _, i0, j0 = min(nz)
        swap_rows(t, i0)
        swap_cols(t, j0)
        while True:
            changed = False
            for i in range(t + 1, m):
                if A[i][t]:
                    add_row(i, t, -(A[i][t] // A[t][t]))
                    if A[i][t]:
                        swap_rows(t, i)
                        changed = True
            for j in range(t + 1, n):
                if A[t][j]:
                    add_col(j, t, -(A[t][j] // A[t][t]))
                    if A[t][j]:
                        swap_cols(t, j)
                        changed = True
            if changed:
                continue
            bad = next(
                ((i, j) for i in range(t + 1, m) for j in range(t + 1, n) if A[i][j] % A[t][t]),
                None,
            )
            if bad is None:
                break
            add_row(t, bad[0], 1)
        if A[t][t] < 0:
            A[t] = [-a for a in A[t]]
            U[t] = [-a for a in U[t]]
        t += 1
    D = np.array(A, dtype=np.int64).reshape(m, n)
    return D, np.array(U, dtype=np.int64).reshape(m, m), np.array(V, dtype=np.int64).reshape(n, n)


def hermite_normal_form(M, ncols: int | None = None) -> np.ndarray:
    """Row-style Hermite normal form of the lattice spanned by the rows of ``M``.

    Zero rows are dropped; pivots are positive and entries above a pivot lie in
    ``[0, pivot)``.  Two integer matrices span the same lattice iff their forms agree.
    """
    raw = np.asarray(M)
    n = raw.shape[-1] if raw.ndim == 2 else (ncols or 0)
    if ncols is not None:
        n = ncols
    A = [row for row in _to_int_rows(raw) if any(row)] if raw.size else []
    r = 0
    for col in range(n):
        rows = [i for i in range(r, len(A)) if A[i][col] != 0]
        if not rows:
            continue
        while True:
            rows = [i for i in range(r, len(A)) if A[i][col] != 0]
            p = min(rows, key=lambda i: abs(A[i][col]))
            A[r], A[p] = A[p], A[r]
            done = True
            for i in range(r + 1, len(A)):
                if A[i][col]:
                    q = A[i][col] // A[r][col]
                    A[i] = [a - q * b for a, b in zip(A[i], A[r])]
                    if A[i][col]:
                        done = False
            if done:
                break
        if A[r][col] < 0:
            A[r] = [-a for a in A[r]]
        for i in range(r):
            q = A[i][col] // A[r][col]
            if q:
                A[i] = [a - q * b for a, b in zip(A[i], A[r])]
        r += 1
        if r == len(A):
            break
    A = [row for row in A[:r] if any(row)]
    return np.array(A, dtype=np.int64).reshape(len(A), n)


def lattice_contains(H: np.ndarray, v) -> bool:
    """Is the integer vector ``v`` in the lattice spanned by the rows of ``H``?"""
    v = np.asarray(v, dtype=np.int64).reshape(1, -1)
    n = v.shape[1]
    H = np.asarray(H, dtype=np.int64).reshape(-1, n)
    stacked = np.vstack([H, v])
    return np.array_equal(hermite_normal_form(stacked, n), hermite_normal_form(H, n))
