"""Small dense factorizations used by the maxvol routines.

Matrices here are tiny (at most a few dozen rows and ~10 columns), so the
kernels are written as plain row/column updates on numpy arrays rather than
calls into LAPACK. Every function takes and returns 2-D float arrays.
"""
from __future__ import annotations

import numpy as np

from .errors import SingularMatrix

__all__ = [
    "PIVOT_TOL",
    "as_matrix",
    "lu_partial_pivot",
    "qr_thin",
    "solve_upper_triangular",
    "solve_lower_triangular",
]

#: Relative pivot threshold; a pivot is rejected when its magnitude is at or
#: below ``PIVOT_TOL * max|column|``.
PIVOT_TOL = 1e-14


def as_matrix(a, *, check_finite: bool = True) -> np.ndarray:
    """Return ``a`` as a 2-D float64 array (a copy is not forced)."""
    a = np.asarray(a, dtype=float)
    if a.ndim == 1:
        a = a.reshape(-1, 1)
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise ValueError(f"expected a non-empty 2-D matrix, got shape {a.shape}")
    if check_finite and not np.all(np.isfinite(a)):
        raise ValueError("matrix contains NaN or Inf")
    return a


def lu_partial_pivot(a, *, check_finite: bool = True):
    """LU factorization with row pivoting of a tall matrix.

    Parameters
    ----------
    a : array_like, shape (n, r)
        Matrix with ``n >= r`` and full column rank.

    Returns
    -------
    perm : ndarray of int, shape (n,)
        Row permutation; ``a[perm] == l @ u``. ``perm[k]`` for ``k < r`` is
        the pivot row chosen at step ``k``.
    l : ndarray, shape (n, r)
        Unit lower-trapezoidal factor.
    u : ndarray, shape (r, r)
        Upper-triangular factor.

    Raises
    ------
    SingularMatrix
        If a pivot is not larger than ``PIVOT_TOL`` times the largest entry
        of its original column.
    """
    a = as_matrix(a, check_finite=check_finite)
    n, r = a.shape
    if n < r:
        raise ValueError(f"lu_partial_pivot needs rows >= cols, got {a.shape}")
    work = a.copy()
    perm = np.arange(n)
    col_scale = np.abs(a).max(axis=0)
    for k in range(r):
        p = k + int(np.argmax(np.abs(work[k:, k])))
        pivot = work[p, k]
        if col_scale[k] == 0.0 or abs(pivot) <= PIVOT_TOL * col_scale[k]:
            raise SingularMatrix(f"pivot {pivot!r} at step {k} is below tolerance")
        if p != k:
            work[[k, p]] = work[[p, k]]
            perm[[k, p]] = perm[[p, k]]
        work[k + 1:, k] /= pivot
        work[k + 1:, k + 1:] -= work[k + 1:, k, None] * work[k, None, k + 1:]
    l = np.tril(work, -1)
    l[np.arange(r), np.arange(r)] = 1.0
    u = np.triu(work[:r])
    return perm, l, u


def qr_thin(a, *, check_finite: bool = True):
    """Householder QR with a nonnegative diagonal in ``r``.

    For ``a`` of shape (n, m) returns ``q`` of shape (n, k) with orthonormal
    columns and upper-triangular ``r`` of shape (k, m), ``k = min(n, m)``.
    Rank deficiency shows up as (near) zero rows of ``r``; no error is raised.
    """
    a = as_matrix(a, check_finite=check_finite)
    n, m = a.shape
    k = min(n, m)
    work = a.copy()
    vs = []
    for j in range(k):
        x = work[j:, j]
        alpha = np.sqrt(x @ x)
        v = x.copy()
        if alpha == 0.0:
            vs.append(None)
            continue
        v[0] += alpha if x[0] >= 0 else -alpha
        vnorm2 = v @ v
        if vnorm2 == 0.0:
            vs.append(None)
            continue
        v *= np.sqrt(2.0 / vnorm2)
        work[j:, j:] -= v[:, None] * (v @ work[j:, j:])
        vs.append(v)
    r = np.triu(work[:k])
    q = np.zeros((n, k))
    q[np.arange(k), np.arange(k)] = 1.0
    for j in range(k - 1, -1, -1):
        v = vs[j]
        if v is not None:
            q[j:, j:] -= v[:, None] * (v @ q[j:, j:])
    signs = np.where(np.diag(r) < 0, -1.0, 1.0)
    return q * signs, r * signs[:, None]


def _check_triangular_system(t, b, check_finite):
    t = as_matrix(t, check_finite=check_finite)
    b = np.asarray(b, dtype=float)
    vector = b.ndim == 1
    b = as_matrix(b, check_finite=check_finite)
    if t.shape[0] != t.shape[1]:
        raise ValueError(f"triangular matrix must be square, got {t.shape}")
    if b.shape[0] != t.shape[0]:
        raise ValueError(f"shape mismatch: {t.shape} vs rhs {b.shape}")
    if not np.all(np.diagonal(t)):
        raise SingularMatrix("zero on the diagonal of a triangular matrix")
    return t, b, vector


def solve_upper_triangular(u, b, *, check_finite: bool = True):
    """Solve ``u @ x = b`` by back substitution (``b`` may have many columns)."""
    u, b, vector = _check_triangular_system(u, b, check_finite)
    n = u.shape[0]
    x = np.empty_like(b)
    for i in range(n - 1, -1, -1):
        x[i] = (b[i] - u[i, i + 1:] @ x[i + 1:]) / u[i, i]
    return x.ravel() if vector else x


def solve_lower_triangular(l, b, *, check_finite: bool = True):
    """Solve ``l @ x = b`` by forward substitution."""
    l, b, vector = _check_triangular_system(l, b, check_finite)
    n = l.shape[0]
    x = np.empty_like(b)
    for i in range(n):
        x[i] = (b[i] - l[i, :i] @ x[:i]) / l[i, i]
    return x.ravel() if vector else x
