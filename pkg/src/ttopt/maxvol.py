"""Quasi-maximal-volume row selection for tall matrices.

``maxvol`` picks ``r`` rows of an ``n x r`` matrix whose square submatrix has
(locally) maximal ``|det|``; ``rect_maxvol`` keeps adding rows that increase
the rectangular volume ``sqrt(det(C^T C))``.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import IterationLimitWarning, SingularMatrix
from .linalg import as_matrix, lu_partial_pivot, solve_lower_triangular, solve_upper_triangular

__all__ = ["MaxvolResult", "maxvol", "rect_maxvol", "JITTER"]

JITTER = 1e-13


@dataclass
class MaxvolResult:
    """Selected rows and the coefficients expressing ``a`` through them.

    ``a ~= coeffs @ a[row_indices]``; exact for the square variant.
    """

    row_indices: np.ndarray
    coeffs: np.ndarray
    iterations: int = 0
    converged: bool = True
    jittered: bool = False

    def __len__(self):
        return len(self.row_indices)


def _lu_with_jitter(a):
    try:
        return lu_partial_pivot(a, check_finite=False), False
    except SingularMatrix:
        scale = np.abs(a).max()
        if scale == 0.0:
            raise
        r = a.shape[1]
        a = a.copy()
        a[np.arange(r), np.arange(r)] += JITTER * scale
        return lu_partial_pivot(a, check_finite=False), True


def maxvol(a, eps: float = 1.01, max_iters: int = 500) -> MaxvolResult:
    """Find ``r`` rows of ``a`` (``n x r``) spanning a dominant submatrix.

    Starts from the LU pivot rows and swaps one row per iteration while some
    coefficient exceeds ``eps`` in magnitude; each swap multiplies the volume
    of the selected submatrix by that coefficient.

    Parameters
    ----------
    a : array_like, shape (n, r)
        Tall matrix of full column rank.
    eps : float
        Stopping threshold, ``>= 1``.
    max_iters : int
        Swap limit. Reaching it emits :class:`IterationLimitWarning` and the
        current selection is returned with ``converged=False``.

    Returns
    -------
    MaxvolResult
    """
    a = as_matrix(a)
    n, r = a.shape
    if eps < 1.0:
        raise ValueError(f"eps must be >= 1, got {eps}")
    if n < r:
        raise ValueError(f"maxvol needs rows >= cols, got {a.shape}")
    if n == r:
        return MaxvolResult(np.arange(n), np.eye(n))

    (perm, l, u), jittered = _lu_with_jitter(a)
    rows = perm[:r].copy()
    # B^T = L[:r]^-T U^-T A^T, i.e. B = A C^-1 with C = A[rows].
    q = solve_lower_triangular(u.T, a.T, check_finite=False)
    b = solve_upper_triangular(l[:r].T, q, check_finite=False).T

    iterations = 0
    converged = True
    while True:
        flat = int(np.argmax(np.abs(b)))
        i, j = divmod(flat, r)
        piv = b[i, j]
        if abs(piv) <= eps:
            break
        if iterations >= max_iters:
            converged = False
            warnings.warn(
                f"maxvol hit max_iters={max_iters} with max|b|={abs(piv):.4g} > eps={eps}",
                IterationLimitWarning,
                stacklevel=2,
            )
            break
        bi = b[i].copy()
        bi[j] -= 1.0
        b -= (b[:, j] / piv)[:, None] * bi
        rows[j] = i
        iterations += 1
    return MaxvolResult(rows, b, iterations, converged, jittered)


def rect_maxvol(a, tau: float = 1.0, max_rows: int | None = None,
                eps: float = 1.01, max_iters: int = 500) -> MaxvolResult:
    """Extend a maxvol selection with rows of large residual norm.

    After the square ``maxvol`` step, the row with the largest squared norm
    in the coefficient matrix is appended (with a rank-one update of the
    coefficients) until that norm drops to ``tau**2`` or ``max_rows`` rows
    are selected. The first ``a.shape[1]`` indices are the maxvol ones.

    ``max_rows`` defaults to ``2 * a.shape[1]`` and is clipped to ``n``.
    """
    a = as_matrix(a)
    n, r = a.shape
    if tau < 1.0:
        raise ValueError(f"tau must be >= 1, got {tau}")
    if max_rows is None:
        max_rows = 2 * r
    max_rows = min(int(max_rows), n)
    if max_rows < r:
        raise ValueError(f"max_rows={max_rows} is smaller than the column count {r}")

    base = maxvol(a, eps=eps, max_iters=max_iters)
    if n == r or max_rows == r:
        return base

    b = base.coeffs
    rows = list(base.row_indices)
    norms = np.einsum("ij,ij->i", b, b)
    norms[rows] = -np.inf
    tau2 = tau * tau
    while len(rows) < max_rows:
        i = int(np.argmax(norms))
        if norms[i] <= tau2:
            break
        bi = b[i].copy()
        proj = b @ bi
        denom = 1.0 + bi @ bi
        norms -= proj * proj / denom
        b = np.hstack([b - proj[:, None] * (bi / denom), (proj / denom)[:, None]])
        rows.append(i)
        norms[i] = -np.inf
    return MaxvolResult(np.asarray(rows), b, base.iterations, base.converged, base.jittered)
