"""Dense matrix norms, thresholding and small-matrix inversion.

Matrices are plain 2-D numpy arrays of float64.  Every public operation
validates shape and finiteness on entry; NaN/inf never make it into a
computation.  Norm naming follows the induced-norm convention:
``op_l1`` is the maximum absolute column sum and ``op_linf`` the
maximum absolute row sum.
"""

from __future__ import annotations

import numpy as np

from tvvar.exceptions import SingularMatrixError

NORM_KINDS = ("entry_l1", "entry_max", "frobenius", "op_l1", "op_linf", "spectral")

_SPECTRAL_RTOL = 1e-10
_SPECTRAL_MAX_ITERS = 100_000
_PIVOT_CUTOFF = 1e-12


def as_matrix(M) -> np.ndarray:
    """Coerce to a validated 2-D float64 array with finite entries."""
    A = np.asarray(M, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] < 1 or A.shape[1] < 1:
        raise ValueError(f"expected a 2-D matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix contains non-finite entries")
    return A


def spectral_norm(M) -> float:
    """Largest singular value by power iteration on M^T M.

    Deterministic start vector (all ones, normalized); iterates until
    the Rayleigh quotient is stable to relative tolerance 1e-10.  If an
    iterate lands in the null space the start is retried from each
    canonical basis vector before concluding the norm is zero.
    """
    A = as_matrix(M)
    G = A.T @ A
    dim = G.shape[0]
    scale = np.max(np.abs(G))
    if scale == 0.0:
        return 0.0
    Gs = G / scale

    starts = [np.full(dim, 1.0 / np.sqrt(dim))]
    starts.extend(np.eye(dim)[k] for k in range(dim))
    for v in starts:
        w = Gs @ v
        nw = np.linalg.norm(w)
        if nw <= 1e-300:
            continue
        lam_prev = 0.0
        for _ in range(_SPECTRAL_MAX_ITERS):
            v = w / nw
            w = Gs @ v
            lam = float(v @ w)
            nw = np.linalg.norm(w)
            if nw <= 1e-300:
                lam = 0.0
                break
            if abs(lam - lam_prev) <= _SPECTRAL_RTOL * max(abs(lam), 1e-300):
                break
            lam_prev = lam
        return float(np.sqrt(max(lam, 0.0) * scale))
    return 0.0


def matrix_norm(M, kind: str) -> float:
    """Dispatch over the supported matrix norms."""
    A = as_matrix(M)
    if kind == "entry_l1":
        return float(np.sum(np.abs(A)))
    if kind == "entry_max":
        return float(np.max(np.abs(A)))
    if kind == "frobenius":
        return float(np.sqrt(np.sum(A * A)))
    if kind == "op_l1":
        return float(np.max(np.sum(np.abs(A), axis=0)))
    if kind == "op_linf":
        return float(np.max(np.sum(np.abs(A), axis=1)))
    if kind == "spectral":
        return spectral_norm(A)
    raise ValueError(f"unknown norm kind {kind!r}; expected one of {NORM_KINDS}")


def threshold_support(M, u: float) -> np.ndarray:
    """Boolean support mask of entries with |M_jk| strictly above u."""
    A = as_matrix(M)
    if u < 0:
        raise ValueError("threshold must be nonnegative")
    return np.abs(A) > u


def invert(M) -> np.ndarray:
    """Matrix inverse by Gaussian elimination with partial pivoting.

    Raises SingularMatrixError when a pivot magnitude falls below the
    1e-12 cutoff (relative to the largest entry of the input).
    """
    A = as_matrix(M)
    d = A.shape[0]
    if A.shape[1] != d:
        raise ValueError("inversion requires a square matrix")
    scale = max(float(np.max(np.abs(A))), 1.0)
    T = np.hstack([A.copy(), np.eye(d)])
    for col in range(d):
        piv = col + int(np.argmax(np.abs(T[col:, col])))
        if abs(T[piv, col]) < _PIVOT_CUTOFF * scale:
            raise SingularMatrixError(
                f"pivot {T[piv, col]:.3e} below cutoff in column {col}"
            )
        if piv != col:
            T[[col, piv]] = T[[piv, col]]
        T[col] /= T[col, col]
        others = np.arange(d) != col
        T[others] -= np.outer(T[others, col], T[col])
    return np.ascontiguousarray(T[:, d:])


def product_norm_bounds_hold(A, B, C, rtol: float = 1e-9) -> bool:
    """Check the three triple-product entry-max bounds for A @ B @ C.

    For compatible matrices the entry-max norm of the product is bounded
    by each of

        rowsum(A) * max|B| * colsum(C)
        rowsum(A) * rowsum(B) * max|C|
        max|A| * colsum(B) * colsum(C)

    where rowsum/colsum denote the maximum absolute row/column sums.
    Mathematically all three always hold; the rtol slack absorbs
    floating-point rounding in near-equality cases.
    """
    A = as_matrix(A)
    B = as_matrix(B)
    C = as_matrix(C)
    if A.shape[1] != B.shape[0] or B.shape[1] != C.shape[0]:
        raise ValueError("incompatible dimensions for the product A @ B @ C")
    lhs = matrix_norm(A @ B @ C, "entry_max")
    bounds = (
        matrix_norm(A, "op_linf") * matrix_norm(B, "entry_max") * matrix_norm(C, "op_l1"),
        matrix_norm(A, "op_linf") * matrix_norm(B, "op_linf") * matrix_norm(C, "entry_max"),
        matrix_norm(A, "entry_max") * matrix_norm(B, "op_l1") * matrix_norm(C, "op_l1"),
    )
    return all(lhs <= b + rtol * max(b, 1.0) for b in bounds)
