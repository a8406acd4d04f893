"""Dense linear algebra kernels used by the estimators.

Matrices are plain 2-D ``float64`` numpy arrays (C order, i.e. row-major).
The factorisations are delegated to LAPACK through scipy; this module adds
the pivot checks and error types the estimators rely on.
"""
import numpy as np
import scipy.linalg

from .errors import InvalidSize, NotPositiveDefinite, ShapeMismatch

SYMMETRY_TOL = 1e-10
PIVOT_TOL = 1e-12


def as_matrix(a) -> np.ndarray:
    """Coerce ``a`` to a finite 2-D float64 array (vectors become columns)."""
    m = np.asarray(a, dtype=np.float64)
    if m.ndim == 1:
        m = m[:, None]
    if m.ndim != 2:
        raise ShapeMismatch(f"expected a matrix, got array with shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix contains non-finite entries")
    return m


def cholesky(a: np.ndarray) -> np.ndarray:
    """Lower Cholesky factor of a symmetric positive-definite matrix.

    Raises
    ------
    NotPositiveDefinite
        If factorisation fails or any squared pivot is at most
        ``1e-12 * max(diag(a))``.
    """
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ShapeMismatch(f"cholesky needs a square matrix, got {a.shape}")
    scale = max(float(np.max(np.abs(a))), 1.0)
    if np.max(np.abs(a - a.T)) > SYMMETRY_TOL * scale:
        raise ValueError("matrix is not symmetric")
    dmax = float(np.max(np.diag(a)))
    if not dmax > 0:
        raise NotPositiveDefinite("non-positive diagonal")
    try:
        low = scipy.linalg.cholesky(a, lower=True, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(str(exc)) from None
    pivots = np.diag(low) ** 2
    if np.min(pivots) <= PIVOT_TOL * dmax:
        raise NotPositiveDefinite(
            f"pivot {np.min(pivots):.3e} below {PIVOT_TOL:g} * max diagonal ({dmax:.3e})")
    return low


def cho_solve(low: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve ``A x = b`` given the lower Cholesky factor of ``A``."""
    return scipy.linalg.cho_solve((low, True), b, check_finite=False)


def cholesky_solve(a, b) -> np.ndarray:
    """Solve ``A X = B`` for symmetric positive-definite ``A``."""
    a = as_matrix(a)
    b_arr = np.asarray(b, dtype=np.float64)
    if b_arr.shape[0] != a.shape[0]:
        raise ShapeMismatch(f"A is {a.shape}, B has {b_arr.shape[0]} rows")
    return cho_solve(cholesky(a), b_arr)


def spd_inverse(a) -> np.ndarray:
    """Explicit inverse of a small SPD matrix, symmetrised."""
    a = as_matrix(a)
    inv = cholesky_solve(a, np.eye(a.shape[0]))
    return 0.5 * (inv + inv.T)


def whiten(low: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Apply ``L^{-1}`` to ``b``; with ``C = L L^t`` this decorrelates noise with covariance C."""
    return scipy.linalg.solve_triangular(low, b, lower=True, check_finite=False)


def trace(a) -> float:
    return float(np.trace(np.asarray(a, dtype=np.float64)))


def trace_of_product(a: np.ndarray, b: np.ndarray) -> float:
    """``tr(A B)`` without forming the product."""
    return float(np.einsum("ij,ji->", a, b))


def outer(u, v) -> np.ndarray:
    return np.outer(np.asarray(u, dtype=np.float64), np.asarray(v, dtype=np.float64))


def centering_matrix(n: int) -> np.ndarray:
    """Mean-removal projector ``I - 1 1^t / n``."""
    if int(n) != n or n < 2:
        raise InvalidSize(f"centering matrix needs n >= 2, got {n}")
    n = int(n)
    return np.eye(n) - np.full((n, n), 1.0 / n)
