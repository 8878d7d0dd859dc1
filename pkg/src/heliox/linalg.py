"""Dense symmetric and generalized-symmetric eigensolvers.

Thin, contract-enforcing wrappers around LAPACK (via numpy/scipy): the
generalized problem H c = E S c is reduced with a Cholesky factorization
S = L L^T to an ordinary symmetric problem, and the returned coefficient
vectors are S-normalized (c^T S c = 1).  A failed Cholesky pivot is turned
into :class:`ConditioningError` carrying the pivot index, so callers can
respond by shrinking the basis.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import lapack, solve_triangular

from .errors import ConditioningError, NumericalError


@dataclass
class MatrixPair:
    """Hamiltonian/overlap pair of a generalized symmetric eigenproblem."""

    H: np.ndarray
    S: np.ndarray

    def __post_init__(self):
        self.H = np.asarray(self.H, dtype=float)
        self.S = np.asarray(self.S, dtype=float)
        if self.H.shape != self.S.shape or self.H.ndim != 2:
            raise ValueError(
                f"shape mismatch: H {self.H.shape}, S {self.S.shape}"
            )
        if self.H.shape[0] != self.H.shape[1]:
            raise ValueError(f"matrices must be square, got {self.H.shape}")

    @property
    def dim(self) -> int:
        return self.H.shape[0]


def _check_symmetric(A: np.ndarray, name: str) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"{name} must be square, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError(f"{name} contains non-finite entries")
    if not np.array_equal(A, A.T):
        raise ValueError(f"{name} is not exactly symmetric")
    return A


def sym_eig(A: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a symmetric matrix.

    Returns (eigenvalues ascending, orthonormal eigenvectors as columns).
    """
    A = _check_symmetric(A, "A")
    try:
        w, v = np.linalg.eigh(A)
    except np.linalg.LinAlgError as err:
        raise NumericalError(f"symmetric eigensolver failed: {err}") from err
    return w, v


def sym_eigvals(A: np.ndarray) -> np.ndarray:
    """Eigenvalues only (ascending); cheaper when vectors are not needed."""
    A = _check_symmetric(A, "A")
    try:
        return np.linalg.eigvalsh(A)
    except np.linalg.LinAlgError as err:
        raise NumericalError(f"symmetric eigensolver failed: {err}") from err


def cholesky_lower(S: np.ndarray) -> np.ndarray:
    """Cholesky factor L of S = L L^T, raising ConditioningError with the
    0-based index of the first non-positive pivot."""
    c, info = lapack.dpotrf(S, lower=1, overwrite_a=0)
    if info > 0:
        raise ConditioningError(
            f"overlap matrix is not positive definite: pivot {info - 1} "
            f"of {S.shape[0]} failed; reduce the basis order",
            pivot=info - 1,
        )
    if info < 0:
        raise ValueError(f"illegal argument {-info} passed to dpotrf")
    return np.tril(c)


def gen_sym_eig(pair: MatrixPair) -> tuple[np.ndarray, np.ndarray]:
    """Solve H c = E S c for symmetric H and positive-definite S.

    Returns (eigenvalues ascending, coefficient vectors as columns with
    c^T S c = 1).
    """
    H = _check_symmetric(pair.H, "H")
    S = _check_symmetric(pair.S, "S")
    L = cholesky_lower(S)
    # A = L^-1 H L^-T; symmetrize to kill the last-bit asymmetry of the solves
    X = solve_triangular(L, H, lower=True)
    A = solve_triangular(L, X.T, lower=True)
    A = 0.5 * (A + A.T)
    try:
        w, Y = np.linalg.eigh(A)
    except np.linalg.LinAlgError as err:
        raise NumericalError(f"generalized eigensolver failed: {err}") from err
    C = solve_triangular(L, Y, lower=True, trans="T")
    return w, C
