"""Dense symmetric and tridiagonal linear algebra."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .._accel import pick
from . import _kernels as K

_jacobi = pick(K.jacobi_eigen_nb, K.jacobi_eigen_np)
_cholesky = pick(K.cholesky_nb, K.cholesky_np)
_chol_inverse = pick(K.cholesky_inverse_nb, K.cholesky_inverse_np)
_tridiag_solve = pick(K.tridiag_ldl_solve_nb, K.tridiag_ldl_solve_np)


class NotPositiveDefiniteError(np.linalg.LinAlgError):
    """A factorisation met a zero or negative pivot."""

    def __init__(self, message, pivot=None):
        super().__init__(message)
        self.pivot = pivot


class ConvergenceError(RuntimeError):
    pass


def as_sym_matrix(A, name="matrix"):
    """Validate and return ``A`` as a float64 symmetric 2-D array.

    Symmetry is required exactly; callers holding a numerically symmetric
    matrix should symmetrise it first.
    """
    A = np.array(A, dtype=np.float64, copy=True)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] < 1:
        raise ValueError(f"{name} must be a non-empty square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError(f"{name} has non-finite entries")
    if not np.array_equal(A, A.T):
        raise ValueError(f"{name} is not symmetric")
    return A


@dataclass(frozen=True)
class TridiagMatrix:
    """Symmetric tridiagonal matrix stored by its two bands."""

    diag: np.ndarray
    offdiag: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.diag, dtype=np.float64).ravel()
        e = np.asarray(self.offdiag, dtype=np.float64).ravel()
        if d.size < 1:
            raise ValueError("tridiagonal matrix needs n >= 1")
        if e.size != d.size - 1:
            raise ValueError(f"offdiag must have n-1={d.size - 1} entries, got {e.size}")
        object.__setattr__(self, "diag", d)
        object.__setattr__(self, "offdiag", e)

    @property
    def n(self) -> int:
        return self.diag.size

    @classmethod
    def toeplitz(cls, a, b, n):
        """Constant diagonal ``a`` and off-diagonal ``b``."""
        return cls(np.full(n, float(a)), np.full(n - 1, float(b)))

    def to_dense(self):
        return np.diag(self.diag) + np.diag(self.offdiag, 1) + np.diag(self.offdiag, -1)

    def matvec(self, x):
        x = np.asarray(x, dtype=np.float64)
        y = self.diag.reshape((-1,) + (1,) * (x.ndim - 1)) * x
        off = self.offdiag.reshape((-1,) + (1,) * (x.ndim - 1))
        y[:-1] += off * x[1:]
        y[1:] += off * x[:-1]
        return y

    def norm1(self) -> float:
        col = np.abs(self.diag).copy()
        col[:-1] += np.abs(self.offdiag)
        col[1:] += np.abs(self.offdiag)
        return float(col.max())


def sym_eigen(A, tol=1e-12, max_sweeps=100):
    """Eigen-decomposition of a real symmetric matrix by cyclic Jacobi rotations.

    Parameters
    ----------
    A : array_like, shape (n, n)
        Exactly symmetric matrix.
    tol : float
        Sweeps stop once the off-diagonal Frobenius norm falls below
        ``tol * ||A||_F``.
    max_sweeps : int
        Sweep budget; exceeding it raises :class:`ConvergenceError`.

    Returns
    -------
    eigenvalues : ndarray, shape (n,)
        Sorted ascending.
    eigenvectors : ndarray, shape (n, n)
        Orthonormal columns, ``A @ V[:, i] = w[i] * V[:, i]``.
    """
    a = as_sym_matrix(A, "A")
    w, v, _, off = _jacobi(a, float(tol), int(max_sweeps))
    scale = np.sqrt(np.sum(np.asarray(A, dtype=np.float64) ** 2))
    if off > tol * scale:
        raise ConvergenceError(f"Jacobi did not converge in {max_sweeps} sweeps (off={off:.3e})")
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


def tridiag_solve(T: TridiagMatrix, b):
    """Solve ``T x = b`` for symmetric positive definite tridiagonal ``T``.

    ``b`` may be a vector or an (n, k) block of right-hand sides. Uses an
    LDL^T factorisation without pivoting, which is backward stable for SPD
    input; a non-positive pivot raises :class:`NotPositiveDefiniteError`.
    """
    b = np.asarray(b, dtype=np.float64)
    vec = b.ndim == 1
    B = b.reshape(T.n, -1) if vec else b
    if B.shape[0] != T.n:
        raise ValueError(f"right-hand side has {B.shape[0]} rows, expected {T.n}")
    x, fail = _tridiag_solve(T.diag, T.offdiag, np.ascontiguousarray(B))
    if fail >= 0:
        raise NotPositiveDefiniteError(f"non-positive pivot at row {fail}", pivot=int(fail))
    return x.ravel() if vec else x


def cholesky(A):
    """Lower Cholesky factor of an SPD matrix."""
    a = as_sym_matrix(A, "A")
    L, fail = _cholesky(a)
    if fail >= 0:
        raise NotPositiveDefiniteError(f"non-positive pivot at row {fail}", pivot=int(fail))
    return L


def spd_inverse(A):
    """Inverse of a symmetric positive definite matrix via Cholesky."""
    return _chol_inverse(cholesky(A))


def trace_product(A, B) -> float:
    """``tr(A B) = sum_ij A_ij B_ji`` without forming the product."""
    A = np.asarray(A, dtype=np.float64)
    B = np.asarray(B, dtype=np.float64)
    if A.shape != B.shape or A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"dimension mismatch: {A.shape} vs {B.shape}")
    return float(np.sum(A * B.T))


def psd_tolerance(A) -> float:
    return 1e-10 * max(float(np.max(np.abs(np.diag(A)))), np.finfo(float).tiny)


def is_psd(A, tol=None) -> bool:
    """True iff the smallest eigenvalue of ``A`` is at least ``-tol``.

    Decided by attempting a Cholesky factorisation of ``A + tol*I``, which
    exists exactly when ``lambda_min(A) > -tol``; failure usually surfaces at
    an early pivot, so indefinite inputs are rejected cheaply. The default
    tolerance is ``1e-10 * max|diag(A)|``.
    """
    a = as_sym_matrix(A, "A")
    if tol is None:
        tol = psd_tolerance(a)
    if tol <= 0:
        # singular PSD matrices have no Cholesky factor; fall back to the spectrum
        w, _ = sym_eigen(a)
        return bool(w[0] >= -tol)
    a[np.diag_indices_from(a)] += tol
    _, fail = _cholesky(a)
    return bool(fail < 0)
