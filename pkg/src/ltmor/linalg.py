"""Sparse/dense factorization kernels used across the pipeline.

Real SPD matrices are factored as ``P A P^T = R^T R`` where ``P`` is a reverse
Cuthill-McKee permutation and ``R`` is banded upper triangular, so the
factor ``F = R P`` satisfies ``A = F^T F``. Complex shifted systems
``s^2 M + A`` go through SuperLU with a minimum-degree ordering on the
symmetric pattern and diagonal pivoting: for ``Re s > 0`` the matrix times
``conj(s)`` has a positive definite Hermitian part.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.sparse.csgraph import reverse_cuthill_mckee


class NotPositiveDefiniteError(np.linalg.LinAlgError):
    """Raised when a Cholesky factorization hits a non-positive pivot."""


def is_symmetric(A, rtol: float = 1e-14) -> bool:
    """``max|A - A^T| <= rtol * max|A|``."""
    if sp.issparse(A):
        D = abs(A - A.T)
        scale = abs(A).max()
        return D.nnz == 0 or D.max() <= rtol * scale
    A = np.asarray(A)
    return np.max(np.abs(A - A.T), initial=0.0) <= rtol * np.max(np.abs(A), initial=0.0)


@dataclass(frozen=True)
class CholeskyFactor:
    """``A = F^T F`` with ``F = R P``; ``R`` banded upper triangular."""

    perm: np.ndarray
    banded: np.ndarray  # LAPACK upper band storage of R
    bandwidth: int
    kind: str = "real-cholesky"

    @property
    def n(self) -> int:
        return self.perm.size

    @property
    def R(self) -> sp.csr_matrix:
        """Upper triangular factor in the permuted ordering (sparse)."""
        u = self.bandwidth
        return sp.dia_matrix((self.banded, np.arange(u, -1, -1)), shape=(self.n, self.n)).tocsr()

    def solve(self, b: np.ndarray) -> np.ndarray:
        b = np.asarray(b)
        x = np.empty_like(b, dtype=np.result_type(b, float))
        x[self.perm] = sla.cho_solve_banded((self.banded, False), b[self.perm], check_finite=False)
        return x

    def apply_factor(self, x: np.ndarray) -> np.ndarray:
        """``F x = R (P x)``; works column-wise on 2D input."""
        return self.R @ np.asarray(x)[self.perm]

    def solve_factor(self, y: np.ndarray) -> np.ndarray:
        """``F^{-1} y``: one banded triangular solve then undo the permutation."""
        y = np.asarray(y)
        z = sla.solve_banded((0, self.bandwidth), self.banded, y, check_finite=False)
        x = np.empty_like(z)
        x[self.perm] = z
        return x


@dataclass(frozen=True)
class LUFactor:
    """Sparse LU of a (possibly complex) square matrix."""

    lu: spla.SuperLU
    kind: str = "complex-lu"

    @property
    def n(self) -> int:
        return self.lu.shape[0]

    def solve(self, b: np.ndarray) -> np.ndarray:
        return self.lu.solve(np.asarray(b, dtype=self.lu.U.dtype))


@dataclass(frozen=True)
class DenseCholesky:
    """Dense SPD factorization for small (reduced) operators."""

    cf: tuple
    kind: str = "dense-cholesky"

    @property
    def n(self) -> int:
        return self.cf[0].shape[0]

    def solve(self, b: np.ndarray) -> np.ndarray:
        return sla.cho_solve(self.cf, b, check_finite=False)


def cholesky(A) -> CholeskyFactor:
    """Factor a sparse symmetric positive definite matrix.

    Raises
    ------
    NotPositiveDefiniteError
        If a non-positive pivot is encountered.
    """
    A = sp.csr_matrix(A)
    n = A.shape[0]
    if A.shape != (n, n):
        raise ValueError(f"matrix must be square, got {A.shape}")
    perm = np.asarray(reverse_cuthill_mckee(A, symmetric_mode=True), dtype=np.int64)
    Ap = A[perm][:, perm].tocsr()
    coo = Ap.tocoo()
    u = int(np.max(coo.col - coo.row, initial=0))
    ab = np.zeros((u + 1, n))
    for k in range(u + 1):
        ab[u - k, k:] = Ap.diagonal(k)
    try:
        cb = sla.cholesky_banded(ab, lower=False, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefiniteError(f"matrix is not positive definite: {exc}") from None
    return CholeskyFactor(perm=perm, banded=cb, bandwidth=u)


def dense_cholesky(A) -> DenseCholesky:
    try:
        return DenseCholesky(sla.cho_factor(np.asarray(A), lower=False, check_finite=False))
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefiniteError(f"matrix is not positive definite: {exc}") from None


def factorize_spd(A):
    """Dispatch to the sparse or dense SPD factorization."""
    return cholesky(A) if sp.issparse(A) else dense_cholesky(A)


def complex_lu(A, shift: complex, M) -> LUFactor:
    """LU factorization of ``shift**2 * M + A``."""
    T = (sp.csc_matrix(M, dtype=complex) * (shift * shift) + sp.csc_matrix(A, dtype=complex)).tocsc()
    return LUFactor(spla.splu(T, permc_spec="MMD_AT_PLUS_A", diag_pivot_thresh=0.0,
                              options={"SymmetricMode": True}))


def solve(f, b: np.ndarray) -> np.ndarray:
    return f.solve(b)


def dense_svd(A: np.ndarray):
    """Thin SVD ``A = U diag(s) Vt`` with ``s`` nonincreasing."""
    return np.linalg.svd(np.asarray(A), full_matrices=False)
