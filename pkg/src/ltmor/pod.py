"""Weighted POD in the energy inner product via a Cholesky-whitened SVD.

With ``B = F^T F`` and ``D = diag(weights)``, the whitened snapshots are
``S~ = F S D^(1/2)``. Their leading left singular vectors, mapped back by
``F^{-1}``, give a ``B``-orthonormal basis that minimizes the weighted
projection residual; the residual equals the sum of the discarded squared
singular values.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from . import linalg

RANK_RTOL = 1e-13


class RankDeficiencyWarning(UserWarning):
    pass


@dataclass(frozen=True)
class ReducedBasis:
    """``B``-orthonormal reduced basis.

    Attributes
    ----------
    Phi : (N, R) array
    singular_values : (min(N, n_snap),) array
        Full whitened spectrum, nonincreasing.
    R : int
        Retained dimension.
    rank : int
        Numerical rank (singular values above ``1e-13 * sigma_1``).
    gram_tag : str
        Which energy Gram matrix was used.
    truncated : bool
        True if the requested dimension exceeded the rank.
    """

    Phi: np.ndarray
    singular_values: np.ndarray
    R: int
    rank: int
    gram_tag: str = "stiffness"
    truncated: bool = False

    def restrict(self, R: int) -> "ReducedBasis":
        """Leading ``R`` columns (nested bases come for free from the SVD)."""
        if R > self.Phi.shape[1]:
            raise ValueError(f"basis only holds {self.Phi.shape[1]} vectors, asked for {R}")
        return ReducedBasis(self.Phi[:, :R], self.singular_values, R, self.rank, self.gram_tag, self.truncated)


def whiten(S: np.ndarray, weights: np.ndarray, factor: linalg.CholeskyFactor) -> np.ndarray:
    """``F S D^(1/2)``."""
    weights = np.asarray(weights, dtype=float)
    return factor.apply_factor(np.asarray(S, dtype=float)) * np.sqrt(weights)[None, :]


def _left_singular(St: np.ndarray, method: str):
    n, m = St.shape
    if method == "auto":
        method = "svd"
    if method == "svd":
        U, sig, _ = linalg.dense_svd(St)
        return U, sig
    if method == "gram":
        # eigen-decomposition of the small m x m Gram matrix; loses half the digits
        lam, V = np.linalg.eigh(St.T @ St)
        order = np.argsort(lam)[::-1]
        lam, V = np.clip(lam[order], 0.0, None), V[:, order]
        sig = np.sqrt(lam)
        keep = sig > RANK_RTOL * max(sig[0], np.finfo(float).tiny)
        U = np.zeros((n, min(n, m)))
        k = min(n, m)
        U[:, : np.count_nonzero(keep[:k])] = (St @ V[:, keep]) / sig[keep]
        return U, sig[:k]
    raise ValueError(f"unknown SVD method {method!r}")


def build_reduced_basis(S, weights, B, R: int, *, factor: linalg.CholeskyFactor | None = None,
                        method: str = "auto", gram_tag: str = "stiffness") -> ReducedBasis:
    """Weighted POD basis of dimension ``R``.

    Parameters
    ----------
    S : (N, m) array
        Real snapshot matrix.
    weights : (m,) array
        Strictly positive quadrature weights.
    B : sparse SPD matrix
        Energy Gram matrix defining the norm.
    R : int
        Target dimension. If it exceeds the numerical rank the basis is
        truncated to the rank and a :class:`RankDeficiencyWarning` is issued.
    factor : CholeskyFactor, optional
        Precomputed factorization of ``B``.
    method : {"auto", "svd", "gram"}
        ``"gram"`` eigen-decomposes ``S~^T S~`` instead of running the SVD.
    """
    S = np.asarray(S, dtype=float)
    if S.ndim == 1:
        S = S[:, None]
    weights = np.asarray(weights, dtype=float)
    if weights.shape != (S.shape[1],):
        raise ValueError(f"expected {S.shape[1]} weights, got shape {weights.shape}")
    if np.any(weights <= 0):
        raise ValueError("weights must be strictly positive")
    if R < 0:
        raise ValueError(f"R must be nonnegative, got {R}")
    factor = factor or linalg.cholesky(B)
    U, sig = _left_singular(whiten(S, weights, factor), method)
    rank = int(np.count_nonzero(sig > RANK_RTOL * sig[0])) if sig.size and sig[0] > 0 else 0
    truncated = R > rank
    if truncated:
        warnings.warn(f"requested R={R} exceeds numerical rank {rank}; truncating",
                      RankDeficiencyWarning, stacklevel=2)
        R = rank
    Phi = factor.solve_factor(U[:, :R]) if R else np.zeros((S.shape[0], 0))
    return ReducedBasis(Phi=Phi, singular_values=sig, R=R, rank=rank, gram_tag=gram_tag, truncated=truncated)


def project(Phi: np.ndarray, B, X: np.ndarray) -> np.ndarray:
    """``B``-orthogonal projection ``Phi Phi^T B X``."""
    return Phi @ (Phi.T @ (B @ X))


def pod_residual(S, weights, B, basis: ReducedBasis | np.ndarray) -> float:
    """Direct evaluation of ``sum_j w_j ||S_j - Phi Phi^T B S_j||_B^2``."""
    Phi = basis.Phi if isinstance(basis, ReducedBasis) else np.asarray(basis)
    S = np.asarray(S)
    if S.ndim == 1:
        S = S[:, None]
    E = S - project(Phi, B, S) if Phi.shape[1] else S
    sq = np.real(np.sum(E.conj() * (B @ E), axis=0))
    return float(np.dot(np.asarray(weights, dtype=float), sq))


def discarded_energy(singular_values: np.ndarray, R: int) -> float:
    """``sum_{j > R} sigma_j^2``."""
    return float(np.sum(np.asarray(singular_values)[R:] ** 2))


def singular_value_rows(singular_values: np.ndarray):
    """``(index, value)`` rows with 1-based indices, for CSV output."""
    return [(j + 1, float(v)) for j, v in enumerate(singular_values)]
