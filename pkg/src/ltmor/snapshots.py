"""Laplace-domain sampling plan and frequency-controlled snapshot solves."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import linalg
from .wavelet import RickerParams, bilateral_laplace_d2q

RESIDUAL_RTOL = 1e-10


@dataclass(frozen=True)
class SamplingPlan:
    """Points ``s_k = mu + i k theta`` for ``k = -M..M`` with uniform weights ``theta``.

    ``theta = (pi alpha^2 eta / M^2)^(1/3)``.
    """

    alpha: float
    mu: float
    eta: float
    M: int
    theta: float

    @property
    def indices(self) -> np.ndarray:
        return np.arange(-self.M, self.M + 1)

    @property
    def points(self) -> np.ndarray:
        return self.mu + 1j * self.theta * self.indices

    @property
    def weights(self) -> np.ndarray:
        return np.full(2 * self.M + 1, self.theta)

    @property
    def upper_points(self) -> np.ndarray:
        """``s_k`` for ``k = 0..M``."""
        return self.mu + 1j * self.theta * np.arange(self.M + 1)


def sinc_spacing(alpha: float, eta: float, M: int) -> float:
    return float(np.cbrt(np.pi * alpha**2 * eta / M**2))


def default_abscissa(alpha: float) -> float:
    """``mu = alpha`` for ``alpha = pi`` (or below), ``alpha / 8`` otherwise."""
    return alpha if alpha <= np.pi * (1 + 1e-12) else alpha / 8.0


def make_sampling_plan(alpha: float, mu: float | None = None, eta: float | None = None,
                       M: int = 1) -> SamplingPlan:
    mu = default_abscissa(alpha) if mu is None else float(mu)
    eta = 0.5 * mu if eta is None else float(eta)
    if not alpha > 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    if not 0 < eta < mu:
        raise ValueError(f"need 0 < eta < mu, got eta={eta}, mu={mu}")
    if int(M) != M or M < 1:
        raise ValueError(f"M must be a positive integer, got {M}")
    M = int(M)
    return SamplingPlan(alpha=float(alpha), mu=mu, eta=eta, M=M, theta=sinc_spacing(alpha, eta, M))


def solve_snapshot(K, M_mass, load, params: RickerParams, s: complex,
                   check_residual: bool = True) -> np.ndarray:
    """Solve ``(s^2 M + K) U = B{q''}(s) load`` for one Laplace point."""
    s = complex(s)
    if not s.real > 0:
        raise ValueError(f"Laplace point must lie in the right half plane, got {s}")
    rhs = complex(bilateral_laplace_d2q(params, s)) * np.asarray(load, dtype=complex)
    fac = linalg.complex_lu(K, s, M_mass)
    U = fac.solve(rhs)
    if check_residual:
        r = (s * s) * (M_mass @ U) + K @ U - rhs
        nrhs = np.linalg.norm(rhs)
        if np.linalg.norm(r) > RESIDUAL_RTOL * nrhs and nrhs > 0:
            raise np.linalg.LinAlgError(
                f"snapshot residual {np.linalg.norm(r) / nrhs:.2e} exceeds {RESIDUAL_RTOL:g} at s={s}"
            )
    return U


@dataclass(frozen=True)
class SnapshotSet:
    """Snapshot solves at the plan's points.

    With ``mirrored=True`` only ``k = 0..M`` were solved (``M+1`` columns)
    and the ``-k`` columns come from ``U(conj s) = conj U(s)``; otherwise
    ``solutions`` holds all ``2M+1`` independent solves for ``k = -M..M``.
    """

    plan: SamplingPlan
    solutions: np.ndarray
    mirrored: bool = True

    def full_solutions(self) -> np.ndarray:
        """Complex solutions for ``k = -M..M``."""
        U = self.solutions
        if not self.mirrored:
            return U
        return np.concatenate([U[:, :0:-1].conj(), U], axis=1)

    @property
    def upper_solutions(self) -> np.ndarray:
        """Complex solutions for ``k = 0..M``."""
        return self.solutions if self.mirrored else self.solutions[:, self.plan.M:]

    @property
    def snapshot_matrix(self) -> np.ndarray:
        """Real ``N x (2M+1)`` matrix of ``Re U(s_k)``, ``k = -M..M``."""
        if not self.mirrored:
            return np.ascontiguousarray(self.solutions.real)
        R = self.solutions.real
        return np.concatenate([R[:, :0:-1], R], axis=1)

    @property
    def weights(self) -> np.ndarray:
        return self.plan.weights


def compute_snapshot_set(K, M_mass, load, params: RickerParams, plan: SamplingPlan,
                         workers: int = 1, mirror: bool = True) -> SnapshotSet:
    """Solve at ``k = 0..M`` and mirror, or at all ``2M+1`` points if ``mirror=False``.

    Solves are independent and run on a pool of ``workers`` threads; each
    thread owns its factorization.
    """
    pts = plan.upper_points if mirror else plan.points

    def one(s):
        return solve_snapshot(K, M_mass, load, params, s)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            cols = list(pool.map(one, pts))
    else:
        cols = [one(s) for s in pts]
    U = np.column_stack(cols)
    if not np.all(np.isfinite(U)):
        raise FloatingPointError("non-finite snapshot")
    return SnapshotSet(plan=plan, solutions=U, mirrored=mirror)


def energy_norms(X, B) -> np.ndarray:
    """Column-wise ``sqrt(x^H B x)`` for real or complex ``X``."""
    X = np.asarray(X)
    if X.ndim == 1:
        X = X[:, None]
    BX = B @ X
    return np.sqrt(np.maximum(np.real(np.sum(X.conj() * BX, axis=0)), 0.0))


def save_matrix(path, A: np.ndarray, **meta) -> Path:
    """Persist a matrix as ``.npz`` (binary) or ``.csv`` depending on the suffix."""
    path = Path(path)
    if path.suffix == ".csv":
        np.savetxt(path, np.asarray(A), delimiter=",", fmt="%.17g")
    else:
        np.savez(path, matrix=np.asarray(A), **{k: np.asarray(v) for k, v in meta.items()})
    return path


def load_matrix(path) -> tuple[np.ndarray, dict]:
    path = Path(path)
    if path.suffix == ".csv":
        return np.atleast_2d(np.loadtxt(path, delimiter=",")), {}
    with np.load(path) as data:
        meta = {k: data[k] for k in data.files if k != "matrix"}
        return data["matrix"], meta
