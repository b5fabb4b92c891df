"""Implicit Newmark-beta integration of ``M u'' + K u = q(t) b`` from rest.

The same routine drives the sparse high-fidelity system and the dense
reduced one; only the factorization backend differs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import linalg
from .pod import ReducedBasis

STEP_RESIDUAL_RTOL = 1e-10


@dataclass(frozen=True)
class NewmarkConfig:
    T: float
    N_t: int
    beta: float = 0.25
    gamma: float = 0.5

    def __post_init__(self):
        if not (self.T > 0 and self.N_t >= 1):
            raise ValueError(f"need T > 0 and N_t >= 1, got T={self.T}, N_t={self.N_t}")
        if not (self.beta > 0 and self.gamma > 0):
            raise ValueError("Newmark parameters must be positive")

    @property
    def dt(self) -> float:
        return self.T / self.N_t


@dataclass(frozen=True)
class Trajectory:
    """Stored samples: ``times[j]``, ``u[j]`` (and optionally ``v[j]``, ``a[j]``)."""

    times: np.ndarray
    steps: np.ndarray
    u: np.ndarray
    v: np.ndarray | None = None
    a: np.ndarray | None = None


def sample_steps(N_t: int, stride: int = 1, extra=()) -> np.ndarray:
    """Step indices ``0, stride, 2 stride, ...`` plus ``N_t`` and any ``extra`` indices."""
    idx = set(range(0, N_t + 1, max(int(stride), 1)))
    idx.add(N_t)
    idx.update(int(i) for i in extra if 0 <= int(i) <= N_t)
    return np.array(sorted(idx), dtype=np.int64)


def newmark_solve(Mm, Km, load_vec, q_of_t: Callable[[float], float], cfg: NewmarkConfig,
                  stride: int = 1, extra_steps=(), store_velocity: bool = False,
                  store_acceleration: bool = False, check_every: int = 0) -> Trajectory:
    """Newmark-beta with vanishing initial displacement and velocity.

    The effective matrix ``M + beta dt^2 K`` is factored once. The initial
    acceleration solves ``M a_0 = q(0) b``. ``check_every=k > 0`` verifies the
    effective-solve residual every ``k`` steps (the first step is always
    checked).
    """
    dt, beta, gamma = cfg.dt, cfg.beta, cfg.gamma
    load_vec = np.asarray(load_vec, dtype=float)
    n = load_vec.size
    Meff = Mm + (beta * dt * dt) * Km
    fac = linalg.factorize_spd(Meff)
    mass_fac = linalg.factorize_spd(Mm)

    keep = sample_steps(cfg.N_t, stride, extra_steps)
    slot = {int(j): i for i, j in enumerate(keep)}
    U = np.zeros((keep.size, n))
    V = np.zeros((keep.size, n)) if store_velocity else None
    A = np.zeros((keep.size, n)) if store_acceleration else None

    u = np.zeros(n)
    v = np.zeros(n)
    a = mass_fac.solve(q_of_t(0.0) * load_vec)
    if A is not None:
        A[0] = a

    c_pred = dt * dt * (0.5 - beta)
    c_v = dt * (1.0 - gamma)
    c_u = beta * dt * dt
    c_a = gamma * dt
    for j in range(1, cfg.N_t + 1):
        u_pred = u + dt * v + c_pred * a
        v_pred = v + c_v * a
        rhs = q_of_t(j * dt) * load_vec - Km @ u_pred
        a = fac.solve(rhs)
        if j == 1 or (check_every and j % check_every == 0):
            r = Meff @ a - rhs
            nr = np.linalg.norm(rhs)
            if nr > 0 and np.linalg.norm(r) > STEP_RESIDUAL_RTOL * nr:
                raise np.linalg.LinAlgError(f"effective solve residual {np.linalg.norm(r) / nr:.2e} at step {j}")
        u = u_pred + c_u * a
        v = v_pred + c_a * a
        i = slot.get(j)
        if i is not None:
            U[i] = u
            if V is not None:
                V[i] = v
            if A is not None:
                A[i] = a
    return Trajectory(times=keep * dt, steps=keep, u=U, v=V, a=A)


def reduced_operators(basis: ReducedBasis | np.ndarray, Mm, Km, load_vec):
    """Galerkin projection ``(Phi^T M Phi, Phi^T K Phi, Phi^T b)``."""
    Phi = basis.Phi if isinstance(basis, ReducedBasis) else np.asarray(basis)
    Mr = Phi.T @ (Mm @ Phi)
    Kr = Phi.T @ (Km @ Phi)
    Mr = 0.5 * (Mr + Mr.T)
    Kr = 0.5 * (Kr + Kr.T)
    return np.asarray(Mr), np.asarray(Kr), Phi.T @ np.asarray(load_vec)


def reconstruct(basis: ReducedBasis | np.ndarray, reduced: Trajectory, steps=None) -> Trajectory:
    """Lift reduced coefficients to the full space, optionally at a subset of stored steps."""
    Phi = basis.Phi if isinstance(basis, ReducedBasis) else np.asarray(basis)
    sel = slice(None) if steps is None else np.searchsorted(reduced.steps, np.asarray(steps))

    def lift(X):
        return None if X is None else X[sel] @ Phi.T

    return Trajectory(times=reduced.times[sel], steps=reduced.steps[sel], u=lift(reduced.u),
                      v=lift(reduced.v), a=lift(reduced.a))


def energy(Mm, Km, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """``0.5 v^T M v + 0.5 u^T K u`` row-wise."""
    u = np.atleast_2d(u)
    v = np.atleast_2d(v)
    Mv = (Mm @ v.T).T
    Ku = (Km @ u.T).T
    return 0.5 * np.sum(v * Mv, axis=1) + 0.5 * np.sum(u * Ku, axis=1)


