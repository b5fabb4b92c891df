"""Error metrics, consistency-floor diagnostics, timing, and CSV reports."""

from __future__ import annotations

import csv
import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import integrate

from .newmark import Trajectory
from .wavelet import RickerParams, ricker_dt2_eval

ZERO_REFERENCE = 1e-300


class UndefinedMetricError(ValueError):
    """The reference trajectory has (numerically) zero norm."""


def _samples(traj) -> np.ndarray:
    return traj.u if isinstance(traj, Trajectory) else np.atleast_2d(np.asarray(traj))


def squared_norms(X, U: np.ndarray) -> np.ndarray:
    """Row-wise ``u^T X u``."""
    return np.sum(U * (X @ U.T).T, axis=1)


def relative_error(full, reduced, norm_matrix) -> float:
    """Discrete ``L^2(I; X)`` relative error summed over the stored time samples.

    ``full`` and ``reduced`` are trajectories (or ``(n_samples, N)`` arrays)
    sampled at identical times; ``norm_matrix`` is ``M`` for the ``L^2``
    norm or ``K`` for the ``H^1_0`` norm.
    """
    if isinstance(full, Trajectory) and isinstance(reduced, Trajectory):
        if full.times.shape != reduced.times.shape or not np.array_equal(full.times, reduced.times):
            raise ValueError("trajectories are sampled at different times")
    U = _samples(full)
    W = _samples(reduced)
    if U.shape != W.shape:
        raise ValueError(f"shape mismatch {U.shape} vs {W.shape}")
    den = float(np.sum(squared_norms(norm_matrix, U)))
    if den < ZERO_REFERENCE:
        raise UndefinedMetricError("reference trajectory has zero norm")
    num = float(np.sum(squared_norms(norm_matrix, U - W)))
    return float(np.sqrt(max(num, 0.0) / den))


def time_norm(traj, norm_matrix, dt: float) -> float:
    """``(dt * sum_j ||u_j||_X^2)^(1/2)``, a Riemann sum for the ``L^2(I; X)`` norm."""
    return float(np.sqrt(dt * np.sum(squared_norms(norm_matrix, _samples(traj)))))


@dataclass(frozen=True)
class ConsistencyFloor:
    """Size of the wavelet's tail before ``t = 0``.

    ``quadrature`` is ``int_{-inf}^0 |q''(t)| exp(-mu t) dt``; ``bound`` is
    ``alpha exp(-(alpha t0 / 2 - 1)^2)``, reported only when
    ``t0 >= 2 (alpha + mu) / alpha^2`` (``applicable``).
    """

    quadrature: float
    bound: float | None
    applicable: bool

    @property
    def status(self) -> str:
        return "ok" if self.applicable else "not-applicable"


def tail_integral(params: RickerParams, mu: float) -> float:
    a, t0 = params.alpha, params.t0
    # q'' = Hermite(4) x Gaussian in x = a (t - t0) / 2; integrate in x up to t = 0
    x_end = -0.5 * a * t0
    x_peak = -mu / a  # maximizer of exp(-x^2 - 2 mu x / a)
    x_lo = min(x_end, x_peak) - 40.0
    roots = np.array([-1.6506801238857845, -0.5246476232752903, 0.5246476232752903, 1.6506801238857845])
    brk = sorted(r for r in roots if x_lo < r < x_end)

    def integrand(x):
        t = t0 + 2.0 * x / a
        return abs(float(ricker_dt2_eval(params, t))) * np.exp(-mu * t) * 2.0 / a

    val, _ = integrate.quad(integrand, x_lo, x_end, points=brk or None, epsabs=0.0, epsrel=1e-10, limit=400)
    return float(val)


def consistency_floor(params: RickerParams, mu: float) -> ConsistencyFloor:
    applicable = params.t0 >= 2.0 * (params.alpha + mu) / params.alpha**2
    bound = float(params.alpha * np.exp(-(0.5 * params.alpha * params.t0 - 1.0) ** 2)) if applicable else None
    return ConsistencyFloor(quadrature=tail_integral(params, mu), bound=bound, applicable=applicable)


def laplace_projection_residual(solutions: np.ndarray, weights, Phi: np.ndarray, B) -> float:
    """``sum_j w_j ||U(s_j) - P U(s_j)||_B^2`` over complex solutions ``U(s_j)``."""
    E = solutions - Phi @ (Phi.T @ (B @ solutions))
    sq = np.real(np.sum(E.conj() * (B @ E), axis=0))
    return float(np.dot(np.asarray(weights, dtype=float), sq))


def time_projection_residual(times: np.ndarray, samples: np.ndarray, Phi: np.ndarray, B, mu: float) -> float:
    """``int e^{-2 mu t} ||f(t) - P f(t)||_B^2 dt`` by Simpson's rule on the sample grid."""
    E = samples - ((samples @ (B @ Phi)) @ Phi.T)
    vals = np.exp(-2.0 * mu * times) * squared_norms(B, E)
    return float(integrate.simpson(vals, x=times))


@dataclass
class ErrorReport:
    M: int
    R_values: list[int] = field(default_factory=list)
    rel_error_L2: list[float] = field(default_factory=list)
    rel_error_H1: list[float] = field(default_factory=list)
    floor: ConsistencyFloor | None = None

    def add(self, R: int, e_l2: float, e_h1: float) -> None:
        if e_l2 < 0 or e_h1 < 0:
            raise ValueError("errors must be nonnegative")
        self.R_values.append(int(R))
        self.rel_error_L2.append(float(e_l2))
        self.rel_error_H1.append(float(e_h1))

    def rows(self):
        return [(R, self.M, a, b) for R, a, b in zip(self.R_values, self.rel_error_L2, self.rel_error_H1)]


RB_PHASES = ("assemble_fem", "laplace_hf_solves", "build_rb", "solve_td_rb", "reconstruct_hf")


@dataclass(frozen=True)
class TimingReport:
    assemble_fem: float = 0.0
    laplace_hf_solves: float = 0.0
    build_rb: float = 0.0
    solve_td_rb: float = 0.0
    reconstruct_hf: float = 0.0
    hf_total: float = 0.0

    @property
    def rb_total(self) -> float:
        return sum(getattr(self, k) for k in RB_PHASES)

    @property
    def speed_up(self) -> float:
        return self.hf_total / self.rb_total if self.rb_total > 0 else float("inf")

    def rows(self):
        return [(k, getattr(self, k)) for k in RB_PHASES + ("hf_total",)]


class PhaseTimer:
    """Accumulates wall-clock time per named phase."""

    def __init__(self):
        self.durations: dict[str, float] = {}

    @contextmanager
    def phase(self, name: str):
        start = time.perf_counter()
        try:
            yield
        finally:
            self.durations[name] = self.durations.get(name, 0.0) + time.perf_counter() - start

    def report(self) -> TimingReport:
        d = self.durations
        hf = d.get("assemble_fem", 0.0) + d.get("solve_td_hf", 0.0)
        return TimingReport(**{k: d.get(k, 0.0) for k in RB_PHASES}, hf_total=hf)


def timing_capture(timer: PhaseTimer) -> TimingReport:
    return timer.report()


def _write_csv(path, header, rows) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in row])
    return path


def write_singular_values_csv(path, singular_values) -> Path:
    rows = [(j + 1, float(v)) for j, v in enumerate(singular_values)]
    return _write_csv(path, ("index", "value"), rows)


def write_rel_error_csv(path, reports) -> Path:
    rows = [row for rep in reports for row in rep.rows()]
    return _write_csv(path, ("R", "M", "L2", "H1"), rows)


def write_timings_csv(path, timing: TimingReport) -> Path:
    return _write_csv(path, ("phase", "seconds"), timing.rows())
