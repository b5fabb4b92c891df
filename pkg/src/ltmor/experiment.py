"""Offline / online / reference pipelines and report emission."""

from __future__ import annotations

import json
import logging
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy

from . import fem, linalg, metrics, newmark, pod, snapshots
from .config import ExperimentConfig
from .mesh import Mesh, build_unit_square_mesh, write_field_file
from .wavelet import RickerParams, bilateral_laplace_d2q, ricker_eval

log = logging.getLogger(__name__)

BASIS_FILE = "basis.npz"


@dataclass(frozen=True)
class Problem:
    """Assembled high-fidelity model."""

    mesh: Mesh
    K: object
    M: object
    load: np.ndarray
    B: object
    B_factor: linalg.CholeskyFactor
    params: RickerParams
    source: fem.SpatialSource

    def q(self, t: float) -> float:
        return float(ricker_eval(self.params, t))


def coefficient_field(cfg: ExperimentConfig) -> fem.CoefficientField:
    if cfg.coefficient == "piecewise":
        return fem.CoefficientField.piecewise_constant(cfg.coefficient_blocks)
    return fem.CoefficientField.identity()


def assemble_problem(cfg: ExperimentConfig) -> Problem:
    mesh = build_unit_square_mesh(cfg.n)
    K = fem.assemble_stiffness(mesh, coefficient_field(cfg))
    M = fem.assemble_mass(mesh)
    src = fem.gaussian_source(mesh, cfg.source_center, cfg.source_width)
    load = fem.build_source_vector(mesh, src, M)
    B = fem.assemble_gram_V(K, M, cfg.gram)
    return Problem(mesh, K, M, load, B, linalg.cholesky(B), RickerParams(cfg.alpha, cfg.t0), src)


def sampling_plan(cfg: ExperimentConfig, M: int | None = None) -> snapshots.SamplingPlan:
    return snapshots.make_sampling_plan(cfg.alpha, cfg.mu, cfg.eta, cfg.M if M is None else M)


def time_config(cfg: ExperimentConfig) -> newmark.NewmarkConfig:
    return newmark.NewmarkConfig(cfg.T, cfg.N_t, cfg.beta, cfg.gamma)


def field_steps(cfg: ExperimentConfig) -> list[int]:
    return [int(round(t / cfg.dt)) for t in cfg.field_times]


def sample_steps(cfg: ExperimentConfig) -> np.ndarray:
    return newmark.sample_steps(cfg.N_t, cfg.stride, field_steps(cfg))


@dataclass(frozen=True)
class OfflineResult:
    """Everything the online stage needs: basis plus projected operators."""

    plan: snapshots.SamplingPlan
    basis: pod.ReducedBasis
    Mr: np.ndarray
    Kr: np.ndarray
    br: np.ndarray
    snapshot_set: snapshots.SnapshotSet | None = None

    def operators(self, R: int):
        R = min(R, self.basis.R)
        return self.Mr[:R, :R], self.Kr[:R, :R], self.br[:R]

    def save(self, path) -> Path:
        p = self.plan
        b = self.basis
        path = Path(path)
        np.savez(path, Phi=b.Phi, singular_values=b.singular_values, R=b.R, rank=b.rank,
                 gram_tag=b.gram_tag, truncated=b.truncated, Mr=self.Mr, Kr=self.Kr, br=self.br,
                 plan=np.array([p.alpha, p.mu, p.eta, p.M, p.theta]))
        return path

    @classmethod
    def load(cls, path) -> "OfflineResult":
        with np.load(path) as d:
            alpha, mu, eta, M, theta = d["plan"]
            plan = snapshots.SamplingPlan(float(alpha), float(mu), float(eta), int(M), float(theta))
            basis = pod.ReducedBasis(Phi=d["Phi"], singular_values=d["singular_values"], R=int(d["R"]),
                                     rank=int(d["rank"]), gram_tag=str(d["gram_tag"]),
                                     truncated=bool(d["truncated"]))
            return cls(plan, basis, d["Mr"], d["Kr"], d["br"])


def run_offline(cfg: ExperimentConfig, problem: Problem, M: int | None = None,
                timer: metrics.PhaseTimer | None = None, workers: int | None = None) -> OfflineResult:
    """Snapshot solves at ``k = 0..M``, weighted POD, and Galerkin projection."""
    timer = timer or metrics.PhaseTimer()
    plan = sampling_plan(cfg, M)
    with timer.phase("laplace_hf_solves"):
        ss = snapshots.compute_snapshot_set(problem.K, problem.M, problem.load, problem.params, plan,
                                            workers=workers or cfg.workers)
    with timer.phase("build_rb"):
        R_max = min(max(cfg.R_values), 2 * plan.M + 1, problem.mesh.n_interior)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", pod.RankDeficiencyWarning)
            basis = pod.build_reduced_basis(ss.snapshot_matrix, ss.weights, problem.B, R_max,
                                            factor=problem.B_factor, method=cfg.svd_method,
                                            gram_tag=cfg.gram)
        for w in caught:
            log.warning("M=%d: %s", plan.M, w.message)
        Mr, Kr, br = newmark.reduced_operators(basis, problem.M, problem.K, problem.load)
    return OfflineResult(plan, basis, Mr, Kr, br, ss)


def run_online(cfg: ExperimentConfig, offline: OfflineResult, R: int, q,
               timer: metrics.PhaseTimer | None = None) -> tuple[newmark.Trajectory, newmark.Trajectory]:
    """Reduced Newmark solve of dimension ``R`` and its high-fidelity reconstruction."""
    timer = timer or metrics.PhaseTimer()
    Mr, Kr, br = offline.operators(R)
    R_eff = br.size
    with timer.phase("solve_td_rb"):
        reduced = newmark.newmark_solve(Mr, Kr, br, q, time_config(cfg), stride=cfg.stride,
                                        extra_steps=field_steps(cfg))
    with timer.phase("reconstruct_hf"):
        full = newmark.reconstruct(offline.basis.Phi[:, :R_eff], reduced)
    return reduced, full


def run_reference(cfg: ExperimentConfig, problem: Problem,
                  timer: metrics.PhaseTimer | None = None) -> newmark.Trajectory:
    timer = timer or metrics.PhaseTimer()
    with timer.phase("solve_td_hf"):
        return newmark.newmark_solve(problem.M, problem.K, problem.load, problem.q, time_config(cfg),
                                     stride=cfg.stride, extra_steps=field_steps(cfg))


def error_report(cfg: ExperimentConfig, problem: Problem, reference: newmark.Trajectory,
                 offline: OfflineResult, timer: metrics.PhaseTimer | None = None,
                 R_values=None) -> tuple[metrics.ErrorReport, dict]:
    """Relative errors for every requested ``R``; timings recorded for the largest."""
    R_values = list(R_values or cfg.R_values)
    report = metrics.ErrorReport(M=offline.plan.M)
    report.floor = metrics.consistency_floor(problem.params, offline.plan.mu)
    reconstructed = {}
    for R in R_values:
        t = timer if (timer is not None and R == max(R_values)) else None
        _, full = run_online(cfg, offline, R, problem.q, t)
        report.add(R, metrics.relative_error(reference, full, problem.M),
                   metrics.relative_error(reference, full, problem.K))
        reconstructed[R] = full
    return report, reconstructed


def inf_sup_diagnostics(problem: Problem, ss: snapshots.SnapshotSet, rng: np.random.Generator) -> dict:
    """Compare snapshot energy norms with the Laplace-domain stability bound."""
    X = rng.standard_normal((problem.K.shape[0], 20))
    c_A = float(np.min(metrics.squared_norms(problem.K, X.T) / metrics.squared_norms(problem.B, X.T)))
    p_norm = float(np.sqrt(problem.source.nodal @ (problem.M @ problem.source.nodal)))
    pts = ss.plan.upper_points
    norms = snapshots.energy_norms(ss.upper_solutions, problem.B)
    bounds = np.abs(bilateral_laplace_d2q(problem.params, pts)) * p_norm / (pts.real * min(1.0, c_A))
    return {"c_A_estimate": c_A, "max_norm_to_bound": float(np.max(norms / bounds)),
            "bound_holds": bool(np.all(norms <= bounds))}


def write_fields(out: Path, mesh: Mesh, traj: newmark.Trajectory, cfg: ExperimentConfig, prefix: str) -> None:
    fdir = out / "fields"
    fdir.mkdir(parents=True, exist_ok=True)
    for t, step in zip(cfg.field_times, field_steps(cfg)):
        i = int(np.searchsorted(traj.steps, step))
        write_field_file(fdir / f"{prefix}_t{t:g}.txt", mesh, traj.u[i], name=f"{prefix} t={t:g}")


def write_modes(out: Path, mesh: Mesh, basis: pod.ReducedBasis, n_modes: int) -> None:
    fdir = out / "fields"
    fdir.mkdir(parents=True, exist_ok=True)
    for j in range(min(n_modes, basis.R)):
        write_field_file(fdir / f"mode_{j + 1}.txt", mesh, basis.Phi[:, j], name=f"mode {j + 1}")


def write_metadata(out: Path, cfg: ExperimentConfig, extra: dict | None = None) -> None:
    meta = {"seed": cfg.seed, "config": cfg.to_dict(), "numpy": np.__version__, "scipy": scipy.__version__}
    meta.update(extra or {})
    (out / "metadata.json").write_text(json.dumps(meta, indent=2, sort_keys=True, default=str) + "\n")


def save_snapshots(out: Path, cfg: ExperimentConfig, ss: snapshots.SnapshotSet) -> Path:
    name = f"snapshots_M{ss.plan.M}.{cfg.snapshot_format}"
    return snapshots.save_matrix(out / name, ss.snapshot_matrix, weights=ss.weights,
                                 points_real=ss.plan.points.real, points_imag=ss.plan.points.imag)


def offline_stage(cfg: ExperimentConfig, out: Path, problem: Problem, timer: metrics.PhaseTimer,
                  workers: int | None = None) -> OfflineResult:
    off = run_offline(cfg, problem, timer=timer, workers=workers)
    off.save(out / BASIS_FILE)
    if cfg.save_snapshots:
        save_snapshots(out, cfg, off.snapshot_set)
    metrics.write_singular_values_csv(out / "singular_values.csv", off.basis.singular_values)
    write_modes(out, problem.mesh, off.basis, cfg.n_modes)
    return off


def evaluation_stage(cfg: ExperimentConfig, out: Path, problem: Problem, off: OfflineResult,
                     timer: metrics.PhaseTimer) -> metrics.ErrorReport:
    reference = run_reference(cfg, problem, timer)
    write_fields(out, problem.mesh, reference, cfg, "reference")
    report, recon = error_report(cfg, problem, reference, off, timer)
    R_top = max(cfg.R_values)
    write_fields(out, problem.mesh, recon[R_top], cfg, f"rb_R{R_top}")
    metrics.write_rel_error_csv(out / "rel_error.csv", [report])
    metrics.write_singular_values_csv(out / "singular_values.csv", off.basis.singular_values)
    return report


def run_all(cfg: ExperimentConfig, out, workers: int | None = None, offline_only: bool = False,
            online_only: bool = False, basis_path=None) -> dict:
    """The ``run`` pipeline: offline, online, reference, and all reports."""
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    timer = metrics.PhaseTimer()
    rng = np.random.default_rng(cfg.seed)
    with timer.phase("assemble_fem"):
        problem = assemble_problem(cfg)
    result = {}
    if online_only:
        off = OfflineResult.load(basis_path or out / BASIS_FILE)
    else:
        off = offline_stage(cfg, out, problem, timer, workers)
        result["diagnostics"] = inf_sup_diagnostics(problem, off.snapshot_set, rng)
        (out / "diagnostics.json").write_text(json.dumps(result["diagnostics"], indent=2, sort_keys=True) + "\n")
    if not offline_only:
        result["report"] = evaluation_stage(cfg, out, problem, off, timer)
    timing = timer.report()
    metrics.write_timings_csv(out / "timings.csv", timing)
    result["timing"] = timing
    write_metadata(out, cfg, {"mode": "offline" if offline_only else "online" if online_only else "run",
                              "basis_rank": off.basis.rank, "basis_R": off.basis.R})
    return result


def run_reference_only(cfg: ExperimentConfig, out) -> newmark.Trajectory:
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    timer = metrics.PhaseTimer()
    with timer.phase("assemble_fem"):
        problem = assemble_problem(cfg)
    ref = run_reference(cfg, problem, timer)
    np.savez(out / "reference.npz", times=ref.times, steps=ref.steps, u=ref.u)
    write_fields(out, problem.mesh, ref, cfg, "reference")
    metrics.write_timings_csv(out / "timings.csv", timer.report())
    write_metadata(out, cfg, {"mode": "reference"})
    return ref


def run_study(cfg: ExperimentConfig, out, workers: int | None = None) -> list[metrics.ErrorReport]:
    """Error table over the ``(M, R)`` grid against one reference solve."""
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    timer = metrics.PhaseTimer()
    with timer.phase("assemble_fem"):
        problem = assemble_problem(cfg)
    reference = run_reference(cfg, problem, timer)
    write_fields(out, problem.mesh, reference, cfg, "reference")
    reports = []
    for M in sorted(set(cfg.study_M) | {cfg.M}):
        t = timer if M == cfg.M else None
        off = run_offline(cfg, problem, M=M, timer=t, workers=workers)
        if M == cfg.M:
            off.save(out / BASIS_FILE)
            metrics.write_singular_values_csv(out / "singular_values.csv", off.basis.singular_values)
        metrics.write_singular_values_csv(out / f"singular_values_M{M}.csv", off.basis.singular_values)
        report, _ = error_report(cfg, problem, reference, off, t)
        reports.append(report)
    metrics.write_rel_error_csv(out / "rel_error.csv", reports)
    metrics.write_timings_csv(out / "timings.csv", timer.report())
    write_metadata(out, cfg, {"mode": "study"})
    return reports
