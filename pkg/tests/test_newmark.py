import numpy as np
import pytest

from ltmor import metrics, newmark, pod, snapshots
from ltmor.wavelet import RickerParams, ricker_eval

PI = np.pi


def scalar_error(dt):
    # u'' + 4 u = cos t from rest: u = (cos t - cos 2t) / 3
    cfg = newmark.NewmarkConfig(T=1.0, N_t=int(round(1.0 / dt)))
    tr = newmark.newmark_solve(np.eye(1), np.array([[4.0]]), np.ones(1), np.cos, cfg)
    return abs(tr.u[-1, 0] - (np.cos(1.0) - np.cos(2.0)) / 3.0)


def test_scalar_convergence_order():
    errs = [scalar_error(dt) for dt in (1e-2, 5e-3, 2.5e-3)]
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all((orders >= 1.9) & (orders <= 2.1)), orders


def test_zero_forcing(small_model):
    m = small_model(6)
    tr = newmark.newmark_solve(m.M, m.K, m.b, lambda t: 0.0, newmark.NewmarkConfig(1.0, 50),
                               store_velocity=True)
    assert np.all(tr.u == 0) and np.all(tr.v == 0)


def test_initial_state_and_sampling(small_model):
    m = small_model(6)
    p = RickerParams(2 * PI, 0.5)
    cfg = newmark.NewmarkConfig(2.0, 100)
    tr = newmark.newmark_solve(m.M, m.K, m.b, lambda t: ricker_eval(p, t), cfg, stride=10, extra_steps=[33],
                               store_velocity=True, store_acceleration=True)
    np.testing.assert_array_equal(tr.steps, [0, 10, 20, 30, 33, 40, 50, 60, 70, 80, 90, 100])
    np.testing.assert_allclose(tr.times, tr.steps * 0.02)
    assert np.all(tr.u[0] == 0) and np.all(tr.v[0] == 0)
    # a_0 from the t = 0 equilibrium
    f0 = ricker_eval(p, 0.0) * m.b
    np.testing.assert_allclose(m.M @ tr.a[0], f0, rtol=0, atol=1e-12 * np.abs(f0).max())
    full = newmark.newmark_solve(m.M, m.K, m.b, lambda t: ricker_eval(p, t), cfg)
    np.testing.assert_array_equal(full.u[tr.steps], tr.u)


def test_energy_conservation_after_source(small_model):
    m = small_model(8)
    p = RickerParams(2 * PI, 2.5)
    cfg = newmark.NewmarkConfig(10.0, 2000)
    tr = newmark.newmark_solve(m.M, m.K, m.b, lambda t: ricker_eval(p, t), cfg, store_velocity=True)
    E = newmark.energy(m.M, m.K, tr.u, tr.v)
    late = tr.steps >= 0.75 * cfg.N_t
    assert tr.times[late][0] > 2.5 + 10 / p.alpha
    assert np.ptp(E[late]) <= 1e-8 * E[late].mean()


def test_config_validation():
    for kw in (dict(T=0, N_t=10), dict(T=1, N_t=0), dict(T=1, N_t=5, beta=0.0)):
        with pytest.raises(ValueError):
            newmark.NewmarkConfig(**kw)


def test_full_rank_equivalence(small_model):
    m = small_model(8)
    p = RickerParams(2 * PI, 2.5)
    q = lambda t: ricker_eval(p, t)  # noqa: E731
    cfg = newmark.NewmarkConfig(10.0, 2000)
    # K-orthonormal basis of the whole space: Phi = F^{-1}
    Phi = m.factor.solve_factor(np.eye(m.K.shape[0]))
    Mr, Kr, br = newmark.reduced_operators(Phi, m.M, m.K, m.b)
    np.testing.assert_allclose(Kr, np.eye(Kr.shape[0]), atol=1e-10)
    ref = newmark.newmark_solve(m.M, m.K, m.b, q, cfg)
    red = newmark.reconstruct(Phi, newmark.newmark_solve(Mr, Kr, br, q, cfg))
    assert metrics.relative_error(ref, red, m.M) <= 1e-8


def pod_basis(m, alpha=2 * PI, M=20, R=12):
    plan = snapshots.make_sampling_plan(alpha, M=M)
    ss = snapshots.compute_snapshot_set(m.K, m.M, m.b, RickerParams(alpha, 2.5), plan)
    return pod.build_reduced_basis(ss.snapshot_matrix, ss.weights, m.K, R, factor=m.factor)


def test_reduced_operators_structure(small_model):
    m = small_model(12)
    basis = pod_basis(m)
    Mr, Kr, br = newmark.reduced_operators(basis, m.M, m.K, m.b)
    np.testing.assert_allclose(Kr, np.eye(basis.R), atol=1e-10)
    np.testing.assert_array_equal(Mr, Mr.T)
    np.testing.assert_allclose(br, basis.Phi.T @ m.b, rtol=1e-14)
    np.linalg.cholesky(Mr)


def test_galerkin_orthogonality(small_model):
    m = small_model(12)
    basis = pod_basis(m)
    p = RickerParams(2 * PI, 2.5)
    q = lambda t: ricker_eval(p, t)  # noqa: E731
    Mr, Kr, br = newmark.reduced_operators(basis, m.M, m.K, m.b)
    red = newmark.newmark_solve(Mr, Kr, br, q, newmark.NewmarkConfig(10.0, 500), store_acceleration=True)
    full = newmark.reconstruct(basis, red)
    for t, u, a in zip(full.times, full.u, full.a):
        Ma, Ku, f = m.M @ a, m.K @ u, q(t) * m.b
        r = basis.Phi.T @ (Ma + Ku - f)
        scale = np.linalg.norm(basis.Phi.T @ Ma) + np.linalg.norm(basis.Phi.T @ Ku) + np.linalg.norm(basis.Phi.T @ f)
        assert np.linalg.norm(r) <= 1e-9 * scale


def test_reconstruct_subset(small_model):
    m = small_model(6)
    Phi = np.eye(m.K.shape[0])[:, :3]
    tr = newmark.Trajectory(times=np.arange(4.0), steps=np.arange(4), u=np.arange(12.0).reshape(4, 3))
    sub = newmark.reconstruct(Phi, tr, steps=[1, 3])
    np.testing.assert_array_equal(sub.steps, [1, 3])
    np.testing.assert_array_equal(sub.u[:, :3], tr.u[[1, 3]])
    assert sub.v is None
