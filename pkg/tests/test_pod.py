import warnings

import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from ltmor import linalg, pod


def random_spd(rng, n):
    A = sp.random(n, n, density=0.1, random_state=rng)
    return (A @ A.T + sp.diags(rng.uniform(0.5, 2.0, n))).tocsr()


def random_instance(seed, n=50, m=20):
    rng = np.random.default_rng(seed)
    S = rng.standard_normal((n, m)) @ np.diag(np.logspace(0, -6, m))
    return S, rng.uniform(0.1, 2.0, m), random_spd(rng, n)


def test_toy_two_by_three():
    S = np.array([[1.0, 0.0, 1.0], [0.0, 1.0, 1.0]])
    B = sp.eye(2, format="csr")
    basis = pod.build_reduced_basis(S, np.ones(3), B, 1)
    np.testing.assert_allclose(basis.singular_values, [np.sqrt(3), 1.0], rtol=1e-14)
    assert pod.pod_residual(S, np.ones(3), B, basis) == pytest.approx(1.0, rel=1e-13)
    assert pod.discarded_energy(basis.singular_values, 1) == pytest.approx(1.0, rel=1e-14)
    # leading direction of S S^T = [[2,1],[1,2]] is (1,1)/sqrt 2
    np.testing.assert_allclose(np.abs(basis.Phi[:, 0]), [2**-0.5, 2**-0.5], rtol=1e-14)


def test_rank_one():
    rng = np.random.default_rng(0)
    B = random_spd(rng, 12)
    c = rng.standard_normal(12)
    w = 0.37
    basis = pod.build_reduced_basis(c[:, None], np.array([w]), B, 1)
    cn = np.sqrt(c @ (B @ c))
    assert basis.singular_values[0] == pytest.approx(np.sqrt(w) * cn, rel=1e-13)
    phi = basis.Phi[:, 0] * np.sign(basis.Phi[:, 0] @ c)
    np.testing.assert_allclose(phi, c / cn, rtol=1e-12)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(25, 60), m=st.integers(2, 20))
def test_b_orthonormal(seed, n, m):
    rng = np.random.default_rng(seed)
    S = rng.standard_normal((n, m))
    B = random_spd(rng, n)
    basis = pod.build_reduced_basis(S, rng.uniform(0.1, 2.0, m), B, m)
    G = basis.Phi.T @ (B @ basis.Phi)
    assert np.max(np.abs(G - np.eye(basis.R))) <= 1e-10
    sv = basis.singular_values
    assert np.all(sv >= 0) and np.all(np.diff(sv) <= 0)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), R=st.integers(0, 20))
def test_eckart_young_identity(seed, R):
    S, w, B = random_instance(seed)
    basis = pod.build_reduced_basis(S, w, B, R)
    direct = pod.pod_residual(S, w, B, basis)
    total = float(np.sum(basis.singular_values**2))
    # absolute slack is squared round-off, relevant only when nothing is discarded
    assert direct == pytest.approx(pod.discarded_energy(basis.singular_values, R), rel=1e-8, abs=1e-24 * total)


def test_residual_endpoints_and_monotone():
    S, w, B = random_instance(11)
    res = [pod.pod_residual(S, w, B, pod.build_reduced_basis(S, w, B, R)) for R in range(21)]
    total = float(np.sum(w * np.sum(S * (B @ S), axis=0)))
    assert res[0] == pytest.approx(total, rel=1e-13)
    assert abs(res[-1]) <= 1e-12 * total
    assert all(b <= a * (1 + 1e-12) + 1e-30 for a, b in zip(res, res[1:]))


def test_nested_bases():
    S, w, B = random_instance(3)
    big = pod.build_reduced_basis(S, w, B, 10)
    small = pod.build_reduced_basis(S, w, B, 4)
    np.testing.assert_array_equal(big.restrict(4).Phi, small.Phi)
    with pytest.raises(ValueError):
        small.restrict(5)


def test_rank_deficiency_truncates():
    rng = np.random.default_rng(2)
    S = rng.standard_normal((30, 3)) @ rng.standard_normal((3, 8))
    with pytest.warns(pod.RankDeficiencyWarning):
        basis = pod.build_reduced_basis(S, np.ones(8), sp.eye(30, format="csr"), 6)
    assert basis.R == basis.rank == 3 and basis.truncated
    assert basis.Phi.shape == (30, 3)


def test_gram_route_agrees_on_well_conditioned_data():
    rng = np.random.default_rng(4)
    S = rng.standard_normal((80, 10))
    B = random_spd(rng, 80)
    w = np.ones(10)
    a = pod.build_reduced_basis(S, w, B, 5, method="svd")
    b = pod.build_reduced_basis(S, w, B, 5, method="gram")
    np.testing.assert_allclose(a.singular_values, b.singular_values, rtol=1e-10)
    # same subspace: B-projection of one basis onto the other is the identity up to signs
    C = a.Phi.T @ (B @ b.Phi)
    np.testing.assert_allclose(np.abs(C), np.eye(5), atol=1e-8)


def test_input_validation():
    S = np.ones((4, 2))
    B = sp.eye(4, format="csr")
    with pytest.raises(ValueError):
        pod.build_reduced_basis(S, np.array([1.0, 0.0]), B, 1)
    with pytest.raises(ValueError):
        pod.build_reduced_basis(S, np.ones(3), B, 1)
    with pytest.raises(ValueError):
        pod.build_reduced_basis(S, np.ones(2), B, 1, method="qr")


def test_whitening_round_trip():
    rng = np.random.default_rng(9)
    B = random_spd(rng, 70)
    f = linalg.cholesky(B)
    X = rng.standard_normal((70, 5))
    np.testing.assert_allclose(f.solve_factor(f.apply_factor(X)), X, rtol=0, atol=1e-12)
    # F^T F = B through the whitened inner product
    Y = f.apply_factor(X)
    np.testing.assert_allclose(Y.T @ Y, X.T @ (B @ X), rtol=1e-12)


def test_singular_value_rows():
    assert pod.singular_value_rows(np.array([3.0, 1.0])) == [(1, 3.0), (2, 1.0)]


def test_no_warning_at_full_rank():
    S, w, B = random_instance(5)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        pod.build_reduced_basis(S, w, B, 20)
