import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from kflow.algebra import MetricLieAlgebra, derivation_basis, orthogonal_decomposition, realify
from kflow.catalog import get_entry
from kflow.errors import DimensionMismatch, PreconditionFailed, SingularMatrix, ZeroBracket
from kflow.stratify import (
    Check,
    alpha_vector,
    compute_beta,
    gl_apply,
    kkt_residual,
    lemma_E_terms,
    min_norm_point,
    moment_pairing,
    pi_apply,
    stratum_checks,
)

from conftest import mk, random_algebra, random_two_step


def random_bracket(rng, n, complex_field=False):
    mu = rng.standard_normal((n, n, n))
    if complex_field:
        mu = mu + 1j * rng.standard_normal((n, n, n))
    return mu - np.transpose(mu, (1, 0, 2))


def brute_force_min_norm(points):
    """Minimum over all affinely independent subsets of the affine min-norm point."""
    best = None
    m = len(points)
    for size in range(1, min(m, points.shape[1] + 1) + 1):
        for subset in itertools.combinations(range(m), size):
            P = points[list(subset)]
            A = np.block([[P @ P.T, np.ones((size, 1))], [np.ones((1, size)), np.zeros((1, 1))]])
            try:
                sol = np.linalg.solve(A, np.r_[np.zeros(size), 1.0])
            except np.linalg.LinAlgError:
                continue
            w = sol[:size]
            if np.any(w < -1e-12):
                continue
            x = w @ P
            if best is None or x @ x < best @ best - 1e-14:
                best = x
    return best


def test_pi_apply_examples(rng):
    mu = random_bracket(rng, 4)
    np.testing.assert_allclose(pi_apply(np.eye(4), mu), -mu)
    h = get_entry("heisenberg_real").build()
    for D in derivation_basis(h):
        assert np.linalg.norm(pi_apply(D, h.mu)) < 1e-12
    with pytest.raises(DimensionMismatch):
        pi_apply(np.eye(3), mu)


def test_pi_is_derivative_of_gl_action(rng):
    mu = random_bracket(rng, 4)
    E = rng.standard_normal((4, 4))
    t = 1e-5
    fd = (gl_apply(expm(t * E), mu) - mu) / t
    assert np.linalg.norm(fd - pi_apply(E, mu)) < 1e-4 * np.linalg.norm(mu)


def test_gl_action(rng):
    mu = random_bracket(rng, 4, True)
    np.testing.assert_allclose(gl_apply(np.eye(4), mu), mu)
    np.testing.assert_allclose(gl_apply(3.0 * np.eye(4), mu), mu / 3.0, atol=1e-14)
    A = np.eye(4) + 0.4 * rng.standard_normal((4, 4))
    B = np.eye(4) + 0.4 * rng.standard_normal((4, 4))
    np.testing.assert_allclose(gl_apply(A, gl_apply(B, mu)), gl_apply(A @ B, mu), atol=1e-10)
    with pytest.raises(SingularMatrix):
        gl_apply(np.diag([1.0, 1.0, 1.0, 0.0]), mu)


def test_pi_is_a_representation(rng):
    mu = random_bracket(rng, 4)
    E, F = rng.standard_normal((2, 4, 4))
    lhs = pi_apply(E @ F - F @ E, mu)
    rhs = pi_apply(E, pi_apply(F, mu)) - pi_apply(F, pi_apply(E, mu))
    assert np.linalg.norm(lhs - rhs) < 1e-10


def test_pi_of_transpose_is_adjoint(rng):
    mu, nu = random_bracket(rng, 4), random_bracket(rng, 4)
    A = rng.standard_normal((4, 4))
    assert abs(np.vdot(nu, pi_apply(A, mu)) - np.vdot(pi_apply(A.T, nu), mu)) < 1e-10


def test_moment_pairing_examples(rng):
    h = get_entry("heisenberg_real").build()
    lhs, rhs = moment_pairing(h, np.eye(3))
    assert lhs == pytest.approx(-0.5, abs=1e-15) and rhs == pytest.approx(-0.5, abs=1e-15)
    for D in derivation_basis(h):
        lhs, rhs = moment_pairing(h, D)
        assert abs(rhs) < 1e-12 and abs(lhs) < 1e-12
    a = random_algebra(rng, True)
    E = rng.standard_normal((a.dim, a.dim)) + 1j * rng.standard_normal((a.dim, a.dim))
    lhs, rhs = moment_pairing(a, E)
    assert abs(lhs - rhs) < 1e-10 * (1 + abs(lhs))


def test_min_norm_point_examples():
    x, _ = min_norm_point(np.array([[1.0, 2.0], [0.0, 0.0], [3.0, -1.0]]))
    np.testing.assert_allclose(x, [0, 0], atol=1e-15)
    x, w = min_norm_point(np.array([[1.0, 0.0], [0.0, 1.0]]))
    np.testing.assert_allclose(x, [0.5, 0.5], atol=1e-15)
    np.testing.assert_allclose(w, [0.5, 0.5], atol=1e-15)
    pts = np.array([alpha_vector(4, 0, 1, 2), alpha_vector(4, 0, 2, 3)])
    x, _ = min_norm_point(pts)
    np.testing.assert_allclose(x, [-1, -0.5, 0, 0.5], atol=1e-14)
    with pytest.raises(ValueError):
        min_norm_point(np.zeros((0, 3)))


@settings(max_examples=60, deadline=None)
@given(
    st.integers(1, 7),
    st.integers(1, 4),
    st.integers(0, 2**31 - 1),
)
def test_min_norm_point_matches_brute_force(m, d, seed):
    pts = np.random.default_rng(seed).standard_normal((m, d))
    x, w = min_norm_point(pts)
    oracle = brute_force_min_norm(pts)
    assert abs(x @ x - oracle @ oracle) < 1e-10
    np.testing.assert_allclose(x, oracle, atol=1e-7)
    assert kkt_residual(x, pts) < 1e-12 * max(1.0, np.max(np.sum(pts**2, axis=1)))
    assert np.all(w >= 0) and abs(w.sum() - 1) < 1e-12
    np.testing.assert_allclose(w @ pts, x, atol=1e-12)


def test_min_norm_point_is_deterministic(rng):
    pts = rng.standard_normal((6, 3))
    a, b = min_norm_point(pts), min_norm_point(pts.copy())
    assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])


def test_beta_heisenberg():
    s = stratum_checks(compute_beta(get_entry("heisenberg_real").build()))
    np.testing.assert_allclose(np.diag(s.beta), [-1, -1, 1], atol=1e-14)
    assert s.beta_norm_sq == pytest.approx(3.0, abs=1e-14)
    np.testing.assert_allclose(np.diag(s.E_beta), [2, 2, 4], atol=1e-14)
    assert all(c.passed for c in s.checks.values())
    assert "derivation" in s.checks["rest_2"].note


def test_beta_filiform():
    s = stratum_checks(compute_beta(get_entry("filiform_n4").build()))
    np.testing.assert_allclose(np.diag(s.beta), [-1, -0.5, 0, 0.5], atol=1e-14)
    assert s.beta_norm_sq == pytest.approx(1.5, abs=1e-14)
    assert np.linalg.norm(pi_apply(s.beta + 1.5 * np.eye(4), s.mu)) < 1e-12
    assert all(c.passed and c.violation < 1e-10 for c in s.checks.values())


def test_beta_zero_bracket():
    with pytest.raises(ZeroBracket):
        compute_beta(np.zeros((3, 3, 3)))


def test_beta_properties_on_random_nilpotent(rng):
    for _ in range(20):
        n = int(rng.integers(4, 7))
        mu = random_two_step(rng, n, int(rng.integers(1, n - 2)), density=0.5)
        if not np.any(mu):
            continue
        s = stratum_checks(compute_beta(mu), n_random=20)
        assert abs(np.trace(s.beta) + 1) < 1e-10
        assert np.all(np.diff(np.diag(s.beta)) >= -1e-14)
        assert s.checks["pos_def"].passed and s.checks["cond_m"].passed
        b = np.diag(s.beta)
        support = [t for t, w in zip(s.active, s.weights) if w > 1e-9]
        for t in support:
            assert abs(alpha_vector(n, *t) @ b - s.beta_norm_sq) < 1e-10


def test_beta_sorting_keeps_input_basis_view():
    # filiform with the basis reversed
    mu = mk(4, [(4, 3, 2, 1), (4, 2, 1, 1)]).mu
    s = compute_beta(mu)
    np.testing.assert_allclose(np.diag(s.beta), [-1, -0.5, 0, 0.5], atol=1e-14)
    np.testing.assert_allclose(np.diag(s.beta_in_input_basis()), [0.5, 0, -0.5, -1], atol=1e-14)


def test_lemma_E_terms():
    d = orthogonal_decomposition(get_entry("filiform_n4").build())
    t = lemma_E_terms(d)
    assert t.t2 == 0.0 and t.t3 == 0.0 and t.total == pytest.approx(t.t1, abs=1e-14)
    g7 = get_entry("g_7").build()
    for alg in (g7, realify(g7)[0]):
        t = lemma_E_terms(orthogonal_decomposition(alg))
        assert max(abs(t.t1), abs(t.t2), abs(t.t3), abs(t.total)) < 1e-12
    with pytest.raises(ZeroBracket):
        lemma_E_terms(orthogonal_decomposition(get_entry("s31C").build()))


def test_lemma_E_terms_nonnegative(rng):
    # solvable extension of h3 by a diagonal derivation
    mu = np.zeros((4, 4, 4))
    mu[1:, 1:, 1:] = get_entry("heisenberg_real").build().mu
    A = np.diag([1.0, 2.0, 3.0])
    mu[0, 1:, 1:] = A.T
    mu[1:, 0, 1:] = -A.T
    a = MetricLieAlgebra(mu, np.eye(4))
    t = lemma_E_terms(orthogonal_decomposition(a))
    assert min(t.t1, t.t2, t.t3) >= -1e-9
    assert t.total == pytest.approx(t.t1 + t.t2 + t.t3, abs=1e-10)


def test_lemma_E_terms_precondition():
    s = compute_beta(get_entry("filiform_n4").build())
    s.checks = {"cond_rest": Check(False, 1.0, 1.0)}
    with pytest.raises(PreconditionFailed):
        lemma_E_terms(orthogonal_decomposition(get_entry("filiform_n4").build()), s)


def test_stratum_serialises():
    d = stratum_checks(compute_beta(get_entry("heisenberg_real").build())).to_dict()
    assert set(d["checks"]) == {"pos_def", "cond_brac", "cond_m", "cond_rest", "rest_2", "rest_1"}
    assert all({"pass", "slack"} <= set(c) for c in d["checks"].values())
