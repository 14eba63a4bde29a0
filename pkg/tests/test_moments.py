import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from chi2geo.errors import OrderTooLargeError, OutOfDomainError
from chi2geo.gaussian import validate
from chi2geo.moments import (
    MAX_ORDER,
    chisq_cumulants,
    cumulants_from_mgf,
    mgf_chisq,
    mgf_norm,
    quadratic_norm_cumulants,
)

from conftest import random_projection, random_rotation


def _spec(lam, m, Q=None):
    lam, m = np.asarray(lam, float), np.asarray(m, float)
    Q = np.eye(len(lam)) if Q is None else Q
    return validate(Q @ m, Q @ np.diag(lam) @ Q.T)


def _symbolic_cumulants(lam, m, J):
    """Exact Taylor coefficients of log M1 for rational eigenvalues and mean coordinates."""
    t = sp.symbols("t")
    logm = sum(t * mi**2 / (1 - 2 * t * li) - sp.log(1 - 2 * t * li) / 2 for li, mi in zip(lam, m))
    poly = sp.series(logm, t, 0, J + 1).removeO()
    return [float(poly.coeff(t, j) * sp.factorial(j)) for j in range(1, J + 1)]


class TestQuadraticNormCumulants:
    def test_identity_central(self):
        for n in (1, 3, 5):
            k = quadratic_norm_cumulants(_spec(np.ones(n), np.zeros(n)), 3)
            np.testing.assert_array_equal(k, [n, 2 * n, 8 * n])

    def test_identity_noncentral(self):
        k = quadratic_norm_cumulants(validate([3, 4], np.eye(2)), 3)
        np.testing.assert_allclose(k, [27, 104, 616], rtol=1e-15)
        np.testing.assert_allclose(k, chisq_cumulants(2, 5, 3), rtol=1e-15)

    def test_half_and_zero(self):
        k = quadratic_norm_cumulants(validate([0, 0], np.diag([0.5, 0.0])), 3)
        np.testing.assert_allclose(k, [0.5, 0.5, 1.0], rtol=1e-15)

    def test_zero_power_zero_is_one(self):
        # all mean on a kernel direction: kappa_1 picks up mu^2, higher orders do not
        k = quadratic_norm_cumulants(validate([0, 2], np.diag([1.0, 0.0])), 3)
        np.testing.assert_allclose(k, [1 + 4, 2, 8], rtol=1e-15)

    def test_order_cap(self):
        spec = validate([0], [[1.0]])
        assert quadratic_norm_cumulants(spec, MAX_ORDER).shape == (MAX_ORDER,)
        with pytest.raises(OrderTooLargeError):
            quadratic_norm_cumulants(spec, MAX_ORDER + 1)
        with pytest.raises(ValueError):
            quadratic_norm_cumulants(spec, 0)

    @pytest.mark.parametrize(
        "lam,m",
        [
            ((sp.Rational(3, 2), sp.Rational(1, 3), 0), (1, sp.Rational(-2, 5), 3)),
            ((1, 1, sp.Rational(1, 10)), (0, sp.Rational(7, 2), 0)),
            ((sp.Rational(1, 2),), (2,)),
        ],
    )
    def test_matches_symbolic_series(self, lam, m):
        J = 8
        expected = _symbolic_cumulants(lam, m, J)
        Q = random_rotation(len(lam), np.random.default_rng(len(lam)))
        got = quadratic_norm_cumulants(_spec([float(x) for x in lam], [float(x) for x in m], Q), J)
        np.testing.assert_allclose(got, expected, rtol=1e-12)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(1, 6).flatmap(lambda n: st.tuples(st.just(n), st.integers(0, 2**32))))
    def test_rotation_invariance(self, case):
        n, seed = case
        r = np.random.default_rng(seed)
        lam, m = r.uniform(0, 1.5, n), r.normal(size=n)
        a = quadratic_norm_cumulants(_spec(lam, m), 12)
        b = quadratic_norm_cumulants(_spec(lam, m, random_rotation(n, r)), 12)
        np.testing.assert_allclose(b, a, rtol=1e-12)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(1, 8).flatmap(lambda n: st.tuples(st.just(n), st.integers(0, n), st.integers(0, 2**32))))
    def test_projection_structure_recovers_rank(self, case):
        n, k, seed = case
        r = np.random.default_rng(seed)
        P, B, _ = random_projection(n, k, r)
        mu = B @ r.normal(size=k) if k else np.zeros(n)
        nu2 = float(mu @ mu)
        kap = quadratic_norm_cumulants(validate(mu, P), 12)
        j = np.arange(1, 13)
        scaled = kap / np.array([2.0 ** (i - 1) * math.factorial(i - 1) for i in j]) - j * nu2
        np.testing.assert_allclose(scaled, k, atol=1e-9 * (1 + 12 * nu2))


class TestChisqCumulants:
    def test_central(self):
        np.testing.assert_array_equal(chisq_cumulants(3, 0, 2), [3, 6])

    def test_noncentral(self):
        np.testing.assert_array_equal(chisq_cumulants(2, 5, 2), [27, 104])

    def test_degenerate(self):
        np.testing.assert_array_equal(chisq_cumulants(0, 0, 20), np.zeros(20))

    def test_order_cap(self):
        with pytest.raises(OrderTooLargeError):
            chisq_cumulants(1, 0, 21)

    def test_against_symbolic_series(self):
        r, nu = 3, sp.Rational(3, 2)
        t = sp.symbols("t")
        logm = t * nu**2 / (1 - 2 * t) - sp.Rational(r, 2) * sp.log(1 - 2 * t)
        poly = sp.series(logm, t, 0, 11).removeO()
        expected = [float(poly.coeff(t, j) * sp.factorial(j)) for j in range(1, 11)]
        np.testing.assert_allclose(chisq_cumulants(3, 1.5, 10), expected, rtol=1e-14)


class TestMgf:
    def test_at_zero(self):
        assert mgf_norm(validate([1, -2], np.diag([0.7, 0.2])), 0.0) == 1.0
        assert mgf_chisq(1, 0, 0.0) == 1.0

    def test_scalar_examples(self):
        assert mgf_norm(validate([0], [[1.0]]), 0.25) == pytest.approx(math.sqrt(2), rel=1e-15)
        assert mgf_chisq(2, 0, 0.25) == pytest.approx(2.0, rel=1e-15)
        assert mgf_chisq(0, 0, 7.0) == 1.0

    def test_singularity_raises(self):
        spec = validate([0, 0], np.diag([1.0, 0.0]))
        with pytest.raises(OutOfDomainError):
            mgf_norm(spec, 0.5)
        with pytest.raises(OutOfDomainError):
            mgf_chisq(1, 0, 0.5)

    def test_beyond_singularity_raises(self):
        # at t = 1 the unit-eigenvalue factor 1 - 2t is negative, so M1 is not finite there
        with pytest.raises(OutOfDomainError):
            mgf_norm(validate([0, 2], np.diag([1.0, 0.0])), 1.0)

    def test_zero_covariance_is_unbounded_domain(self):
        spec = validate([0, 2], np.zeros((2, 2)))
        assert mgf_norm(spec, 1.0) == pytest.approx(math.exp(4.0), rel=1e-15)

    def test_matches_determinant_form(self, rng):
        for _ in range(20):
            n = int(rng.integers(1, 7))
            Q = random_rotation(n, rng)
            lam, m = rng.uniform(0, 1.5, n), rng.normal(size=n) * 2
            spec = _spec(lam, m, Q)
            t_max = 1 / (2 * lam.max())
            for t in np.linspace(-2, 0.95 * t_max, 7):
                A = np.eye(n) - 2 * t * spec.cov
                direct = math.exp(t * spec.mu @ np.linalg.solve(A, spec.mu)) / math.sqrt(np.linalg.det(A))
                assert mgf_norm(spec, t) == pytest.approx(direct, rel=1e-10)

    def test_vectorised(self):
        spec = validate([1.0], [[1.0]])
        t = np.array([-1.0, 0.0, 0.2])
        np.testing.assert_allclose(mgf_norm(spec, t), mgf_chisq(1, 1.0, t), rtol=1e-14)

    @settings(max_examples=50, deadline=None)
    @given(st.integers(1, 8).flatmap(lambda n: st.tuples(st.just(n), st.integers(0, n), st.integers(0, 2**32))))
    def test_equivalence_under_projection(self, case):
        n, k, seed = case
        r = np.random.default_rng(seed)
        P, B, _ = random_projection(n, k, r)
        mu = np.zeros(n)
        if k:
            d = B @ r.normal(size=k)
            mu = d / np.linalg.norm(d) * r.uniform(0, 5)
        spec = validate(mu, P)
        t = np.linspace(-2, 0.5, 52)[1:-1]
        m1 = mgf_norm(spec, t)
        m2 = mgf_chisq(k, float(np.linalg.norm(mu)), t)
        assert np.max(np.abs(m1 - m2) / m2) <= 1e-12


class TestCumulantsFromMgf:
    def test_central_chisq(self):
        k = cumulants_from_mgf(lambda t: mgf_chisq(3, 0, t), 2)
        np.testing.assert_allclose(k, [3, 6], rtol=1e-5)

    def test_noncentral_norm(self):
        spec = validate([3, 4], np.eye(2))
        np.testing.assert_allclose(cumulants_from_mgf(lambda t: mgf_norm(spec, t), 2), [27, 104], rtol=1e-5)

    def test_constant(self):
        np.testing.assert_allclose(cumulants_from_mgf(lambda t: 1.0, 4), np.zeros(4), atol=1e-12)

    def test_order_cap(self):
        with pytest.raises(OrderTooLargeError):
            cumulants_from_mgf(lambda t: 1.0, 7)

    def test_no_domain(self):
        def nowhere(t):
            raise OutOfDomainError("empty domain")

        with pytest.raises(OutOfDomainError):
            cumulants_from_mgf(nowhere, 2)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(1, 6).flatmap(lambda n: st.tuples(st.just(n), st.integers(0, 2**32))))
    def test_agrees_with_closed_form(self, case):
        n, seed = case
        r = np.random.default_rng(seed)
        lam = r.uniform(0, 1.5, n)
        m = r.normal(size=n)
        m *= r.uniform(0, 5) / max(np.linalg.norm(m), 1e-300)
        spec = _spec(lam, m, random_rotation(n, r))
        exact = quadratic_norm_cumulants(spec, 6)
        est = cumulants_from_mgf(lambda t: mgf_norm(spec, t), 6)
        np.testing.assert_allclose(est, exact, rtol=1e-5, atol=1e-12)
