import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chi2geo import rng as rngmod
from chi2geo.errors import (
    DimensionMismatchError,
    NonSymmetricError,
    NotIdempotentError,
    NotPositiveSemidefiniteError,
    UnknownGeneratorError,
)
from chi2geo.gaussian import quadratic_form_to_norm, sample, squared_norms, validate
from chi2geo.verify import ks_test

from conftest import random_projection, random_rotation

HALF = np.array([[0.5, 0.5], [0.5, 0.5]])


class TestValidate:
    def test_standard(self):
        spec = validate([0, 0], np.eye(2))
        assert spec.dim == 2 and spec.clamp_magnitude == 0.0

    def test_negative_variance(self):
        with pytest.raises(NotPositiveSemidefiniteError):
            validate([1.0], [[-1.0]])

    def test_indefinite(self):
        # characteristic polynomial (1 - x)^2 - 4 has roots 3 and -1
        with pytest.raises(NotPositiveSemidefiniteError) as err:
            validate([0, 0], [[1, 2], [2, 1]])
        assert err.value.min_eigenvalue == pytest.approx(-1.0)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            validate([0, 0, 0], np.eye(2))

    def test_nonsymmetric(self):
        with pytest.raises(NonSymmetricError):
            validate([0, 0], [[1, 0.2], [0, 1]])

    def test_small_negative_eigenvalue_is_clamped_and_reported(self):
        cov = np.diag([1.0, -5e-11])
        spec = validate([0, 0], cov)
        assert spec.clamp_magnitude == pytest.approx(5e-11)
        assert spec.eigenvalues.min() == 0.0
        assert spec.cov[1, 1] == 0.0

    def test_clamp_band_is_relative_to_lambda_max(self):
        validate([0, 0], np.diag([100.0, -5e-9]))
        with pytest.raises(NotPositiveSemidefiniteError):
            validate([0, 0], np.diag([1.0, -5e-9]))


class TestSample:
    def test_zero_covariance_zero_mean(self):
        batch = sample(validate([0, 0], np.zeros((2, 2))), 50, seed=3)
        assert np.all(batch.draws == 0.0)

    def test_degenerate_scalar(self):
        batch = sample(validate([5.0], [[0.0]]), 3, seed=11)
        np.testing.assert_array_equal(batch.draws, [[5.0], [5.0], [5.0]])

    def test_standard_normal_moments(self):
        n = 10**6
        x = sample(validate([0, 0], np.eye(2)), n, seed=7).draws
        assert np.all(np.abs(x.mean(axis=0)) <= 4 / math.sqrt(n))
        # entries of the sample covariance have sd about sqrt(2/n) = 1.4e-3
        assert np.max(np.abs(np.cov(x.T) - np.eye(2))) <= 0.01

    def test_reproducible_bit_exact(self):
        spec = validate([1, -2, 0.5], np.diag([2.0, 1.0, 0.0]))
        a, b = sample(spec, 1000, seed=99), sample(spec, 1000, seed=99)
        assert a.draws.tobytes() == b.draws.tobytes()
        assert a.generator_id == b.generator_id == rngmod.DEFAULT_GENERATOR
        assert sample(spec, 1000, seed=100).draws.tobytes() != a.draws.tobytes()

    def test_chunking_independent_of_workers_and_batch_size(self):
        spec = validate([0, 0, 0], np.eye(3))
        count = 2 * rngmod.CHUNK_SIZE + 123
        serial = sample(spec, count, seed=5).draws
        threaded = sample(spec, count, seed=5, workers=3).draws
        assert serial.tobytes() == threaded.tobytes()
        prefix = sample(spec, rngmod.CHUNK_SIZE, seed=5).draws
        assert prefix.tobytes() == serial[: rngmod.CHUNK_SIZE].tobytes()

    def test_generator_from_environment(self, monkeypatch):
        spec = validate([0.0], [[1.0]])
        monkeypatch.setenv(rngmod.ENV_VAR, "pcg64-boxmuller-v1")
        batch = sample(spec, 10, seed=1)
        assert batch.generator_id == "pcg64-boxmuller-v1"
        monkeypatch.delenv(rngmod.ENV_VAR)
        assert sample(spec, 10, seed=1).draws.tobytes() != batch.draws.tobytes()
        monkeypatch.setenv(rngmod.ENV_VAR, "mersenne")
        with pytest.raises(UnknownGeneratorError):
            sample(spec, 10, seed=1)

    def test_seed_range(self):
        spec = validate([0.0], [[1.0]])
        sample(spec, 2, seed=2**64 - 1)
        with pytest.raises(ValueError):
            sample(spec, 2, seed=2**64)
        with pytest.raises(ValueError):
            sample(spec, 2, seed=-1)

    def test_box_muller_normals_pass_ks(self):
        z = rngmod.standard_normals(seed=123, count=200_000, width=1)[:, 0]
        phi = np.vectorize(lambda v: 0.5 * (1 + math.erf(v / math.sqrt(2))))
        _, p = ks_test(z, phi)
        assert p > 0.001

    @settings(max_examples=30, deadline=None)
    @given(st.integers(2, 7).flatmap(lambda n: st.tuples(st.just(n), st.integers(0, n - 1), st.integers(0, 2**32))))
    def test_draws_stay_in_affine_image(self, case):
        n, k, seed = case
        r = np.random.default_rng(seed)
        Q = random_rotation(n, r)
        lam = np.concatenate([r.uniform(0.1, 3.0, k), np.zeros(n - k)])
        spec = validate(r.normal(size=n) * 3, Q @ np.diag(lam) @ Q.T)
        x = sample(spec, 500, seed=seed).draws
        bound = 1e-12 * (1 + np.linalg.norm(x, axis=1))
        assert np.all(spec.image().residual(x - spec.mu) <= bound)
        for v in spec.kernel().basis.T:
            assert np.all(np.abs((x - spec.mu) @ v) <= bound)


class TestSquaredNorms:
    def test_matches_exact_sum(self, rng):
        x = rng.standard_normal((200, 7)) * 10.0 ** rng.integers(-8, 8, size=(200, 7))
        exact = np.array([math.fsum(row * row) for row in x])
        np.testing.assert_allclose(squared_norms(x), exact, rtol=2e-16, atol=0)


class TestQuadraticFormBridge:
    def test_identity(self):
        spec = quadratic_form_to_norm(np.eye(3), [1, 2, 3])
        np.testing.assert_array_equal(spec.mu, [1, 2, 3])
        np.testing.assert_array_equal(spec.cov, np.eye(3))

    def test_rank_one_projection(self):
        spec = quadratic_form_to_norm(HALF, [1, 0])
        np.testing.assert_allclose(spec.mu, [0.5, 0.5])
        np.testing.assert_array_equal(spec.cov, HALF)

    def test_not_idempotent(self):
        with pytest.raises(NotIdempotentError) as err:
            quadratic_form_to_norm(np.diag([0.5, 1.0]), [0, 0])
        assert err.value.residual == pytest.approx(0.25)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            quadratic_form_to_norm(np.eye(2), [1, 2, 3])

    @settings(max_examples=30, deadline=None)
    @given(st.integers(1, 8).flatmap(lambda n: st.tuples(st.just(n), st.integers(0, n), st.integers(0, 2**32))))
    def test_pointwise_cochran_identity(self, case):
        n, k, seed = case
        r = np.random.default_rng(seed)
        A, _, _ = random_projection(n, k, r)
        x = r.normal(size=(100, n)) * 5
        Ax = x @ A
        lhs = np.einsum("ij,ij->i", x, Ax)
        rhs = np.einsum("ij,ij->i", Ax, Ax)
        assert np.all(np.abs(lhs - rhs) <= 1e-12 * (1 + np.einsum("ij,ij->i", x, x)))
