"""Gaussian specifications N(mu, C), seeded sampling and the quadratic-form bridge."""

from dataclasses import dataclass, field

import numpy as np

from . import rng
from .errors import DimensionMismatchError, NotIdempotentError, NotPositiveSemidefiniteError
from .spectral import (
    DEFAULT_TOL,
    SpectralDecomposition,
    _readonly,
    as_symmetric,
    rank_threshold,
    spectral_decompose,
    split_spectrum,
)

PSD_RTOL = 1e-10


@dataclass(frozen=True)
class GaussianSpec:
    """Mean vector and covariance operator of X ~ N(mu, cov).

    Build instances with :func:`validate`; it checks the covariance and caches
    its eigendecomposition, which every downstream computation reuses.
    """

    mu: np.ndarray
    cov: np.ndarray
    decomposition: SpectralDecomposition = field(repr=False)
    clamp_magnitude: float = 0.0
    label: str = None

    @property
    def dim(self):
        return self.mu.shape[0]

    @property
    def eigenvalues(self):
        return self.decomposition.eigenvalues

    def mean_coordinates(self):
        """Coordinates of mu in the covariance eigenbasis."""
        return self.decomposition.coordinates(self.mu)

    def image(self, tol=DEFAULT_TOL):
        return split_spectrum(self.decomposition, tol)[0]

    def kernel(self, tol=DEFAULT_TOL):
        return split_spectrum(self.decomposition, tol)[1]


def validate(mu, cov, label=None):
    """Check ``(mu, cov)`` and return a :class:`GaussianSpec`.

    Eigenvalues in ``[-1e-10 * max(1, lambda_max), 0)`` are clamped to zero and the
    largest clamp is recorded in ``clamp_magnitude``. Anything more negative raises
    :class:`NotPositiveSemidefiniteError`.
    """
    mu = np.atleast_1d(np.asarray(mu, dtype=float))
    if mu.ndim != 1:
        raise DimensionMismatchError(f"mu must be a vector, got shape {mu.shape}")
    if not np.all(np.isfinite(mu)):
        raise ValueError("mu contains non-finite entries")
    cov_arr = np.asarray(cov, dtype=float)
    if cov_arr.ndim != 2 or cov_arr.shape != (mu.shape[0], mu.shape[0]):
        raise DimensionMismatchError(
            f"cov must be {mu.shape[0]}x{mu.shape[0]} to match mu, got shape {cov_arr.shape}"
        )
    C = as_symmetric(cov_arr)
    dec = spectral_decompose(C)
    lam = dec.eigenvalues
    bound = -PSD_RTOL * max(1.0, float(lam[0]))
    if lam[-1] < bound:
        raise NotPositiveSemidefiniteError(lam[-1], bound)

    clamp = 0.0
    if lam[-1] < 0:
        neg = lam < 0
        clamp = float(-lam[neg].min())
        lam = np.where(neg, 0.0, lam)
        dec = SpectralDecomposition(_readonly(lam), dec.eigenvectors)
        C = _readonly(dec.reconstruct())
        C = _readonly(0.5 * (C + C.T))
    return GaussianSpec(_readonly(mu), C, dec, clamp, label)


@dataclass(frozen=True)
class SampleBatch:
    draws: np.ndarray
    seed: int
    generator_id: str

    @property
    def count(self):
        return self.draws.shape[0]

    @property
    def n(self):
        return self.draws.shape[1]


def sample(spec, count, seed, generator_id=None, tol=DEFAULT_TOL, workers=1):
    """Draw ``count`` vectors ``mu + sum_i sqrt(lambda_i) z_i b_i``.

    Eigenvalues at or below the rank threshold contribute nothing, so with a
    singular covariance every draw lies in ``mu + Image(C)`` up to rounding.
    """
    if count < 1:
        raise ValueError("count must be a positive integer")
    gid = rng.resolve_generator_id(generator_id)
    lam = spec.eigenvalues
    scale = np.where(np.abs(lam) > rank_threshold(lam, tol), np.sqrt(np.clip(lam, 0, None)), 0.0)
    z = rng.standard_normals(seed, count, spec.dim, gid, workers=workers)
    draws = spec.mu + (z * scale) @ spec.decomposition.eigenvectors.T
    return SampleBatch(_readonly(draws), rng.check_seed(seed), gid)


def squared_norms(draws):
    """Row-wise ``||x||^2`` with Neumaier-compensated accumulation."""
    draws = np.asarray(draws, dtype=float)
    total = np.zeros(draws.shape[0])
    comp = np.zeros(draws.shape[0])
    for col in (draws * draws).T:
        t = total + col
        comp += np.where(np.abs(total) >= np.abs(col), (total - t) + col, (col - t) + total)
        total = t
    return total + comp


def idempotency_residual(A):
    A = np.asarray(A, dtype=float)
    return float(np.linalg.norm(A @ A - A))


def quadratic_form_to_norm(A, mu, tol=DEFAULT_TOL):
    """Turn the quadratic form ``X . A X`` with ``X ~ N(mu, I)`` into a squared norm.

    For a symmetric idempotent ``A`` we have ``X . A X = ||A X||^2`` and
    ``A X ~ N(A mu, A)``; that spec is returned. Non-idempotent ``A`` raises
    :class:`NotIdempotentError` carrying ``||A^2 - A||_F``.
    """
    A = as_symmetric(A)
    mu = np.atleast_1d(np.asarray(mu, dtype=float))
    if mu.shape != (A.shape[0],):
        raise DimensionMismatchError(f"mu has length {mu.shape[0]}, A is {A.shape[0]}x{A.shape[0]}")
    residual = idempotency_residual(A)
    if residual > tol * max(1.0, float(np.linalg.norm(A))):
        raise NotIdempotentError(residual)
    return validate(A @ mu, A)
