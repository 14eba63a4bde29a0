"""Geometric chi-square characterization of ||X||^2 for Gaussian X.

``||X||^2`` with ``X ~ N(mu, C)`` is (noncentral) chi-square exactly when ``C`` is
the orthogonal projection onto ``W = Image(C)`` and ``mu`` lies in ``W``; the
degrees of freedom are ``dim W`` and the noncentrality is ``||mu||``.
"""

__version__ = "0.1.0"

from .characterize import (
    ChiSquareVerdict,
    characterize,
    check_idempotent,
    check_mean_fixed,
    classify_eigenvalues,
)
from .chisq import NoncentralChiSquare, regularized_lower_gamma
from .errors import (
    Chi2GeoError,
    ConvergenceError,
    DimensionMismatchError,
    NonSymmetricError,
    NotIdempotentError,
    NotPositiveSemidefiniteError,
    OrderTooLargeError,
    OutOfDomainError,
    TooFewSamplesError,
    UnknownGeneratorError,
)
from .gaussian import GaussianSpec, SampleBatch, quadratic_form_to_norm, sample, validate
from .generate import generate_spec
from .moments import (
    chisq_cumulants,
    cumulants_from_mgf,
    mgf_chisq,
    mgf_norm,
    quadratic_norm_cumulants,
)
from .spectral import (
    SpectralDecomposition,
    Subspace,
    image_subspace,
    kernel_subspace,
    projection_onto,
    spectral_decompose,
)
from .verify import Thresholds, VerificationReport, ks_test, sample_cumulants, verify
