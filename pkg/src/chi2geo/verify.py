"""Monte Carlo verification of chi-square verdicts.

A report records every number its pass/fail decision depends on, so ``passed``
can be recomputed from the report and its thresholds alone.
"""

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .characterize import characterize
from .errors import TooFewSamplesError
from .gaussian import sample, squared_norms
from .moments import chisq_cumulants, quadratic_norm_cumulants
from .spectral import DEFAULT_TOL

MIN_SAMPLES = 10
MISMATCH_ORDER = 12


@dataclass(frozen=True)
class CumulantEstimates:
    values: np.ndarray
    std_errors: np.ndarray


def _central_moments(x, upto):
    n = x.shape[0]
    mean = math.fsum(x) / n
    d = x - mean
    m = [1.0, 0.0]
    p = d.copy()
    for _ in range(2, upto + 1):
        p = p * d
        m.append(math.fsum(p) / n)
    return mean, m


def _cumulants_from_central(m):
    # moment-cumulant recursion for a centred variable (kappa_1 = 0)
    k = [0.0] * len(m)
    for r in range(2, len(m)):
        k[r] = m[r] - sum(math.comb(r - 1, j - 1) * k[j] * m[r - j] for j in range(2, r - 1))
    return k


def kstat_variances(kappa, n):
    """Sampling variances of the k-statistics ``k_1..k_4`` (Fisher's formulas).

    ``kappa[j]`` is the population cumulant of order ``j`` for ``j = 1..8``.
    """
    k = kappa
    n1, n2, n3 = n - 1, n - 2, n - 3
    v1 = k[2] / n
    v2 = k[4] / n + 2 * k[2] ** 2 / n1
    v3 = k[6] / n + (9 * k[2] * k[4] + 9 * k[3] ** 2) / n1 + 6 * n * k[2] ** 3 / (n1 * n2)
    v4 = (
        k[8] / n
        + (16 * k[2] * k[6] + 48 * k[3] * k[5] + 34 * k[4] ** 2) / n1
        + n * (72 * k[2] ** 2 * k[4] + 144 * k[2] * k[3] ** 2) / (n1 * n2)
        + 24 * n * (n + 1) * k[2] ** 4 / (n1 * n2 * n3)
    )
    return np.array([v1, v2, v3, v4])


def sample_cumulants(data, J=4, reference=None):
    """Unbiased k-statistics of orders ``1..J`` (``J <= 4``) with standard errors.

    Standard errors come from :func:`kstat_variances`. The population cumulants
    up to order 8 that those formulas need are taken from ``reference`` when
    given (e.g. the cumulants under a null hypothesis), otherwise estimated
    from ``data`` itself. Needs at least ``max(J, 2)`` observations; power sums
    are accumulated with :func:`math.fsum`.
    """
    if not 1 <= J <= 4:
        raise ValueError("sample cumulants are available for orders 1 to 4")
    x = np.asarray(data, dtype=float).ravel()
    n = x.shape[0]
    if n < max(J, 2):
        raise TooFewSamplesError(f"need at least {max(J, 2)} observations for order {J}, got {n}")
    mean, m = _central_moments(x, 4 if reference is not None else 8)
    m2, m3, m4 = m[2], m[3], m[4]
    values = [mean, n * m2 / (n - 1)]
    if J >= 3:
        values.append(n * n * m3 / ((n - 1) * (n - 2)))
    if J >= 4:
        values.append(n * n * ((n + 1) * m4 - 3 * (n - 1) * m2**2) / ((n - 1) * (n - 2) * (n - 3)))

    if reference is not None:
        kappa = [0.0] + [float(v) for v in np.asarray(reference, dtype=float)[:8]]
        if len(kappa) < 9:
            raise ValueError("reference must provide cumulants of orders 1 to 8")
    else:
        kappa = _cumulants_from_central(m)
        kappa[1] = mean
    if n >= 4:
        var = np.clip(kstat_variances(kappa, n), 0.0, None)
        se = np.sqrt(var)[:J]
    else:
        se = np.full(J, np.nan)
    return CumulantEstimates(np.array(values[:J]), se)


def kolmogorov_sf(y):
    """Survival function of the limiting Kolmogorov distribution at ``y``."""
    if y <= 0:
        return 1.0
    if y < 1.0:
        # small-y theta-series form of the CDF
        c = math.pi**2 / (8.0 * y * y)
        total, k = 0.0, 1
        while True:
            term = math.exp(-((2 * k - 1) ** 2) * c)
            total += term
            if term < 1e-10 * max(total, 1e-300) or term == 0.0:
                break
            k += 1
        return min(1.0, max(0.0, 1.0 - math.sqrt(2.0 * math.pi) / y * total))
    total, k = 0.0, 1
    while True:
        term = math.exp(-2.0 * k * k * y * y)
        total += term if k % 2 else -term
        if term < 1e-10:
            break
        k += 1
    return min(1.0, max(0.0, 2.0 * total))


def ks_test(data, cdf):
    """Two-sided one-sample Kolmogorov-Smirnov test; returns ``(D, p_value)``."""
    x = np.sort(np.asarray(data, dtype=float).ravel())
    n = x.shape[0]
    if n < MIN_SAMPLES:
        raise TooFewSamplesError(f"KS test needs at least {MIN_SAMPLES} observations, got {n}")
    F = np.asarray(cdf(x), dtype=float)
    i = np.arange(1, n + 1)
    d = max(float(np.max(i / n - F)), float(np.max(F - (i - 1) / n)))
    return d, kolmogorov_sf(math.sqrt(n) * d)


@dataclass(frozen=True)
class Thresholds:
    ks_alpha: float = 0.01
    cumulant_z: float = 4.0
    subspace_tol: float = 1e-10
    kernel_variance_tol: float = 1e-20
    tol: float = DEFAULT_TOL


@dataclass
class VerificationReport:
    verdict: object
    sample_count: int
    seed: int
    generator_id: str
    thresholds: Thresholds
    sample_cumulants: list
    sample_std_errors: list
    analytic_cumulants: list
    cumulant_z_scores: list
    mean_z_score: float
    ks_statistic: float
    ks_p_value: float
    subspace_max_residual: float
    kernel_max_variance: float
    gates: dict
    passed: bool
    cumulant_mismatch: dict = field(default=None)

    def to_dict(self):
        out = dict(self.__dict__)
        out["verdict"] = self.verdict.to_dict()
        out["thresholds"] = asdict(self.thresholds)
        return out


def cumulant_mismatch(spec, order=MISMATCH_ORDER, rtol=DEFAULT_TOL):
    """First cumulant order where ``||X||^2`` departs from the closest chi-square shape.

    The comparison family is ``2**(j-1) (j-1)! (r + j nu**2)`` with ``nu = ||mu||``
    and ``r = trace(C)`` (allowed to be fractional). That choice matches the first
    cumulant exactly, so the reported order is where the variance or a higher
    cumulant gives it away. Returns ``None`` when all orders agree to ``rtol``.
    """
    analytic = quadratic_norm_cumulants(spec, order)
    nu2 = float(spec.mu @ spec.mu)
    r_fit = float(np.sum(spec.eigenvalues))
    fit = chisq_cumulants(r_fit, math.sqrt(nu2), order)
    for j in range(order):
        if abs(analytic[j] - fit[j]) > rtol * max(abs(analytic[j]), abs(fit[j]), 1e-300):
            return {
                "order": j + 1,
                "analytic": float(analytic[j]),
                "best_fit": float(fit[j]),
                "best_fit_df": r_fit,
                "best_fit_ncp_squared": nu2,
            }
    return None


def _z_scores(est, se, analytic):
    z = []
    for e, s, a in zip(est, se, analytic):
        diff = float(e - a)
        if s > 0:
            z.append(diff / float(s))
        else:
            z.append(0.0 if abs(diff) <= 1e-12 * max(1.0, abs(a)) else math.copysign(math.inf, diff))
    return z


def verify(spec, count, seed, thresholds=None, generator_id=None, workers=1):
    """Sample ``||X||^2`` and check it against the exact theory.

    Gates: sample cumulants of orders 1-4 within ``cumulant_z`` standard errors
    of the exact cumulants of ``||X||^2``; draws inside ``mu + Image(C)`` and
    zero variance along the kernel; and, for a chi-square verdict, a KS test
    against the predicted noncentral chi-square at level ``ks_alpha``. A
    "no" verdict also gets a :func:`cumulant_mismatch` entry.
    """
    th = thresholds or Thresholds()
    if count < MIN_SAMPLES:
        raise TooFewSamplesError(f"verification needs at least {MIN_SAMPLES} samples, got {count}")
    verdict = characterize(spec, th.tol)
    batch = sample(spec, count, seed, generator_id, tol=th.tol, workers=workers)
    norms = squared_norms(batch.draws)

    analytic = quadratic_norm_cumulants(spec, 8)
    est = sample_cumulants(norms, 4, reference=analytic)
    z = _z_scores(est.values, est.std_errors, analytic[:4])

    centred = batch.draws - spec.mu
    scale = 1.0 + np.linalg.norm(batch.draws, axis=1)
    image, kernel = spec.image(th.tol), spec.kernel(th.tol)
    subspace_res = float(np.max(image.residual(centred) / scale))
    kernel_var = 0.0
    if kernel.dim:
        kernel_var = float(np.max(np.var(centred @ kernel.basis, axis=0)))

    ks_d = ks_p = None
    mismatch = None
    if verdict.is_chi_square and not verdict.degenerate:
        ks_d, ks_p = ks_test(norms, verdict.distribution().cdf)
    elif not verdict.is_chi_square:
        mismatch = cumulant_mismatch(spec, rtol=th.tol)

    gates = {
        "cumulants": all(abs(v) <= th.cumulant_z for v in z),
        "subspace": subspace_res <= th.subspace_tol and kernel_var <= th.kernel_variance_tol,
        "ks": None if ks_p is None else ks_p >= th.ks_alpha,
    }
    passed = all(g for g in gates.values() if g is not None)
    return VerificationReport(
        verdict=verdict,
        sample_count=int(count),
        seed=batch.seed,
        generator_id=batch.generator_id,
        thresholds=th,
        sample_cumulants=est.values.tolist(),
        sample_std_errors=est.std_errors.tolist(),
        analytic_cumulants=analytic[:4].tolist(),
        cumulant_z_scores=z,
        mean_z_score=z[0],
        ks_statistic=ks_d,
        ks_p_value=ks_p,
        subspace_max_residual=subspace_res,
        kernel_max_variance=kernel_var,
        gates=gates,
        passed=passed,
        cumulant_mismatch=mismatch,
    )
