"""Moment-generating functions and cumulants of ||X||^2 and of noncentral chi-square.

Cumulants of ``||X||^2`` for ``X ~ N(mu, C)`` are, with ``lambda_i`` the eigenvalues of
``C`` and ``m_i`` the coordinates of ``mu`` in the eigenbasis::

    kappa_j = 2**(j-1) (j-1)! * (sum_i lambda_i**j + j * sum_i lambda_i**(j-1) m_i**2)

and for chi-square with ``r`` degrees of freedom and noncentrality ``nu`` (the
length of the mean, so the usual lambda is ``nu**2``)::

    kappa_j = 2**(j-1) (j-1)! * (r + j nu**2)
"""

import math

import numpy as np

from .errors import OrderTooLargeError, OutOfDomainError

MAX_ORDER = 20
ORACLE_MAX_ORDER = 6
DOMAIN_MARGIN = 1e-9


def _check_order(J, cap=MAX_ORDER):
    J = int(J)
    if J < 1:
        raise ValueError("cumulant order must be at least 1")
    if J > cap:
        raise OrderTooLargeError(f"cumulant order {J} exceeds the supported maximum {cap}")
    return J


def _prefactors(J):
    return np.array([2.0 ** (j - 1) * math.factorial(j - 1) for j in range(1, J + 1)])


def quadratic_norm_cumulants(spec, J):
    """First ``J`` cumulants of ``||X||^2`` for ``X ~ spec`` (``0**0`` taken as 1)."""
    J = _check_order(J)
    lam = np.asarray(spec.eigenvalues, dtype=float)
    m2 = spec.mean_coordinates() ** 2
    out = np.empty(J)
    for j in range(1, J + 1):
        out[j - 1] = np.sum(lam**j) + j * np.sum(lam ** (j - 1) * m2)
    return out * _prefactors(J)


def chisq_cumulants(r, nu, J):
    J = _check_order(J)
    if r < 0 or nu < 0:
        raise ValueError("degrees of freedom and noncentrality must be nonnegative")
    j = np.arange(1, J + 1)
    return _prefactors(J) * (r + j * float(nu) ** 2)


def _check_domain(t, radius):
    """Raise unless every ``t`` keeps all factors ``1 - 2 t lambda`` safely positive.

    Real ``t`` may be any value below ``radius - margin``; complex ``t`` must lie
    inside the disc of that radius.
    """
    limit = radius - DOMAIN_MARGIN
    if np.iscomplexobj(t):
        bad = np.where(np.imag(t) != 0, np.abs(t) >= limit, np.real(t) >= limit)
    else:
        bad = t >= limit
    if np.any(bad):
        raise OutOfDomainError(
            f"t must stay below {limit:.12g} (the MGF is singular at t = {radius:.12g})"
        )


def _as_t(t):
    t = np.asarray(t)
    if not np.iscomplexobj(t):
        t = t.astype(float)
    return t


def mgf_norm(spec, t):
    """Moment-generating function of ``||X||^2`` evaluated in the eigenbasis.

    Accepts scalar or array, real or complex ``t``. Raises
    :class:`OutOfDomainError` at or beyond ``1 / (2 lambda_max)``.
    """
    t = _as_t(t)
    lam = np.asarray(spec.eigenvalues, dtype=float)
    m2 = spec.mean_coordinates() ** 2
    lam_max = float(lam.max(initial=0.0))
    if lam_max > 0:
        _check_domain(t, 1.0 / (2.0 * lam_max))
    tt = t[..., None]
    log_m = np.sum(tt * m2 / (1.0 - 2.0 * tt * lam) - 0.5 * np.log1p(-2.0 * tt * lam), axis=-1)
    out = np.exp(log_m)
    return out if out.ndim else out[()]


def mgf_chisq(r, nu, t):
    """MGF of chi-square with ``r`` degrees of freedom and noncentrality ``nu``.

    The degenerate ``r = nu = 0`` law is the point mass at 0, whose MGF is 1
    everywhere.
    """
    t = _as_t(t)
    if r == 0 and nu == 0:
        out = np.ones_like(t)
        return out if out.ndim else out[()]
    _check_domain(t, 0.5)
    out = np.exp(t * float(nu) ** 2 / (1.0 - 2.0 * t) - 0.5 * r * np.log1p(-2.0 * t))
    return out if out.ndim else out[()]


def cumulants_from_mgf(mgf, J, radius=None, points=512):
    """Estimate the first ``J`` cumulants numerically from an MGF alone.

    ``log(mgf)`` is sampled on a circle ``|t| = radius`` in the complex plane and
    the Taylor coefficients at 0 are read off by FFT (a discrete Cauchy
    integral). This is independent of any closed-form cumulant expression and is
    far less sensitive to rounding than real-axis difference quotients, whose
    error grows like ``eps / h**j``.

    Without an explicit ``radius`` the largest power of two is used for which
    the MGF is finite on a circle of twice that radius (so the sampled circle
    sits well inside the domain) and the phase of ``mgf`` varies by less than
    one radian between neighbouring nodes (so the logarithm can be unwrapped).
    ``mgf`` must accept complex arrays. Raises :class:`OutOfDomainError` if no
    admissible circle is found.
    """
    J = _check_order(J, ORACLE_MAX_ORDER)
    nodes = np.exp(2j * np.pi * np.arange(points) / points)

    def log_on_circle(rho):
        with np.errstate(all="ignore"):
            m = np.broadcast_to(np.asarray(mgf(rho * nodes), dtype=complex), nodes.shape)
        if not np.all(np.isfinite(m)) or np.any(m == 0):
            return None
        phase = np.unwrap(np.angle(m))
        steps = np.diff(np.append(phase, phase[0]))
        if np.max(np.abs(steps)) >= 1.0:
            return None
        return np.log(np.abs(m)) + 1j * phase

    def admissible(rho):
        try:
            with np.errstate(all="ignore"):
                probe = np.broadcast_to(np.asarray(mgf(2.0 * rho * nodes), dtype=complex), nodes.shape)
            if not np.all(np.isfinite(probe)):
                return None
            return log_on_circle(rho)
        except OutOfDomainError:
            return None

    if radius is not None:
        candidates = [float(radius)]
    else:
        candidates = [2.0**k for k in range(10, -40, -1)]
    for rho in candidates:
        values = admissible(rho)
        if values is not None:
            break
    else:
        raise OutOfDomainError("no admissible circle found inside the MGF domain")

    coeffs = np.fft.fft(values) / points
    return np.array([coeffs[j].real * math.factorial(j) / rho**j for j in range(1, J + 1)])
