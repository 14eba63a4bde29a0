"""Noncentral chi-square distribution: CDF, density, quantiles and direct sampling.

Noncentrality is stored as ``nu``, the length of the mean vector. The textbook
parameter ``lambda = nu**2`` is available as :attr:`NoncentralChiSquare.lam`.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import rng
from .errors import ConvergenceError
from .gaussian import squared_norms

POISSON_TAIL = 1e-14
_MAX_ITER = 2000
_FPMIN = 1e-300
_EPS = np.finfo(float).eps


def _log_gamma_prefactor(a, x):
    # log(x**a e**-x / Gamma(a)); x > 0
    return a * np.log(x) - x - math.lgamma(a)


def _gamma_series(a, x):
    """P(a, x) by its power series; intended for x < a + 1."""
    total = np.full_like(x, 1.0 / a)
    term = total.copy()
    active = np.ones(x.shape, dtype=bool)
    ap = a
    for _ in range(_MAX_ITER):
        if not active.any():
            break
        ap += 1.0
        term[active] *= x[active] / ap
        total[active] += term[active]
        active &= np.abs(term) > np.abs(total) * _EPS
    else:
        raise ConvergenceError("incomplete gamma series did not converge")
    return total * np.exp(_log_gamma_prefactor(a, x))


def _gamma_contfrac(a, x):
    """Q(a, x) = 1 - P(a, x) by modified Lentz continued fraction; for x >= a + 1."""
    b = x + 1.0 - a
    c = np.full_like(x, 1.0 / _FPMIN)
    d = 1.0 / b
    h = d.copy()
    active = np.ones(x.shape, dtype=bool)
    for i in range(1, _MAX_ITER):
        if not active.any():
            break
        an = -i * (i - a)
        b = b + 2.0
        d = an * d + b
        d = np.where(np.abs(d) < _FPMIN, _FPMIN, d)
        c = b + an / c
        c = np.where(np.abs(c) < _FPMIN, _FPMIN, c)
        d = 1.0 / d
        delta = d * c
        h = np.where(active, h * delta, h)
        active &= np.abs(delta - 1.0) > _EPS
    else:
        raise ConvergenceError("incomplete gamma continued fraction did not converge")
    return np.exp(_log_gamma_prefactor(a, x)) * h


def regularized_lower_gamma(a, x):
    """Regularized lower incomplete gamma ``P(a, x)`` for scalar ``a > 0``, ``x >= 0``."""
    if a <= 0:
        raise ValueError("a must be positive")
    x_arr = np.asarray(x, dtype=float)
    if np.any(x_arr < 0):
        raise ValueError("x must be nonnegative")
    flat = x_arr.ravel()
    out = np.zeros_like(flat)
    series = (flat > 0) & (flat < a + 1.0)
    cf = flat >= a + 1.0
    if series.any():
        out[series] = _gamma_series(a, flat[series])
    if cf.any():
        out[cf] = 1.0 - _gamma_contfrac(a, flat[cf])
    out = np.clip(out, 0.0, 1.0).reshape(x_arr.shape)
    return out if out.ndim else out[()]


def poisson_window(mean, tail=POISSON_TAIL):
    """Indices ``lo..hi`` and weights of a Poisson(mean) pmf covering ``1 - tail`` mass.

    Weights are built outward from the mode by the ratio recurrence
    ``w(k+1) = w(k) mean / (k+1)``, always adding the heavier neighbour, so large
    means neither underflow nor lose accuracy to ``lgamma`` cancellation. Growth
    stops once a geometric bound on the mass outside the window drops below
    ``tail``; the weights are then normalised.
    """
    if mean == 0:
        return 0, np.array([1.0])
    mode = int(math.floor(mean))
    left, right = [], [1.0]
    lo = hi = mode
    total = 1.0
    w_lo = w_hi = 1.0
    while True:
        nxt_left = w_lo * lo / mean if lo > 0 else 0.0
        nxt_right = w_hi * mean / (hi + 1)
        # sum of w(k) for k < lo is at most nxt_left / (1 - (lo - 1) / mean); same idea to the right
        bound_left = nxt_left / (1.0 - (lo - 1) / mean) if lo > 0 else 0.0
        bound_right = nxt_right / (1.0 - mean / (hi + 2))
        if bound_left + bound_right < tail * total:
            break
        if nxt_left >= nxt_right:
            lo -= 1
            w_lo = nxt_left
            left.append(w_lo)
            total += w_lo
        else:
            hi += 1
            w_hi = nxt_right
            right.append(w_hi)
            total += w_hi
    weights = np.array(left[::-1] + right)
    return lo, weights / math.fsum(weights)


@dataclass(frozen=True)
class NoncentralChiSquare:
    """Law of ``g_1**2 + ... + g_r**2`` with ``g ~ N(m, I_r)`` and ``||m|| = nu``.

    ``df = 0`` is allowed only with ``nu = 0`` and means the point mass at 0.
    """

    df: int
    nu: float = 0.0

    def __post_init__(self):
        if int(self.df) != self.df or self.df < 0:
            raise ValueError(f"df must be a nonnegative integer, got {self.df}")
        if not self.nu >= 0:
            raise ValueError(f"nu must be nonnegative, got {self.nu}")
        if self.df == 0 and self.nu != 0:
            raise ValueError("df = 0 requires nu = 0")
        object.__setattr__(self, "df", int(self.df))
        object.__setattr__(self, "nu", float(self.nu))

    @property
    def lam(self):
        """Conventional noncentrality ``nu**2``."""
        return self.nu**2

    @property
    def degenerate(self):
        return self.df == 0

    def mean(self):
        return self.df + self.lam

    def var(self):
        return 2.0 * (self.df + 2.0 * self.lam)

    def cdf(self, x):
        """Poisson mixture ``sum_k Pois(k; lam/2) P(df/2 + k, x/2)``.

        Successive gamma terms come from ``P(a + 1, y) = P(a, y) - y**a e**-y / Gamma(a + 1)``.
        """
        x = np.asarray(x, dtype=float)
        if self.degenerate:
            out = (x >= 0).astype(float)
            return out if out.ndim else out[()]
        out = np.zeros_like(x)
        # the smallest subnormal x halves to 0, where the CDF is 0 anyway
        pos = x / 2.0 > 0
        y = x[pos] / 2.0
        lo, weights = poisson_window(self.lam / 2.0)
        a = self.df / 2.0 + lo
        p = np.asarray(regularized_lower_gamma(a, y), dtype=float)
        log_y = np.log(y)
        acc = weights[0] * p
        for w in weights[1:]:
            p = p - np.exp(a * log_y - y - math.lgamma(a + 1.0))
            a += 1.0
            acc += w * p
        out[pos] = np.clip(acc, 0.0, 1.0)
        return out if out.ndim else out[()]

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        if self.degenerate:
            raise ValueError("the degenerate point mass has no density")
        out = np.zeros_like(x)
        pos = x > 0
        xp = x[pos]
        lo, weights = poisson_window(self.lam / 2.0)
        acc = np.zeros_like(xp)
        for k, w in enumerate(weights, start=lo):
            a = self.df / 2.0 + k
            acc += w * np.exp((a - 1.0) * np.log(xp) - xp / 2.0 - a * math.log(2.0) - math.lgamma(a))
        out[pos] = acc
        return out if out.ndim else out[()]

    def ppf(self, q, iterations=200):
        """Quantiles by bisection on the CDF."""
        q = np.asarray(q, dtype=float)
        if np.any((q < 0) | (q > 1)):
            raise ValueError("probabilities must lie in [0, 1]")
        if self.degenerate:
            return np.zeros_like(q)
        lo = np.zeros_like(q)
        hi = np.full_like(q, self.mean() + 10.0 * math.sqrt(self.var()) + 10.0)
        while np.any(self.cdf(hi) < q):
            hi = np.where(self.cdf(hi) < q, 2.0 * hi, hi)
        for _ in range(iterations):
            mid = 0.5 * (lo + hi)
            below = self.cdf(mid) < q
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        return 0.5 * (lo + hi)

    def sample_direct(self, count, seed, generator_id=None, workers=1):
        """``count`` draws of ``(g_1 + nu)**2 + g_2**2 + ... + g_df**2``."""
        z = rng.standard_normals(seed, count, self.df, generator_id, workers=workers)
        if self.df:
            z[:, 0] += self.nu
        return squared_norms(z)
