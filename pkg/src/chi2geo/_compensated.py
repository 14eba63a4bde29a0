"""Compensated (double-double) dot products built from error-free transformations.

Used where a product must be accurate to about one rounding of the final
result instead of ``n`` roundings: Rayleigh-quotient eigenvalue refinement and
the construction of projections that are idempotent to machine precision.
"""

import numpy as np

_SPLITTER = 134217729.0  # 2**27 + 1
# above this magnitude Dekker splitting can overflow; fall back to plain products
_SPLIT_LIMIT = 1e150


def two_sum(a, b):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def two_prod(a, b):
    p = a * b
    t = _SPLITTER * a
    ah = t - (t - a)
    al = a - ah
    t = _SPLITTER * b
    bh = t - (t - b)
    bl = b - bh
    return p, ((ah * bh - p) + ah * bl + al * bh) + al * bl


def _splittable(*arrays):
    return all(float(np.max(np.abs(a), initial=0.0)) < _SPLIT_LIMIT for a in arrays)


def matmul(A, B):
    """``A @ B`` accumulated in double-double and rounded once per entry."""
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    if not _splittable(A, B):
        return A @ B
    hi = np.zeros((A.shape[0], B.shape[1]))
    lo = np.zeros_like(hi)
    for k in range(A.shape[1]):
        p, e = two_prod(A[:, k, None], B[None, k, :])
        hi, s = two_sum(hi, p)
        lo += s + e
    return hi + lo


def column_dots(X, Y):
    """``sum(X * Y, axis=0)`` with compensated accumulation."""
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if not _splittable(X, Y):
        return np.sum(X * Y, axis=0)
    hi = np.zeros(X.shape[1])
    lo = np.zeros_like(hi)
    for k in range(X.shape[0]):
        p, e = two_prod(X[k], Y[k])
        hi, s = two_sum(hi, p)
        lo += s + e
    return hi + lo


def rayleigh_quotients(M, V):
    """``v^T M v / v^T v`` for every column ``v`` of ``V``."""
    return column_dots(V, matmul(M, V)) / column_dots(V, V)
