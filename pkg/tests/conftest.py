import math

import numpy as np
import pytest

_CRITERIA = []


def random_rotation(n, rng):
    """Haar-distributed orthogonal matrix (QR of a Gaussian matrix, sign-corrected)."""
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    return q * np.sign(np.diag(r))


def _exact_matmul(A, B):
    return np.array([[math.fsum(A[i] * B[:, j]) for j in range(B.shape[1])] for i in range(A.shape[0])])


def random_projection(n, k, rng):
    """Random rank-``k`` orthogonal projection ``B B^T``, idempotent to about one ulp.

    A plain QR basis is orthonormal only to ``O(n eps)``, which shifts the unit
    eigenvalues by a few ``1e-15``; one Newton-Schulz step and correctly rounded
    products remove that.
    """
    Q = random_rotation(n, rng)
    Q = Q - 0.5 * Q @ (_exact_matmul(Q.T, Q) - np.eye(n))
    B = Q[:, :k]
    P = _exact_matmul(B, B.T)
    return 0.5 * (P + P.T), B, Q


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def record_criterion():
    """Collect one PASS/FAIL line per acceptance criterion for the terminal summary."""

    def record(number, passed, detail):
        _CRITERIA.append((number, passed, detail))
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number, passed, detail in sorted(_CRITERIA, key=lambda c: c[0]):
        terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] criterion {number:>2}: {detail}")
