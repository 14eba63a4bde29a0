"""Symmetric eigendecomposition, orthogonal projections and image/kernel subspaces.

The eigensolver is a cyclic Jacobi iteration followed by one compensated
Rayleigh-quotient pass over the eigenvalues. It is slower than LAPACK for large
operators, but the eigenvalues of the given floating-point matrix come out
accurate to a few units in the last place of ``||M||``, which is what rank
decisions near 0 and 1 and MGF evaluation near its pole depend on.
"""

from dataclasses import dataclass

import numpy as np

from ._compensated import rayleigh_quotients
from .errors import ConvergenceError, DimensionMismatchError, NonSymmetricError

DEFAULT_TOL = 1e-8
SYMMETRY_RTOL = 1e-12
ORTHONORMAL_ATOL = 1e-10
OFFDIAG_RTOL = 1e-14
# a component this small is treated as zero when fixing eigenvector signs
_SIGN_ATOL = 1e-12


def _readonly(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def as_symmetric(M):
    """Validate a square real matrix and return its exactly symmetric copy.

    Asymmetry up to ``1e-12 * max(1, max|M|)`` is accepted and averaged away;
    anything larger raises :class:`NonSymmetricError`.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] < 1:
        raise DimensionMismatchError(f"expected a non-empty square matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix contains non-finite entries")
    scale = max(1.0, float(np.max(np.abs(M))))
    asym = float(np.max(np.abs(M - M.T)))
    bound = SYMMETRY_RTOL * scale
    if asym > bound:
        raise NonSymmetricError(asym, bound)
    return _readonly(0.5 * (M + M.T))


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenvalues in descending order and matching orthonormal eigenvectors.

    ``eigenvectors[:, i]`` belongs to ``eigenvalues[i]``.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def dim(self):
        return self.eigenvalues.shape[0]

    def reconstruct(self):
        B = self.eigenvectors
        return (B * self.eigenvalues) @ B.T

    def coordinates(self, v):
        """Coordinates of ``v`` in the eigenbasis."""
        return self.eigenvectors.T @ np.asarray(v, dtype=float)


@dataclass(frozen=True)
class Subspace:
    """A subspace of R^n given by an orthonormal basis stored as columns.

    The basis may be empty (``shape (n, 0)``) for the zero subspace.
    """

    basis: np.ndarray

    def __post_init__(self):
        B = np.asarray(self.basis, dtype=float)
        if B.ndim != 2:
            raise DimensionMismatchError("subspace basis must be a 2-D array (n, k)")
        if B.shape[1] > B.shape[0]:
            raise DimensionMismatchError(
                f"{B.shape[1]} basis vectors cannot be independent in R^{B.shape[0]}"
            )
        gram_err = np.max(np.abs(B.T @ B - np.eye(B.shape[1])), initial=0.0)
        if gram_err > ORTHONORMAL_ATOL:
            raise ValueError(f"basis is not orthonormal (max Gram error {gram_err:.3e})")
        object.__setattr__(self, "basis", _readonly(B))

    @classmethod
    def span(cls, vectors, ambient_dim=None):
        """Orthonormalise ``vectors`` (rows) and return the subspace they span."""
        V = np.asarray(vectors, dtype=float)
        if V.size == 0:
            if ambient_dim is None:
                raise ValueError("ambient_dim is required for an empty spanning set")
            return cls(np.zeros((ambient_dim, 0)))
        V = np.atleast_2d(V)
        U, s, _ = np.linalg.svd(V.T, full_matrices=False)
        keep = s > max(V.shape) * np.finfo(float).eps * max(s.max(), 1.0)
        return cls(U[:, keep])

    @property
    def ambient_dim(self):
        return self.basis.shape[0]

    @property
    def dim(self):
        return self.basis.shape[1]

    def project(self, v):
        """Orthogonal projection of ``v`` (a vector or rows of vectors)."""
        v = np.asarray(v, dtype=float)
        B = self.basis
        return (v @ B) @ B.T

    def residual(self, v):
        """Norm of the component of ``v`` orthogonal to the subspace, per row."""
        v = np.asarray(v, dtype=float)
        return np.linalg.norm(v - self.project(v), axis=-1)

    def same_span(self, other, atol=1e-8):
        if self.ambient_dim != other.ambient_dim or self.dim != other.dim:
            return False
        if self.dim == 0:
            return True
        return bool(
            np.max(other.residual(self.basis.T)) <= atol
            and np.max(self.residual(other.basis.T)) <= atol
        )


def _jacobi_eigh(A):
    """Cyclic Jacobi rotations; returns (eigenvalues, eigenvectors) unsorted."""
    A = np.array(A, dtype=float)
    n = A.shape[0]
    V = np.eye(n)
    target = OFFDIAG_RTOL * np.linalg.norm(A)
    max_sweeps = 100 * n * n

    def off_norm():
        return np.linalg.norm(A - np.diag(np.diag(A)))

    sweeps = 0
    while off_norm() > target:
        if sweeps >= max_sweeps:
            raise ConvergenceError(
                f"Jacobi iteration did not converge in {max_sweeps} sweeps "
                f"(off-diagonal norm {off_norm():.3e}, target {target:.3e})"
            )
        sweeps += 1
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if apq == 0.0:
                    continue
                h = A[q, q] - A[p, p]
                if abs(h) + 100.0 * abs(apq) == abs(h):
                    # tiny rotation; tau = h / (2 apq) would overflow
                    t = apq / h
                else:
                    tau = h / (2.0 * apq)
                    if tau >= 0:
                        t = 1.0 / (tau + np.hypot(1.0, tau))
                    else:
                        t = -1.0 / (-tau + np.hypot(1.0, tau))
                c = 1.0 / np.hypot(1.0, t)
                s = t * c

                col_p = A[:, p].copy()
                A[:, p] = c * col_p - s * A[:, q]
                A[:, q] = s * col_p + c * A[:, q]
                row_p = A[p, :].copy()
                A[p, :] = c * row_p - s * A[q, :]
                A[q, :] = s * row_p + c * A[q, :]
                A[p, q] = A[q, p] = 0.0

                vp = V[:, p].copy()
                V[:, p] = c * vp - s * V[:, q]
                V[:, q] = s * vp + c * V[:, q]
    return np.diag(A).copy(), V


def _fix_signs(V):
    for i in range(V.shape[1]):
        nz = np.flatnonzero(np.abs(V[:, i]) > _SIGN_ATOL)
        if nz.size and V[nz[0], i] < 0:
            V[:, i] = -V[:, i]
    return V


def spectral_decompose(M):
    """Eigendecomposition of a symmetric operator.

    Eigenvalues come back in descending order. Each eigenvector is flipped so its
    first nonzero component is positive, so identical inputs always give
    identical outputs. Under repeated eigenvalues only the span of the
    corresponding eigenvectors is meaningful.
    """
    S = as_symmetric(M)
    _, V = _jacobi_eigh(S)
    # the quotient is stationary at eigenvectors, so Jacobi's O(n eps) vector
    # error only enters squared; the rotation-accumulated diagonal does not
    w = rayleigh_quotients(S, V)
    order = np.argsort(-w, kind="stable")
    w, V = w[order], _fix_signs(V[:, order])
    return SpectralDecomposition(_readonly(w), _readonly(V))


def rank_threshold(eigenvalues, tol=DEFAULT_TOL):
    """Absolute cutoff above which ``|eigenvalue|`` counts toward the rank."""
    lam_max = float(np.max(np.abs(eigenvalues), initial=0.0))
    return tol * max(1.0, lam_max)


def split_spectrum(dec, tol=DEFAULT_TOL):
    """Return ``(image, kernel)`` subspaces from an existing decomposition."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    keep = np.abs(dec.eigenvalues) > rank_threshold(dec.eigenvalues, tol)
    return Subspace(dec.eigenvectors[:, keep]), Subspace(dec.eigenvectors[:, ~keep])


def image_subspace(M, tol=DEFAULT_TOL):
    return split_spectrum(spectral_decompose(M), tol)[0]


def kernel_subspace(M, tol=DEFAULT_TOL):
    return split_spectrum(spectral_decompose(M), tol)[1]


def projection_onto(W):
    """Orthogonal projection matrix onto ``W``: the sum of ``b b^T`` over its basis."""
    B = W.basis
    P = B @ B.T
    return _readonly(0.5 * (P + P.T))
