"""Seeded factory for specs with a known answer.

A random rank-``k`` orthogonal projection with a mean of length ``nu`` inside its
image is always chi-square with ``k`` degrees of freedom. Perturbing one
eigenvalue by ``eps`` breaks that.
"""

import numpy as np

from . import rng
from ._compensated import matmul


def generate_spec(dim, rank, ncp=0.0, seed=0, perturb=0.0, generator_id=None):
    """Return ``(mu, cov)`` as plain arrays.

    ``cov`` is a random rank-``rank`` projection in R^``dim`` and ``mu`` a random
    vector of length ``ncp`` in its image. With ``perturb > 0`` the eigenvalue 1
    of one image direction becomes ``1 + perturb`` (or, for ``rank = 0``, the
    eigenvalue 0 of one direction becomes ``perturb``).
    """
    if dim < 1:
        raise ValueError("dimension must be at least 1")
    if not 0 <= rank <= dim:
        raise ValueError(f"rank must satisfy 0 <= rank <= dim, got rank={rank}, dim={dim}")
    if ncp < 0 or perturb < 0:
        raise ValueError("ncp and perturb must be nonnegative")
    if rank == 0 and ncp > 0:
        raise ValueError("a rank-0 covariance forces mu = 0, so ncp must be 0")

    # rows 0..dim-1 give a random rotation, the last row a direction for mu
    g = rng.standard_normals(seed, dim + 1, dim, generator_id)
    q, r = np.linalg.qr(g[:dim])
    basis = q * np.sign(np.diag(r))
    # one Newton-Schulz step takes the basis from O(n eps) to O(eps) orthonormality,
    # and the compensated product keeps cov idempotent to within a rounding or two
    basis = basis - 0.5 * basis @ (matmul(basis.T, basis) - np.eye(dim))
    image = basis[:, :rank]
    cov = matmul(image, image.T)
    mu = np.zeros(dim)
    if rank and ncp > 0:
        direction = g[dim, :rank]
        mu = image @ (ncp * direction / np.linalg.norm(direction))
    if perturb > 0:
        v = basis[:, 0] if rank else basis[:, -1]
        cov = cov + perturb * np.outer(v, v)
    cov = 0.5 * (cov + cov.T)
    return mu, cov
