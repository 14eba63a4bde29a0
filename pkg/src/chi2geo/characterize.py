"""Decide whether ||X||^2 is chi-square for X ~ N(mu, C).

||X||^2 is chi-square exactly when C is the orthogonal projection onto its own
image W and mu lies in W. The degrees of freedom are then dim(W) and the
noncentrality is ||mu||. Numerically the decision combines three tolerance
checks that all use the same ``tol``:

* idempotency, ``||C^2 - C||_F <= tol * max(1, ||C||_F)``;
* mean fixed by C, ``||C mu - mu|| <= tol * max(1, ||mu||)``;
* every eigenvalue within ``tol`` of 0 or 1.

Near misses are reported as "no", never rounded to "yes".
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatchError
from .spectral import DEFAULT_TOL, as_symmetric


@dataclass(frozen=True)
class EigenvaluePartition:
    zeros: tuple
    ones: tuple
    others: tuple


@dataclass(frozen=True)
class Diagnostics:
    idempotency_residual: float
    mean_residual: float
    offending_eigenvalues: tuple
    mean_outside_image: bool
    mean_outside_norm: float
    # max over eigenvalues of the distance to {0, 1}
    eigenvalue_distance: float
    # |nu^2 - sum of squared mean coordinates on the unit eigenvalues|
    ncp_identity_residual: float

    @property
    def distance_to_projection(self):
        return max(self.eigenvalue_distance, self.mean_residual)


@dataclass(frozen=True)
class ChiSquareVerdict:
    is_chi_square: bool
    df: int = None
    ncp: float = None
    degenerate: bool = False
    image_dim: int = 0
    ambient_dim: int = 0
    tol: float = DEFAULT_TOL
    diagnostics: Diagnostics = field(default=None, repr=False)

    @property
    def ncp_lambda(self):
        """Conventional noncentrality ``ncp**2`` (``None`` for a "no" verdict)."""
        return None if self.ncp is None else self.ncp**2

    def distribution(self):
        from .chisq import NoncentralChiSquare

        if not self.is_chi_square:
            raise ValueError("||X||^2 is not chi-square for this spec")
        return NoncentralChiSquare(self.df, self.ncp)

    def to_dict(self):
        d = self.diagnostics
        return {
            "is_chi_square": self.is_chi_square,
            "df": self.df,
            "ncp": self.ncp,
            "ncp_lambda": self.ncp_lambda,
            "degenerate": self.degenerate,
            "image_dim": self.image_dim,
            "ambient_dim": self.ambient_dim,
            "tol": self.tol,
            "idempotency_residual": d.idempotency_residual,
            "mean_residual": d.mean_residual,
            "offending_eigenvalues": list(d.offending_eigenvalues),
            "mean_outside_image": d.mean_outside_image,
            "mean_outside_norm": d.mean_outside_norm,
            "eigenvalue_distance": d.eigenvalue_distance,
            "distance_to_projection": d.distance_to_projection,
            "ncp_identity_residual": d.ncp_identity_residual,
        }


def check_idempotent(C, tol=DEFAULT_TOL):
    """Return ``(passed, ||C^2 - C||_F)``."""
    C = as_symmetric(C)
    residual = float(np.linalg.norm(C @ C - C))
    return residual <= tol * max(1.0, float(np.linalg.norm(C))), residual


def check_mean_fixed(C, mu, tol=DEFAULT_TOL):
    """Return ``(passed, ||C mu - mu||)``."""
    C = np.asarray(C, dtype=float)
    mu = np.atleast_1d(np.asarray(mu, dtype=float))
    if C.ndim != 2 or C.shape != (mu.shape[0], mu.shape[0]):
        raise DimensionMismatchError(f"C has shape {C.shape} but mu has length {mu.shape[0]}")
    residual = float(np.linalg.norm(C @ mu - mu))
    return residual <= tol * max(1.0, float(np.linalg.norm(mu))), residual


def classify_eigenvalues(eigenvalues, tol=DEFAULT_TOL):
    """Partition eigenvalues into those within ``tol`` of 0, of 1, and the rest.

    Accepts a :class:`~chi2geo.spectral.SpectralDecomposition` or a plain sequence.
    """
    lam = np.asarray(getattr(eigenvalues, "eigenvalues", eigenvalues), dtype=float)
    zero = np.abs(lam) <= tol
    one = ~zero & (np.abs(lam - 1.0) <= tol)
    other = ~zero & ~one
    return EigenvaluePartition(
        tuple(lam[zero].tolist()), tuple(lam[one].tolist()), tuple(lam[other].tolist())
    )


def characterize(spec, tol=DEFAULT_TOL):
    """Verdict on whether ``||X||^2`` is chi-square, with diagnostics either way."""
    C, mu = spec.cov, spec.mu
    dec = spec.decomposition
    idem_ok, idem_res = check_idempotent(C, tol)
    mean_ok, mean_res = check_mean_fixed(C, mu, tol)
    part = classify_eigenvalues(dec, tol)

    image = spec.image(tol)
    mu_norm = float(np.linalg.norm(mu))
    outside = float(image.residual(mu))
    mean_outside = outside > tol * max(1.0, mu_norm)

    lam = dec.eigenvalues
    ones_mask = (np.abs(lam) > tol) & (np.abs(lam - 1.0) <= tol)
    coords = dec.coordinates(mu)
    ncp_identity = abs(mu_norm**2 - float(np.sum(coords[ones_mask] ** 2)))
    eig_dist = float(np.max(np.minimum(np.abs(lam), np.abs(lam - 1.0)), initial=0.0))

    diag = Diagnostics(
        idempotency_residual=idem_res,
        mean_residual=mean_res,
        offending_eigenvalues=part.others,
        mean_outside_image=bool(mean_outside),
        mean_outside_norm=outside,
        eigenvalue_distance=eig_dist,
        ncp_identity_residual=ncp_identity,
    )
    common = dict(image_dim=image.dim, ambient_dim=spec.dim, tol=tol, diagnostics=diag)
    if idem_ok and mean_ok and not part.others:
        df = len(part.ones)
        return ChiSquareVerdict(True, df=df, ncp=mu_norm, degenerate=df == 0, **common)
    return ChiSquareVerdict(False, **common)
