"""Exception hierarchy.

Every error raised by the library derives from :class:`Chi2GeoError`, and the
input-shaped ones also derive from :class:`ValueError` so callers can catch them
generically.
"""


class Chi2GeoError(Exception):
    """Base class for all library errors."""


class NonSymmetricError(Chi2GeoError, ValueError):
    def __init__(self, max_asymmetry, bound):
        self.max_asymmetry = float(max_asymmetry)
        self.bound = float(bound)
        super().__init__(
            f"operator is not symmetric: max |M[i,j] - M[j,i]| = "
            f"{self.max_asymmetry:.3e} exceeds {self.bound:.3e}"
        )


class DimensionMismatchError(Chi2GeoError, ValueError):
    pass


class NotPositiveSemidefiniteError(Chi2GeoError, ValueError):
    def __init__(self, min_eigenvalue, bound):
        self.min_eigenvalue = float(min_eigenvalue)
        self.bound = float(bound)
        super().__init__(
            f"covariance is not positive semidefinite: min eigenvalue "
            f"{self.min_eigenvalue:.6g} is below {self.bound:.3e}"
        )


class NotIdempotentError(Chi2GeoError, ValueError):
    def __init__(self, residual):
        self.residual = float(residual)
        super().__init__(
            f"operator is not idempotent: ||A^2 - A||_F = {self.residual:.6g}"
        )


class OrderTooLargeError(Chi2GeoError, ValueError):
    pass


class OutOfDomainError(Chi2GeoError, ValueError):
    pass


class TooFewSamplesError(Chi2GeoError, ValueError):
    pass


class ConvergenceError(Chi2GeoError, ArithmeticError):
    pass


class UnknownGeneratorError(Chi2GeoError, ValueError):
    pass
