"""Exception types with a common base so callers can catch package-wide."""


class ClrlabError(Exception):
    """Base class for all errors raised by this package."""


class NonHermitianError(ClrlabError, ValueError):
    """Input matrix is not Hermitian within tolerance."""


class NotPositiveSemidefiniteError(ClrlabError, ValueError):
    """Input matrix (or matrix field) has an eigenvalue below -tolerance."""


class SpectralDomainError(ClrlabError, ValueError):
    """Scalar function is undefined or non-real on the spectrum."""


class EigenSolverError(ClrlabError, RuntimeError):
    """Dense eigensolver failed to converge."""


class BudgetError(ClrlabError, RuntimeError):
    """Requested computation exceeds a package resource budget."""


class AdmissibilityError(ClrlabError, ValueError):
    """Scalar function class violates its sign or shape constraints."""


class ConfigError(ClrlabError, ValueError):
    """Experiment configuration is malformed or inconsistent."""
