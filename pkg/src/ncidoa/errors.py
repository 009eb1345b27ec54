"""Exception and warning types raised across the package."""


class NcidoaError(Exception):
    """Base class for all package-specific errors."""


class InvalidSpecError(NcidoaError, ValueError):
    """A scenario, source, or configuration value violates its invariants."""


class ConfigError(InvalidSpecError):
    """A config file could not be parsed or validated."""


class DegenerateSpreadError(NcidoaError, ValueError):
    """A zero angular spread was used where a proper density is required."""


class NotPsdError(NcidoaError):
    """A covariance pair does not define a positive semidefinite model."""


class SingularCovarianceError(NcidoaError):
    """Sample or model covariance is numerically singular (e.g. N < 2L)."""


class SingularModelError(NcidoaError):
    """Model covariance or information matrix cannot be inverted."""


class SingularNuisanceBlockError(SingularModelError):
    """The nuisance block of the information matrix is singular."""


class UndefinedPhaseError(NcidoaError):
    """Noncircularity phase is undefined because the unconjugated trace vanishes."""


class InfeasibleAuxiliaryError(NcidoaError, ValueError):
    """Auxiliary vector violates the monotone box constraints."""


class NonSeparableGeometryError(NcidoaError, ValueError):
    """Geometry does not factor as f'_l = l * g(theta), required by the robust stage."""


class InsufficientMinimaError(NcidoaError):
    """Fewer local minima than requested sources were found.

    Carries the minima that were found so callers can report partial results.
    """

    def __init__(self, message, found=()):
        super().__init__(message)
        self.found = tuple(found)


class IllConditionedHessianError(NcidoaError):
    """Hessian of the fitting cost is too ill-conditioned to invert."""


class MalformedCsvError(NcidoaError, ValueError):
    """A CSV file does not match the layout this package emits."""


class BoundaryMinimumWarning(UserWarning):
    """A grid search ended on a grid endpoint; the estimate may be truncated."""
