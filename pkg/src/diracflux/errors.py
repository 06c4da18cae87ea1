"""Exception and warning types shared across the package."""


class DiracfluxError(Exception):
    """Base class for all package-specific errors."""


class GridTooSmallError(DiracfluxError):
    """Momentum box does not cover the requested packet support."""


class LayoutUnsupportedError(DiracfluxError):
    """Operation requires a grid layout it did not receive."""


class AliasingError(DiracfluxError):
    """Phase advance per momentum-grid cell exceeds pi at the requested point."""


class ResolutionError(DiracfluxError):
    """Oscillatory quadrature grid does not resolve the phase."""


class NoStationaryPointError(DiracfluxError):
    """Leading-term evaluation requested for a phase without stationary point."""


class UnsupportedPhaseError(DiracfluxError):
    """Explicit leading-term constant is only available for a = 0."""


class SingularOriginError(DiracfluxError):
    """Green kernel evaluated at x = 0."""


class NoContractionError(DiracfluxError):
    """Born iteration is not contracting (coupling too strong)."""


class ToleranceNotReachedError(DiracfluxError):
    """Born iteration hit max_iter before reaching the requested tolerance."""


class BankMismatchError(DiracfluxError):
    """Eigenfunction bank does not match the amplitude's momentum grid."""


class ConfigError(DiracfluxError):
    """Scenario configuration could not be parsed or validated."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class AliasingWarning(UserWarning):
    """Result computed although the phase-sampling guard failed."""


class TransitTruncationWarning(UserWarning):
    """Flux at t_max still exceeds 1e-6 of its peak; time window too short."""


class ExtrapolationWarning(UserWarning):
    """Eigenfunction correction evaluated far outside the solved box."""
