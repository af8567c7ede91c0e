"""Exception and warning types shared across the laboratory."""


class GdnlsError(Exception):
    """Base class for all laboratory errors."""


class ShapeError(GdnlsError):
    """Array shape does not match the grid it claims to live on."""


class BandUnrepresentableError(GdnlsError):
    """Dyadic band does not fit between the box scale and the Nyquist wavenumber."""


class GridAlignmentError(GdnlsError):
    """An operation requires a sample point (typically t = 0) that is not on the grid."""


class DealiasError(GdnlsError):
    """Input spectrum too wide for alias-free evaluation at the requested degree."""


class UndefinedRatioError(GdnlsError):
    """A measured ratio has a vanishing denominator."""


class RangeError(GdnlsError):
    """Requested frequency lies outside the resolved spectral range."""


class PolynomialParseError(GdnlsError):
    """Malformed polynomial specification text."""


class DegreeError(GdnlsError):
    """Polynomial degree outside the supported range (minimum degree is 3)."""


class DivergenceError(GdnlsError):
    """Fixed-point iteration diverged; carries the partial trace."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace


class ResolutionError(GdnlsError):
    """Time-step refinement check failed; the solver is under-resolved."""


class FitError(GdnlsError):
    """Not enough sweep points for a scaling fit."""


class MissingMeasurementError(GdnlsError):
    """A derived quantity was requested before its input measurements exist."""


class UnknownCaseError(GdnlsError):
    """Estimate case id not present in the registry."""


class ConfigError(GdnlsError):
    """Invalid run configuration; the message names the offending field."""

    def __init__(self, field, message):
        super().__init__(f"config field '{field}': {message}")
        self.field = field


class DomainApproximationWarning(UserWarning):
    """Data does not decay at the box edges; the periodic box is a poor model of the line."""
