"""Exception hierarchy shared across the package."""


class GeodetectError(Exception):
    """Base class for all errors raised by geodetect."""


class ShapeError(GeodetectError, ValueError):
    """Array dimensions or lengths do not agree."""


class DomainError(GeodetectError, ValueError):
    """A value lies outside the mathematical domain of an operation."""


class FitError(GeodetectError, RuntimeError):
    """A fitting procedure cannot run or produced non-finite state."""


class CalibrationError(GeodetectError, ValueError):
    """Threshold calibration received too little data."""


class InsufficientDataError(GeodetectError, ValueError):
    """Not enough samples for the requested statistic."""


class ConfigError(GeodetectError, ValueError):
    """An experiment configuration is malformed or inconsistent."""


class DumpFormatError(GeodetectError, ValueError):
    """An on-disk dump or artifact violates the file format contract.

    ``code`` identifies the violation class so callers (and tests) can
    distinguish rejection reasons without parsing messages.
    """

    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code
