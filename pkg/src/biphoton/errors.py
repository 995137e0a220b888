"""Exception hierarchy shared by all modules."""


class BiphotonError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(BiphotonError, ValueError):
    """Invalid configuration, parameter or scenario input."""


class NumericError(BiphotonError, ArithmeticError):
    """A numerical or analysis step could not produce a result."""


class DomainError(NumericError, ValueError):
    """A wavelength or parameter lies outside a model's validity range."""


class CalibrationError(NumericError):
    """A calibration target cannot be reached."""


class AnalysisError(NumericError):
    """Post-processing of a scan failed (no crossing, no carrier, ...)."""
