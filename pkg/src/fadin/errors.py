"""Exception types shared across the package."""


class FadinError(Exception):
    """Base class for all errors raised by this package."""


class ParameterError(FadinError):
    """A kernel or model parameter violates its family constraints."""


class ConfigurationError(FadinError):
    """Invalid grid, spec or config input (wrong shapes, L = 0, G*delta != T, ...)."""


class DataError(FadinError):
    """Event data violates a precondition (timestamps out of range, no events)."""


class ResourceLimitError(FadinError):
    """A computation would exceed the configured memory cap."""


class UnstableModelError(FadinError):
    """Kernel-mass spectral radius >= 1; simulation refuses to run."""


class NumericError(FadinError):
    """A numeric failure (NaN/inf loss, overflowing bound) was detected."""


class IntensityBarrierError(NumericError):
    """Nonpositive discrete intensity at a bin holding events; the
    log-likelihood is undefined there (a larger baseline init usually fixes it)."""
