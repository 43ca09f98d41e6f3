"""Exception types shared across the package."""


class TorscatError(Exception):
    """Base class for all package errors."""


class WindowError(TorscatError):
    """Invalid enumeration window (hi < lo, negative bounds, ...)."""


class WindowCapExceeded(TorscatError):
    """Requested enumeration would exceed the configured point cap."""


class NormCollisionError(TorscatError):
    """Two distinct (|m|,|n|) keys collided under a geometry flagged generic.

    For a genuinely irrational a^4 this cannot happen; a collision means the
    genericity assertion was wrong or the values are pathologically close.
    """


class SingularEigenvalue(TorscatError):
    """A coefficient map was requested at a point of the unperturbed spectrum."""


class NonBracketingError(TorscatError):
    """The truncated secular function failed to change sign across a gap."""


class InsufficientSampleError(TorscatError):
    """Not enough data points for the requested statistic."""


class PreconditionError(TorscatError):
    """A documented operation precondition was violated by the caller."""


class CapExceededError(TorscatError):
    """Entry count or grid size above the configured cap."""


class ConfigError(TorscatError):
    """Invalid run configuration (unknown key, bad value, missing file)."""


class ValidationError(TorscatError):
    """Externally supplied data failed a structural check (exit code 3)."""
