"""Exception types shared across the library."""


class TLassoError(Exception):
    """Base class for all library errors."""


class InvalidLinkError(TLassoError):
    """Malformed link description (e.g. non-monotone table breakpoints)."""


class NotSubGaussianError(TLassoError):
    """No finite Orlicz norm exists for this link's output distribution."""


class NumericalFailureError(TLassoError):
    """A numerical routine produced a non-finite or degenerate result."""


class InvalidSpecError(TLassoError):
    """Invalid problem or sweep configuration."""


class UnboundedSetError(TLassoError):
    """Requested a quantity that only exists for bounded sets."""
