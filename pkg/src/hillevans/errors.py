"""Exception hierarchy."""


class HillEvansError(Exception):
    """Base class for all numerical and validation failures in the package."""


class NoOrbit(HillEvansError):
    pass


class RotationalUnavailable(HillEvansError):
    pass


class SeparatrixDivergence(HillEvansError):
    pass


class IntegrationFailure(HillEvansError):
    pass


class ZeroCharacteristicValue(HillEvansError):
    pass


class NonSimple(HillEvansError):
    pass


class NotACharacteristicValue(HillEvansError):
    pass


class TrackingAmbiguity(HillEvansError, RuntimeWarning):
    """Root matching across a theta step was not unique; issued as a warning by sweeps."""


class EmptyWindow(RuntimeWarning):
    """A spectrum scan found no points in its window."""
