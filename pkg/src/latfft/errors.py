"""Exception types shared across the library."""


class LatfftError(Exception):
    """Base class for all library errors."""


class ParameterError(LatfftError, ValueError):
    """A numeric parameter violates an operation's precondition."""


class CapacityError(LatfftError):
    """An enumeration or product would exceed the configured size cap."""


class DetectionFailure(LatfftError):
    """A detection stage produced an empty candidate or support set."""
