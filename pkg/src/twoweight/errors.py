"""Exception types shared across the package."""


class TwoWeightError(Exception):
    """Base class for all errors raised by this package."""


class InstanceTooLargeError(TwoWeightError):
    """The requested tree or oracle exceeds a configured size cap."""


class ParameterError(TwoWeightError, ValueError):
    """An exponent or scalar parameter is outside its admissible range."""


class ValidationError(TwoWeightError, ValueError):
    """Structured input failed validation.

    ``path`` names the offending field (e.g. ``"sigma.leaf_mass[3]"``) so
    that callers reading instance files can point at the exact location.
    """

    def __init__(self, message, path=None):
        self.path = path
        if path:
            message = f"{path}: {message}"
        super().__init__(message)
