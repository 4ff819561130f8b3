"""Exception types shared across the package.

Everything derives from IcdError so callers can catch the whole family,
and from ValueError so generic numeric code keeps working unchanged.
"""


class IcdError(Exception):
    """Base class for all errors raised by this package."""


class EmptyInputError(IcdError, ValueError):
    """An image or map with a zero-sized dimension was supplied."""


class InvalidInputError(IcdError, ValueError):
    """Input data violates a value-level precondition (NaN, inf, bad range)."""


class ShapeMismatchError(IcdError, ValueError):
    """Paired arrays do not have compatible dimensions."""


class ConfigurationError(IcdError, ValueError):
    """A required parameter is missing or a configuration value is unusable."""


class ParamDomainError(IcdError, ValueError):
    """A numeric parameter is outside its admissible domain."""


class PfmFormatError(IcdError, ValueError):
    """A PFM stream could not be parsed.

    The ``offset`` attribute holds the byte position at which parsing failed.
    """

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset
