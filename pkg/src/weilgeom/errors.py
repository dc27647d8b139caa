"""Exception hierarchy shared by every module of the package."""


class WeilGeomError(Exception):
    """Base class for all errors raised by weilgeom."""


class ParseError(WeilGeomError, ValueError):
    """Malformed expression text.

    ``offset`` is the byte offset (UTF-8) of the offending token.
    """

    def __init__(self, message, offset):
        super().__init__(f"{message} at byte offset {offset}")
        self.offset = offset


class ArityError(WeilGeomError, ValueError):
    """Generator counts, index ranges or tensor shapes do not agree."""


class DomainError(WeilGeomError, ArithmeticError):
    """A primitive was applied outside its domain."""

    def __init__(self, primitive, value):
        super().__init__(f"{primitive} is undefined at argument {value!r}")
        self.primitive = primitive
        self.value = value


class OrderMismatch(WeilGeomError, ValueError):
    """Two Weil elements of different truncation order were combined."""


class NotNilpotent(WeilGeomError, ArithmeticError):
    """The element has a non-negligible real part."""


class NotInvertible(WeilGeomError, ZeroDivisionError):
    """The element's real part vanishes, so it is not a unit."""


class SingularMetric(WeilGeomError, ArithmeticError):
    """The real part of a metric matrix is not invertible."""


class ConfigError(WeilGeomError, ValueError):
    """Invalid run configuration."""
