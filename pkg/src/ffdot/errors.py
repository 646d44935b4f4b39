"""Exception hierarchy shared by every ffdot module."""


class FFDotError(Exception):
    """Base class for all ffdot errors."""


class NotPrime(FFDotError, ValueError):
    pass


class DegreeOutOfRange(FFDotError, ValueError):
    pass


class CapExceeded(FFDotError, ValueError):
    """A computation would exceed a documented size cap."""


class FieldMismatch(FFDotError, ValueError):
    pass


class DivisionByZero(FFDotError, ZeroDivisionError):
    pass


class DimensionMismatch(FFDotError, ValueError):
    pass


class NotIrreducible(FFDotError, ValueError):
    pass


class OrderMismatch(FFDotError, ValueError):
    """Two cyclotomic numbers live in different fields Q(zeta_p)."""


class NotRational(FFDotError, ValueError):
    """A cyclotomic value expected to be rational has an irrational part."""


class EmptyQuery(FFDotError, ValueError):
    pass


class Disconnected(FFDotError, ValueError):
    pass


class NotATree(FFDotError, ValueError):
    pass


class ArityError(FFDotError, ValueError):
    pass


class PrefixNotInProjection(FFDotError, KeyError):
    pass


class AlphaZero(FFDotError, ValueError):
    """A theorem-mode computation received a zero edge label."""


class EmptyComponent(FFDotError, ValueError):
    pass


class EmptyProjection(FFDotError, ValueError):
    pass


class FormatError(FFDotError, ValueError):
    """A text file does not follow the expected layout."""
