"""Exception hierarchy shared by every module in the package."""


class UpliftError(Exception):
    """Base class for all package errors."""


class DuplicateAbscissa(UpliftError, ValueError):
    pass


class DecodingFailure(UpliftError):
    pass


class InvalidThreshold(UpliftError, ValueError):
    pass


class InsufficientShares(UpliftError):
    pass


class ReconstructionFailure(UpliftError):
    pass


class SpecError(UpliftError, ValueError):
    """A protocol or functionality description is malformed."""


class ProtocolViolation(UpliftError):
    """An adversary attempted an action its model forbids."""


class CapExceeded(UpliftError):
    pass


class ScaleError(UpliftError):
    """A requested exhaustive computation is too large."""


class SearchExhausted(UpliftError):
    pass
