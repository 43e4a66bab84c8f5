"""Exception hierarchy shared by all vortexbell modules."""


class VortexBellError(Exception):
    """Base class for every computational failure raised by the package."""


class OrderTooLargeError(VortexBellError, ValueError):
    pass


class IndexOutOfRangeError(VortexBellError, ValueError):
    pass


class QuadratureNotConvergedError(VortexBellError):
    pass


class DisplacementTooLargeError(VortexBellError):
    """The displaced beam no longer fits on the sampling grid."""


class GridMismatchError(VortexBellError, ValueError):
    pass


class NormalizationFailureError(VortexBellError):
    """Input power reading was non-positive, so no parity can be formed."""
