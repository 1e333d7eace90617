"""Exception types raised across the package."""


class BoundsError(ValueError):
    """Base class for every input or construction error raised here."""


class OutOfRange(BoundsError):
    pass


class EmptyInput(BoundsError):
    pass


class IndexOutOfRange(BoundsError):
    pass


class MomentInconsistency(BoundsError):
    pass


class RegionUnsupported(BoundsError):
    """No closed form exists for the requested parameter region."""


class CaseUnsupported(BoundsError):
    """The parameters fall outside every case a construction covers."""


class CaseViolation(BoundsError):
    """A construction produced a negative mass beyond tolerance."""


class ScaleOutOfRange(BoundsError):
    pass


class DimensionMismatch(BoundsError):
    pass


class DimensionCap(BoundsError):
    pass


class DegenerateDenominator(BoundsError):
    pass


class EmptySet(BoundsError):
    pass


class SolverFailure(RuntimeError):
    pass
