"""Exception hierarchy shared by the planner, packing routines and kernels."""


class QadicError(ValueError):
    """Base class for every error raised by qadicmm."""


class InvalidModulus(QadicError):
    pass


class NoCompression(QadicError):
    """The bounds leave room for fewer than two residues per word."""


class SlotOverflow(QadicError):
    pass


class DigitOverflow(QadicError):
    pass


class DimensionMismatch(QadicError):
    pass


class PlanMismatch(QadicError):
    """A plan (or word backend) cannot carry the requested product exactly."""


class UnsupportedAlgorithm(QadicError):
    pass
