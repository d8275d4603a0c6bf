class L2PError(ValueError):
    """Base class for all errors raised by l2p."""


class DataError(L2PError):
    pass


class UndefinedKurtosisError(L2PError):
    pass


class NoPairsError(L2PError):
    pass


class DimensionMismatchError(L2PError):
    pass


class UndefinedRateError(L2PError):
    """TPR or FPR requested at a threshold with an empty positive/negative set."""
