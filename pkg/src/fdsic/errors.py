"""Exception hierarchy shared by every stage of the workbench."""


class SICError(Exception):
    """Base class for all errors raised by :mod:`fdsic`."""


class ConfigurationError(SICError, ValueError):
    """An argument or configuration value is outside its valid domain."""


class FramingError(SICError, ValueError):
    """A sample or symbol count does not fit the requested block structure."""


class DegenerateInputError(SICError, ValueError):
    """The input carries no usable energy (e.g. an all-zero sequence)."""


class InsufficientDataError(SICError, ValueError):
    """Too few samples were supplied for a statistically meaningful estimate."""


class DegenerateDistributionError(SICError, ValueError):
    """The moment matrix of an input distribution is (numerically) singular.

    Attributes
    ----------
    branch : int
        One-based index of the first branch found to be linearly dependent
        on the preceding ones.
    """

    def __init__(self, branch, message=None):
        self.branch = branch
        super().__init__(message or f"branch {branch} is linearly dependent on lower branches")


class NumericFault(SICError, ArithmeticError):
    """A canceller saw non-finite data or its weights diverged; it is frozen."""
