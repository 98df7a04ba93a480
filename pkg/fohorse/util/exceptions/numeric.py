from .base import FohorseError

__all__ = [
    "NumericError",
    "NonFiniteIterate",
    "StepSizeCollapse",
    "NonPositiveScale",
    "EmptyAverage",
    "TooLarge",
    "EmptyInput",
    "InvalidParameter",
]


class NumericError(FohorseError):
    """Base class for failures during numerical work"""


class NonFiniteIterate(NumericError):
    """An iterate picked up a NaN or infinity

    Attributes:
        location (str): which block ("x" or "y") and the first bad index
    """

    def __init__(self, location):
        super().__init__("Non-finite iterate at {}".format(location))
        self.location = location


class StepSizeCollapse(NumericError):
    """The adaptive step size underflowed"""


class NonPositiveScale(NumericError):
    """A diagonal scaling had a zero, negative or non-finite entry"""


class EmptyAverage(NumericError):
    """Queried a weighted average before anything was added to it"""


class TooLarge(NumericError):
    """The oracle was asked to enumerate an instance above its size guard"""


class EmptyInput(NumericError):
    """An aggregate was asked for over no values"""


class InvalidParameter(NumericError, ValueError):
    """A configuration value was outside its allowed range"""
