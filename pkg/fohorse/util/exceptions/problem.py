from .base import FohorseError

__all__ = [
    "ProblemError",
    "DimensionMismatch",
    "CrossedBounds",
    "NonFiniteEntry",
    "EmptyProblem",
]


class ProblemError(FohorseError):
    """The problem data handed to fohorse is malformed. No solve was
    attempted."""


class DimensionMismatch(ProblemError):
    """Two pieces of data which should agree in size don't

    Attributes:
        fields (tuple): names of the two things that disagree
    """

    def __init__(self, message, fields=None):
        super().__init__(message)
        self.fields = fields


class CrossedBounds(ProblemError):
    """lower[i] > upper[i] for some variable"""

    def __init__(self, index, lower=None, upper=None):
        super().__init__("Variable {} has lower bound {} above upper bound {}".format(index, lower, upper))
        self.index = index


class NonFiniteEntry(ProblemError):
    """NaN or an infinity where only finite values are allowed"""

    def __init__(self, location):
        super().__init__("Non-finite value in {}".format(location))
        self.location = location


class EmptyProblem(ProblemError):
    """Parsed input describes no variables at all"""
