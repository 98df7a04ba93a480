from .problem import ProblemError

__all__ = [
    "MpsError",
    "MpsSyntaxError",
    "DuplicateRow",
    "DuplicateColumn",
    "UnknownRowReference",
    "MultipleObjectiveRows",
]


class MpsError(ProblemError):
    """Base class for anything wrong with an MPS file

    Attributes:
        line (int): 1-based line number the error was found on, if known
    """

    def __init__(self, message, line=None):
        if line is not None:
            message = "line {}: {}".format(line, message)
        super().__init__(message)
        self.line = line


class MpsSyntaxError(MpsError):
    """A line could not be tokenised or is in the wrong place"""

    def __init__(self, message, line=None, token=None):
        super().__init__(message, line)
        self.token = token


class DuplicateRow(MpsError):
    """A row name was declared twice in ROWS"""


class DuplicateColumn(MpsError):
    """A column appeared again after a different column had started"""


class UnknownRowReference(MpsError):
    """COLUMNS/RHS/RANGES referred to a row that ROWS never declared"""


class MultipleObjectiveRows(MpsError):
    """More than one N row"""
