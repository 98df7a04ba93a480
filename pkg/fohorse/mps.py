"""Reading and writing MPS files

Sections NAME, OBJSENSE, ROWS, COLUMNS, RHS, RANGES, BOUNDS and ENDATA are
understood. Rows are mapped onto the general form used by
:class:`~fohorse.problem.LpProblem`:

- E rows become equality rows
- G rows become inequality rows as-is
- L rows ``a^T x <= r`` are negated into ``-a^T x >= -r``
- a row with a RANGES entry becomes two inequality rows

Integer markers and BV/LI/UI bounds are relaxed to continuous bounds. Every
relaxation is reported as a warning rather than an error.
"""
from enum import Enum
import io
import logging
import re

import numpy as np
from pyparsing import (
    Group, Literal, Optional, ParseException, Regex, StringEnd, Word, oneOf, printables)

from fohorse.linalg import SparseMatrix
from fohorse.problem import LpProblem
from fohorse.util.exceptions import (
    DuplicateColumn, DuplicateRow, EmptyProblem, MpsError, MpsSyntaxError, MultipleObjectiveRows, ProblemError,
    UnknownRowReference)

logger = logging.getLogger(__name__)

# Values at or beyond this are treated as infinite in BOUNDS
MPS_INFINITY = 1e30

SECTIONS = ("NAME", "OBJSENSE", "ROWS", "COLUMNS", "RHS", "RANGES", "BOUNDS", "ENDATA")


class MpsDialect(Enum):
    FREE = "free"
    FIXED = "fixed"


class RowType(Enum):
    N = "N"
    E = "E"
    L = "L"
    G = "G"


def _to_float(tokens):
    text = tokens[0].replace("d", "e").replace("D", "e")
    return float(text)


def _to_inf(tokens):
    return -np.inf if tokens[0].startswith("-") else np.inf


NUMBER = (
    Regex(r"[+-]?inf(inity)?", flags=re.IGNORECASE).setParseAction(_to_inf)
    | Regex(r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eEdD][+-]?\d+)?").setParseAction(_to_float)
)
NAME = Word(printables)

_pair = Group(NAME("row") + NUMBER("value"))
_entries = Group(_pair + Optional(_pair))("entries")

ROW_RECORD = oneOf("N E L G", caseless=True)("kind") + NAME("name") + StringEnd()
MARKER_RECORD = NAME("name") + Literal("'MARKER'") + oneOf("'INTORG' 'INTEND'")("marker") + StringEnd()
COLUMN_RECORD = NAME("column") + _entries + StringEnd()
# The set name is optional in free format
VALUE_RECORD = (NAME("set") + _entries + StringEnd()) | (_entries + StringEnd())

_bound_kind = oneOf("LO UP FX FR MI PL BV LI UI", caseless=True)("kind")
BOUND_RECORD = (
    (_bound_kind + NAME("set") + NAME("column") + NUMBER("value") + StringEnd())
    | (_bound_kind + NAME("column") + NUMBER("value") + StringEnd())
    | (_bound_kind + NAME("set") + NAME("column") + StringEnd())
    | (_bound_kind + NAME("column") + StringEnd())
)


def _parse_record(grammar, text, lineno, what):
    try:
        return grammar.parseString(text, parseAll=True)
    except ParseException as e:
        token = text.split()[0] if text.split() else text
        remaining = text[e.loc:].split()
        if remaining:
            token = remaining[0]
        raise MpsSyntaxError("Could not read {} record '{}'".format(what, text.strip()), line=lineno, token=token) from e


def _parse_number(text, lineno):
    try:
        return NUMBER.parseString(text, parseAll=True)[0]
    except ParseException as e:
        raise MpsSyntaxError("Expected a number, got '{}'".format(text), line=lineno, token=text) from e


class _FreeRecords:
    """Turns free format data lines into plain tuples"""

    def row(self, text, lineno):
        parsed = _parse_record(ROW_RECORD, text, lineno, "ROWS")
        return parsed["kind"].upper(), parsed["name"]

    def column(self, text, lineno):
        try:
            parsed = MARKER_RECORD.parseString(text, parseAll=True)
        except ParseException:
            pass
        else:
            return None, parsed["marker"].strip("'").upper()

        parsed = _parse_record(COLUMN_RECORD, text, lineno, "COLUMNS")
        return parsed["column"], [(e["row"], e["value"]) for e in parsed["entries"]]

    def values(self, text, lineno, section):
        parsed = _parse_record(VALUE_RECORD, text, lineno, section)
        return [(e["row"], e["value"]) for e in parsed["entries"]]

    def bound(self, text, lineno):
        parsed = _parse_record(BOUND_RECORD, text, lineno, "BOUNDS")
        value = parsed["value"] if "value" in parsed else None
        return parsed["kind"].upper(), parsed["column"], value


class _FixedRecords:
    """Turns fixed format data lines into plain tuples

    Fields are at (1-based) columns 2-3, 5-12, 15-22, 25-36, 40-47 and 50-61.
    Names may contain spaces.
    """

    SLICES = [(1, 3), (4, 12), (14, 22), (24, 36), (39, 47), (49, 61)]

    def _fields(self, text):
        return [text[start:end].strip() for start, end in self.SLICES]

    def _pairs(self, fields, lineno):
        pairs = []
        for name, value in ((fields[2], fields[3]), (fields[4], fields[5])):
            if name:
                pairs.append((name, _parse_number(value, lineno)))
        if not pairs:
            raise MpsSyntaxError("No row/value pair", line=lineno, token=fields[1])
        return pairs

    def row(self, text, lineno):
        fields = self._fields(text)
        kind = fields[0].upper()
        if kind not in RowType.__members__ or not fields[1]:
            raise MpsSyntaxError("Bad ROWS record", line=lineno, token=fields[0])
        return kind, fields[1]

    def column(self, text, lineno):
        fields = self._fields(text)
        if fields[2] == "'MARKER'":
            marker = fields[4].strip("'").upper()
            if marker not in ("INTORG", "INTEND"):
                raise MpsSyntaxError("Unknown marker", line=lineno, token=fields[4])
            return None, marker
        return fields[1], self._pairs(fields, lineno)

    def values(self, text, lineno, section):
        return self._pairs(self._fields(text), lineno)

    def bound(self, text, lineno):
        fields = self._fields(text)
        kind = fields[0].upper()
        if kind not in ("LO", "UP", "FX", "FR", "MI", "PL", "BV", "LI", "UI"):
            raise MpsSyntaxError("Unknown bound type", line=lineno, token=fields[0])
        value = _parse_number(fields[3], lineno) if fields[3] else None
        return kind, fields[2], value


class _MpsBuilder:
    """Accumulates parsed records and produces the LpProblem"""

    def __init__(self, warnings):
        self.warnings = warnings
        self.name = ""
        self.maximize = False
        self.rows = {}
        self.row_order = []
        self.objective_row = None
        self.columns = {}
        self.column_order = []
        self.current_column = None
        self.in_integer_block = False
        self.integer_columns = set()
        self.entries = []
        self.rhs = {}
        self.ranges = {}
        self.lower = {}
        self.upper = {}
        self.explicit_lower = set()
        # column -> line of the last BOUNDS record touching it
        self.bound_lines = {}
        self.integrality_relaxed = False

    def warn(self, message, *args):
        text = message % args
        logger.warning(text)
        self.warnings.append(text)

    def add_row(self, kind, name, lineno):
        if kind == "N":
            if self.objective_row is not None:
                raise MultipleObjectiveRows(
                    "Objective row '{}' already declared, got '{}'".format(self.objective_row, name), line=lineno)
            self.objective_row = name
        if name in self.rows:
            raise DuplicateRow("Row '{}' declared twice".format(name), line=lineno)
        self.rows[name] = RowType(kind)
        if kind != "N":
            self.row_order.append(name)

    def _check_row(self, row, lineno):
        if row not in self.rows:
            raise UnknownRowReference("Reference to undeclared row '{}'".format(row), line=lineno)

    @staticmethod
    def _check_finite(row, value, lineno):
        if not np.isfinite(value):
            raise MpsSyntaxError("Non-finite value for row '{}'".format(row), line=lineno, token=row)

    def add_column_entries(self, column, pairs, lineno):
        if column != self.current_column:
            if column in self.columns:
                raise DuplicateColumn("Column '{}' appears in two separate blocks".format(column), line=lineno)
            self.columns[column] = len(self.column_order)
            self.column_order.append(column)
            self.current_column = column
            if self.in_integer_block:
                self.integer_columns.add(column)

        j = self.columns[column]
        for row, value in pairs:
            self._check_row(row, lineno)
            self._check_finite(row, value, lineno)
            self.entries.append((row, j, value))

    def set_marker(self, marker):
        self.in_integer_block = marker == "INTORG"

    def add_rhs(self, pairs, lineno):
        for row, value in pairs:
            self._check_row(row, lineno)
            self._check_finite(row, value, lineno)
            self.rhs[row] = value

    def add_ranges(self, pairs, lineno):
        for row, value in pairs:
            self._check_row(row, lineno)
            self._check_finite(row, value, lineno)
            if self.rows[row] is RowType.N:
                self.warn("line %d: RANGES entry on objective row '%s' ignored", lineno, row)
                continue
            self.ranges[row] = value

    def add_bound(self, kind, column, value, lineno):
        if column not in self.columns:
            raise MpsSyntaxError("Bound on undeclared column '{}'".format(column), line=lineno, token=column)

        if kind in ("LO", "UP", "FX", "LI", "UI") and value is None:
            raise MpsSyntaxError("Bound type {} needs a value".format(kind), line=lineno, token=kind)

        if value is not None:
            if value >= MPS_INFINITY:
                value = np.inf
            elif value <= -MPS_INFINITY:
                value = -np.inf

        if value == np.inf and kind in ("LO", "LI", "FX"):
            raise MpsSyntaxError("Lower bound of +infinity on '{}'".format(column), line=lineno, token=kind)
        if value == -np.inf and kind in ("UP", "UI", "FX"):
            raise MpsSyntaxError("Upper bound of -infinity on '{}'".format(column), line=lineno, token=kind)

        self.bound_lines[column] = lineno

        if kind in ("BV", "LI", "UI"):
            self.integrality_relaxed = True
            self.warn("line %d: integer bound %s on column '%s' relaxed to continuous", lineno, kind, column)

        if kind in ("LO", "LI"):
            self.lower[column] = value
            self.explicit_lower.add(column)
        elif kind in ("UP", "UI"):
            self.upper[column] = value
            if value < 0 and column not in self.explicit_lower and self.lower.get(column, 0.0) == 0.0:
                self.warn("line %d: negative upper bound on '%s' with default lower bound, lower set to -inf",
                          lineno, column)
                self.lower[column] = -np.inf
        elif kind == "FX":
            self.lower[column] = self.upper[column] = value
            self.explicit_lower.add(column)
        elif kind == "FR":
            self.lower[column] = -np.inf
            self.upper[column] = np.inf
            self.explicit_lower.add(column)
        elif kind == "MI":
            self.lower[column] = -np.inf
            self.explicit_lower.add(column)
        elif kind == "PL":
            self.upper[column] = np.inf
        elif kind == "BV":
            self.lower[column] = 0.0
            self.upper[column] = 1.0
            self.explicit_lower.add(column)

    def _range_interval(self, row, rhs):
        """(low, high) for a ranged row"""
        spread = self.ranges[row]
        kind = self.rows[row]
        if kind is RowType.G:
            return rhs, rhs + abs(spread)
        if kind is RowType.L:
            return rhs - abs(spread), rhs
        if spread >= 0:
            return rhs, rhs + spread
        return rhs + spread, rhs

    def build(self):
        n = len(self.column_order)
        if n == 0:
            raise EmptyProblem("MPS input declares no columns")

        if self.objective_row is None:
            self.warn("No objective row declared, using a zero objective")

        if self.integer_columns:
            self.integrality_relaxed = True
            self.warn("%d integer columns relaxed to continuous", len(self.integer_columns))

        by_row = {}
        objective = np.zeros(n)
        for row, j, value in self.entries:
            if row == self.objective_row:
                objective[j] += value
            else:
                by_row.setdefault(row, []).append((j, value))

        ineq_rows, ineq_cols, ineq_vals, ineq_rhs = [], [], [], []
        eq_rows, eq_cols, eq_vals, eq_rhs = [], [], [], []

        def add(target_rows, target_cols, target_vals, target_rhs, row, sign, rhs):
            i = len(target_rhs)
            for j, value in by_row.get(row, []):
                target_rows.append(i)
                target_cols.append(j)
                target_vals.append(sign * value)
            target_rhs.append(sign * rhs)

        for row in self.row_order:
            kind = self.rows[row]
            rhs = self.rhs.get(row, 0.0)
            ineq = (ineq_rows, ineq_cols, ineq_vals, ineq_rhs)

            if row in self.ranges and not (kind is RowType.E and self.ranges[row] == 0):
                low, high = self._range_interval(row, rhs)
                add(*ineq, row, 1.0, low)
                add(*ineq, row, -1.0, high)
            elif kind is RowType.E:
                add(eq_rows, eq_cols, eq_vals, eq_rhs, row, 1.0, rhs)
            elif kind is RowType.G:
                add(*ineq, row, 1.0, rhs)
            else:
                add(*ineq, row, -1.0, rhs)

        lower = np.zeros(n)
        upper = np.full(n, np.inf)
        for column, j in self.columns.items():
            lower[j] = self.lower.get(column, 0.0)
            upper[j] = self.upper.get(column, np.inf)
            if lower[j] > upper[j]:
                raise MpsSyntaxError(
                    "Bounds on '{}' cross: lower {} above upper {}".format(column, lower[j], upper[j]),
                    line=self.bound_lines.get(column),
                    token=column,
                )

        constant = -self.rhs.get(self.objective_row, 0.0) if self.objective_row else 0.0

        if self.maximize:
            objective = -objective
            constant = -constant

        return LpProblem(
            objective=objective,
            eq_matrix=SparseMatrix.from_triplets(eq_rows, eq_cols, eq_vals, (len(eq_rhs), n)),
            eq_rhs=np.array(eq_rhs, dtype=np.float64),
            ineq_matrix=SparseMatrix.from_triplets(ineq_rows, ineq_cols, ineq_vals, (len(ineq_rhs), n)),
            ineq_rhs=np.array(ineq_rhs, dtype=np.float64),
            lower=lower,
            upper=upper,
            objective_constant=constant,
            name=self.name or "mps",
            maximize=self.maximize,
            integrality_relaxed=self.integrality_relaxed,
            warnings=tuple(self.warnings),
        )


def _decode(text):
    if hasattr(text, "read"):
        text = text.read()
    if isinstance(text, bytes):
        try:
            return text.decode("utf-8")
        except UnicodeDecodeError as e:
            line = text[:e.start].count(b"\n") + 1
            raise MpsSyntaxError("Input is not valid UTF-8", line=line) from e
    return text


def _parse_sense(token, lineno):
    sense = token.upper()
    if sense in ("MAX", "MAXIMIZE"):
        return True
    if sense in ("MIN", "MINIMIZE"):
        return False
    raise MpsSyntaxError("Unknown objective sense", line=lineno, token=token)


def parse_mps(text, dialect=MpsDialect.FREE, warnings=None):
    """Parse an MPS file into an LpProblem

    Args:
        text (bytes, str or file-like): the MPS data
        dialect (MpsDialect): free (whitespace separated) or fixed columns
        warnings (list, optional): relaxation warnings are appended here as
            well as being logged and stored on the result

    Returns:
        LpProblem: the parsed problem, already validated

    Raises:
        MpsError: a subclass describing what was wrong and on which line
        EmptyProblem: no columns were declared
    """
    if warnings is None:
        warnings = []

    text = _decode(text)
    records = _FixedRecords() if MpsDialect(dialect) is MpsDialect.FIXED else _FreeRecords()
    builder = _MpsBuilder(warnings)

    section = None
    seen_end = False
    lineno = 0

    for lineno, raw in enumerate(io.StringIO(text), start=1):
        line = raw.rstrip("\r\n")
        if not line.strip() or line.startswith("*"):
            continue

        if seen_end:
            raise MpsSyntaxError("Data after ENDATA", line=lineno, token=line.split()[0])

        if not line[0].isspace():
            tokens = line.split()
            header = tokens[0].upper()
            if header not in SECTIONS:
                raise MpsSyntaxError("Unknown section", line=lineno, token=tokens[0])

            section = header
            if header == "NAME":
                builder.name = line[4:].strip()
            elif header == "OBJSENSE" and len(tokens) > 1:
                builder.maximize = _parse_sense(tokens[1], lineno)
            elif header == "ENDATA":
                seen_end = True
            elif len(tokens) > 1 and header in ("ROWS", "COLUMNS", "RHS", "RANGES", "BOUNDS"):
                raise MpsSyntaxError("Unexpected text after section name", line=lineno, token=tokens[1])
            continue

        if section is None or section == "NAME":
            raise MpsSyntaxError("Data line outside of a section", line=lineno, token=line.split()[0])

        if section == "OBJSENSE":
            builder.maximize = _parse_sense(line.strip(), lineno)
        elif section == "ROWS":
            builder.add_row(*records.row(line, lineno), lineno)
        elif section == "COLUMNS":
            column, payload = records.column(line, lineno)
            if column is None:
                builder.set_marker(payload)
            else:
                builder.add_column_entries(column, payload, lineno)
        elif section == "RHS":
            builder.add_rhs(records.values(line, lineno, "RHS"), lineno)
        elif section == "RANGES":
            builder.add_ranges(records.values(line, lineno, "RANGES"), lineno)
        elif section == "BOUNDS":
            builder.add_bound(*records.bound(line, lineno), lineno)
        else:
            raise MpsSyntaxError("Data line in {} section".format(section), line=lineno, token=line.split()[0])

    if not seen_end:
        raise MpsSyntaxError("Missing ENDATA", line=lineno)

    try:
        problem = builder.build()
        problem.validate()
    except (MpsError, EmptyProblem):
        raise
    except ProblemError as e:
        # Overflow while summing repeated entries and the like
        raise MpsSyntaxError(str(e), line=lineno) from e
    return problem


def read_mps(path, dialect=MpsDialect.FREE, warnings=None):
    with open(path, "rb") as mfile:
        return parse_mps(mfile.read(), dialect=dialect, warnings=warnings)


def _fmt(value):
    return repr(float(value))


def write_mps(problem):
    """Write a problem as free format MPS

    Inequality rows are written as G rows named ``g<i>``, equality rows as E
    rows named ``e<i>`` and variables as ``x<j>``. Maximisation problems are
    written with OBJSENSE MAX and their original objective.

    Returns:
        bytes: the file contents
    """
    lines = ["NAME          {}".format(problem.name or "lp")]

    sign = 1.0
    if problem.maximize:
        lines += ["OBJSENSE", "    MAX"]
        sign = -1.0

    lines.append("ROWS")
    lines.append(" N  obj")
    ineq_names = ["g{}".format(i) for i in range(problem.m1)]
    eq_names = ["e{}".format(i) for i in range(problem.m2)]
    lines += [" G  {}".format(name) for name in ineq_names]
    lines += [" E  {}".format(name) for name in eq_names]

    lines.append("COLUMNS")
    ineq_t = problem.ineq_matrix.transpose()
    eq_t = problem.eq_matrix.transpose()
    for j in range(problem.n):
        column = "x{}".format(j)
        entries = []
        if problem.objective[j] != 0.0:
            entries.append(("obj", sign * problem.objective[j]))
        for block, names in ((ineq_t, ineq_names), (eq_t, eq_names)):
            start, end = block.indptr[j], block.indptr[j + 1]
            for i, value in zip(block.indices[start:end], block.data[start:end]):
                entries.append((names[i], value))
        if not entries:
            # the column still has to be declared
            entries.append(("obj", 0.0))
        for row, value in entries:
            lines.append("    {}  {}  {}".format(column, row, _fmt(value)))

    lines.append("RHS")
    if problem.objective_constant != 0.0:
        lines.append("    RHS  obj  {}".format(_fmt(-sign * problem.objective_constant)))
    for names, values in ((ineq_names, problem.ineq_rhs), (eq_names, problem.eq_rhs)):
        for name, value in zip(names, values):
            if value != 0.0:
                lines.append("    RHS  {}  {}".format(name, _fmt(value)))

    lines.append("BOUNDS")
    for j in range(problem.n):
        column = "x{}".format(j)
        low, high = problem.lower[j], problem.upper[j]
        if low == high:
            lines.append(" FX BND  {}  {}".format(column, _fmt(low)))
            continue
        if low == -np.inf and high == np.inf:
            lines.append(" FR BND  {}".format(column))
            continue
        if low == -np.inf:
            lines.append(" MI BND  {}".format(column))
        elif low != 0.0:
            lines.append(" LO BND  {}  {}".format(column, _fmt(low)))
        if high != np.inf:
            lines.append(" UP BND  {}  {}".format(column, _fmt(high)))

    lines.append("ENDATA")
    return ("\n".join(lines) + "\n").encode("utf-8")


def write_mps_file(path, problem):
    with open(path, "wb") as mfile:
        mfile.write(write_mps(problem))
