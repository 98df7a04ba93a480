"""Benchmark runs over a directory of MPS files

Instances that do not finish inside the time limit, or that could not be
read, count as unsolved and enter the shifted geometric mean at the time
limit.
"""
from concurrent.futures import ThreadPoolExecutor
import csv
from dataclasses import dataclass
import logging
import os
from pathlib import Path

import numpy as np

from fohorse import fsettings
from fohorse.mps import MpsDialect, read_mps
from fohorse.solver import SolveStatus, solve
from fohorse.util.exceptions import EmptyInput, FohorseError, InvalidParameter

logger = logging.getLogger(__name__)


DEFAULT_DELTA = 10.0
SOLVED_STATUSES = (SolveStatus.OPTIMAL, SolveStatus.PRIMAL_INFEASIBLE, SolveStatus.DUAL_INFEASIBLE)
CSV_FIELDS = ("name", "status", "iterations", "solve_time", "objective")

# Status for files that never made it to the solver
INPUT_ERROR = "InputError"


def sgm10(times, delta=DEFAULT_DELTA):
    """Shifted geometric mean (prod(t_i + delta))^(1/n) - delta

    >>> round(sgm10([10.0, 100.0], 10.0), 4)
    36.9042

    Raises:
        EmptyInput: no times given
    """
    times = np.asarray(times, dtype=np.float64)
    if times.size == 0:
        raise EmptyInput("Shifted geometric mean of no times")
    if np.any(times < 0) or not np.all(np.isfinite(times)):
        raise InvalidParameter("Times must be finite and nonnegative")
    if not delta >= 0:
        raise InvalidParameter("Shift must be nonnegative")

    with np.errstate(divide="ignore"):
        log_mean = np.mean(np.log(times + delta))
    return float(np.exp(log_mean) - delta)


def bench_delta():
    return float(fsettings.BENCH_SETTINGS.get("delta", DEFAULT_DELTA))


def bench_threads():
    """Worker count from FOHORSE_THREADS, 1 when unset"""
    raw = os.getenv("FOHORSE_THREADS", "1")
    try:
        threads = int(raw)
    except ValueError as e:
        raise InvalidParameter("FOHORSE_THREADS must be an integer, got '{}'".format(raw)) from e

    if threads < 1:
        raise InvalidParameter("FOHORSE_THREADS must be at least 1")
    return threads


@dataclass(frozen=True)
class BenchRow:
    name: str
    status: str
    iterations: int
    solve_time: float
    objective: float

    @property
    def solved(self):
        return self.status in {s.value for s in SOLVED_STATUSES}

    def shifted_time(self, time_limit):
        """The time entering the mean: the time limit when unsolved"""
        if self.solved:
            return self.solve_time
        return time_limit


@dataclass(frozen=True)
class BenchReport:
    rows: tuple
    sgm10: float
    solved_count: int
    time_limit_used: float

    @classmethod
    def from_rows(cls, rows, time_limit, delta=DEFAULT_DELTA):
        rows = tuple(rows)
        times = [row.shifted_time(time_limit) for row in rows]
        return cls(
            rows=rows,
            sgm10=sgm10(times, delta),
            solved_count=sum(1 for row in rows if row.solved),
            time_limit_used=time_limit,
        )

    def to_csv(self, stream):
        writer = csv.DictWriter(stream, fieldnames=CSV_FIELDS)
        writer.writeheader()
        for row in self.rows:
            writer.writerow({
                "name": row.name,
                "status": row.status,
                "iterations": row.iterations,
                "solve_time": "{:.6f}".format(row.solve_time),
                "objective": repr(row.objective),
            })


def solve_instance(path, config, dialect=MpsDialect.FREE):
    """Read and solve one file, never raising for bad input"""
    name = Path(path).name

    try:
        problem = read_mps(path, dialect=dialect)
    except (FohorseError, OSError) as e:
        logger.warning("Could not read %s: %s", path, e)
        return BenchRow(name, INPUT_ERROR, 0, config.time_limit, float("nan"))

    result = solve(problem, config)
    return BenchRow(name, result.status.value, result.iterations, result.solve_time, result.primal_objective)


def find_instances(directory):
    files = sorted(p for p in Path(directory).iterdir() if p.is_file() and p.suffix.lower() == ".mps")
    if not files:
        raise EmptyInput("No .mps files in {}".format(directory))
    return files


def run_bench(directory, config, delta=None, threads=None, dialect=MpsDialect.FREE):
    """Solve every .mps file in directory

    Files are solved on up to ``threads`` worker threads (FOHORSE_THREADS by
    default). Rows come back in file name order whatever the thread count.

    Raises:
        EmptyInput: the directory has no .mps files
    """
    if delta is None:
        delta = bench_delta()
    if threads is None:
        threads = bench_threads()

    files = find_instances(directory)
    logger.info("Benchmarking %d instances from %s on %d thread(s)", len(files), directory, threads)

    if threads == 1:
        rows = [solve_instance(path, config, dialect) for path in files]
    else:
        with ThreadPoolExecutor(max_workers=threads) as executor:
            rows = list(executor.map(lambda path: solve_instance(path, config, dialect), files))

    report = BenchReport.from_rows(rows, config.time_limit, delta)
    logger.info("Solved %d/%d, SGM%g = %.4f", report.solved_count, len(rows), delta, report.sgm10)
    return report
