import csv
import io
import os
from unittest.mock import patch

import pytest
from testfixtures import LogCapture

from fohorse.bench import (
    INPUT_ERROR, BenchReport, BenchRow, bench_delta, bench_threads, find_instances, run_bench, sgm10)
from fohorse.testutils.factories import SolverConfigFactory
from fohorse.util.exceptions import EmptyInput, InvalidParameter


class TestSgm10:

    def test_two_times(self):
        assert sgm10([10.0, 100.0], 10.0) == pytest.approx(2200 ** 0.5 - 10.0)

    @pytest.mark.parametrize("delta", [0.0, 1.0, 10.0])
    def test_single_time(self, delta):
        assert sgm10([3.5], delta) == pytest.approx(3.5)

    def test_all_zero(self):
        assert sgm10([0.0, 0.0, 0.0], 10.0) == pytest.approx(0.0, abs=1e-12)

    def test_zero_without_shift(self):
        assert sgm10([0.0, 4.0], 0.0) == 0.0

    def test_empty(self):
        with pytest.raises(EmptyInput):
            sgm10([])

    @pytest.mark.parametrize("times, delta", [
        ([-1.0], 10.0),
        ([float("inf")], 10.0),
        ([1.0], -1.0),
    ])
    def test_invalid(self, times, delta):
        with pytest.raises(InvalidParameter):
            sgm10(times, delta)


class TestRows:

    @pytest.mark.parametrize("status, solved", [
        ("Optimal", True),
        ("PrimalInfeasible", True),
        ("DualInfeasible", True),
        ("TimeLimit", False),
        ("IterationLimit", False),
        ("NumericalError", False),
        (INPUT_ERROR, False),
    ])
    def test_solved(self, status, solved):
        row = BenchRow("a.mps", status, 10, 0.5, 1.0)
        assert row.solved is solved
        assert row.shifted_time(60.0) == (0.5 if solved else 60.0)

    def test_unsolved_at_time_limit(self):
        rows = [
            BenchRow("a.mps", "Optimal", 10, 10.0, 1.0),
            BenchRow("b.mps", "IterationLimit", 99, 3.0, 2.0),
        ]
        report = BenchReport.from_rows(rows, time_limit=100.0, delta=10.0)
        assert report.sgm10 == pytest.approx(2200 ** 0.5 - 10.0)
        assert report.solved_count == 1
        assert report.time_limit_used == 100.0

    def test_csv(self):
        rows = [
            BenchRow("a.mps", "Optimal", 10, 0.25, 1.5),
            BenchRow("b.mps", INPUT_ERROR, 0, 60.0, float("nan")),
        ]
        stream = io.StringIO()
        BenchReport.from_rows(rows, time_limit=60.0).to_csv(stream)

        parsed = list(csv.DictReader(io.StringIO(stream.getvalue())))
        assert [row["name"] for row in parsed] == ["a.mps", "b.mps"]
        assert parsed[0] == {
            "name": "a.mps",
            "status": "Optimal",
            "iterations": "10",
            "solve_time": "0.250000",
            "objective": "1.5",
        }
        assert parsed[1]["objective"] == "nan"


class TestRunBench:

    def test_directory(self, instance_dir):
        report = run_bench(instance_dir, SolverConfigFactory(tolerance_eps=1e-6), delta=10.0, threads=1)

        assert [row.name for row in report.rows] == ["fig2a.mps", "fig2b.mps", "primal-infeasible.mps"]
        assert [row.status for row in report.rows] == ["Optimal", "Optimal", "PrimalInfeasible"]
        assert report.solved_count == 3
        assert report.rows[0].objective == pytest.approx(1.5, abs=1e-4)
        assert report.sgm10 == pytest.approx(sgm10([row.solve_time for row in report.rows], 10.0))

    def test_threads_keep_order(self, instance_dir):
        config = SolverConfigFactory(tolerance_eps=1e-6)
        serial = run_bench(instance_dir, config, threads=1)
        parallel = run_bench(instance_dir, config, threads=3)

        assert [(r.name, r.status, r.iterations) for r in parallel.rows] == \
            [(r.name, r.status, r.iterations) for r in serial.rows]

    def test_time_limit(self, instance_dir):
        report = run_bench(instance_dir, SolverConfigFactory(time_limit=0.0), delta=10.0, threads=1)
        assert report.solved_count == 0
        assert {row.status for row in report.rows} == {"TimeLimit"}
        assert report.sgm10 == pytest.approx(0.0, abs=1e-12)

    def test_unreadable_file(self, instance_dir):
        (instance_dir / "broken.mps").write_text("NAME broken\nCOLUMNS\n x1 obj one\nENDATA\n")

        with LogCapture("fohorse.bench") as capture:
            report = run_bench(instance_dir, SolverConfigFactory(tolerance_eps=1e-6, time_limit=5.0), threads=1)

        broken = report.rows[0]
        assert broken.name == "broken.mps"
        assert broken.status == INPUT_ERROR
        assert not broken.solved
        assert broken.shifted_time(5.0) == 5.0
        assert any("broken.mps" in record.getMessage() for record in capture.records)

    def test_empty_directory(self, tmp_path):
        (tmp_path / "notes.txt").write_text("nothing here")
        with pytest.raises(EmptyInput):
            find_instances(tmp_path)
        with pytest.raises(EmptyInput):
            run_bench(tmp_path, SolverConfigFactory(), threads=1)


class TestBenchSettings:

    def test_delta_default(self, monkeypatch):
        monkeypatch.delenv("FOHORSE_SETTINGS", raising=False)
        assert bench_delta() == 10.0

    def test_delta_from_settings(self, settings_file):
        settings_file("BENCH_SETTINGS:\n  delta: 1.0\n")
        assert bench_delta() == 1.0

    def test_threads_default(self):
        with patch.dict(os.environ, clear=False):
            os.environ.pop("FOHORSE_THREADS", None)
            assert bench_threads() == 1

    def test_threads_from_environment(self):
        with patch.dict(os.environ, {"FOHORSE_THREADS": "4"}):
            assert bench_threads() == 4

    @pytest.mark.parametrize("value", ["0", "-2", "many"])
    def test_threads_invalid(self, value):
        with patch.dict(os.environ, {"FOHORSE_THREADS": value}):
            with pytest.raises(InvalidParameter):
                bench_threads()
