from unittest.mock import patch

import numpy as np
import pytest
from testfixtures import LogCapture

from fohorse.diagnostics import validate_dual_infeasibility, validate_primal_infeasibility
from fohorse.oracle import OracleStatus, enumerate_vertices_solve
from fohorse.problem import to_saddle
from fohorse.solver import (
    RestartScheme, SolveMode, SolverConfig, SolveStatus, StepSizeMode, initial_primal_weight,
    initial_step_size, solve)
from fohorse.testutils.factories import LpProblemFactory, SolverConfigFactory
from fohorse.testutils.fixtures import random_suite_problems
from fohorse.testutils.helpers import passes_relative_kkt
from fohorse.util.exceptions import NonFiniteIterate, StepSizeCollapse


def assert_optimal(result, problem, objective, eps=1e-8):
    assert result.status is SolveStatus.OPTIMAL
    assert passes_relative_kkt(problem, result.x, result.y, eps * 1.01)
    assert result.primal_objective == pytest.approx(objective, abs=1e-5)


class TestSmallProblems:

    def test_standard_form(self, fig2a, tight_config):
        result = solve(fig2a, tight_config)
        assert_optimal(result, fig2a, 1.5)
        assert np.allclose(result.x, [0.0, 0.5], atol=1e-5)

    def test_general_bounds(self, fig2b, tight_config):
        result = solve(fig2b, tight_config)
        assert_optimal(result, fig2b, -3.5)
        assert np.allclose(result.x, [-10.0, 5.5], atol=1e-5)

    def test_inequalities(self, tight_config):
        # min x1 + x2 st. x1 + x2 >= 2, x1 - x2 >= -1
        problem = LpProblemFactory(c=(1.0, 1.0), A=None, b=None, G=((1.0, 1.0), (1.0, -1.0)), h=(2.0, -1.0))
        result = solve(problem, tight_config)
        assert_optimal(result, problem, 2.0)
        assert np.all(result.y[:2] >= 0)

    def test_reduced_costs_reported(self, fig2a, tight_config):
        result = solve(fig2a, tight_config)
        assert np.allclose(result.reduced_costs, [0.5, 0.0], atol=1e-5)

    def test_maximisation_reported_in_original_sense(self, fig2a, tight_config):
        result = solve(fig2a.replace(maximize=True), tight_config)
        assert result.status is SolveStatus.OPTIMAL
        assert result.objective_sense_flipped
        assert result.primal_objective == pytest.approx(-1.5, abs=1e-5)

    @pytest.mark.parametrize("mode", list(SolveMode))
    def test_every_mode(self, fig2a, mode):
        config = SolverConfigFactory(mode=mode, tolerance_eps=1e-6)
        assert_optimal(solve(fig2a, config), fig2a, 1.5, eps=1e-6)

    @pytest.mark.parametrize("scheme", [RestartScheme.FIXED_POINT_RESIDUAL, RestartScheme.KKT_ERROR])
    def test_every_restart_scheme(self, fig2a, scheme):
        config = SolverConfigFactory(restart_scheme=scheme, tolerance_eps=1e-6)
        assert_optimal(solve(fig2a, config), fig2a, 1.5, eps=1e-6)

    def test_constant_steps_without_scaling(self, fig2a):
        config = SolverConfigFactory(step_size_mode="constant", preconditioning=False, tolerance_eps=1e-6)
        assert_optimal(solve(fig2a, config), fig2a, 1.5, eps=1e-6)

    def test_linf_norm(self, fig2a):
        config = SolverConfigFactory(kkt_norm="linf", tolerance_eps=1e-6)
        assert solve(fig2a, config).status is SolveStatus.OPTIMAL

    def test_deterministic(self, fig2b, tight_config):
        first = solve(fig2b, tight_config)
        second = solve(fig2b, tight_config)
        assert first.iterations == second.iterations
        assert np.array_equal(first.x, second.x)
        assert np.array_equal(first.y, second.y)


class TestRandomSuite:

    @pytest.mark.slow
    def test_matches_oracle(self, tight_config):
        for problem in random_suite_problems(50):
            expected = enumerate_vertices_solve(problem)
            assert expected.status is OracleStatus.OPTIMAL

            result = solve(problem, tight_config)
            assert result.status is SolveStatus.OPTIMAL, problem.name
            assert passes_relative_kkt(problem, result.x, result.y, 1.01e-8), problem.name
            assert result.primal_objective == pytest.approx(expected.objective, rel=1e-5, abs=1e-5)

    def test_first_problems(self, random_suite):
        config = SolverConfigFactory(tolerance_eps=1e-6)
        for problem in random_suite[:3]:
            result = solve(problem, config)
            assert result.status is SolveStatus.OPTIMAL, problem.name
            assert passes_relative_kkt(problem, result.x, result.y, 1.01e-6)


class TestInfeasible:

    def test_primal(self, primal_infeasible, tight_config):
        result = solve(primal_infeasible, tight_config)
        assert result.status is SolveStatus.PRIMAL_INFEASIBLE
        assert result.certificate.kind == "primal"
        assert result.certificate.source in ("difference", "normalized")
        assert validate_primal_infeasibility(primal_infeasible, result.certificate.ray, 1e-8)
        assert np.max(np.abs(result.certificate.ray)) == pytest.approx(1.0)

    def test_dual(self, dual_infeasible, tight_config):
        result = solve(dual_infeasible, tight_config)
        assert result.status is SolveStatus.DUAL_INFEASIBLE
        assert result.certificate.kind == "dual"
        assert validate_dual_infeasibility(dual_infeasible, result.certificate.ray, 1e-8)

    def test_both(self, both_infeasible, tight_config):
        result = solve(both_infeasible, tight_config)
        assert result.status.infeasible
        assert result.iterations < tight_config.iteration_limit

    def test_feasible_problem_never_certified(self, fig2a):
        result = solve(fig2a, SolverConfigFactory(tolerance_eps=1e-12, iteration_limit=5000))
        assert not result.status.infeasible
        assert result.certificate is None


class TestRestarts:

    def test_first_epoch_length(self, fig2a):
        config = SolverConfigFactory(tolerance_eps=1e-12, iteration_limit=2000)
        result = solve(fig2a, config)
        first = result.restart_log[0]
        assert first.reason == "epoch_length"
        assert first.length > config.tau0

    def test_residual_decay(self, fig2b):
        config = SolverConfigFactory(tolerance_eps=1e-12, iteration_limit=5000)
        with patch("fohorse.solver.check_relative_termination", return_value=False):
            result = solve(fig2b, config)

        decays = [record for record in result.restart_log if record.reason == "residual_decay"]
        assert decays
        for record in decays:
            assert record.epoch >= 1
            assert record.restart_residual <= config.restart_beta * record.initial_residual

    def test_restart_count_matches_log(self, fig2b, tight_config):
        result = solve(fig2b, tight_config)
        assert result.restart_log[-1].reason == "final"
        assert len(result.restart_log) == result.restarts + 1

    def test_no_restarts(self, fig2a):
        config = SolverConfigFactory(restart_scheme="none", tolerance_eps=1e-12, iteration_limit=500)
        result = solve(fig2a, config)
        assert result.restarts == 0
        assert [record.reason for record in result.restart_log] == ["final"]

    def test_restarts_logged(self, fig2a):
        config = SolverConfigFactory(tolerance_eps=1e-12, iteration_limit=200)
        with LogCapture("fohorse.solver") as capture:
            solve(fig2a, config)

        messages = [record.getMessage() for record in capture.records]
        assert any(message.startswith("Restart 1 after") for message in messages)
        assert "finished" in messages[-1]


class TestLimits:

    def test_time_limit(self, fig2a):
        result = solve(fig2a, SolverConfigFactory(time_limit=0.0))
        assert result.status is SolveStatus.TIME_LIMIT
        assert result.status.limit
        assert result.iterations == 0
        assert result.x.tolist() == [0.0, 0.0]

    @pytest.mark.parametrize("limit", [0, 1, 10, 100])
    def test_iteration_limit(self, fig2a, limit):
        config = SolverConfigFactory(tolerance_eps=1e-12, iteration_limit=limit, check_frequency=1000)
        result = solve(fig2a, config)
        assert result.status is SolveStatus.ITERATION_LIMIT
        assert result.iterations == limit

    def test_limit_result_has_kkt(self, fig2a):
        result = solve(fig2a, SolverConfigFactory(tolerance_eps=1e-12, iteration_limit=10))
        assert np.isfinite(result.kkt.primal_residual)
        assert np.isfinite(result.primal_objective)


class TestNumericalFailure:

    def test_non_finite_iterate(self, fig2a):
        with patch("fohorse.solver.pdhg_step", side_effect=NonFiniteIterate("x[0]")):
            with LogCapture("fohorse.solver") as capture:
                result = solve(fig2a, SolverConfigFactory())

        assert result.status is SolveStatus.NUMERICAL_ERROR
        assert result.iterations == 0
        assert result.x.tolist() == [0.0, 0.0]
        assert any(record.levelname == "WARNING" and "x[0]" in record.getMessage() for record in capture.records)

    def test_step_size_collapse(self, fig2a):
        with patch("fohorse.solver.adaptive_step_update", side_effect=StepSizeCollapse("Step size fell to 0")):
            result = solve(fig2a, SolverConfigFactory())

        assert result.status is SolveStatus.NUMERICAL_ERROR

    def test_rejected_steps_give_up(self, fig2a):
        with patch("fohorse.solver.adaptive_step_update", return_value=(False, 1e-3)) as update:
            result = solve(fig2a, SolverConfigFactory())

        assert result.status is SolveStatus.NUMERICAL_ERROR
        assert update.call_count == 60


class TestCallback:

    def test_records(self, fig2a):
        records = []
        config = SolverConfigFactory(tolerance_eps=1e-12, iteration_limit=130, check_frequency=64)
        with patch("fohorse.solver.check_relative_termination", return_value=False):
            result = solve(fig2a, config, callback=records.append)

        assert [record["k"] for record in records] == list(range(1, 131))
        assert set(records[0]) == {"k", "inner_k", "epoch", "eta", "omega", "residual", "restart", "kkt"}
        assert [record["k"] for record in records if record["kkt"] is not None] == [64, 128]
        assert sum(record["restart"] for record in records) == result.restarts
        assert all(record["eta"] > 0 and record["omega"] > 0 for record in records)

    def test_epoch_counts(self, fig2a):
        records = []
        with patch("fohorse.solver.check_relative_termination", return_value=False):
            solve(fig2a, SolverConfigFactory(iteration_limit=300), callback=records.append)

        for before, after in zip(records, records[1:]):
            if before["restart"]:
                assert after["epoch"] == before["epoch"] + 1
                assert after["inner_k"] == 0
            else:
                assert after["epoch"] == before["epoch"]
                assert after["inner_k"] == before["inner_k"] + 1


class TestInitialParameters:

    def test_adaptive_step(self, fig2a):
        assert initial_step_size(to_saddle(fig2a), StepSizeMode.ADAPTIVE) == 0.5

    def test_constant_step(self, fig2a):
        eta = initial_step_size(to_saddle(fig2a), StepSizeMode.CONSTANT)
        assert eta == pytest.approx(0.9 / np.sqrt(5.0), rel=1e-6)

    def test_empty_matrix(self, dual_infeasible):
        assert initial_step_size(to_saddle(dual_infeasible), StepSizeMode.ADAPTIVE) == 1.0
        assert initial_step_size(to_saddle(dual_infeasible), StepSizeMode.CONSTANT) == 1.0

    def test_primal_weight(self, fig2a, dual_infeasible):
        assert initial_primal_weight(to_saddle(fig2a)) == pytest.approx(np.sqrt(13.0))
        assert initial_primal_weight(to_saddle(dual_infeasible)) == 1.0


class TestDefaultConfig:

    def test_settings_used(self, fig2a, settings_file):
        settings_file("SOLVER_SETTINGS:\n  iteration_limit: 7\n  tolerance_eps: 1.0e-12\n")
        result = solve(fig2a)
        assert result.status is SolveStatus.ITERATION_LIMIT
        assert result.iterations == 7
