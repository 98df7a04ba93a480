import math

import pytest

from fohorse.kernels import Iterate
from fohorse.solver import (
    AverageAccumulator, RestartScheme, SolveMode, SolverConfig, SolverState, SolveStatus, StepSizeMode,
    adaptive_step_update, primal_weight_update, should_restart, update_average)
from fohorse.util.exceptions import EmptyAverage, InvalidParameter, StepSizeCollapse


def state_at(epoch, inner_k, initial_residual=1.0, initial_kkt=None):
    state = SolverState.initial(1, 1, 1.0, 1.0)
    state.epoch = epoch
    state.inner_k = inner_k
    state.epoch_initial_residual = initial_residual
    state.epoch_initial_kkt = initial_kkt
    return state


class TestShouldRestart:

    @pytest.mark.parametrize("inner_k, expected", [
        (0, False),
        (32, False),
        (33, True),
    ])
    def test_first_epoch_by_length(self, inner_k, expected):
        assert should_restart(state_at(0, inner_k), 1e9, SolverConfig()) is expected

    @pytest.mark.parametrize("residual, expected", [
        (0.3, True),
        (math.exp(-1.0), True),
        (0.4, False),
    ])
    def test_residual_decay(self, residual, expected):
        assert should_restart(state_at(1, 5), residual, SolverConfig()) is expected

    def test_never_on_first_inner_iteration(self):
        assert not should_restart(state_at(2, 0), 0.0, SolverConfig())

    def test_kkt_scheme(self):
        config = SolverConfig(restart_scheme="kkt_error")
        assert should_restart(state_at(1, 5, initial_kkt=1.0), 0.3, config)
        assert not should_restart(state_at(1, 5, initial_kkt=1.0), 0.5, config)
        assert not should_restart(state_at(1, 5, initial_kkt=None), 0.0, config)

    def test_disabled(self):
        config = SolverConfig(restart_scheme=RestartScheme.NONE)
        assert not should_restart(state_at(0, 1000), 0.0, config)
        assert not should_restart(state_at(3, 10), 0.0, config)

    def test_custom_tau0_and_beta(self):
        config = SolverConfig(tau0=4, restart_beta=0.5)
        assert should_restart(state_at(0, 5), 1.0, config)
        assert should_restart(state_at(1, 1), 0.5, config)
        assert not should_restart(state_at(1, 1), 0.51, config)


class TestAdaptiveStepUpdate:

    def test_unbounded_grows(self):
        assert adaptive_step_update(1.0, 0, float("inf")) == (True, 2.0)

    def test_rejected(self):
        accepted, proposed = adaptive_step_update(1.0, 3, 0.5)
        assert not accepted
        assert proposed == pytest.approx((1.0 - 4 ** -0.6) * 0.5)

    def test_accepted_at_bound(self):
        accepted, proposed = adaptive_step_update(1.0, 3, 1.0)
        assert accepted
        assert proposed == pytest.approx(1.0 - 4 ** -0.6)

    def test_growth_is_capped(self):
        _, proposed = adaptive_step_update(1.0, 3, 100.0)
        assert proposed == pytest.approx(1.0 + 4 ** -0.3)

    def test_collapse(self):
        with pytest.raises(StepSizeCollapse):
            adaptive_step_update(1e-300, 3, 1e-300)

    def test_overflow_keeps_step(self):
        assert adaptive_step_update(1e308, 0, float("inf")) == (True, 1e308)

    @pytest.mark.parametrize("eta", [0.0, -1.0])
    def test_invalid(self, eta):
        with pytest.raises(InvalidParameter):
            adaptive_step_update(eta, 1, 1.0)


class TestPrimalWeightUpdate:

    def test_geometric_mean(self):
        assert primal_weight_update(1.0, 1.0, 4.0, 0.5) == pytest.approx(2.0)

    def test_full_step(self):
        assert primal_weight_update(7.0, 2.0, 1.0, 1.0) == pytest.approx(0.5)

    @pytest.mark.parametrize("delta_x, delta_y, theta", [
        (1.0, 4.0, 0.0),
        (0.0, 4.0, 0.5),
        (1.0, 0.0, 0.5),
        (1.0, 1e-12, 0.5),
        (1e-12, 1.0, 0.5),
    ])
    def test_unchanged(self, delta_x, delta_y, theta):
        assert primal_weight_update(3.0, delta_x, delta_y, theta) == 3.0


class TestAverage:

    def test_empty(self):
        with pytest.raises(EmptyAverage):
            AverageAccumulator().query()

    def test_weighted(self):
        acc = AverageAccumulator()
        acc = update_average(acc, Iterate.from_lists([1.0], [2.0]), 1.0)
        acc = update_average(acc, Iterate.from_lists([3.0], [6.0]), 1.0)
        assert acc.query().as_lists() == ([2.0], [4.0])
        assert acc.weight == 2.0

    def test_immutable(self):
        acc = update_average(AverageAccumulator(), Iterate.from_lists([1.0], []), 1.0)
        update_average(acc, Iterate.from_lists([5.0], []), 1.0)
        assert acc.query().as_lists() == ([1.0], [])

    def test_bad_weight(self):
        with pytest.raises(InvalidParameter):
            update_average(AverageAccumulator(), Iterate.zeros(1, 0), 0.0)


class TestSolverConfig:

    def test_defaults(self):
        config = SolverConfig()
        assert config.mode is SolveMode.REFLECTED_HALPERN
        assert config.restart_scheme is RestartScheme.FIXED_POINT_RESIDUAL
        assert config.step_size_mode is StepSizeMode.ADAPTIVE
        assert config.restart_beta == pytest.approx(math.exp(-1.0))
        assert (config.tau0, config.theta, config.check_frequency) == (32, 0.5, 64)

    def test_strings_converted(self):
        config = SolverConfig(mode="average", restart_scheme="none", step_size_mode="constant")
        assert config.mode is SolveMode.AVERAGE
        assert config.restart_scheme is RestartScheme.NONE
        assert config.step_size_mode is StepSizeMode.CONSTANT

    @pytest.mark.parametrize("overrides", [
        {"mode": "simplex"},
        {"tolerance_eps": 0.0},
        {"restart_beta": 1.0},
        {"restart_beta": 0.0},
        {"tau0": 0},
        {"theta": 1.5},
        {"iteration_limit": -1},
        {"time_limit": -1.0},
        {"check_frequency": 0},
        {"pc_alpha": 3.0},
        {"kkt_norm": "l1"},
        {"infeasibility_tolerance": 0.0},
    ])
    def test_invalid(self, overrides):
        with pytest.raises(InvalidParameter):
            SolverConfig(**overrides)

    def test_replace(self):
        config = SolverConfig().replace(tolerance_eps=1e-8, mode="halpern")
        assert config.tolerance_eps == 1e-8
        assert config.mode is SolveMode.HALPERN

    def test_from_settings(self, settings_file):
        settings_file("SOLVER_SETTINGS:\n  mode: average\n  tau0: 8\n")
        config = SolverConfig.from_settings(tau0=16)
        assert config.mode is SolveMode.AVERAGE
        assert config.tau0 == 16

    def test_from_settings_without_file(self, monkeypatch):
        monkeypatch.delenv("FOHORSE_SETTINGS", raising=False)
        assert SolverConfig.from_settings() == SolverConfig()

    def test_unknown_setting(self, settings_file):
        settings_file("SOLVER_SETTINGS:\n  restart_sheme: none\n")
        with pytest.raises(InvalidParameter) as excinfo:
            SolverConfig.from_settings()
        assert "restart_sheme" in str(excinfo.value)


class TestSolveStatus:

    @pytest.mark.parametrize("status, infeasible, limit", [
        (SolveStatus.OPTIMAL, False, False),
        (SolveStatus.PRIMAL_INFEASIBLE, True, False),
        (SolveStatus.DUAL_INFEASIBLE, True, False),
        (SolveStatus.ITERATION_LIMIT, False, True),
        (SolveStatus.TIME_LIMIT, False, True),
        (SolveStatus.NUMERICAL_ERROR, False, False),
    ])
    def test_properties(self, status, infeasible, limit):
        assert status.infeasible is infeasible
        assert status.limit is limit
