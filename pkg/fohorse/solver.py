"""The restarted Halpern PDHG solve loop

The loop runs on the preconditioned saddle form, starting from all zeros.
Every inner iteration takes exactly one accepted PDHG step ``w = PDHG(z)``
and then forms the next iterate according to the configured mode. Progress
is measured by the fixed point residual ``||z - w||_P``, which comes for free
with the step. Termination and infeasibility are only ever decided on the
original, unscaled problem.
"""
from dataclasses import dataclass, field, fields as dataclass_fields
from enum import Enum
import logging
import math

import numpy as np

from fohorse import fsettings
from fohorse.diagnostics import (
    check_relative_termination, extract_candidates, kkt_error, orient_primal_ray, reduced_costs,
    validate_dual_infeasibility)
from fohorse.kernels import (
    Iterate, StepParams, halpern_combine, interaction, p_norm_movement, pdhg_step,
    reflected_halpern_combine, step_size_bound)
from fohorse.linalg import estimate_spectral_norm
from fohorse.problem import to_saddle
from fohorse.scaling import ScalingInfo, precondition, unscale_iterate
from fohorse.util.exceptions import (
    EmptyAverage, InvalidParameter, NonFiniteIterate, StepSizeCollapse)
from fohorse.util.timer import ContextTimer

logger = logging.getLogger(__name__)


MAX_STEP_RETRIES = 60
MIN_STEP_SIZE = 1e-300
# Norm ratio below which the primal weight is left alone
PRIMAL_WEIGHT_FLOOR = 1e-10
SPECTRAL_NORM_ITERATIONS = 200
# Adaptive steps stay below STEP_LIMIT_FACTOR / ||K||_2, where the P-norm is a norm
STEP_LIMIT_FACTOR = 0.99


class SolveMode(Enum):
    VANILLA_PDHG = "vanilla_pdhg"
    HALPERN = "halpern"
    REFLECTED_HALPERN = "reflected_halpern"
    AVERAGE = "average"


class RestartScheme(Enum):
    FIXED_POINT_RESIDUAL = "fixed_point_residual"
    KKT_ERROR = "kkt_error"
    NONE = "none"


class StepSizeMode(Enum):
    CONSTANT = "constant"
    ADAPTIVE = "adaptive"


class SolveStatus(Enum):
    OPTIMAL = "Optimal"
    PRIMAL_INFEASIBLE = "PrimalInfeasible"
    DUAL_INFEASIBLE = "DualInfeasible"
    ITERATION_LIMIT = "IterationLimit"
    TIME_LIMIT = "TimeLimit"
    NUMERICAL_ERROR = "NumericalError"

    @property
    def infeasible(self):
        return self in (SolveStatus.PRIMAL_INFEASIBLE, SolveStatus.DUAL_INFEASIBLE)

    @property
    def limit(self):
        return self in (SolveStatus.ITERATION_LIMIT, SolveStatus.TIME_LIMIT)


def _as_enum(enum_type, value, name):
    if isinstance(value, enum_type):
        return value
    try:
        return enum_type(value)
    except ValueError as e:
        choices = ", ".join(member.value for member in enum_type)
        raise InvalidParameter("{} must be one of {}, got '{}'".format(name, choices, value)) from e


@dataclass(frozen=True)
class SolverConfig:
    """All knobs of a solve

    String values are accepted for the enumerated fields, so a config can come
    straight out of a yaml file:

    >>> SolverConfig(mode="halpern").mode
    <SolveMode.HALPERN: 'halpern'>
    """

    tolerance_eps: float = 1e-4
    mode: SolveMode = SolveMode.REFLECTED_HALPERN
    restart_scheme: RestartScheme = RestartScheme.FIXED_POINT_RESIDUAL
    restart_beta: float = math.exp(-1.0)
    tau0: int = 32
    theta: float = 0.5
    step_size_mode: StepSizeMode = StepSizeMode.ADAPTIVE
    iteration_limit: int = 1000000
    time_limit: float = 3600.0
    check_frequency: int = 64
    preconditioning: bool = True
    ruiz_iterations: int = 10
    pc_alpha: float = 1.0
    kkt_norm: str = "l2"
    infeasibility_tolerance: float = 1e-8

    def __post_init__(self):
        object.__setattr__(self, "mode", _as_enum(SolveMode, self.mode, "mode"))
        object.__setattr__(self, "restart_scheme", _as_enum(RestartScheme, self.restart_scheme, "restart_scheme"))
        object.__setattr__(self, "step_size_mode", _as_enum(StepSizeMode, self.step_size_mode, "step_size_mode"))

        if not self.tolerance_eps > 0:
            raise InvalidParameter("tolerance_eps must be positive")
        if not 0 < self.restart_beta < 1:
            raise InvalidParameter("restart_beta must be in (0, 1)")
        if self.tau0 < 1:
            raise InvalidParameter("tau0 must be at least 1")
        if not 0 <= self.theta <= 1:
            raise InvalidParameter("theta must be in [0, 1]")
        if self.iteration_limit < 0:
            raise InvalidParameter("iteration_limit must be >= 0")
        if not self.time_limit >= 0:
            raise InvalidParameter("time_limit must be >= 0")
        if self.check_frequency < 1:
            raise InvalidParameter("check_frequency must be at least 1")
        if self.ruiz_iterations < 0:
            raise InvalidParameter("ruiz_iterations must be >= 0")
        if not 0 <= self.pc_alpha <= 2:
            raise InvalidParameter("pc_alpha must be in [0, 2]")
        if self.kkt_norm not in ("l2", "linf"):
            raise InvalidParameter("kkt_norm must be 'l2' or 'linf'")
        if not self.infeasibility_tolerance > 0:
            raise InvalidParameter("infeasibility_tolerance must be positive")

    @classmethod
    def from_settings(cls, **overrides):
        """Defaults, then SOLVER_SETTINGS, then explicit overrides"""
        known = {f.name for f in dataclass_fields(cls)}

        values = dict(fsettings.SOLVER_SETTINGS)
        values.update(overrides)

        unknown = sorted(set(values) - known)
        if unknown:
            raise InvalidParameter("Unknown solver settings: {}".format(", ".join(unknown)))

        return cls(**values)

    def replace(self, **changes):
        values = {f.name: getattr(self, f.name) for f in dataclass_fields(self)}
        values.update(changes)
        return type(self)(**values)


@dataclass(frozen=True, eq=False)
class AverageAccumulator:
    """Running sum of eta_i z_i and of eta_i"""

    total: Iterate = None
    weight: float = 0.0

    @property
    def empty(self):
        return self.total is None

    def query(self):
        if self.empty or self.weight <= 0:
            raise EmptyAverage("No iterates have been averaged yet")
        return self.total / self.weight


def update_average(acc, z, eta):
    """Add z with weight eta, returning a new accumulator

    >>> acc = update_average(AverageAccumulator(), Iterate.from_lists([0.0], []), 1.0)
    >>> update_average(acc, Iterate.from_lists([4.0], []), 3.0).query().as_lists()
    ([3.0], [])
    """
    if not eta > 0:
        raise InvalidParameter("Average weight must be positive, got {}".format(eta))

    weighted = eta * z
    total = weighted if acc.empty else acc.total + weighted
    return AverageAccumulator(total, acc.weight + eta)


@dataclass
class SolverState:
    """Everything that changes during a solve. Iterates are in scaled space."""

    z: Iterate = None
    anchor: Iterate = None
    epoch: int = 0
    inner_k: int = 0
    epoch_initial_residual: float = 0.0
    epoch_initial_kkt: float = None
    eta: float = 1.0
    omega: float = 1.0
    # proposed by the step size rule, takes effect at the next restart
    next_eta: float = None
    average: AverageAccumulator = field(default_factory=AverageAccumulator)
    last_epoch_delta: tuple = (0.0, 0.0)
    history_z0: Iterate = None
    iteration_total: int = 0
    timer: ContextTimer = None
    previous_w: Iterate = None
    candidate: Iterate = None

    @classmethod
    def initial(cls, n, m, eta, omega):
        z0 = Iterate.zeros(n, m)
        return cls(z=z0, anchor=z0, eta=eta, omega=omega, history_z0=z0, candidate=z0)


@dataclass(frozen=True)
class RestartRecord:
    epoch: int
    length: int
    initial_residual: float
    restart_residual: float
    reason: str
    # where the next epoch starts (the current anchor for the final record),
    # in the original space
    anchor_x: np.ndarray = field(default=None, compare=False, repr=False)
    anchor_y: np.ndarray = field(default=None, compare=False, repr=False)

    def as_dict(self):
        return {
            "epoch": self.epoch,
            "length": self.length,
            "initial_residual": self.initial_residual,
            "restart_residual": self.restart_residual,
            "reason": self.reason,
        }


@dataclass(frozen=True, eq=False)
class Certificate:
    """An infeasibility ray in the original space

    kind is "primal" (a dual ray proving the primal infeasible) or "dual" (a
    primal recession direction proving the dual infeasible).
    """

    kind: str
    source: str
    ray: np.ndarray


@dataclass(frozen=True, eq=False)
class SolveResult:
    status: SolveStatus
    x: np.ndarray
    y: np.ndarray
    reduced_costs: np.ndarray
    primal_objective: float
    dual_objective: float
    kkt: object
    iterations: int
    restarts: int
    solve_time: float
    certificate: Certificate = None
    warnings: tuple = ()
    restart_log: tuple = ()
    objective_sense_flipped: bool = False


def should_restart(state, current_residual, config):
    """The adaptive restart test

    In epoch 0 a restart happens once more than tau0 inner iterations have
    run. In later epochs it happens as soon as the progress metric has fallen
    to restart_beta times its value at the start of the epoch. The metric is
    the fixed point residual, or the relative KKT total for the kkt_error
    scheme.
    """
    if config.restart_scheme is RestartScheme.NONE:
        return False

    if state.epoch == 0:
        return state.inner_k > config.tau0

    if state.inner_k < 1:
        return False

    if config.restart_scheme is RestartScheme.FIXED_POINT_RESIDUAL:
        reference = state.epoch_initial_residual
    else:
        reference = state.epoch_initial_kkt

    if reference is None:
        return False

    return current_residual <= config.restart_beta * reference


def adaptive_step_update(eta, k_total, bound):
    """Accept or reject a trial step size and propose the next one

    >>> adaptive_step_update(1.0, 0, float("inf"))
    (True, 2.0)

    Args:
        eta (float): the step size that was tried
        k_total (int): iteration count, steers how aggressive the update is
        bound (float): largest acceptable step for the trial movement

    Returns:
        tuple: (accepted, next step size)

    Raises:
        StepSizeCollapse: the proposal underflowed
    """
    if not eta > 0:
        raise InvalidParameter("Step size must be positive, got {}".format(eta))

    growth = (1.0 + (k_total + 1) ** -0.3) * eta
    if np.isinf(bound):
        next_eta = growth
    else:
        next_eta = min((1.0 - (k_total + 1) ** -0.6) * bound, growth)

    if next_eta < MIN_STEP_SIZE:
        raise StepSizeCollapse("Step size fell to {:g}".format(next_eta))
    if not np.isfinite(next_eta):
        next_eta = eta

    return bool(eta <= bound), float(next_eta)


def primal_weight_update(omega, delta_x_norm, delta_y_norm, theta):
    """Smoothed log-space move of omega towards ||dy|| / ||dx||

    >>> round(primal_weight_update(1.0, 1.0, 4.0, 0.5), 12)
    2.0
    """
    if theta == 0 or delta_x_norm == 0 or delta_y_norm == 0:
        return omega
    if delta_x_norm < PRIMAL_WEIGHT_FLOOR * delta_y_norm or delta_y_norm < PRIMAL_WEIGHT_FLOOR * delta_x_norm:
        return omega

    return float(np.exp(theta * np.log(delta_y_norm / delta_x_norm) + (1.0 - theta) * np.log(omega)))


def initial_step_size(saddle, step_size_mode):
    """1/max|K| for adaptive steps, 0.9/||K||_2 for constant ones"""
    if saddle.k_matrix.nnz == 0:
        return 1.0
    if step_size_mode is StepSizeMode.ADAPTIVE:
        return 1.0 / saddle.k_abs_max

    spectral = estimate_spectral_norm(saddle.k_matrix, SPECTRAL_NORM_ITERATIONS)
    return 0.9 / spectral if spectral > 0 else 1.0


def initial_primal_weight(saddle):
    c_norm = saddle.objective_norm
    q_norm = saddle.rhs_norm
    if c_norm > PRIMAL_WEIGHT_FLOOR and q_norm > PRIMAL_WEIGHT_FLOOR:
        return c_norm / q_norm
    return 1.0


def _unit_ray(ray):
    """ray / ||ray||_inf, or None for an empty, zero or non-finite ray"""
    scale = float(np.max(np.abs(ray), initial=0.0))
    if scale > 0 and np.isfinite(scale):
        return ray / scale
    return None


class _Termination(Exception):
    """Internal signal carrying the finished result out of the loop"""

    def __init__(self, result):
        super().__init__(result.status.value)
        self.result = result


class _SolveRun:
    """One solve. Owns the state and is thrown away afterwards."""

    def __init__(self, problem, config, callback):
        self.problem = problem
        self.config = config
        self.callback = callback

        self.original = to_saddle(problem)
        if config.preconditioning:
            self.scaled, self.info = precondition(self.original, config.ruiz_iterations, config.pc_alpha)
        else:
            self.scaled = self.original
            self.info = ScalingInfo.identity(self.original.m, self.original.n)

        self.norms = (self.original.rhs_norm, self.original.objective_norm)
        self.restart_log = []

        eta = initial_step_size(self.scaled, config.step_size_mode)
        self.step_limit = np.inf
        if config.step_size_mode is StepSizeMode.ADAPTIVE and self.scaled.k_matrix.nnz:
            spectral = estimate_spectral_norm(self.scaled.k_matrix, SPECTRAL_NORM_ITERATIONS)
            self.step_limit = STEP_LIMIT_FACTOR / spectral
            eta = min(eta, self.step_limit)

        self.state = SolverState.initial(self.original.n, self.original.m, eta, initial_primal_weight(self.scaled))

        logger.debug(
            "Starting %s solve of '%s' (%d columns, %d rows): eta=%g (limit %g) omega=%g",
            config.mode.value, problem.name, self.original.n, self.original.m,
            self.state.eta, self.step_limit, self.state.omega,
        )

    def run(self):
        state = self.state

        with ContextTimer() as timer:
            state.timer = timer
            try:
                self._loop()
            except _Termination as term:
                result = term.result
            except (NonFiniteIterate, StepSizeCollapse) as e:
                logger.warning("Numerical breakdown after %d iterations: %s", state.iteration_total, e)
                result = self._result(SolveStatus.NUMERICAL_ERROR, state.z)

        logger.info(
            "Solve of '%s' finished: %s after %d iterations (%d restarts) in %.3fs",
            self.problem.name, result.status.value, result.iterations, result.restarts, result.solve_time,
        )
        return result

    def _loop(self):
        state = self.state
        config = self.config

        while True:
            if state.iteration_total >= config.iteration_limit:
                raise _Termination(self._result(SolveStatus.ITERATION_LIMIT, state.candidate))
            if state.timer.elapsed >= config.time_limit:
                raise _Termination(self._result(SolveStatus.TIME_LIMIT, state.candidate))

            w, params, cross, rejected = self._take_step()
            residual = p_norm_movement(state.z - w, self.scaled, params, cross=cross)
            if state.inner_k == 0 or rejected:
                # a rejection changed eta, so the decay reference is measured again
                state.epoch_initial_residual = residual

            if config.mode is SolveMode.AVERAGE:
                state.average = update_average(state.average, w, params.eta)
                state.candidate = state.average.query()
            else:
                state.candidate = w

            state.iteration_total += 1

            kkt_total = None
            record_kkt = None
            if state.iteration_total % config.check_frequency == 0:
                kkt = self._check(w)
                record_kkt = kkt.as_dict()
                kkt_total = kkt.relative_total(*self.norms)

            restart = self._restart_due(residual, kkt_total)

            if self.callback is not None:
                self.callback({
                    "k": state.iteration_total,
                    "inner_k": state.inner_k,
                    "epoch": state.epoch,
                    "eta": params.eta,
                    "omega": params.omega,
                    "residual": residual,
                    "restart": restart,
                    "kkt": record_kkt,
                })

            if restart:
                self._restart(w, residual, kkt_total)
            else:
                state.z = self._combine(w)
                state.inner_k += 1

            state.previous_w = w

    def _take_step(self):
        """One accepted PDHG step from state.z

        eta and omega stay fixed for the whole epoch. An accepted step only
        records the proposed eta in state.next_eta; a rejected one lowers eta
        straight away and the step is retried.

        Returns:
            tuple: (PDHG(z), the StepParams used, dy^T K dx of the movement,
                whether any trial was rejected)
        """
        state = self.state

        if self.config.step_size_mode is StepSizeMode.CONSTANT:
            params = StepParams(state.eta, state.omega)
            w = pdhg_step(state.z, self.scaled, params)
            return w, params, interaction(w - state.z, self.scaled), False

        rejected = False
        for _ in range(MAX_STEP_RETRIES):
            params = StepParams(state.eta, state.omega)
            w = pdhg_step(state.z, self.scaled, params)
            movement = w - state.z
            cross = interaction(movement, self.scaled)
            bound = step_size_bound(movement, self.scaled, state.omega, cross=cross)
            accepted, proposal = adaptive_step_update(params.eta, state.iteration_total + 1, bound)
            proposal = min(proposal, self.step_limit)
            if accepted:
                state.next_eta = proposal
                return w, params, cross, rejected

            logger.debug("Step size %.3e rejected (bound %.3e), retrying with %.3e", params.eta, bound, proposal)
            rejected = True
            state.eta = proposal

        raise StepSizeCollapse("No acceptable step size after {} retries".format(MAX_STEP_RETRIES))

    def _combine(self, w):
        state = self.state
        mode = self.config.mode

        if mode is SolveMode.HALPERN:
            return halpern_combine(w, state.anchor, state.inner_k)
        if mode is SolveMode.REFLECTED_HALPERN:
            return reflected_halpern_combine(w, state.z, state.anchor, state.inner_k)
        return w

    def _restart_due(self, residual, kkt_total):
        state = self.state
        scheme = self.config.restart_scheme

        if scheme is RestartScheme.FIXED_POINT_RESIDUAL or state.epoch == 0:
            return should_restart(state, residual, self.config)
        if scheme is RestartScheme.KKT_ERROR and kkt_total is not None:
            return should_restart(state, kkt_total, self.config)
        return False

    def _restart(self, w, residual, kkt_total):
        state = self.state

        if self.config.mode is SolveMode.AVERAGE:
            new_anchor = state.average.query()
        else:
            new_anchor = w

        delta_x = float(np.linalg.norm(new_anchor.x - state.anchor.x))
        delta_y = float(np.linalg.norm(new_anchor.y - state.anchor.y))
        state.last_epoch_delta = (delta_x, delta_y)

        anchor_x, anchor_y = unscale_iterate(new_anchor.x, new_anchor.y, self.info)
        reason = "epoch_length" if state.epoch == 0 else "residual_decay"
        if self.config.restart_scheme is RestartScheme.KKT_ERROR and state.epoch > 0:
            reason = "kkt_decay"
        self.restart_log.append(RestartRecord(
            epoch=state.epoch,
            length=state.inner_k + 1,
            initial_residual=state.epoch_initial_residual,
            restart_residual=residual if reason != "kkt_decay" else kkt_total,
            reason=reason,
            anchor_x=anchor_x,
            anchor_y=anchor_y,
        ))

        old_omega = state.omega
        state.omega = primal_weight_update(state.omega, delta_x, delta_y, self.config.theta)
        if state.next_eta is not None:
            state.eta = state.next_eta
            state.next_eta = None

        logger.info(
            "Restart %d after %d inner iterations (%s): residual %.3e, eta %.4g, omega %.4g -> %.4g",
            state.epoch + 1, state.inner_k + 1, reason, residual, state.eta, old_omega, state.omega,
        )

        state.z = new_anchor
        state.anchor = new_anchor
        state.inner_k = 0
        state.epoch += 1
        state.average = AverageAccumulator()

        if self.config.restart_scheme is RestartScheme.KKT_ERROR:
            state.epoch_initial_kkt = self._evaluate(new_anchor).relative_total(*self.norms)

    def _evaluate(self, candidate):
        x, y = unscale_iterate(candidate.x, candidate.y, self.info)
        return kkt_error(self.problem, x, y, norm=self.config.kkt_norm, saddle=self.original)

    def _check(self, w):
        """Termination and infeasibility tests, run every check_frequency
        iterations. Raises _Termination when the solve is over."""
        state = self.state
        kkt = self._evaluate(state.candidate)

        logger.debug(
            "Iteration %d: primal %.3e, dual %.3e, gap %.3e, eta %.3e, omega %.3e",
            state.iteration_total, kkt.primal_residual, kkt.dual_residual, kkt.gap_abs, state.eta, state.omega,
        )

        if check_relative_termination(kkt, self.norms, self.config.tolerance_eps):
            raise _Termination(self._result(SolveStatus.OPTIMAL, state.candidate, kkt=kkt))

        if state.previous_w is None:
            return kkt

        certificate = self._find_certificate(w)
        if certificate is not None:
            status = SolveStatus.PRIMAL_INFEASIBLE if certificate.kind == "primal" else SolveStatus.DUAL_INFEASIBLE
            raise _Termination(self._result(status, state.candidate, kkt=kkt, certificate=certificate))

        return kkt

    def _find_certificate(self, w):
        state = self.state
        tol = self.config.infeasibility_tolerance

        candidates = extract_candidates(w, state.previous_w, state.history_z0, state.iteration_total, self.info)

        for candidate in candidates:
            ray_y = _unit_ray(candidate.ray.y)
            oriented = None if ray_y is None else orient_primal_ray(self.problem, ray_y, tol)
            if oriented is not None:
                return Certificate("primal", candidate.kind.value, oriented)

        for candidate in candidates:
            ray_x = _unit_ray(candidate.ray.x)
            if ray_x is not None and validate_dual_infeasibility(self.problem, ray_x, tol):
                return Certificate("dual", candidate.kind.value, ray_x)

        return None

    def _result(self, status, candidate, kkt=None, certificate=None):
        state = self.state
        x, y = unscale_iterate(candidate.x, candidate.y, self.info)
        if kkt is None:
            kkt = kkt_error(self.problem, x, y, norm=self.config.kkt_norm, saddle=self.original)

        anchor_x, anchor_y = unscale_iterate(state.anchor.x, state.anchor.y, self.info)
        restart_log = list(self.restart_log)
        restart_log.append(RestartRecord(
            epoch=state.epoch,
            length=state.inner_k,
            initial_residual=state.epoch_initial_residual,
            restart_residual=float("nan"),
            reason="final",
            anchor_x=anchor_x,
            anchor_y=anchor_y,
        ))

        return SolveResult(
            status=status,
            x=x,
            y=y,
            reduced_costs=reduced_costs(self.original, y),
            primal_objective=self.problem.reported_objective(kkt.primal_objective),
            dual_objective=self.problem.reported_objective(kkt.dual_objective),
            kkt=kkt,
            iterations=state.iteration_total,
            restarts=state.epoch,
            solve_time=state.timer.elapsed,
            certificate=certificate,
            warnings=tuple(self.problem.warnings),
            restart_log=tuple(restart_log),
            objective_sense_flipped=self.problem.maximize,
        )


def solve(problem, config=None, callback=None):
    """Solve an LP with restarted (reflected) Halpern PDHG

    Args:
        problem (LpProblem): the problem, validated here
        config (SolverConfig, optional): defaults to ``SolverConfig.from_settings()``
        callback (callable, optional): called with one trace record (a dict
            with k, inner_k, epoch, eta, omega, residual, restart and kkt) per
            iteration

    Returns:
        SolveResult: iteration and time limits and numerical breakdown are
            reported through ``status``
    """
    if config is None:
        config = SolverConfig.from_settings()

    problem.validate()
    return _SolveRun(problem, config, callback).run()
