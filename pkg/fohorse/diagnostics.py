"""KKT error, termination tests and infeasibility certificates

Everything in here is evaluated on the original, unscaled problem.
"""
from dataclasses import dataclass
from enum import Enum
import logging

import numpy as np

from fohorse.kernels import Iterate, p_norm_movement, pdhg_step
from fohorse.problem import to_saddle
from fohorse.scaling import unscale_iterate
from fohorse.util.exceptions import DimensionMismatch, InvalidParameter

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class KktComponents:
    primal_residual: float
    dual_residual: float
    gap_abs: float
    primal_objective: float
    dual_objective: float
    objective_constant: float = 0.0

    def relative_total(self, q_norm, c_norm):
        """Single number combining the three relative errors, used by the
        KKT restart scheme"""
        primal_obj = self.primal_objective - self.objective_constant
        dual_obj = self.dual_objective - self.objective_constant
        return float(np.sqrt(
            (self.primal_residual / (1.0 + q_norm)) ** 2
            + (self.dual_residual / (1.0 + c_norm)) ** 2
            + (self.gap_abs / (1.0 + abs(primal_obj) + abs(dual_obj))) ** 2
        ))

    def as_dict(self):
        return {
            "primal_residual": self.primal_residual,
            "dual_residual": self.dual_residual,
            "gap_abs": self.gap_abs,
        }


class CandidateKind(Enum):
    DIFFERENCE = "difference"
    NORMALIZED = "normalized"


@dataclass(frozen=True, eq=False)
class InfeasibilityCandidate:
    kind: CandidateKind
    ray: Iterate


def _norm(values, norm):
    if values.size == 0:
        return 0.0
    if norm == "l2":
        return float(np.linalg.norm(values))
    if norm == "linf":
        return float(np.max(np.abs(values)))
    raise InvalidParameter("Unknown norm '{}'".format(norm))


def _split_reduced_costs(lam):
    return np.maximum(lam, 0.0), np.maximum(-lam, 0.0)


def _bound_terms(lower, upper, lam_plus, lam_minus):
    """l^T lam+ - u^T lam-, where infinite bounds only ever meet a zero"""
    low = np.where(lam_plus > 0, lower, 0.0)
    high = np.where(lam_minus > 0, upper, 0.0)
    return float(low @ lam_plus - high @ lam_minus)


def reduced_costs(saddle, y, objective=None):
    """lambda from r = c - K^T y

    The positive part of r is kept where the lower bound is finite and the
    negative part where the upper bound is finite, so a free variable always
    gets 0.

    Args:
        saddle (SaddleForm): problem in saddle form
        y (np.ndarray): dual vector
        objective (np.ndarray, optional): use this instead of c, eg. zeros
            for the homogeneous problem
    """
    y = np.asarray(y, dtype=np.float64)
    if y.shape != (saddle.m,):
        raise DimensionMismatch("Dual of length {} for {} rows".format(y.size, saddle.m), fields=("y", "q"))

    c = saddle.objective if objective is None else objective
    r = c - saddle.k_matrix.spmv_t(y)
    lam = np.where(np.isfinite(saddle.lower), np.maximum(r, 0.0), 0.0)
    lam += np.where(np.isfinite(saddle.upper), np.minimum(r, 0.0), 0.0)
    return lam


def kkt_error(problem, x, y, norm="l2", saddle=None):
    """Primal residual, dual residual and objective gap at (x, y)

    Args:
        problem (LpProblem): the original problem
        x (np.ndarray): primal point
        y (np.ndarray): dual point, inequality rows first
        norm (str): "l2" (used for termination) or "linf"
        saddle (SaddleForm, optional): precomputed ``to_saddle(problem)``

    Returns:
        KktComponents: all components, objectives including the constant
    """
    if saddle is None:
        saddle = to_saddle(problem)

    x = np.asarray(x, dtype=np.float64)
    if x.shape != (saddle.n,):
        raise DimensionMismatch("Primal of length {} for {} columns".format(x.size, saddle.n), fields=("x", "c"))

    lam = reduced_costs(saddle, y)
    y = np.asarray(y, dtype=np.float64)

    kx = saddle.k_matrix.spmv(x)
    m1 = saddle.m1
    primal_violation = np.concatenate([
        np.maximum(saddle.q[:m1] - kx[:m1], 0.0),
        kx[m1:] - saddle.q[m1:],
    ])

    dual_violation = saddle.objective - saddle.k_matrix.spmv_t(y) - lam

    lam_plus, lam_minus = _split_reduced_costs(lam)
    primal_objective = float(saddle.objective @ x)
    dual_objective = float(saddle.q @ y) + _bound_terms(saddle.lower, saddle.upper, lam_plus, lam_minus)

    return KktComponents(
        primal_residual=_norm(primal_violation, norm),
        dual_residual=_norm(dual_violation, norm),
        gap_abs=abs(dual_objective - primal_objective),
        primal_objective=primal_objective + saddle.objective_constant,
        dual_objective=dual_objective + saddle.objective_constant,
        objective_constant=saddle.objective_constant,
    )


def check_relative_termination(kkt, norms, eps):
    """The relative KKT test

        gap_abs         <= eps (1 + |dual obj| + |primal obj|)
        primal_residual <= eps (1 + ||q||)
        dual_residual   <= eps (1 + ||c||)

    Objectives are compared without the objective constant. All three
    comparisons are non-strict.

    Args:
        kkt (KktComponents): from :func:`kkt_error`
        norms (tuple): (||q||_2, ||c||_2) of the original problem
        eps (float): tolerance
    """
    if eps <= 0:
        raise InvalidParameter("Termination tolerance must be positive")

    q_norm, c_norm = norms
    primal_obj = kkt.primal_objective - kkt.objective_constant
    dual_obj = kkt.dual_objective - kkt.objective_constant

    return (
        kkt.gap_abs <= eps * (1.0 + abs(dual_obj) + abs(primal_obj))
        and kkt.primal_residual <= eps * (1.0 + q_norm)
        and kkt.dual_residual <= eps * (1.0 + c_norm)
    )


def extract_candidates(z_curr, z_prev, z_start, k, info=None):
    """Difference and normalized iterates as infeasibility rays

    Args:
        z_curr (Iterate): latest iterate
        z_prev (Iterate): the one before it
        z_start (Iterate): where the solve started
        k (int): iterations between z_start and z_curr, at least 1
        info (ScalingInfo, optional): rays are mapped back to the original
            problem with this

    Returns:
        list: difference candidate then normalized candidate
    """
    if k < 1:
        raise InvalidParameter("Normalized iterate needs k >= 1")

    rays = [
        (CandidateKind.DIFFERENCE, z_curr - z_prev),
        (CandidateKind.NORMALIZED, (z_curr - z_start) / k),
    ]

    candidates = []
    for kind, ray in rays:
        if info is not None:
            ray = Iterate(*unscale_iterate(ray.x, ray.y, info))
        candidates.append(InfeasibilityCandidate(kind, ray))
    return candidates


def _certifies_primal_infeasibility(saddle, d, tol):
    scale = max(1.0, float(np.max(np.abs(d), initial=0.0)))
    threshold = tol * scale

    if saddle.m1 and np.min(d[:saddle.m1]) < -threshold:
        return False

    lam = reduced_costs(saddle, d, objective=np.zeros(saddle.n))
    residual = -saddle.k_matrix.spmv_t(d) - lam
    if np.linalg.norm(residual) > threshold:
        return False

    lam_plus, lam_minus = _split_reduced_costs(lam)
    improvement = float(saddle.q @ d) + _bound_terms(saddle.lower, saddle.upper, lam_plus, lam_minus)
    return improvement > threshold


def orient_primal_ray(problem, ray_y, tol):
    """The sign of ray_y that certifies primal infeasibility, or None

    A certificate is a ray d of the homogeneous dual with d[:m1] >= 0 and
    strictly positive homogeneous dual objective. Either sign of the input is
    accepted, since Farkas' lemma is commonly stated with the opposite sign
    (b^T y < 0, A^T y >= 0 for standard form).
    """
    if tol <= 0:
        raise InvalidParameter("Certificate tolerance must be positive")

    saddle = to_saddle(problem)
    d = np.asarray(ray_y, dtype=np.float64)
    if d.shape != (saddle.m,):
        raise DimensionMismatch("Ray of length {} for {} rows".format(d.size, saddle.m), fields=("ray_y", "q"))

    for candidate in (d, -d):
        if _certifies_primal_infeasibility(saddle, candidate, tol):
            return candidate
    return None


def validate_primal_infeasibility(problem, ray_y, tol):
    """True if ray_y (of either sign) proves the primal infeasible"""
    return orient_primal_ray(problem, ray_y, tol) is not None


def validate_dual_infeasibility(problem, ray_x, tol):
    """True if ray_x is a primal recession direction with negative cost

    With scale = max(1, ||ray_x||_inf), checks c^T d < -tol*scale,
    ||A d||_inf <= tol*scale, G d >= -tol*scale and that d moves the right way
    with respect to each finite bound.
    """
    if tol <= 0:
        raise InvalidParameter("Certificate tolerance must be positive")

    d = np.asarray(ray_x, dtype=np.float64)
    if d.shape != (problem.n,):
        raise DimensionMismatch("Ray of length {} for {} columns".format(d.size, problem.n), fields=("ray_x", "c"))

    scale = max(1.0, float(np.max(np.abs(d), initial=0.0)))
    threshold = tol * scale

    if not float(problem.objective @ d) < -threshold:
        return False

    eq_part = problem.eq_matrix.spmv(d)
    if eq_part.size and np.max(np.abs(eq_part)) > threshold:
        return False

    ineq_part = problem.ineq_matrix.spmv(d)
    if ineq_part.size and np.min(ineq_part) < -threshold:
        return False

    lower_finite = np.isfinite(problem.lower)
    upper_finite = np.isfinite(problem.upper)

    if np.any(d[lower_finite & ~upper_finite] < -threshold):
        return False
    if np.any(d[upper_finite & ~lower_finite] > threshold):
        return False
    if np.any(np.abs(d[lower_finite & upper_finite]) > threshold):
        return False

    return True


def fixed_point_residual(saddle, z, params):
    """||z - PDHG(z)||_P, zero exactly at saddle points"""
    return p_norm_movement(z - pdhg_step(z, saddle, params), saddle, params)


def distance_to_optimum(z, z_star, saddle=None, params=None):
    """Euclidean distance, or P-norm distance when saddle and params are given"""
    if params is None:
        return (z - z_star).norm()
    return p_norm_movement(z - z_star, saddle, params)


def lagrangian_gap(saddle, z_bar, z_star):
    """L(x_bar, y*) - L(x*, y_bar), nonnegative when z* is a saddle point and
    z_bar is feasible for X x Y"""
    return saddle.lagrangian(z_bar.x, z_star.y) - saddle.lagrangian(z_star.x, z_bar.y)
