"""Brute force reference solver and fixture generators

The vertex enumeration here shares no code with the iterative solver. It is
exponential in the problem size and only meant for the tiny instances used to
check the solver.
"""
from dataclasses import dataclass
from enum import Enum
from itertools import combinations
import logging
import warnings

import numpy as np
from scipy.linalg import LinAlgWarning, lu_factor, lu_solve, qr
from scipy.optimize import nnls

from fohorse.linalg import SparseMatrix
from fohorse.problem import LpProblem, to_saddle
from fohorse.util.exceptions import InvalidParameter, TooLarge

logger = logging.getLogger(__name__)

# n + number of rows
MAX_ORACLE_SIZE = 24

FEASIBILITY_TOL = 1e-9
PIVOT_TOL = 1e-12


class OracleStatus(Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"


@dataclass(frozen=True, eq=False)
class OracleSolution:
    """Result of :func:`enumerate_vertices_solve`

    ``x`` is the best vertex (None when infeasible), ``y`` the recovered dual
    for optimal solutions (inequality rows first) and ``ray`` a certificate
    for infeasible or unbounded problems. ``active_set`` names the constraints
    tight at ``x`` as "ineq:i", "lower:j", "upper:j" or "free:j".
    """

    status: OracleStatus
    x: np.ndarray = None
    objective: float = np.nan
    active_set: tuple = ()
    y: np.ndarray = None
    ray: np.ndarray = None
    singular_bases: int = 0


@dataclass(frozen=True, eq=False)
class _Vertex:
    x: np.ndarray
    objective: float
    active_set: tuple
    singular_bases: int


class _PointedForm:
    """The problem with every free variable split into two nonnegative parts,
    so that every column has at least one finite bound and the feasible set
    has a vertex whenever it is nonempty"""

    def __init__(self, problem):
        n = problem.n
        columns = []
        for j in range(n):
            if problem.lower[j] == -np.inf and problem.upper[j] == np.inf:
                columns += [(j, 1.0), (j, -1.0)]
            else:
                columns.append((j, 1.0))

        self.expand = np.zeros((n, len(columns)))
        for k, (j, sign) in enumerate(columns):
            self.expand[j, k] = sign

        split = np.array([problem.lower[j] == -np.inf and problem.upper[j] == np.inf for j, _ in columns], dtype=bool)
        original = np.array([j for j, _ in columns], dtype=np.int64)

        self.objective = self.expand.T @ problem.objective
        self.eq_matrix = problem.eq_matrix.to_dense() @ self.expand
        self.eq_rhs = np.asarray(problem.eq_rhs)
        self.lower = np.where(split, 0.0, problem.lower[original])
        self.upper = np.where(split, np.inf, problem.upper[original])

        ineq = problem.ineq_matrix.to_dense() @ self.expand
        width = len(columns)

        # Every candidate constraint is a^T x >= beta
        rows, rhs, labels = [], [], []
        for i in range(problem.m1):
            rows.append(ineq[i])
            rhs.append(problem.ineq_rhs[i])
            labels.append("ineq:{}".format(i))
        for k in range(width):
            if np.isfinite(self.lower[k]):
                unit = np.zeros(width)
                unit[k] = 1.0
                rows.append(unit)
                rhs.append(self.lower[k])
                labels.append(("free:{}" if split[k] else "lower:{}").format(original[k]))
        for k in range(width):
            if np.isfinite(self.upper[k]):
                unit = np.zeros(width)
                unit[k] = -1.0
                rows.append(unit)
                rhs.append(-self.upper[k])
                labels.append("upper:{}".format(original[k]))

        self.candidates = np.array(rows).reshape(len(rows), width)
        self.candidate_rhs = np.array(rhs, dtype=np.float64)
        self.labels = labels
        self.width = width

    def independent_eq_rows(self):
        if self.eq_matrix.shape[0] == 0:
            return np.zeros(0, dtype=np.int64)
        rank = np.linalg.matrix_rank(self.eq_matrix)
        if rank == 0:
            return np.zeros(0, dtype=np.int64)
        _, _, pivots = qr(self.eq_matrix.T, pivoting=True, mode="economic")
        return np.sort(pivots[:rank])

    def is_feasible(self, x):
        scale_x = max(1.0, float(np.max(np.abs(x), initial=0.0)))
        if self.eq_rhs.size:
            residual = np.abs(self.eq_matrix @ x - self.eq_rhs)
            allowed = FEASIBILITY_TOL * np.maximum(1.0, np.maximum(np.abs(self.eq_rhs), scale_x))
            if np.any(residual > allowed):
                return False
        if self.candidate_rhs.size:
            slack = self.candidates @ x - self.candidate_rhs
            allowed = FEASIBILITY_TOL * np.maximum(1.0, np.maximum(np.abs(self.candidate_rhs), scale_x))
            if np.any(slack < -allowed):
                return False
        return True

    def active(self, x):
        if not self.candidate_rhs.size:
            return ()
        scale_x = max(1.0, float(np.max(np.abs(x), initial=0.0)))
        slack = np.abs(self.candidates @ x - self.candidate_rhs)
        allowed = FEASIBILITY_TOL * np.maximum(1.0, np.maximum(np.abs(self.candidate_rhs), scale_x))
        return tuple(self.labels[i] for i in np.flatnonzero(slack <= allowed))


def _solve_basis(matrix, rhs):
    """Solve a square basis system, or None if it is (numerically) singular"""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", LinAlgWarning)
        lu, piv = lu_factor(matrix, check_finite=False)
    pivots = np.abs(np.diag(lu))
    if pivots.size and np.min(pivots) <= PIVOT_TOL * max(1.0, float(np.max(np.abs(matrix)))):
        return None
    return lu_solve((lu, piv), rhs, check_finite=False)


def _enumerate(problem):
    """Best feasible basic solution, or None if there isn't one"""
    form = _PointedForm(problem)
    eq_rows = form.independent_eq_rows()
    eq_block = form.eq_matrix[eq_rows]
    eq_rhs = form.eq_rhs[eq_rows]

    free_count = form.width - eq_rows.size
    best = None
    singular = 0

    for subset in combinations(range(form.candidate_rhs.size), free_count):
        subset = list(subset)
        matrix = np.vstack([eq_block, form.candidates[subset]])
        rhs = np.concatenate([eq_rhs, form.candidate_rhs[subset]])

        x = _solve_basis(matrix, rhs)
        if x is None:
            singular += 1
            continue

        if not form.is_feasible(x):
            continue

        value = float(form.objective @ x)
        if best is None or value < best[1] - 1e-12 * (1.0 + abs(best[1])):
            best = (x, value)

    if singular:
        logger.debug("Skipped %d singular bases", singular)

    if best is None:
        return None

    x_split, value = best
    return _Vertex(
        x=form.expand @ x_split,
        objective=value,
        active_set=form.active(x_split),
        singular_bases=singular,
    )


def find_primal_ray(problem, tol=FEASIBILITY_TOL):
    """A recession direction d with c^T d < 0, or None

    Solved by enumeration on the homogeneous problem (b = 0, h = 0) with each
    variable boxed in [-1, 1] on the sides where the original is unbounded.
    """
    hom = LpProblem(
        objective=problem.objective,
        eq_matrix=problem.eq_matrix,
        eq_rhs=np.zeros(problem.m2),
        ineq_matrix=problem.ineq_matrix,
        ineq_rhs=np.zeros(problem.m1),
        lower=np.where(np.isfinite(problem.lower), 0.0, -1.0),
        upper=np.where(np.isfinite(problem.upper), 0.0, 1.0),
        name="{}-recession".format(problem.name),
    )
    vertex = _enumerate(hom)
    threshold = tol * max(1.0, float(np.linalg.norm(problem.objective)))
    if vertex is None or vertex.objective >= -threshold:
        return None
    return vertex.x


def find_dual_ray(problem, tol=FEASIBILITY_TOL):
    """A Farkas ray y for primal infeasibility, or None

    Maximises q^T y + l^T lam+ - u^T lam- subject to K^T y + lam+ - lam- = 0,
    y[:m1] >= 0, over a unit box, by enumeration. The returned y has positive
    homogeneous dual objective.
    """
    saddle = to_saddle(problem)
    m, n = saddle.m, saddle.n
    lower_idx = np.flatnonzero(np.isfinite(saddle.lower))
    upper_idx = np.flatnonzero(np.isfinite(saddle.upper))

    width = m + lower_idx.size + upper_idx.size
    system = np.zeros((n, width))
    system[:, :m] = saddle.k_matrix.transpose().to_dense()
    system[lower_idx, m + np.arange(lower_idx.size)] = 1.0
    system[upper_idx, m + lower_idx.size + np.arange(upper_idx.size)] = -1.0

    gain = np.concatenate([saddle.q, saddle.lower[lower_idx], -saddle.upper[upper_idx]])

    lower = np.zeros(width)
    lower[saddle.m1:m] = -1.0

    farkas = LpProblem(
        objective=-gain,
        eq_matrix=SparseMatrix.from_dense(system) if n else None,
        eq_rhs=np.zeros(n),
        ineq_matrix=None,
        ineq_rhs=np.zeros(0),
        lower=lower,
        upper=np.ones(width),
        name="{}-farkas".format(problem.name),
    )
    vertex = _enumerate(farkas)
    threshold = tol * max(1.0, float(np.linalg.norm(saddle.q)))
    if vertex is None or vertex.objective >= -threshold:
        return None
    return vertex.x[:m]


def recover_dual(problem, x, tol=1e-9):
    """Find y (inequality rows first) making (x, y) a saddle point

    Only constraints active at x may carry a multiplier. The system
    K^T y + lam+ - lam- = c is solved for nonnegative unknowns (equality duals
    split in two) with NNLS.

    Returns:
        np.ndarray or None: y, or None if no consistent multipliers exist
    """
    saddle = to_saddle(problem)
    m1, m, n = saddle.m1, saddle.m, saddle.n
    k_dense = saddle.k_matrix.to_dense()
    kx = k_dense @ x

    def tight(value, target):
        return abs(value - target) <= tol * max(1.0, abs(target), float(np.max(np.abs(x), initial=0.0)))

    active_ineq = [i for i in range(m1) if tight(kx[i], saddle.q[i])]
    at_lower = [j for j in range(n) if np.isfinite(saddle.lower[j]) and tight(x[j], saddle.lower[j])]
    at_upper = [j for j in range(n) if np.isfinite(saddle.upper[j]) and tight(x[j], saddle.upper[j])]

    blocks = []
    eq_t = k_dense[m1:].T
    blocks.append(eq_t)
    blocks.append(-eq_t)
    blocks.append(k_dense[active_ineq].T)
    lower_cols = np.zeros((n, len(at_lower)))
    lower_cols[at_lower, np.arange(len(at_lower))] = 1.0
    upper_cols = np.zeros((n, len(at_upper)))
    upper_cols[at_upper, np.arange(len(at_upper))] = -1.0
    blocks += [lower_cols, upper_cols]

    system = np.hstack(blocks)
    c = saddle.objective

    if system.shape[1] == 0:
        weights, residual = np.zeros(0), float(np.linalg.norm(c))
    else:
        weights, residual = nnls(system, c)

    if residual > 1e-8 * max(1.0, float(np.linalg.norm(c))):
        logger.warning("No dual multipliers found for the oracle vertex (residual %g)", residual)
        return None

    m2 = m - m1
    y = np.zeros(m)
    y[m1:] = weights[:m2] - weights[m2:2 * m2]
    y[active_ineq] = weights[2 * m2:2 * m2 + len(active_ineq)]
    return y


def enumerate_vertices_solve(problem):
    """Solve a tiny LP by checking every basic solution

    Raises:
        TooLarge: n + rows is above MAX_ORACLE_SIZE
    """
    problem.validate()

    size = problem.n + problem.m1 + problem.m2
    if size > MAX_ORACLE_SIZE:
        raise TooLarge("Oracle limited to n + rows <= {}, got {}".format(MAX_ORACLE_SIZE, size))

    vertex = _enumerate(problem)

    if vertex is None:
        ray = find_dual_ray(problem)
        if ray is None:
            logger.warning("No feasible vertex for '%s' but no Farkas ray found either", problem.name)
        return OracleSolution(OracleStatus.INFEASIBLE, ray=ray)

    ray = find_primal_ray(problem)
    if ray is not None:
        return OracleSolution(
            OracleStatus.UNBOUNDED,
            x=vertex.x,
            objective=-np.inf,
            active_set=vertex.active_set,
            ray=ray,
            singular_bases=vertex.singular_bases,
        )

    return OracleSolution(
        OracleStatus.OPTIMAL,
        x=vertex.x,
        objective=problem.objective_value(vertex.x),
        active_set=vertex.active_set,
        y=recover_dual(problem, vertex.x),
        singular_bases=vertex.singular_bases,
    )


def random_feasible_lp(seed, m, n, density=0.7):
    """A random standard form LP (Ax = b, x >= 0) that has an optimum

    b = A x_bar for some x_bar >= 0 makes it feasible, and c = A^T y_bar + s
    with s > 0 makes the dual feasible, so it is also bounded.
    """
    if not 0.0 < density <= 1.0:
        raise InvalidParameter("density must be in (0, 1]")
    if m < 1 or n < 1:
        raise InvalidParameter("need m, n >= 1")

    rng = np.random.default_rng(seed)

    mask = rng.random((m, n)) < density
    # no empty rows
    for i in np.flatnonzero(~mask.any(axis=1)):
        mask[i, rng.integers(n)] = True
    values = np.where(mask, rng.standard_normal((m, n)), 0.0)

    x_bar = np.where(rng.random(n) < 0.5, rng.uniform(0.0, 2.0, n), 0.0)
    y_bar = rng.standard_normal(m)
    slack = rng.uniform(0.1, 1.0, n)

    return LpProblem.build(
        values.T @ y_bar + slack,
        A=SparseMatrix.from_dense(values),
        b=values @ x_bar,
        name="random-{}-{}x{}".format(seed, m, n),
    )


def make_infeasible_fixture(kind):
    """Small problems with known feasibility status

    - "primal": x1 = 1 and x1 = 2 with x1 >= 0; infeasible, dual unbounded
    - "dual": min -x1 with x1 >= 0 and no rows; unbounded
    - "both": the two joined on separate variables. The rows x1 = 1 and
      x1 = 2 make the primal infeasible, and x2 appears in no row but costs
      -1 per unit, which makes the dual infeasible too.
    """
    if kind == "primal":
        return LpProblem.build([0.0], A=[[1.0], [1.0]], b=[1.0, 2.0], name="primal-infeasible")
    if kind == "dual":
        return LpProblem.build([-1.0], name="dual-infeasible")
    if kind == "both":
        return LpProblem.build(
            [0.0, -1.0],
            A=[[1.0, 0.0], [1.0, 0.0]],
            b=[1.0, 2.0],
            name="both-infeasible",
        )
    raise InvalidParameter("Unknown fixture kind '{}'".format(kind))
