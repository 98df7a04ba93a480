"""General form LP data and its saddle point working form

The LP is::

    min  c^T x + constant
    s.t. G x >= h
         A x  = b
         l <= x <= u

and the solver works on the Lagrangian ``L(x, y) = c^T x - y^T K x + q^T y``
with ``K = [G; A]`` and ``q = (h; b)``. Inequality rows come first so the dual
cone is "first m1 components nonnegative".
"""
from dataclasses import dataclass, field
import logging

from cached_property import cached_property
import numpy as np

from fohorse.linalg import SparseMatrix
from fohorse.util.exceptions import CrossedBounds, DimensionMismatch, NonFiniteEntry

logger = logging.getLogger(__name__)


def _as_vector(values):
    arr = np.array(values, dtype=np.float64, copy=True).reshape(-1)
    arr.setflags(write=False)
    return arr


def _as_matrix(matrix, ncols):
    if matrix is None:
        return SparseMatrix.empty(0, ncols)
    if isinstance(matrix, SparseMatrix):
        return matrix
    if hasattr(matrix, "tocsr"):
        return SparseMatrix.from_scipy(matrix)
    dense = np.asarray(matrix, dtype=np.float64)
    if dense.size == 0:
        return SparseMatrix.empty(dense.shape[0] if dense.ndim == 2 else 0, ncols)
    return SparseMatrix.from_dense(dense)


@dataclass(frozen=True, eq=False)
class LpProblem:
    """A general form linear program. Immutable once built.

    ``maximize`` records that the source asked for maximisation: ``objective``
    and ``objective_constant`` have already been negated and reported
    objectives should be negated back. ``integrality_relaxed`` is set when
    integer markers were dropped on the way in.
    """

    objective: np.ndarray
    eq_matrix: SparseMatrix
    eq_rhs: np.ndarray
    ineq_matrix: SparseMatrix
    ineq_rhs: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    objective_constant: float = 0.0
    name: str = "lp"
    maximize: bool = False
    integrality_relaxed: bool = False
    warnings: tuple = field(default=())

    def __post_init__(self):
        objective = _as_vector(self.objective)
        n = objective.size
        object.__setattr__(self, "objective", objective)
        object.__setattr__(self, "eq_matrix", _as_matrix(self.eq_matrix, n))
        object.__setattr__(self, "ineq_matrix", _as_matrix(self.ineq_matrix, n))
        for name in ("eq_rhs", "ineq_rhs", "lower", "upper"):
            object.__setattr__(self, name, _as_vector(getattr(self, name)))
        object.__setattr__(self, "objective_constant", float(self.objective_constant))
        object.__setattr__(self, "warnings", tuple(self.warnings))

    @classmethod
    def build(cls, c, A=None, b=None, G=None, h=None, lower=0.0, upper=np.inf, **kwargs):
        """Convenience constructor using the usual LP symbols

        Scalars for ``lower``/``upper`` are broadcast to every variable and
        missing constraint blocks become zero-row matrices.

        >>> p = LpProblem.build([2.0, 3.0], A=[[1.0, 2.0]], b=[1.0])
        >>> p.n, p.m1, p.m2
        (2, 0, 1)
        """
        c = np.asarray(c, dtype=np.float64).reshape(-1)
        n = c.size
        return cls(
            objective=c,
            eq_matrix=A,
            eq_rhs=np.zeros(0) if b is None else b,
            ineq_matrix=G,
            ineq_rhs=np.zeros(0) if h is None else h,
            lower=np.full(n, float(lower)) if np.ndim(lower) == 0 else lower,
            upper=np.full(n, float(upper)) if np.ndim(upper) == 0 else upper,
            **kwargs
        )

    @property
    def n(self):
        return self.objective.size

    @property
    def m1(self):
        return self.ineq_matrix.nrows

    @property
    def m2(self):
        return self.eq_matrix.nrows

    def validate(self):
        validate(self)

    def objective_value(self, x):
        """c^T x + constant, in the minimisation sense"""
        return float(self.objective @ x) + self.objective_constant

    def reported_objective(self, value):
        """Flip an internal objective value back for maximisation problems"""
        return -value if self.maximize else value

    def replace(self, **changes):
        values = {f: getattr(self, f) for f in self.__dataclass_fields__}
        values.update(changes)
        return type(self)(**values)


def validate(problem):
    """Check every LpProblem invariant

    Checks are done in order: dimensions, then finiteness, then bounds.

    Raises:
        DimensionMismatch: names the pair of fields that disagree
        NonFiniteEntry: NaN anywhere, infinities in c/b/h, +inf lower or -inf upper
        CrossedBounds: index of the first variable with lower > upper
    """
    n = problem.n

    pairs = [
        ("eq_matrix.ncols", problem.eq_matrix.ncols, "objective", n),
        ("ineq_matrix.ncols", problem.ineq_matrix.ncols, "objective", n),
        ("eq_rhs", problem.eq_rhs.size, "eq_matrix.nrows", problem.eq_matrix.nrows),
        ("ineq_rhs", problem.ineq_rhs.size, "ineq_matrix.nrows", problem.ineq_matrix.nrows),
        ("lower", problem.lower.size, "objective", n),
        ("upper", problem.upper.size, "objective", n),
    ]
    for left, left_size, right, right_size in pairs:
        if left_size != right_size:
            raise DimensionMismatch(
                "{} has size {} but {} has size {}".format(left, left_size, right, right_size),
                fields=(left, right),
            )

    for name in ("objective", "eq_rhs", "ineq_rhs"):
        values = getattr(problem, name)
        bad = np.flatnonzero(~np.isfinite(values))
        if bad.size:
            raise NonFiniteEntry("{}[{}]".format(name, int(bad[0])))

    if not np.isfinite(problem.objective_constant):
        raise NonFiniteEntry("objective_constant")

    bad = np.flatnonzero(np.isnan(problem.lower) | (problem.lower == np.inf))
    if bad.size:
        raise NonFiniteEntry("lower[{}]".format(int(bad[0])))

    bad = np.flatnonzero(np.isnan(problem.upper) | (problem.upper == -np.inf))
    if bad.size:
        raise NonFiniteEntry("upper[{}]".format(int(bad[0])))

    # Matrix entries are checked when the SparseMatrix is built

    crossed = np.flatnonzero(problem.lower > problem.upper)
    if crossed.size:
        i = int(crossed[0])
        raise CrossedBounds(i, problem.lower[i], problem.upper[i])


@dataclass(frozen=True, eq=False)
class SaddleForm:
    """The problem as min_x max_y c^T x - y^T K x + q^T y over
    X = {l <= x <= u} and Y = {y : y[:m1] >= 0}
    """

    k_matrix: SparseMatrix
    q: np.ndarray
    m1: int
    objective: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    objective_constant: float = 0.0

    def __post_init__(self):
        if self.k_matrix.nrows != self.q.size:
            raise DimensionMismatch(
                "K has {} rows but q has length {}".format(self.k_matrix.nrows, self.q.size),
                fields=("k_matrix", "q"),
            )
        if not 0 <= self.m1 <= self.q.size:
            raise DimensionMismatch("m1={} outside [0, {}]".format(self.m1, self.q.size), fields=("m1", "q"))

    @property
    def n(self):
        return self.objective.size

    @property
    def m(self):
        return self.q.size

    @cached_property
    def objective_norm(self):
        return float(np.linalg.norm(self.objective))

    @cached_property
    def rhs_norm(self):
        return float(np.linalg.norm(self.q))

    @cached_property
    def k_abs_max(self):
        return self.k_matrix.abs_max()

    def lagrangian(self, x, y):
        return float(self.objective @ x - y @ self.k_matrix.spmv(x) + self.q @ y)

    def project_primal(self, x):
        return np.clip(x, self.lower, self.upper)

    def project_dual(self, y):
        projected = np.array(y, dtype=np.float64, copy=True)
        projected[:self.m1] = np.maximum(projected[:self.m1], 0.0)
        return projected

    def to_problem(self, name="saddle"):
        """Split K and q back into an LpProblem"""
        rows = self.k_matrix.to_scipy()
        return LpProblem(
            objective=self.objective,
            eq_matrix=SparseMatrix.from_scipy(rows[self.m1:]),
            eq_rhs=self.q[self.m1:],
            ineq_matrix=SparseMatrix.from_scipy(rows[:self.m1]),
            ineq_rhs=self.q[:self.m1],
            lower=self.lower,
            upper=self.upper,
            objective_constant=self.objective_constant,
            name=name,
        )


def to_saddle(problem):
    """Stack G over A and h over b

    Columns keep their order, so column j of K is x_j.
    """
    return SaddleForm(
        k_matrix=SparseMatrix.vstack([problem.ineq_matrix, problem.eq_matrix], ncols=problem.n),
        q=np.concatenate([problem.ineq_rhs, problem.eq_rhs]),
        m1=problem.m1,
        objective=problem.objective,
        lower=problem.lower,
        upper=problem.upper,
        objective_constant=problem.objective_constant,
    )
