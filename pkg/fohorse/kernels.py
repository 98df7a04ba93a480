"""Stateless building blocks of the iteration

Everything here is a pure function of its arguments. The solver owns all
state, including caching a PDHG step between the Halpern combination and the
residual computation.
"""
from dataclasses import dataclass
import logging

import numpy as np

from fohorse.util.exceptions import DimensionMismatch, InvalidParameter, NonFiniteIterate

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class Iterate:
    """A primal-dual pair z = (x, y)

    Supports the handful of vector operations the algorithms need:

    >>> a = Iterate.from_lists([1.0], [2.0])
    >>> b = Iterate.from_lists([3.0], [4.0])
    >>> (b - a).as_lists()
    ([2.0], [2.0])
    >>> (0.5 * (a + b)).as_lists()
    ([2.0], [3.0])
    """

    x: np.ndarray
    y: np.ndarray

    # numpy scalars defer to __rmul__ instead of broadcasting over us
    __array_ufunc__ = None

    @classmethod
    def zeros(cls, n, m):
        return cls(np.zeros(n), np.zeros(m))

    @classmethod
    def from_lists(cls, x, y):
        return cls(np.asarray(x, dtype=np.float64), np.asarray(y, dtype=np.float64))

    def as_lists(self):
        return self.x.tolist(), self.y.tolist()

    def _check_other(self, other):
        if self.x.shape != other.x.shape or self.y.shape != other.y.shape:
            raise DimensionMismatch("Iterates of different sizes", fields=("left", "right"))

    def __add__(self, other):
        self._check_other(other)
        return Iterate(self.x + other.x, self.y + other.y)

    def __sub__(self, other):
        self._check_other(other)
        return Iterate(self.x - other.x, self.y - other.y)

    def __mul__(self, scalar):
        return Iterate(scalar * self.x, scalar * self.y)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return Iterate(self.x / scalar, self.y / scalar)

    def __neg__(self):
        return Iterate(-self.x, -self.y)

    def norm(self):
        """Plain Euclidean norm of the stacked vector"""
        return float(np.sqrt(self.x @ self.x + self.y @ self.y))

    def max_abs(self):
        return float(max(np.max(np.abs(self.x), initial=0.0), np.max(np.abs(self.y), initial=0.0)))

    def is_finite(self):
        return bool(np.all(np.isfinite(self.x)) and np.all(np.isfinite(self.y)))

    def check_finite(self):
        """Raise NonFiniteIterate naming the first bad component"""
        for name, block in (("x", self.x), ("y", self.y)):
            bad = np.flatnonzero(~np.isfinite(block))
            if bad.size:
                raise NonFiniteIterate("{}[{}]".format(name, int(bad[0])))

    def bitwise_equal(self, other):
        return np.array_equal(self.x, other.x) and np.array_equal(self.y, other.y)


@dataclass(frozen=True)
class StepParams:
    """Step size eta and primal weight omega. The primal step is
    tau = eta / omega and the dual step is sigma = eta * omega.

    >>> StepParams(0.5, 2.0).tau, StepParams(0.5, 2.0).sigma
    (0.25, 1.0)
    """

    eta: float
    omega: float

    def __post_init__(self):
        if not (self.eta > 0 and np.isfinite(self.eta)):
            raise InvalidParameter("eta must be positive and finite, got {}".format(self.eta))
        if not (self.omega > 0 and np.isfinite(self.omega)):
            raise InvalidParameter("omega must be positive and finite, got {}".format(self.omega))

    @property
    def tau(self):
        return self.eta / self.omega

    @property
    def sigma(self):
        return self.eta * self.omega


def pdhg_step(z, saddle, params):
    """One PDHG iteration

        x+ = proj_X(x - tau (c - K^T y))
        y+ = proj_Y(y + sigma (q - K (2 x+ - x)))

    Uses exactly two matrix-vector products.

    Raises:
        NonFiniteIterate: the result contains NaN or an infinity
    """
    k_matrix = saddle.k_matrix
    x_next = saddle.project_primal(z.x - params.tau * (saddle.objective - k_matrix.spmv_t(z.y)))
    y_next = saddle.project_dual(z.y + params.sigma * (saddle.q - k_matrix.spmv(2.0 * x_next - z.x)))

    result = Iterate(x_next, y_next)
    result.check_finite()
    return result


def halpern_combine(pdhg_z, anchor, k):
    """(k+1)/(k+2) PDHG(z) + 1/(k+2) anchor

    Evaluated as p + w (anchor - p), so an anchor equal to p gives back p
    exactly.

    >>> p = Iterate.from_lists([1.6], [1.64])
    >>> a = Iterate.from_lists([2.0], [2.0])
    >>> halpern_combine(p, a, 0).x.round(12).tolist()
    [1.8]
    """
    weight = 1.0 / (k + 2)
    return pdhg_z + weight * (anchor - pdhg_z)


def reflected_halpern_combine(pdhg_z, z, anchor, k):
    """(k+1)/(k+2) (2 PDHG(z) - z) + 1/(k+2) anchor

    Evaluated as p + ((1-w)(p - z) + w (anchor - p)). With anchor == z and
    k == 0 the bracket cancels exactly, so the result is p bit for bit.
    """
    weight = 1.0 / (k + 2)
    return pdhg_z + ((1.0 - weight) * (pdhg_z - z) + weight * (anchor - pdhg_z))


def omega_norm(z, omega):
    """sqrt(omega ||x||^2 + ||y||^2 / omega)

    >>> omega_norm(Iterate.from_lists([3.0, 4.0], []), 1.0)
    5.0
    """
    if omega <= 0:
        raise InvalidParameter("omega must be positive")
    return float(np.sqrt(omega * (z.x @ z.x) + (z.y @ z.y) / omega))


def interaction(dz, saddle):
    """dy^T K dx, the cross term shared by the P-norm and the step bound"""
    return float(dz.y @ saddle.k_matrix.spmv(dz.x))


def p_norm_movement(dz, saddle, params, cross=None):
    """Norm of dz under P = [[omega/eta I, K^T], [K, 1/(eta omega) I]]

    The caller keeps eta ||K||_2 <= 1 so the form is nonnegative; tiny
    negative values from round-off are clamped to zero.

    Args:
        dz (Iterate): the movement
        saddle (SaddleForm): supplies K
        params (StepParams): eta and omega
        cross (float, optional): precomputed :func:`interaction`
    """
    if cross is None:
        cross = interaction(dz, saddle)
    eta, omega = params.eta, params.omega
    squared = (omega / eta) * (dz.x @ dz.x) + (dz.y @ dz.y) / (eta * omega) + 2.0 * cross
    return float(np.sqrt(max(squared, 0.0)))


def step_size_bound(dz, saddle, omega, cross=None):
    """||dz||_omega^2 / (2 dy^T K dx)

    Any step size up to this value satisfies the acceptance inequality. When
    the cross term is not positive (including dz == 0) every step size does,
    and +inf is returned.
    """
    if cross is None:
        cross = interaction(dz, saddle)
    if cross <= 0.0:
        return np.inf
    return omega_norm(dz, omega) ** 2 / (2.0 * cross)
