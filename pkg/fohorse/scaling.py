"""Diagonal preconditioning

The default pipeline is a number of Ruiz equilibration passes followed by one
Pock-Chambolle pass. The combined scaling turns the saddle form into

    K~ = D1 K D2,  c~ = D2 c,  q~ = D1 q,  l~ = l / D2,  u~ = u / D2

and an iterate (x~, y~) of the scaled problem maps back as (D2 x~, D1 y~).
"""
from dataclasses import dataclass
import logging

import numpy as np

from fohorse.linalg import scale
from fohorse.problem import SaddleForm
from fohorse.util.exceptions import DimensionMismatch, InvalidParameter, NonPositiveScale

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class ScalingInfo:
    """Row (D1) and column (D2) diagonals"""

    d_row: np.ndarray
    d_col: np.ndarray

    def __post_init__(self):
        for name in ("d_row", "d_col"):
            values = np.array(getattr(self, name), dtype=np.float64, copy=True).reshape(-1)
            if np.any(~np.isfinite(values)) or np.any(values <= 0):
                raise NonPositiveScale("{} must be positive and finite".format(name))
            values.setflags(write=False)
            object.__setattr__(self, name, values)

    @classmethod
    def identity(cls, nrows, ncols):
        return cls(np.ones(nrows), np.ones(ncols))

    def compose(self, other):
        """Scaling equivalent to applying self and then other"""
        return ScalingInfo(self.d_row * other.d_row, self.d_col * other.d_col)


def _inverse_sqrt_or_one(values):
    out = np.ones_like(values)
    positive = values > 0
    out[positive] = 1.0 / np.sqrt(values[positive])
    return out


def ruiz(matrix, iterations=10):
    """Ruiz equilibration in the infinity norm

    Each pass divides every row and every column by the square root of its
    infinity norm, both measured on the matrix at the start of the pass.
    Rows and columns with no entries keep a scale of 1.

    Returns:
        tuple: (scaled SparseMatrix, accumulated ScalingInfo)
    """
    if iterations < 0:
        raise InvalidParameter("ruiz iterations must be >= 0")

    d_row = np.ones(matrix.nrows)
    d_col = np.ones(matrix.ncols)
    scaled = matrix

    for _ in range(iterations):
        row_step = _inverse_sqrt_or_one(scaled.row_abs_max())
        col_step = _inverse_sqrt_or_one(scaled.col_abs_max())
        scaled = scale(scaled, row_step, col_step)
        d_row *= row_step
        d_col *= col_step

    return scaled, ScalingInfo(d_row, d_col)


def pock_chambolle(matrix, alpha=1.0):
    """Diagonal scaling with d_row[i] = 1/sqrt(sum_j |K_ij|^(2-alpha)) and
    d_col[j] = 1/sqrt(sum_i |K_ij|^alpha)

    Sums run over stored entries only, so empty rows/columns get scale 1.
    """
    if not 0.0 <= alpha <= 2.0:
        raise InvalidParameter("Pock-Chambolle alpha must be in [0, 2], got {}".format(alpha))

    return ScalingInfo(
        _inverse_sqrt_or_one(matrix.row_pow_sum(2.0 - alpha)),
        _inverse_sqrt_or_one(matrix.col_pow_sum(alpha)),
    )


def apply_scaling(saddle, info):
    """Scaled copy of a saddle form"""
    if info.d_row.size != saddle.m or info.d_col.size != saddle.n:
        raise DimensionMismatch(
            "Scaling of size ({}, {}) for a problem with {} rows and {} columns".format(
                info.d_row.size, info.d_col.size, saddle.m, saddle.n),
            fields=("scaling", "saddle"),
        )

    return SaddleForm(
        k_matrix=scale(saddle.k_matrix, info.d_row, info.d_col),
        q=info.d_row * saddle.q,
        m1=saddle.m1,
        objective=info.d_col * saddle.objective,
        lower=saddle.lower / info.d_col,
        upper=saddle.upper / info.d_col,
        objective_constant=saddle.objective_constant,
    )


def unscale_iterate(x, y, info):
    """Map a scaled-space iterate back to the original problem"""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != info.d_col.shape or y.shape != info.d_row.shape:
        raise DimensionMismatch(
            "Iterate of size ({}, {}) for scaling of size ({}, {})".format(
                x.size, y.size, info.d_col.size, info.d_row.size),
            fields=("iterate", "scaling"),
        )
    return info.d_col * x, info.d_row * y


def precondition(saddle, ruiz_iterations=10, pc_alpha=1.0):
    """Run the default pipeline and return (scaled saddle form, combined ScalingInfo)"""
    ruiz_scaled, ruiz_info = ruiz(saddle.k_matrix, ruiz_iterations)
    pc_info = pock_chambolle(ruiz_scaled, pc_alpha)
    info = ruiz_info.compose(pc_info)

    logger.debug(
        "Preconditioned %dx%d matrix: row scales in [%g, %g], column scales in [%g, %g]",
        saddle.m, saddle.n,
        info.d_row.min(initial=1.0), info.d_row.max(initial=1.0),
        info.d_col.min(initial=1.0), info.d_col.max(initial=1.0),
    )

    return apply_scaling(saddle, info), info
