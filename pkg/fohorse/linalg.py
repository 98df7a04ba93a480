"""Sparse matrix storage and the matrix-vector products everything else is
built on.

A :class:`SparseMatrix` keeps the matrix in row-major (CSR) form and its
transpose in row-major form too, which is the column-major layout of the
original. ``spmv`` and ``spmv_t`` each stream one of them contiguously.
"""
import logging

import numpy as np
import scipy.sparse as sp

from fohorse.util.exceptions import DimensionMismatch, InvalidParameter, NonFiniteEntry, NonPositiveScale

logger = logging.getLogger(__name__)


def _canonical_csr(matrix, shape=None):
    csr = sp.csr_matrix(matrix, shape=shape, dtype=np.float64, copy=True)
    csr.sum_duplicates()
    csr.eliminate_zeros()
    csr.sort_indices()
    return csr


class SparseMatrix:
    """Immutable sparse matrix

    Don't construct directly - use one of the ``from_*`` class methods, which
    all normalise the input (duplicates summed, zeros dropped, indices sorted)
    and reject non-finite values.

    >>> m = SparseMatrix.from_dense([[1.0, 2.0]])
    >>> m.spmv([1.0, 0.5]).tolist()
    [2.0]
    >>> m.spmv_t([2.0]).tolist()
    [2.0, 4.0]
    """

    def __init__(self, csr, _transpose=None):
        if not np.all(np.isfinite(csr.data)):
            bad = int(np.flatnonzero(~np.isfinite(csr.data))[0])
            row = int(np.searchsorted(csr.indptr, bad, side="right") - 1)
            raise NonFiniteEntry("matrix entry ({}, {})".format(row, int(csr.indices[bad])))

        self._csr = csr
        if _transpose is None:
            _transpose = _canonical_csr(csr.T)
        self._csr_t = _transpose

    @classmethod
    def from_scipy(cls, matrix):
        return cls(_canonical_csr(matrix))

    @classmethod
    def from_dense(cls, array):
        array = np.atleast_2d(np.asarray(array, dtype=np.float64))
        return cls(_canonical_csr(array))

    @classmethod
    def from_triplets(cls, rows, cols, values, shape):
        """Build from coordinate lists. Repeated (i, j) pairs are summed"""
        coo = sp.coo_matrix(
            (np.asarray(values, dtype=np.float64), (np.asarray(rows, dtype=np.int64), np.asarray(cols, dtype=np.int64))),
            shape=shape,
        )
        return cls(_canonical_csr(coo))

    @classmethod
    def empty(cls, nrows, ncols):
        return cls(_canonical_csr(sp.csr_matrix((nrows, ncols))))

    @classmethod
    def identity(cls, n):
        return cls(_canonical_csr(sp.identity(n, format="csr")))

    @classmethod
    def vstack(cls, blocks, ncols=None):
        """Stack matrices on top of each other. Zero-row blocks are fine"""
        if not blocks:
            return cls.empty(0, ncols or 0)
        widths = {b.ncols for b in blocks}
        if len(widths) != 1:
            raise DimensionMismatch("Cannot stack blocks with column counts {}".format(sorted(widths)))
        width = widths.pop()
        nonempty = [b._csr for b in blocks if b.nrows]
        if not nonempty:
            return cls.empty(0, width)
        return cls(_canonical_csr(sp.vstack(nonempty, format="csr")))

    @property
    def shape(self):
        return self._csr.shape

    @property
    def nrows(self):
        return self._csr.shape[0]

    @property
    def ncols(self):
        return self._csr.shape[1]

    @property
    def nnz(self):
        return self._csr.nnz

    @property
    def indptr(self):
        return self._csr.indptr

    @property
    def indices(self):
        return self._csr.indices

    @property
    def data(self):
        return self._csr.data

    @property
    def col_indptr(self):
        return self._csr_t.indptr

    @property
    def col_indices(self):
        return self._csr_t.indices

    @property
    def col_data(self):
        return self._csr_t.data

    def row_of_entries(self):
        """Row index of every stored entry, in storage order"""
        return np.repeat(np.arange(self.nrows), np.diff(self._csr.indptr))

    def spmv(self, v):
        """M @ v, summed left to right within each row"""
        v = np.asarray(v, dtype=np.float64)
        if v.shape != (self.ncols,):
            raise DimensionMismatch(
                "spmv with {}x{} matrix and vector of length {}".format(self.nrows, self.ncols, v.size),
                fields=("matrix.ncols", "vector"),
            )
        return self._csr @ v

    def spmv_t(self, v):
        """M.T @ v using the column-major copy"""
        v = np.asarray(v, dtype=np.float64)
        if v.shape != (self.nrows,):
            raise DimensionMismatch(
                "spmv_t with {}x{} matrix and vector of length {}".format(self.nrows, self.ncols, v.size),
                fields=("matrix.nrows", "vector"),
            )
        return self._csr_t @ v

    def transpose(self):
        return SparseMatrix(self._csr_t, _transpose=self._csr)

    @property
    def T(self):
        return self.transpose()

    def to_dense(self):
        return self._csr.toarray()

    def to_scipy(self):
        return self._csr.copy()

    def same_entries(self, other):
        """Exact equality of shape, pattern and values"""
        return (
            self.shape == other.shape
            and np.array_equal(self.indptr, other.indptr)
            and np.array_equal(self.indices, other.indices)
            and np.array_equal(self.data, other.data)
        )

    def abs_max(self):
        if self.nnz == 0:
            return 0.0
        return float(np.max(np.abs(self.data)))

    def row_abs_max(self):
        out = np.zeros(self.nrows)
        np.maximum.at(out, self.row_of_entries(), np.abs(self.data))
        return out

    def col_abs_max(self):
        out = np.zeros(self.ncols)
        np.maximum.at(out, self.indices, np.abs(self.data))
        return out

    def row_pow_sum(self, power):
        """sum_j |M_ij|^power over stored entries of each row"""
        weights = np.abs(self.data) ** power
        return np.bincount(self.row_of_entries(), weights=weights, minlength=self.nrows).astype(np.float64)

    def col_pow_sum(self, power):
        weights = np.abs(self.data) ** power
        return np.bincount(self.indices, weights=weights, minlength=self.ncols).astype(np.float64)

    def __repr__(self):
        return "<SparseMatrix {}x{} nnz={}>".format(self.nrows, self.ncols, self.nnz)


def spmv(matrix, v):
    return matrix.spmv(v)


def spmv_t(matrix, v):
    return matrix.spmv_t(v)


def estimate_spectral_norm(matrix, iterations=100, seed=0):
    """Power iteration on M^T M to estimate the largest singular value

    Each iteration records ||M v|| for the current unit vector v, which is a
    lower bound on ||M||_2 and never decreases from one iteration to the next.

    Args:
        matrix (SparseMatrix): matrix to estimate
        iterations (int): number of power iterations, at least 1
        seed (int): seed for the random starting vector

    Returns:
        float: the estimate. 0.0 for a matrix with no stored entries, which is
            logged as a warning
    """
    if iterations < 1:
        raise InvalidParameter("Need at least one power iteration")

    if matrix.nnz == 0:
        logger.warning("Spectral norm requested for a %dx%d matrix with no entries", matrix.nrows, matrix.ncols)
        return 0.0

    rng = np.random.default_rng(seed)
    v = rng.standard_normal(matrix.ncols)
    v /= np.linalg.norm(v)

    estimate = 0.0
    for _ in range(iterations):
        w = matrix.spmv(v)
        estimate = max(estimate, float(np.linalg.norm(w)))

        nxt = matrix.spmv_t(w)
        nxt_norm = np.linalg.norm(nxt)
        if nxt_norm == 0.0:
            # start was orthogonal to the row space
            break
        v = nxt / nxt_norm

    return estimate


def scale(matrix, row_scale, col_scale):
    """Return diag(row_scale) @ M @ diag(col_scale) with the same pattern

    Raises:
        DimensionMismatch: scale vectors don't match the matrix
        NonPositiveScale: any scale is zero, negative, or not finite
    """
    row_scale = np.asarray(row_scale, dtype=np.float64)
    col_scale = np.asarray(col_scale, dtype=np.float64)

    if row_scale.shape != (matrix.nrows,) or col_scale.shape != (matrix.ncols,):
        raise DimensionMismatch(
            "Scaling a {}x{} matrix by vectors of length {} and {}".format(
                matrix.nrows, matrix.ncols, row_scale.size, col_scale.size),
            fields=("row_scale/col_scale", "matrix"),
        )

    for name, values in (("row", row_scale), ("column", col_scale)):
        if np.any(~np.isfinite(values)) or np.any(values <= 0):
            raise NonPositiveScale("{} scale must be positive and finite".format(name))

    data = row_scale[matrix.row_of_entries()] * matrix.data * col_scale[matrix.indices]
    scaled = sp.csr_matrix((data, matrix.indices.copy(), matrix.indptr.copy()), shape=matrix.shape)
    return SparseMatrix(_canonical_csr(scaled))
