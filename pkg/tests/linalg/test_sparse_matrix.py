import numpy as np
import pytest
import scipy.sparse as sp
from testfixtures import LogCapture

from fohorse.linalg import SparseMatrix, estimate_spectral_norm, scale, spmv, spmv_t
from fohorse.util.exceptions import DimensionMismatch, InvalidParameter, NonFiniteEntry, NonPositiveScale


class TestConstruction:

    def test_duplicates_summed(self):
        m = SparseMatrix.from_triplets([0, 0, 1], [1, 1, 0], [1.0, 2.0, 4.0], (2, 2))
        assert m.nnz == 2
        assert m.to_dense().tolist() == [[0.0, 3.0], [4.0, 0.0]]

    def test_explicit_zeros_dropped(self):
        m = SparseMatrix.from_triplets([0, 1], [0, 1], [0.0, 5.0], (2, 2))
        assert m.nnz == 1

    def test_non_finite_rejected(self):
        with pytest.raises(NonFiniteEntry):
            SparseMatrix.from_dense([[1.0, np.nan]])

    def test_zero_row_block(self):
        m = SparseMatrix.empty(0, 3)
        assert m.shape == (0, 3)
        assert m.spmv(np.ones(3)).shape == (0,)
        assert m.spmv_t(np.zeros(0)).tolist() == [0.0, 0.0, 0.0]

    def test_vstack_skips_empty_blocks(self):
        top = SparseMatrix.empty(0, 2)
        bottom = SparseMatrix.from_dense([[1.0, 2.0]])
        stacked = SparseMatrix.vstack([top, bottom], ncols=2)
        assert stacked.to_dense().tolist() == [[1.0, 2.0]]

    def test_vstack_width_mismatch(self):
        with pytest.raises(DimensionMismatch):
            SparseMatrix.vstack([SparseMatrix.empty(1, 2), SparseMatrix.empty(1, 3)])

    def test_from_scipy_matches_dense(self):
        dense = np.array([[0.0, 1.5, 0.0], [2.0, 0.0, -1.0]])
        assert SparseMatrix.from_scipy(sp.csc_matrix(dense)).same_entries(SparseMatrix.from_dense(dense))


class TestProducts:

    def test_identity(self):
        assert spmv(SparseMatrix.identity(2), [3.0, 4.0]).tolist() == [3.0, 4.0]
        assert spmv_t(SparseMatrix.identity(2), [3.0, 4.0]).tolist() == [3.0, 4.0]

    def test_row_vector(self):
        m = SparseMatrix.from_dense([[1.0, 2.0]])
        assert m.spmv([1.0, 0.5]).tolist() == [2.0]
        assert m.spmv_t([2.0]).tolist() == [2.0, 4.0]

    def test_transpose_of_unit_vector_is_row(self):
        dense = np.array([[1.0, 0.0, 2.0], [0.0, -3.0, 4.0]])
        m = SparseMatrix.from_dense(dense)
        for i in range(2):
            e = np.zeros(2)
            e[i] = 1.0
            assert np.array_equal(m.spmv_t(e), dense[i])

    def test_dimension_checked(self):
        m = SparseMatrix.from_dense([[1.0, 2.0]])
        with pytest.raises(DimensionMismatch):
            m.spmv([1.0])
        with pytest.raises(DimensionMismatch):
            m.spmv_t([1.0, 2.0])

    def test_transpose_bitwise(self):
        rng = np.random.default_rng(3)
        dense = np.where(rng.random((5, 4)) < 0.5, rng.standard_normal((5, 4)), 0.0)
        m = SparseMatrix.from_dense(dense)
        v = rng.standard_normal(5)
        assert np.array_equal(m.transpose().spmv(v), m.spmv_t(v))
        assert m.T.T.same_entries(m)

    def test_matches_dense(self):
        rng = np.random.default_rng(4)
        dense = np.where(rng.random((6, 7)) < 0.4, rng.standard_normal((6, 7)), 0.0)
        m = SparseMatrix.from_dense(dense)
        v = rng.standard_normal(7)
        w = rng.standard_normal(6)
        assert np.allclose(m.spmv(v), dense @ v, rtol=0, atol=1e-12)
        assert np.allclose(m.spmv_t(w), dense.T @ w, rtol=0, atol=1e-12)

    @pytest.mark.parametrize("seed", range(10))
    def test_adjoint(self, seed):
        rng = np.random.default_rng(seed)
        nrows, ncols = rng.integers(1, 12, size=2)
        m = SparseMatrix.from_scipy(sp.random(nrows, ncols, density=0.5, random_state=seed, format="csr"))
        v = rng.standard_normal(ncols)
        w = rng.standard_normal(nrows)

        forward = m.spmv(v) @ w
        backward = v @ m.spmv_t(w)
        assert forward == pytest.approx(backward, rel=1e-12, abs=1e-12)

    def test_layouts_agree(self):
        rng = np.random.default_rng(5)
        m = SparseMatrix.from_scipy(sp.random(8, 5, density=0.4, random_state=5, format="csc"))
        v = rng.standard_normal(5)
        assert np.allclose(m.spmv(v), m.T.spmv_t(v), rtol=0, atol=1e-14)


class TestSpectralNorm:

    def test_identity(self):
        assert estimate_spectral_norm(SparseMatrix.identity(3)) == pytest.approx(1.0, abs=1e-9)

    def test_diagonal(self):
        m = SparseMatrix.from_dense(np.diag([3.0, 1.0]))
        assert estimate_spectral_norm(m, iterations=50) == pytest.approx(3.0, abs=1e-6)

    def test_random_matches_svd(self):
        rng = np.random.default_rng(11)
        dense = rng.standard_normal((20, 30))
        estimate = estimate_spectral_norm(SparseMatrix.from_dense(dense), iterations=500)
        assert estimate == pytest.approx(np.linalg.norm(dense, 2), rel=1e-6)

    def test_never_above_true_norm(self):
        rng = np.random.default_rng(12)
        dense = rng.standard_normal((4, 6))
        assert estimate_spectral_norm(SparseMatrix.from_dense(dense), iterations=3) <= np.linalg.norm(dense, 2) + 1e-12

    def test_nondecreasing_in_iterations(self):
        rng = np.random.default_rng(13)
        m = SparseMatrix.from_dense(rng.standard_normal((5, 7)))
        estimates = [estimate_spectral_norm(m, iterations=k) for k in range(1, 40)]
        for before, after in zip(estimates, estimates[1:]):
            assert after >= before - 1e-12

    def test_zero_matrix_warns(self):
        with LogCapture("fohorse.linalg") as capture:
            assert estimate_spectral_norm(SparseMatrix.empty(2, 2)) == 0.0
        capture.check(("fohorse.linalg", "WARNING", "Spectral norm requested for a 2x2 matrix with no entries"))

    def test_needs_an_iteration(self):
        with pytest.raises(InvalidParameter):
            estimate_spectral_norm(SparseMatrix.identity(2), iterations=0)


class TestScale:

    def test_unit_scaling_identical(self):
        m = SparseMatrix.from_dense([[1.0, -2.0], [0.0, 3.0]])
        assert scale(m, np.ones(2), np.ones(2)).same_entries(m)

    def test_scalar(self):
        assert scale(SparseMatrix.from_dense([[4.0]]), [0.5], [0.5]).to_dense().tolist() == [[1.0]]

    def test_pattern_preserved(self):
        rng = np.random.default_rng(5)
        dense = np.where(rng.random((5, 5)) < 0.5, rng.standard_normal((5, 5)), 0.0)
        m = SparseMatrix.from_dense(dense)
        scaled = scale(m, rng.uniform(0.5, 2.0, 5), rng.uniform(0.5, 2.0, 5))
        assert np.array_equal(scaled.indices, m.indices)
        assert np.array_equal(scaled.indptr, m.indptr)

    @pytest.mark.parametrize("row_scale", [
        [0.0, 1.0],
        [-1.0, 1.0],
        [np.inf, 1.0],
    ])
    def test_bad_scale(self, row_scale):
        with pytest.raises(NonPositiveScale):
            scale(SparseMatrix.identity(2), row_scale, [1.0, 1.0])

    def test_wrong_length(self):
        with pytest.raises(DimensionMismatch):
            scale(SparseMatrix.identity(2), [1.0], [1.0, 1.0])


class TestNorms:

    def test_row_and_column_maxima(self):
        m = SparseMatrix.from_dense([[1.0, -5.0], [0.0, 0.0], [2.0, 0.0]])
        assert m.row_abs_max().tolist() == [5.0, 0.0, 2.0]
        assert m.col_abs_max().tolist() == [2.0, 5.0]
        assert m.abs_max() == 5.0

    def test_power_sums(self):
        m = SparseMatrix.from_dense([[1.0, 1.0], [0.0, 1.0]])
        assert m.row_pow_sum(1.0).tolist() == [2.0, 1.0]
        assert m.col_pow_sum(1.0).tolist() == [1.0, 2.0]
