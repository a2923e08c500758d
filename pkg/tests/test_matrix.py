import numpy as np
import pytest

from bqqkit.errors import MatrixError
from bqqkit.matrix import (
    BitMatrix,
    MemoryFootprint,
    StandardizationRecord,
    as_dense,
    bqq_footprint,
    destandardize,
    make_rng,
    mse,
    sgn,
    standardize,
)


class TestAsDense:
    """Test input validation of dense matrices."""

    def test_one_dimensional_becomes_row(self):
        """Test a vector is promoted to a single row."""
        assert as_dense([1, 2, 3]).shape == (1, 3)

    def test_rejects_empty(self):
        """Test empty input is rejected."""
        with pytest.raises(MatrixError, match="empty"):
            as_dense(np.zeros((0, 3)))

    def test_rejects_non_finite(self):
        """Test NaN and Inf are rejected."""
        with pytest.raises(MatrixError, match="NaN"):
            as_dense([[1.0, np.nan]])
        with pytest.raises(MatrixError):
            as_dense([[np.inf]])

    def test_rejects_three_dimensions(self):
        """Test tensors are rejected."""
        with pytest.raises(MatrixError, match="2-D"):
            as_dense(np.zeros((2, 2, 2)))

    def test_sgn_maps_zero_to_plus_one(self):
        """Test the sign convention at zero."""
        np.testing.assert_array_equal(sgn(np.array([-2.0, 0.0, 3.0])), [-1.0, 1.0, 1.0])


class TestBitMatrix:
    """Test bit packing."""

    def test_round_trip(self):
        """Test dense -> bits -> dense is the identity for odd sizes."""
        dense = (make_rng(3).random((7, 13)) > 0.5).astype(np.float64)
        packed = BitMatrix.from_dense(dense)
        assert packed.shape == (7, 13)
        assert len(packed.bits) == -(-7 * 13 // 8)
        np.testing.assert_array_equal(packed.to_dense(), dense)

    def test_rejects_non_binary(self):
        """Test values other than 0 and 1 are rejected."""
        with pytest.raises(MatrixError, match="0 or 1"):
            BitMatrix.from_dense(np.array([[0, 2]]))

    def test_zeros(self):
        """Test the all-zero constructor."""
        assert not BitMatrix.zeros(3, 5).to_dense().any()


class TestStandardize:
    """Test standardization and its inverse."""

    def test_two_point_case(self):
        """Test a symmetric two-valued matrix."""
        out, record = standardize([[1, 3], [1, 3]])
        np.testing.assert_allclose(out, [[-1, 1], [-1, 1]])
        assert record.mean == 2.0  # noqa: PLR2004
        assert record.std == 1.0
        assert not record.constant

    def test_constant_input(self):
        """Test constant input maps to zeros with the flag set."""
        out, record = standardize([[5, 5], [5, 5]])
        assert not out.any()
        assert record.constant
        assert record.mean == 5.0  # noqa: PLR2004
        np.testing.assert_array_equal(destandardize(out, record), [[5, 5], [5, 5]])

    def test_moments_and_inverse(self):
        """Test zero mean, unit population variance and exact inversion."""
        w = make_rng(7).standard_normal((128, 128)) * 3.0 + 1.5
        out, record = standardize(w)
        assert abs(out.mean()) < 1e-12  # noqa: PLR2004
        assert abs(out.var() - 1.0) < 1e-12  # noqa: PLR2004
        np.testing.assert_allclose(destandardize(out, record), w, rtol=0, atol=1e-12)

    def test_identity_record(self):
        """Test the identity record leaves values untouched."""
        w = np.arange(6.0).reshape(2, 3)
        np.testing.assert_array_equal(
            destandardize(w, StandardizationRecord.identity()), w
        )

    def test_rejects_empty(self):
        """Test empty input raises."""
        with pytest.raises(MatrixError):
            standardize(np.zeros((0, 0)))


class TestMse:
    """Test the mean squared error."""

    def test_identical(self):
        """Test equal matrices give zero."""
        w = make_rng(1).standard_normal((4, 4))
        assert mse(w, w) == 0.0

    def test_unit_offset(self):
        """Test a constant offset of one."""
        assert mse([[0, 0]], [[1, 1]]) == 1.0

    def test_hand_value(self):
        """Test (1 + 4 + 9 + 16) / 4."""
        assert mse([[1, 2], [3, 4]], [[0, 0], [0, 0]]) == 7.5  # noqa: PLR2004

    def test_symmetric(self):
        """Test argument order does not matter."""
        rng = make_rng(2)
        a, b = rng.standard_normal((3, 5)), rng.standard_normal((3, 5))
        assert mse(a, b) == mse(b, a)

    def test_shape_mismatch(self):
        """Test differing shapes raise."""
        with pytest.raises(MatrixError, match="shape mismatch"):
            mse(np.zeros((2, 2)), np.zeros((2, 3)))


class TestFootprint:
    """Test memory accounting."""

    def test_layer_sized_stack(self):
        """Test one 384x384 stack with l=192 at 32-bit scalars."""
        footprint = bqq_footprint(384, 384, 192, 1, 32)
        assert footprint.binary_bits == 147456  # noqa: PLR2004
        assert footprint.scalar_count == 4  # noqa: PLR2004
        assert footprint.total_bits == 147584  # noqa: PLR2004
        assert round(footprint.kilobytes, 1) == 18.4  # noqa: PLR2004

    def test_random_matrix_stack(self):
        """Test one 128x128 stack with l=64."""
        footprint = bqq_footprint(128, 128, 64, 1, 32)
        assert footprint.total_bits == 16512  # noqa: PLR2004
        assert round(footprint.kilobytes, 2) == 2.06  # noqa: PLR2004

    def test_minimal(self):
        """Test the smallest possible code."""
        footprint = bqq_footprint(1, 1, 1, 1, 32)
        assert footprint.binary_bits == 2  # noqa: PLR2004
        assert footprint.total_bits == 130  # noqa: PLR2004

    def test_monotone(self):
        """Test the footprint never shrinks when any argument grows."""
        base = bqq_footprint(16, 16, 8, 2).total_bits
        for args in ((17, 16, 8, 2), (16, 17, 8, 2), (16, 16, 9, 2), (16, 16, 8, 3)):
            assert bqq_footprint(*args).total_bits >= base

    def test_scalar_width(self):
        """Test 64-bit scalars double the scalar share."""
        assert bqq_footprint(4, 4, 2, 1, 64).total_bits == 16 + 4 * 64

    def test_rejects_non_positive(self):
        """Test zero dimensions raise."""
        with pytest.raises(MatrixError):
            bqq_footprint(0, 4, 2, 1)

    def test_sum(self):
        """Test footprints add component-wise."""
        total = MemoryFootprint(10, 1, 32) + MemoryFootprint(6, 2, 32)
        assert total.binary_bits == 16  # noqa: PLR2004
        assert total.scalar_count == 3  # noqa: PLR2004
        assert total.total_bits == 16 + 96

    def test_sum_rejects_mixed_widths(self):
        """Test adding different scalar widths raises."""
        with pytest.raises(MatrixError):
            MemoryFootprint(1, 1, 32) + MemoryFootprint(1, 1, 64)
