import numpy as np
import pytest

from bqqkit.data.synthetic import gen_gaussian, gen_lowrank_noise
from bqqkit.errors import MatrixError
from bqqkit.matrix import make_rng
from bqqkit.quantizers.analysis import (
    error_upper_bound,
    feasible_point_error,
    inference_cost,
    sign_svd_feasible_point,
)


class TestErrorUpperBound:
    """Test the single-stack bound."""

    def test_positive_rank_one(self):
        """Test a positive outer product: no tail and an all-ones sign pattern."""
        rng = make_rng(4)
        w = 2.5 * np.outer(rng.uniform(0.5, 1.5, 6), rng.uniform(0.5, 1.5, 8))
        expected = float(np.linalg.norm(w - w.mean()))
        assert error_upper_bound(w, 1) == pytest.approx(expected, abs=1e-9)

    def test_bounds_feasible_point(self):
        """Test the bound is never below the sign-SVD feasible point error."""
        rng = make_rng(0)
        for seed in range(50):
            m, n = int(rng.integers(4, 24)), int(rng.integers(4, 24))
            l = int(rng.integers(1, min(m, n)))  # noqa: E741
            w = gen_gaussian(m, n, seed) if seed % 2 else gen_lowrank_noise(m, n, 2, 0.1, seed)
            assert error_upper_bound(w, l) >= feasible_point_error(w, l) - 1e-9

    def test_gaussian_half_rank(self):
        """Test the 32x32, l = 16 case."""
        w = gen_gaussian(32, 32, 1)
        assert error_upper_bound(w, 16) >= feasible_point_error(w, 16) - 1e-9

    def test_feasible_point_is_binary(self):
        """Test the sign factors are 0/1 matrices of the right shapes."""
        y, z = sign_svd_feasible_point(gen_gaussian(7, 9, 2), 3)
        assert y.shape == (7, 3)
        assert z.shape == (3, 9)
        assert set(np.unique(np.concatenate([y.ravel(), z.ravel()]))) <= {0.0, 1.0}

    @pytest.mark.parametrize("l_dim", [0, 6])
    def test_rejects_l_out_of_range(self, l_dim):
        """Test l must lie in [1, min(m, n))."""
        with pytest.raises(MatrixError, match="l must be"):
            error_upper_bound(gen_gaussian(6, 8, 0), l_dim)


class TestInferenceCost:
    """Test the operation-count model."""

    def test_layer_sized_ratio(self):
        """Test m = n = 384, l = 192."""
        report = inference_cost(384, 384, 192, 1)
        assert report.foq_cost == 294912  # noqa: PLR2004
        assert report.bqq_cost == 295678  # noqa: PLR2004
        assert report.ratio < 1.0052  # noqa: PLR2004

    def test_small_layer_ratio(self):
        """Test m = n = 96, l = 48."""
        report = inference_cost(96, 96, 48, 1)
        assert report.ratio == pytest.approx(18622 / 18432)
        assert report.ratio < 1.0207  # noqa: PLR2004

    def test_ratio_independent_of_batch(self):
        """Test d cancels in the ratio."""
        assert inference_cost(64, 32, 21, 7).ratio == pytest.approx(
            inference_cost(64, 32, 21, 1).ratio
        )

    def test_counts(self):
        """Test each count against its closed form."""
        report = inference_cost(10, 6, 4, 3)
        assert (report.foq_and, report.foq_add, report.foq_mul) == (180, 150, 30)
        assert (report.bqq_and, report.bqq_add, report.bqq_mul) == (192, 3 * (68 + 6 - 10 - 2), 36)

    def test_weights(self):
        """Test weighted costs."""
        report = inference_cost(10, 6, 4, 1, weights=(1.0, 2.0, 10.0))
        assert report.foq_cost == 60 + 2 * 50 + 10 * 10

    def test_rejects_non_positive(self):
        """Test dimensions must be positive."""
        with pytest.raises(MatrixError):
            inference_cost(0, 4, 2)
