import numpy as np
import pytest

import photonqml.kernel.permanent as module_permanent


class TestPermanent:
    """Tests Ryser's formula against the permutation expansion."""

    @pytest.mark.parametrize("arg_size", [1, 2, 3, 4, 5, 6, 7])
    def test_permanent_naive(self, conftest_rng_seed, conftest_boilerplate, arg_size):
        rng = conftest_rng_seed
        matrix = rng.standard_normal((arg_size, arg_size)) + 1j * rng.standard_normal(
            (arg_size, arg_size)
        )
        compare_permanent = conftest_boilerplate.naive_permanent(matrix)
        test_permanent = module_permanent.permanent(matrix)

        assert isinstance(test_permanent, complex)
        assert abs(test_permanent - compare_permanent) <= 1e-10 * abs(compare_permanent)

    def test_permanent_empty(self):
        assert module_permanent.permanent(np.zeros((0, 0))) == 1.0

    @pytest.mark.parametrize(
        "arg_matrix",
        [
            (np.ones((3, 3)), 6.0),
            (np.eye(5), 1.0),
            (np.array([[1.0, 2.0], [3.0, 4.0]]), 10.0),
            (np.array([[0.0, 1.0], [1.0, 0.0]]), 1.0),
            (np.array([[1.0, 1.0j], [1.0j, 1.0]]) / np.sqrt(2.0), 0.0),
        ],
    )
    def test_permanent_values(self, arg_matrix):
        matrix, compare_value = arg_matrix
        assert module_permanent.permanent(matrix) == pytest.approx(compare_value, abs=1e-12)

    def test_permanent_row_scaling(self, conftest_rng_seed):
        """Permanents are linear in every row and invariant to permutations."""
        matrix = conftest_rng_seed.standard_normal((5, 5)) + 0j
        base = module_permanent.permanent(matrix)
        scaled = matrix.copy()
        scaled[2] *= 3.0 - 1.0j

        assert module_permanent.permanent(scaled) == pytest.approx((3.0 - 1.0j) * base)
        assert module_permanent.permanent(matrix[[4, 0, 3, 1, 2]]) == pytest.approx(base)
        assert module_permanent.permanent(matrix.T) == pytest.approx(base)

    @pytest.mark.parametrize("arg_shape", [(2, 3), (4,), (2, 2, 2)])
    def test_permanent_error(self, arg_shape):
        with pytest.raises(ValueError, match="square matrix"):
            module_permanent.permanent(np.ones(arg_shape))
