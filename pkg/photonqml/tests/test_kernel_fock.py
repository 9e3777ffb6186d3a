import numpy as np
import pytest
from scipy.special import comb

import photonqml.kernel.fock as module_fock


class TestFockBasis:
    """Tests enumeration and indexing of Fock bases."""

    @pytest.mark.parametrize("arg_m", [1, 2, 4, 6])
    @pytest.mark.parametrize("arg_n", [0, 1, 2, 3])
    def test_enumerate_basis_dimension(self, arg_m, arg_n):
        basis = module_fock.enumerate_basis(arg_m, arg_n)

        assert isinstance(basis, module_fock.FockBasis)
        assert basis.dim == comb(arg_m + arg_n - 1, arg_n, exact=True)
        assert basis.states.shape == (basis.dim, arg_m)
        assert np.all(basis.states.sum(axis=1) == arg_n)
        assert len(basis.index) == basis.dim

    def test_enumerate_basis_order(self):
        basis = module_fock.enumerate_basis(3, 2)
        compare_states = [
            (2, 0, 0),
            (1, 1, 0),
            (1, 0, 1),
            (0, 2, 0),
            (0, 1, 1),
            (0, 0, 2),
        ]

        assert [tuple(int(k) for k in s) for s in basis.states] == compare_states
        for position, state in enumerate(compare_states):
            assert basis.state_index(state) == position

    def test_enumerate_basis_norms(self, conftest_mock_basis):
        basis = conftest_mock_basis
        compare_norms = np.array(
            [np.sqrt(2.0) if s.max() == 2 else 1.0 for s in basis.states]
        )

        assert np.allclose(basis.norms, compare_norms)

    def test_enumerate_basis_read_only(self, conftest_mock_basis):
        basis = conftest_mock_basis
        with pytest.raises(ValueError):
            basis.states[0, 0] = 5

    @pytest.mark.parametrize("arg_size", [(0, 2), (-1, 1), (3, -1)])
    def test_enumerate_basis_error(self, arg_size):
        with pytest.raises(ValueError):
            module_fock.enumerate_basis(*arg_size)

    def test_state_index_error(self, conftest_mock_basis):
        basis = conftest_mock_basis
        with pytest.raises(ValueError, match="is not in the basis"):
            basis.state_index((1, 1, 1, 0))

    def test_basis_vector(self, conftest_mock_basis):
        basis = conftest_mock_basis
        vector = basis.basis_vector((0, 1, 1, 0))

        assert vector.shape == (basis.dim,)
        assert np.isclose(np.linalg.norm(vector), 1.0)
        assert vector[basis.state_index((0, 1, 1, 0))] == 1.0


class TestFockOperators:
    """Tests number operators, input patterns and distributions."""

    @pytest.mark.parametrize("arg_mode", [0, 1, 2, 3])
    def test_number_operator_diagonal(self, conftest_mock_basis, arg_mode):
        basis = conftest_mock_basis
        diagonal = module_fock.number_operator_diagonal(arg_mode, basis)

        assert diagonal.shape == (basis.dim,)
        assert np.allclose(diagonal, basis.states[:, arg_mode])

    def test_number_operator_diagonal_total(self, conftest_mock_basis):
        basis = conftest_mock_basis
        total = sum(
            module_fock.number_operator_diagonal(mode, basis) for mode in range(basis.m)
        )
        assert np.allclose(total, basis.n)

    @pytest.mark.parametrize("arg_mode", [-1, 4])
    def test_number_operator_diagonal_error(self, conftest_mock_basis, arg_mode):
        with pytest.raises(IndexError, match="out of range"):
            module_fock.number_operator_diagonal(arg_mode, conftest_mock_basis)

    @pytest.mark.parametrize(
        "arg_pattern",
        [
            ((4, 2, 0), (1, 1, 0, 0)),
            ((5, 1, 0), (1, 0, 0, 0, 0)),
            ((6, 2, 2), (0, 0, 1, 1, 0, 0)),
            ((3, 0, 0), (0, 0, 0)),
        ],
    )
    def test_input_pattern(self, arg_pattern):
        arguments, compare_pattern = arg_pattern
        assert module_fock.input_pattern(*arguments) == compare_pattern

    def test_input_pattern_error(self):
        with pytest.raises(ValueError, match="Cannot place 2 photons"):
            module_fock.input_pattern(4, 2, offset=3)

    @pytest.mark.parametrize(
        "arg_state", [(1, 1, 0), (2, 0, 0, 0), (1, 0, -1, 0)]
    )
    def test_check_input_state_error(self, arg_state):
        with pytest.raises(ValueError):
            module_fock.check_input_state(arg_state, 4)

    def test_output_distribution(self, conftest_mock_basis, conftest_rng_seed):
        basis = conftest_mock_basis
        psi = conftest_rng_seed.standard_normal(basis.dim) + 1j * conftest_rng_seed.standard_normal(
            basis.dim
        )
        psi /= np.linalg.norm(psi)
        probabilities = module_fock.output_distribution(psi, basis)

        assert probabilities.shape == (basis.dim,)
        assert np.all(probabilities >= 0.0)
        assert np.isclose(probabilities.sum(), 1.0)

    def test_output_distribution_columns(self, conftest_mock_basis):
        basis = conftest_mock_basis
        states = np.eye(basis.dim, dtype=np.complex128)[:, :3]
        probabilities = module_fock.output_distribution(states, basis)

        assert probabilities.shape == (basis.dim, 3)
        assert np.allclose(probabilities.sum(axis=0), 1.0)

    def test_output_distribution_error(self, conftest_mock_basis):
        basis = conftest_mock_basis
        with pytest.raises(ValueError, match="dimension"):
            module_fock.output_distribution(np.ones(basis.dim + 1), basis)
        with pytest.raises(ValueError, match="not normalised"):
            module_fock.output_distribution(np.ones(basis.dim), basis)
