import numpy as np
import pytest

import photonqml.modules.ansatz as module_ansatz
from photonqml.kernel.lift import lift_unitary
from photonqml.modules.mesh import make_layout


class TestParamBinding:
    """Tests binding phases to parameters, features and constants."""

    def test_trainable_binding(self):
        layout = make_layout(4, 1)
        binding = module_ansatz.trainable_binding(layout, K=5, fixed_values=np.arange(12.0))

        assert binding.trainable_count == 5
        assert np.array_equal(binding.parameter_phases(), np.arange(5))
        phases = binding.resolve(theta=-np.ones(5))
        assert np.allclose(phases[:5], -1.0)
        assert np.allclose(phases[5:], np.arange(5.0, 12.0))

    @pytest.mark.parametrize("arg_K", [-1, 13])
    def test_trainable_binding_error(self, arg_K):
        with pytest.raises(ValueError, match="cannot train"):
            module_ansatz.trainable_binding(make_layout(4, 1), K=arg_K)

    def test_encoding_binding(self):
        layout = make_layout(4, 1)
        binding = module_ansatz.encoding_binding(layout, 4)

        assert binding.feature_count == 4
        assert binding.trainable_count == 0
        # external phases 1 and 3 sit on untouched input ports
        assert binding.tags[1] == module_ansatz.Fixed(0.0)
        assert binding.tags[3] == module_ansatz.Fixed(0.0)
        assert binding.describe()[:3] == ["x[0]", "fixed(0.0)", "x[1]"]
        phases = binding.resolve(x=np.array([0.1, 0.2, 0.3, 0.4]))
        assert np.allclose(phases[[0, 2, 4, 5]], [0.1, 0.2, 0.3, 0.4])

    def test_encoding_binding_error(self):
        with pytest.raises(ValueError, match="active phases"):
            module_ansatz.encoding_binding(make_layout(4, 1), 11)

    @pytest.mark.parametrize(
        "arg_tags",
        [
            (module_ansatz.Trainable(0), module_ansatz.Trainable(2)),
            (module_ansatz.Trainable(1), module_ansatz.Trainable(1)),
            (module_ansatz.DataEncoding(0), module_ansatz.DataEncoding(0)),
            (module_ansatz.DataEncoding(-1),),
        ],
    )
    def test_param_binding_error(self, arg_tags):
        with pytest.raises(ValueError):
            module_ansatz.ParamBinding(tags=arg_tags)


class TestCircuitAnsatz:
    """Tests building and evaluating circuits."""

    def test_build_ansatz(self, conftest_mock_ansatz):
        ansatz = conftest_mock_ansatz

        assert ansatz.input_state == (1, 1, 0, 0)
        assert ansatz.encoder.phase_count == 0
        assert ansatz.body.phase_count == 12
        assert ansatz.describe()["K"] == 12

    def test_build_ansatz_fixed_seed(self):
        ansatz = module_ansatz.build_ansatz(4, 2, K=3, fixed_seed=5)
        fixed = [t.value for t in ansatz.body_binding.tags[3:]]

        assert ansatz.K == 3
        assert len(set(fixed)) == 9
        assert all(0.0 <= value < 2 * np.pi for value in fixed)

    def test_build_ansatz_error(self):
        with pytest.raises(ValueError, match="does not hold n=2 photons"):
            module_ansatz.build_ansatz(4, 2, input_state=(1, 0, 0, 0))

    def test_encode_data(self, conftest_boilerplate):
        ansatz = module_ansatz.build_ansatz(4, 2, encoder_features=6)
        x = np.linspace(0.0, np.pi, 6)
        unitary = module_ansatz.encode_data(ansatz, x)

        assert conftest_boilerplate.check_unitary(unitary)
        assert not np.allclose(unitary, module_ansatz.encode_data(ansatz, x[::-1]))
        state = module_ansatz.encoded_state(ansatz, x)
        assert np.isclose(np.linalg.norm(state), 1.0)

    def test_encode_data_error(self):
        ansatz = module_ansatz.build_ansatz(4, 2, encoder_features=6)
        with pytest.raises(IndexError, match="feature vector has length 5"):
            module_ansatz.encode_data(ansatz, np.zeros(5))

    def test_trainable_unitary_error(self, conftest_mock_ansatz):
        with pytest.raises(ValueError, match="K=12 parameters"):
            module_ansatz.trainable_unitary(conftest_mock_ansatz, np.zeros(11))


class TestDerivatives:
    """Tests analytic derivatives of the lifted body."""

    def test_lifted_derivative(self, conftest_mock_ansatz, conftest_mock_theta):
        ansatz = conftest_mock_ansatz
        theta = conftest_mock_theta
        step = 1e-5

        for i in range(ansatz.K):
            shift = np.zeros(ansatz.K)
            shift[i] = step
            numerical = (
                lift_unitary(module_ansatz.trainable_unitary(ansatz, theta + shift), ansatz.basis)
                - lift_unitary(module_ansatz.trainable_unitary(ansatz, theta - shift), ansatz.basis)
            ) / (2 * step)
            analytic = module_ansatz.lifted_derivative(ansatz, theta, i)
            assert np.max(np.abs(analytic - numerical)) < 1e-6

    def test_lifted_derivative_error(self, conftest_mock_ansatz, conftest_mock_theta):
        with pytest.raises(IndexError, match="out of range for K=12"):
            module_ansatz.lifted_derivative(conftest_mock_ansatz, conftest_mock_theta, 12)

    @pytest.mark.parametrize("arg_K", [1, 7, None])
    def test_derivative_states(self, conftest_rng_seed, arg_K):
        ansatz = module_ansatz.build_ansatz(4, 2, body_layers=2, K=arg_K, fixed_seed=3)
        theta = conftest_rng_seed.uniform(0.0, 2 * np.pi, ansatz.K)
        states = np.eye(ansatz.basis.dim, dtype=np.complex128)[:, :4]
        outputs, derivatives = module_ansatz.derivative_states(ansatz, theta, states)

        lifted = lift_unitary(module_ansatz.trainable_unitary(ansatz, theta), ansatz.basis)
        assert np.allclose(outputs, lifted @ states, atol=1e-12)
        assert derivatives.shape == (ansatz.K, ansatz.basis.dim, 4)
        for i in range(ansatz.K):
            compare_derivative = module_ansatz.lifted_derivative(ansatz, theta, i) @ states
            assert np.allclose(derivatives[i], compare_derivative, atol=1e-10)
