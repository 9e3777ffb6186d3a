import numpy as np
import pytest

import photonqml.modules.optimizers as module_optimizers


class TestSpsa:
    """Tests SPSA gradient estimates and updates."""

    @pytest.mark.parametrize(
        "arg_gains", [{"a": 0.0}, {"c": 0.0}, {"a": -1.0}, {"c": -0.4}]
    )
    def test_spsa_config_error(self, arg_gains):
        with pytest.raises(ValueError, match="SPSA gains must be positive"):
            module_optimizers.SpsaConfig(**arg_gains)

    def test_spsa_config_gains(self):
        constant = module_optimizers.SpsaConfig(a=2.0, c=0.5)
        decaying = module_optimizers.SpsaConfig(a=2.0, c=0.5, decay=True, stability=4.0)

        assert constant.gains(0) == constant.gains(50) == (2.0, 0.5)
        a_k, c_k = decaying.gains(9)
        assert a_k == pytest.approx(2.0 / 14.0**0.602)
        assert c_k == pytest.approx(0.5 / 10.0**0.101)
        assert decaying.gains(0)[1] == pytest.approx(0.5)

    def test_spsa_step_constant(self, conftest_rng_seed):
        cfg = module_optimizers.SpsaConfig()
        x = np.linspace(-1.0, 1.0, 6)

        assert np.array_equal(
            module_optimizers.spsa_step(lambda y: 3.0, x, cfg, conftest_rng_seed), x
        )

    def test_spsa_gradient_linear(self):
        """Linear losses give (g . Delta) Delta for the drawn Delta."""
        cfg = module_optimizers.SpsaConfig(c=0.25)
        g = np.array([1.0, -2.0, 0.5, 3.0])
        x = np.zeros(4)
        estimate = module_optimizers.spsa_gradient(
            lambda y: g @ y, x, cfg, np.random.default_rng(7)
        )
        delta = np.random.default_rng(7).choice([-1.0, 1.0], size=4)

        assert np.all(np.abs(estimate) > 0)
        assert np.allclose(estimate, (g @ delta) * delta)

    def test_spsa_gradient_unbiased(self):
        cfg = module_optimizers.SpsaConfig(c=0.1)
        rng = np.random.default_rng(444)
        A = np.diag(np.linspace(1.0, 3.0, 10))
        x = np.linspace(-1.0, 1.0, 10)
        compare_gradient = A @ x
        draws = 10000

        estimates = np.array(
            [
                module_optimizers.spsa_gradient(lambda y: 0.5 * y @ A @ y, x, cfg, rng)
                for _ in range(draws)
            ]
        )
        spread = np.sqrt(
            (np.sum(compare_gradient**2) - compare_gradient**2) / draws
        )
        assert np.all(np.abs(estimates.mean(axis=0) - compare_gradient) <= 3 * spread)

    def test_spsa_config_scaling(self):
        with pytest.raises(ValueError, match="SPSA scaling"):
            module_optimizers.SpsaConfig(scaling="layers")
        assert module_optimizers.SpsaConfig().steps_per_epoch(40) == 1
        assert module_optimizers.SpsaConfig(scaling="parameters").steps_per_epoch(40) == 40

    def test_spsa_gradient_parameters_scaling(self):
        """Scaled perturbations have length c and give the slope along them."""
        cfg = module_optimizers.SpsaConfig(c=0.25, scaling="parameters")
        g = np.array([1.0, -2.0, 0.5, 3.0])
        evaluated = []

        def loss(y):
            evaluated.append(y)
            return g @ y

        estimate = module_optimizers.spsa_gradient(loss, np.zeros(4), cfg, np.random.default_rng(7))
        direction = np.random.default_rng(7).choice([-1.0, 1.0], size=4) / 2.0

        assert np.linalg.norm(evaluated[0]) == pytest.approx(0.25)
        assert np.allclose(estimate, (g @ direction) * direction)

    def test_spsa_step_descends(self):
        cfg = module_optimizers.SpsaConfig(a=0.05, c=0.1)
        rng = np.random.default_rng(0)
        target = np.array([0.3, -0.7, 1.1])
        loss = lambda y: np.sum((y - target) ** 2)
        x = np.zeros(3)
        for k in range(300):
            x = module_optimizers.spsa_step(loss, x, cfg, rng, k)

        assert loss(x) < 1e-3


class TestAdam:
    """Tests Adam updates and the plateau schedule."""

    @pytest.mark.parametrize(
        "arg_cfg", [{"lr": 0.0}, {"betas": (1.0, 0.9)}, {"betas": (0.9, -0.1)}]
    )
    def test_adam_config_error(self, arg_cfg):
        with pytest.raises(ValueError):
            module_optimizers.AdamConfig(**arg_cfg)

    def test_adam_state_initial(self):
        cfg = module_optimizers.AdamConfig(lr=0.3)
        state = module_optimizers.AdamState.initial(5, cfg)

        assert state.lr == 0.3
        assert state.step == 0
        assert np.array_equal(state.first_moment, np.zeros(5))
        assert state.best_loss == np.inf

    def test_adam_step_first(self):
        """The first bias-corrected step has length lr in every coordinate."""
        cfg = module_optimizers.AdamConfig(lr=0.1)
        state = module_optimizers.AdamState.initial(3, cfg)
        grad = np.array([2.0, -0.5, 10.0])
        params, state = module_optimizers.adam_step(grad, np.ones(3), state, cfg)

        assert state.step == 1
        assert np.allclose(params, 1.0 - 0.1 * np.sign(grad), atol=1e-7)

    def test_adam_step_single_parameter(self):
        cfg = module_optimizers.AdamConfig(lr=0.1)
        state = module_optimizers.AdamState.initial(1, cfg)
        params = np.array([0.0])
        for _ in range(500):
            params, state = module_optimizers.adam_step(2 * (params - 3.0), params, state, cfg)

        assert abs(params[0] - 3.0) < 1e-3

    def test_adam_step_quadratic(self):
        cfg = module_optimizers.AdamConfig(lr=0.05)
        state = module_optimizers.AdamState.initial(4, cfg)
        target = np.array([1.0, -2.0, 0.5, 0.0])
        params = np.zeros(4)
        for _ in range(1000):
            params, state = module_optimizers.adam_step(2 * (params - target), params, state, cfg)

        assert np.allclose(params, target, atol=1e-2)

    def test_update_plateau(self):
        cfg = module_optimizers.AdamConfig(lr=0.1, plateau_patience=10, plateau_factor=10.0)
        state = module_optimizers.AdamState.initial(2, cfg)
        for _ in range(11):
            state = module_optimizers.update_plateau(1.0, state, cfg)

        assert len(state.lr_history) == 11
        assert state.lr_history[-2] == pytest.approx(0.1)
        assert state.lr == pytest.approx(0.01)
        assert state.stale_epochs == 0

    def test_update_plateau_min_lr(self):
        cfg = module_optimizers.AdamConfig(lr=0.1, plateau_patience=2, min_lr=1e-3)
        state = module_optimizers.AdamState.initial(2, cfg)
        for _ in range(20):
            state = module_optimizers.update_plateau(1.0, state, cfg)

        assert state.lr == pytest.approx(1e-3)
        assert min(state.lr_history) == pytest.approx(1e-3)
        with pytest.raises(ValueError, match="min_lr"):
            module_optimizers.AdamConfig(min_lr=-1.0)

    def test_update_plateau_improving(self):
        cfg = module_optimizers.AdamConfig(lr=0.1, plateau_patience=2)
        state = module_optimizers.AdamState.initial(2, cfg)
        for loss in [5.0, 4.0, 3.0, 2.0, 1.0]:
            state = module_optimizers.update_plateau(loss, state, cfg)

        assert state.lr == pytest.approx(0.1)
        assert state.best_loss == 1.0
