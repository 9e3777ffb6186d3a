"""SPSA and Adam updates with a plateau learning-rate schedule."""

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class SpsaConfig:
    """SPSA gains.

    With ``decay`` the gains follow a_k = a / (k + 1 + stability)^alpha
    and c_k = c / (k + 1)^gamma, otherwise they stay fixed.

    Implemented scalings:

        - **none**: one step per epoch with a +-c perturbation on every
          parameter.
        - **parameters**: one step per parameter and epoch. The
          perturbation is a random direction of length c and the step
          is a times the slope along it, so a no longer grows with the
          number of parameters.
    """

    a: float = 3.0
    c: float = 0.4
    max_epochs: int = 300
    seed: int = 0
    scaling: str = "none"
    decay: bool = False
    alpha: float = 0.602
    gamma: float = 0.101
    stability: float = 0.0

    def __post_init__(self):
        if self.a <= 0 or self.c <= 0:
            raise ValueError(f"SPSA gains must be positive, got a={self.a}, c={self.c}")
        scaling_allowed = ["none", "parameters"]
        if self.scaling not in scaling_allowed:
            error_message = (
                f'SPSA scaling = "{self.scaling}"',
                "is not allowed, must be one of",
                f'{", ".join(scaling_allowed)}',
            )
            raise ValueError(" ".join(error_message))

    def gains(self, k: int) -> tuple:
        if not self.decay:
            return self.a, self.c
        return (
            self.a / (k + 1 + self.stability) ** self.alpha,
            self.c / (k + 1) ** self.gamma,
        )

    def steps_per_epoch(self, size: int) -> int:
        if self.scaling == "parameters":
            return max(size, 1)
        return 1


@dataclass(frozen=True)
class AdamConfig:
    lr: float = 0.1
    betas: tuple = (0.9, 0.999)
    epsilon: float = 1e-8
    plateau_patience: int = 10
    plateau_factor: float = 10.0
    min_lr: float = 1e-4

    def __post_init__(self):
        if self.lr <= 0:
            raise ValueError(f"Learning rate must be positive, got {self.lr}")
        if not all(0 <= beta < 1 for beta in self.betas):
            raise ValueError(f"Adam betas must be in [0, 1), got {self.betas}")
        if self.min_lr < 0:
            raise ValueError(f"min_lr must be non-negative, got {self.min_lr}")


@dataclass
class AdamState:
    """Moment estimates and schedule of an Adam run."""

    first_moment: np.ndarray
    second_moment: np.ndarray
    lr: float
    step: int = 0
    best_loss: float = np.inf
    stale_epochs: int = 0
    lr_history: list = field(default_factory=list)

    @classmethod
    def initial(cls, size: int, cfg: AdamConfig) -> "AdamState":
        return cls(
            first_moment=np.zeros(size),
            second_moment=np.zeros(size),
            lr=cfg.lr,
        )


def spsa_gradient(f, x: np.ndarray, cfg: SpsaConfig, rng: np.random.Generator, k: int = 0) -> np.ndarray:
    """Estimate a gradient from two loss evaluations.

    Draws Rademacher perturbations Delta and returns
    (f(x + c Delta) - f(x - c Delta)) / (2c) * Delta. Dividing by
    Delta_i equals multiplying by it since Delta_i = +-1.

    With "parameters" scaling Delta is divided by sqrt(K) for K
    parameters. The estimate is then the slope along the unit vector
    Delta times Delta, whose mean is the gradient divided by K.
    """
    _, c_k = cfg.gains(k)
    delta = rng.choice([-1.0, 1.0], size=x.shape)
    if cfg.scaling == "parameters":
        delta /= np.sqrt(delta.size)
    difference = f(x + c_k * delta) - f(x - c_k * delta)

    return difference / (2.0 * c_k) * delta


def spsa_step(f, x: np.ndarray, cfg: SpsaConfig, rng: np.random.Generator, k: int = 0) -> np.ndarray:
    """Apply one SPSA update x - a_k * gradient estimate.

    Args:
        f: Loss oracle.
        x: Parameters.
        cfg: SPSA gains.
        rng: Source of the perturbations.
        k: Iteration index, only used with decaying gains.

    Returns:
        Updated parameters.
    """
    x = np.asarray(x, dtype=np.float64)
    a_k, _ = cfg.gains(k)

    return x - a_k * spsa_gradient(f, x, cfg, rng, k)


def adam_step(grad: np.ndarray, params: np.ndarray, state: AdamState, cfg: AdamConfig) -> tuple:
    """Apply one Adam update.

    Returns:
        tuple[np.ndarray, AdamState]: Updated parameters and state.
    """
    beta1, beta2 = cfg.betas
    grad = np.asarray(grad, dtype=np.float64)
    state.step += 1
    state.first_moment = beta1 * state.first_moment + (1 - beta1) * grad
    state.second_moment = beta2 * state.second_moment + (1 - beta2) * grad**2
    first_hat = state.first_moment / (1 - beta1**state.step)
    second_hat = state.second_moment / (1 - beta2**state.step)
    params = np.asarray(params, dtype=np.float64) - state.lr * first_hat / (
        np.sqrt(second_hat) + cfg.epsilon
    )

    return params, state


def update_plateau(loss: float, state: AdamState, cfg: AdamConfig) -> AdamState:
    """Divide the learning rate after too many epochs without improvement.

    The learning rate never drops below ``min_lr``.
    """
    if loss < state.best_loss:
        state.best_loss = loss
        state.stale_epochs = 0
    else:
        state.stale_epochs += 1
        if state.stale_epochs >= cfg.plateau_patience:
            state.lr = max(state.lr / cfg.plateau_factor, min(cfg.min_lr, state.lr))
            state.stale_epochs = 0
    state.lr_history.append(state.lr)

    return state
