"""
Epoch loop shared by both learning tasks.

An objective exposes ``loss(theta, rng)`` and, for gradient-based
optimizers, ``loss_and_gradient(theta)``. Objectives with mini-batches
also expose ``resample(rng)``, called once at the start of each epoch.
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from photonqml.modules.optimizers import (
    AdamConfig,
    AdamState,
    SpsaConfig,
    adam_step,
    spsa_step,
    update_plateau,
)

logger = logging.getLogger(__name__)


class TrainingError(RuntimeError):
    """Loss oracle or numerics failed during training."""


@dataclass
class TrainRecord:
    """Trajectory of one training run.

    Attributes:
        seed: Seed of the run.
        config: Settings needed to replay the run.
        train_loss: Training loss per epoch, epoch 0 first.
        test_loss: Test loss per epoch, empty without a test set.
        metrics: Further per-epoch metrics by name.
        checkpoints: Parameter vectors by epoch.
        final_metrics: Metrics of the final parameters.
    """

    seed: int
    config: dict = field(default_factory=dict)
    train_loss: list = field(default_factory=list)
    test_loss: list = field(default_factory=list)
    metrics: dict = field(default_factory=dict)
    checkpoints: dict = field(default_factory=dict)
    final_metrics: dict = field(default_factory=dict)

    @property
    def epochs(self) -> int:
        return len(self.train_loss) - 1

    @property
    def final_theta(self) -> list:
        if not self.checkpoints:
            return []
        return self.checkpoints[max(self.checkpoints)]

    def log_epoch(self, epoch: int, train_loss: float, metrics: dict):
        self.train_loss.append(float(train_loss))
        for name, value in metrics.items():
            if name == "test_loss":
                self.test_loss.append(float(value))
            else:
                self.metrics.setdefault(name, []).append(float(value))
        logger.debug("Epoch %d: train loss %.6g", epoch, train_loss)

    def checkpoint(self, epoch: int, theta: np.ndarray):
        self.checkpoints[epoch] = [float(value) for value in theta]

    def get_rows(self) -> list:
        """Get one JSON-serialisable row per epoch."""
        rows = []
        for epoch, loss in enumerate(self.train_loss):
            row = {"epoch": epoch, "train_loss": loss}
            if self.test_loss:
                row["test_loss"] = self.test_loss[epoch]
            for name, values in self.metrics.items():
                row[name] = values[epoch]
            if epoch in self.checkpoints:
                row["theta"] = self.checkpoints[epoch]
            rows.append(row)
        return rows

    def summary(self) -> dict:
        summary = {
            "seed": self.seed,
            "epochs": self.epochs,
            "initial_train_loss": self.train_loss[0] if self.train_loss else None,
            "final_train_loss": self.train_loss[-1] if self.train_loss else None,
            "final_metrics": self.final_metrics,
            "final_theta": self.final_theta,
        }
        if self.test_loss:
            summary["final_test_loss"] = self.test_loss[-1]
        return summary


def get_optimizer_step(objective, optimizer: str, spsa: SpsaConfig, adam: AdamConfig, size: int):
    """Get a function advancing the parameters by one epoch.

    Implemented optimizers:

        - **spsa**: two loss evaluations per SPSA step, one step per
          epoch or one per parameter with "parameters" scaling.
        - **adam**: exact gradients with a plateau schedule.

    Raises:
        ValueError: Optimizer is not allowed.
    """
    optimizer_allowed = ["spsa", "adam"]
    if optimizer == "spsa":
        steps = spsa.steps_per_epoch(size)

        def step(theta, rng, epoch):
            for i in range(steps):
                k = (epoch - 1) * steps + i
                theta = spsa_step(lambda x: objective.loss(x, rng), theta, spsa, rng, k)
            return theta

        return step, None
    elif optimizer == "adam":
        state = AdamState.initial(size, adam)

        def step(theta, rng, epoch):
            _, gradient = objective.loss_and_gradient(theta)
            theta, _ = adam_step(gradient, theta, state, adam)
            return theta

        return step, state
    else:
        error_message = (
            f'Optimizer = "{optimizer}"',
            "is not allowed, must be one of",
            f'{", ".join(optimizer_allowed)}',
        )
        raise ValueError(" ".join(error_message))


def train(
    objective,
    theta0: np.ndarray,
    optimizer: str = "spsa",
    spsa: Optional[SpsaConfig] = None,
    adam: Optional[AdamConfig] = None,
    max_epochs: int = 300,
    seed: int = 0,
    evaluate: Optional[Callable] = None,
    checkpoint_every: int = 10,
    config: Optional[dict] = None,
) -> TrainRecord:
    """Train parameters over a fixed number of epochs.

    Epoch 0 records the initial parameters; each later epoch applies
    one optimizer update and records the loss at the new parameters.

    Args:
        objective: Loss oracle.
        theta0: Initial parameters.
        optimizer: "spsa" or "adam".
        spsa: SPSA gains.
        adam: Adam settings.
        max_epochs: Number of training epochs.
        seed: Seed of the perturbations, batches and shot noise.
        evaluate: Called as ``evaluate(theta, epoch)`` after every epoch,
            returning metrics by name. A "test_loss" entry is stored as
            the test loss.
        checkpoint_every: Epoch interval of parameter checkpoints. The
            initial and final parameters are always stored.
        config: Settings echoed into the record.

    Returns:
        The training record.

    Raises:
        TrainingError: The loss oracle failed or returned a non-finite
            value. The message names the epoch.
    """
    if max_epochs < 0:
        raise ValueError(f"max_epochs must be non-negative, got {max_epochs}")
    spsa = spsa or SpsaConfig()
    adam = adam or AdamConfig()
    rng = np.random.default_rng(seed)
    theta = np.array(theta0, dtype=np.float64)
    record = TrainRecord(seed=seed, config=dict(config or {}))
    step, adam_state = get_optimizer_step(objective, optimizer, spsa, adam, theta.size)

    for epoch in range(max_epochs + 1):
        try:
            if hasattr(objective, "resample"):
                objective.resample(rng)
            if epoch > 0:
                theta = step(theta, rng, epoch)
            loss = objective.loss(theta, rng)
            metrics = evaluate(theta, epoch) if evaluate is not None else {}
        except (ArithmeticError, ValueError, IndexError, np.linalg.LinAlgError) as err:
            raise TrainingError(f"Training failed at epoch {epoch}: {err}") from err
        if not np.all(np.isfinite(theta)) or not np.isfinite(loss):
            raise TrainingError(f"Training diverged at epoch {epoch}: loss {loss}")

        record.log_epoch(epoch, loss, metrics)
        if adam_state is not None and epoch > 0:
            update_plateau(loss, adam_state, adam)
        if epoch % max(checkpoint_every, 1) == 0 or epoch == max_epochs:
            record.checkpoint(epoch, theta)

    logger.info(
        "Trained %d epochs with %s: loss %.6g -> %.6g",
        max_epochs,
        optimizer,
        record.train_loss[0],
        record.train_loss[-1],
    )

    return record
