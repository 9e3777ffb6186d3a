"""
Metric learning on photon-count distributions.

Each sample x is written into encoder phases; the trainable body maps
the encoded state to an output distribution over Fock states, and the
contrastive pair loss pulls same-class distributions together.
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from photonqml.kernel.lift import lift_unitary
from photonqml.modules.ansatz import (
    CircuitAnsatz,
    build_ansatz,
    derivative_states,
    encoded_state,
    trainable_unitary,
)
from photonqml.modules.evaluation import (
    fit_threshold,
    gram_matrix,
    pair_similarities,
    pairwise_accuracy,
    sample_counts,
)
from photonqml.modules.losses import metric_batch_gradient, metric_batch_loss
from photonqml.modules.optimizers import AdamConfig, SpsaConfig
from photonqml.modules.training import TrainRecord, train
from photonqml.utilities.vowels.vowel_dataset import FeatureScaling, VowelDataset, split_dataset

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MetricTaskSpec:
    """Settings of one metric-learning run.

    Attributes:
        dataset: Unnormalised labelled samples.
        m: Number of modes.
        n: Number of input photons.
        encoder_features: Features written into the encoder.
        body_layers: Stacked meshes in the trainable body.
        layout: Rectangular mesh arrangement.
        split_ratio: Training fraction per class.
        margin: Similarity margin for different-class pairs.
        batch_size: Training samples per epoch, 0 for the full split.
        shots: Detection events per distribution, 0 for exact
            probabilities.
        optimizer: "spsa" or "adam".
        spsa: SPSA gains.
        adam: Adam settings.
        max_epochs: Number of training epochs.
        seed: Seed of the split, initial parameters and noise.
        gram_epochs: Epochs at which test Gram matrices are kept.
        checkpoint_every: Epoch interval of parameter checkpoints.
    """

    dataset: VowelDataset = field(repr=False)
    m: int = 6
    n: int = 2
    encoder_features: int = 12
    body_layers: int = 1
    layout: str = "clements"
    split_ratio: float = 0.7
    margin: float = 0.3
    batch_size: int = 0
    shots: int = 0
    optimizer: str = "spsa"
    spsa: SpsaConfig = field(default_factory=lambda: SpsaConfig(a=150.0))
    adam: AdamConfig = field(default_factory=AdamConfig)
    max_epochs: int = 300
    seed: int = 0
    gram_epochs: tuple = ()
    checkpoint_every: int = 10

    def __post_init__(self):
        if not 1 <= self.n <= self.m:
            raise ValueError(f"Photon count n must be in [1, m={self.m}], got {self.n}")
        if self.margin < 0:
            raise ValueError(f"Margin must be non-negative, got {self.margin}")
        if self.batch_size < 0:
            raise ValueError(f"batch_size must be non-negative, got {self.batch_size}")

    def describe(self) -> dict:
        return {
            "m": self.m,
            "n": self.n,
            "encoder_features": self.encoder_features,
            "body_layers": self.body_layers,
            "layout": self.layout,
            "split_ratio": self.split_ratio,
            "margin": self.margin,
            "batch_size": self.batch_size,
            "shots": self.shots,
            "optimizer": self.optimizer,
            "max_epochs": self.max_epochs,
            "seed": self.seed,
            "gram_epochs": list(self.gram_epochs),
            "loss": "contrastive: 1 - S_C for same class, max(0, S_C - margin) otherwise",
            "samples": self.dataset.size,
        }


@dataclass(eq=False)
class MetricRun:
    """Outputs of a metric-learning run.

    Attributes:
        record: Training record.
        grams: Test Gram matrices at the configured epochs.
        threshold: Similarity threshold fitted on training pairs.
        accuracy: Final pairwise accuracy on test pairs.
    """

    record: TrainRecord
    grams: list = field(default_factory=list)
    threshold: float = 0.5
    accuracy: float = float("nan")


def get_probabilities(states: np.ndarray, shots: int = 0, rng=None) -> np.ndarray:
    """Get output distributions, sampled when shots are set."""
    probabilities = np.abs(states) ** 2
    if shots <= 0:
        return probabilities

    return np.column_stack(
        [sample_counts(p, shots, rng) / shots for p in probabilities.T]
    )


class MetricObjective:
    """Contrastive loss over the training split."""

    def __init__(
        self,
        ansatz: CircuitAnsatz,
        states: np.ndarray,
        labels: np.ndarray,
        margin: float,
        batch_size: int = 0,
        shots: int = 0,
    ):
        self.ansatz = ansatz
        self.states = states
        self.labels = np.asarray(labels)
        self.margin = margin
        self.batch_size = batch_size
        self.shots = shots
        self.batch = np.arange(states.shape[1])

    def resample(self, rng: np.random.Generator):
        if 0 < self.batch_size < self.states.shape[1]:
            self.batch = np.sort(rng.choice(self.states.shape[1], self.batch_size, replace=False))

    def outputs(self, theta: np.ndarray, columns=None) -> np.ndarray:
        columns = self.batch if columns is None else columns
        unitary = lift_unitary(trainable_unitary(self.ansatz, theta), self.ansatz.basis)
        return unitary @ self.states[:, columns]

    def loss(self, theta: np.ndarray, rng=None) -> float:
        probabilities = get_probabilities(self.outputs(theta), self.shots, rng)
        return metric_batch_loss(probabilities, self.labels[self.batch], self.margin)

    def loss_and_gradient(self, theta: np.ndarray) -> tuple:
        outputs, derivatives = derivative_states(
            self.ansatz, theta, self.states[:, self.batch]
        )
        return metric_batch_gradient(outputs, derivatives, self.labels[self.batch], self.margin)


def encode_dataset(ansatz: CircuitAnsatz, dataset: VowelDataset) -> np.ndarray:
    """Get Phi(S(x)) |n> for every sample, one per column."""
    return np.column_stack([encoded_state(ansatz, x) for x in dataset.features])


def run_metric_learning(spec: MetricTaskSpec) -> MetricRun:
    """Train the contrastive loss and evaluate pairwise accuracy.

    Features are scaled to [0, pi] with ranges from the training split
    only. The accuracy threshold is fitted on training pairs and then
    applied unchanged to test pairs.
    """
    train_set, test_set = split_dataset(spec.dataset, spec.split_ratio, spec.seed)
    scaling = FeatureScaling.fit(train_set)
    train_set, test_set = scaling.apply(train_set), scaling.apply(test_set)

    ansatz = build_ansatz(
        spec.m,
        spec.n,
        body_layers=spec.body_layers,
        encoder_features=spec.encoder_features,
        variant=spec.layout,
    )
    train_states = encode_dataset(ansatz, train_set)
    test_states = encode_dataset(ansatz, test_set)
    train_labels = np.asarray(train_set.labels)
    test_labels = np.asarray(test_set.labels)
    objective = MetricObjective(
        ansatz, train_states, train_labels, spec.margin, spec.batch_size, spec.shots
    )
    test_objective = MetricObjective(ansatz, test_states, test_labels, spec.margin)
    grams = []

    def get_accuracy(theta) -> tuple:
        train_probabilities = np.abs(objective.outputs(theta, slice(None))) ** 2
        similarities, same = pair_similarities(train_probabilities, train_labels)
        threshold = fit_threshold(similarities, same)
        test_probabilities = np.abs(test_objective.outputs(theta)) ** 2
        similarities, same = pair_similarities(test_probabilities, test_labels)
        return threshold, pairwise_accuracy(similarities, same, threshold), test_probabilities

    def evaluate(theta, epoch):
        metrics = {"test_loss": test_objective.loss(theta)}
        if epoch in spec.gram_epochs:
            _, accuracy, test_probabilities = get_accuracy(theta)
            grams.append(gram_matrix(test_probabilities, test_labels, epoch))
            logger.info("Epoch %d: test pairwise accuracy %.3f", epoch, accuracy)
        return metrics

    theta0 = np.random.default_rng([spec.seed, 1]).uniform(0.0, 2 * np.pi, ansatz.K)
    logger.info(
        "Metric learning: m=%d, n=%d, D=%d, K=%d, %d train / %d test samples",
        spec.m,
        spec.n,
        ansatz.basis.dim,
        ansatz.K,
        train_set.size,
        test_set.size,
    )
    record = train(
        objective,
        theta0,
        optimizer=spec.optimizer,
        spsa=spec.spsa,
        adam=spec.adam,
        max_epochs=spec.max_epochs,
        seed=spec.seed,
        evaluate=evaluate,
        checkpoint_every=spec.checkpoint_every,
        config=spec.describe(),
    )
    final_theta = np.asarray(record.final_theta)
    threshold, accuracy, _ = get_accuracy(final_theta)
    _, initial_accuracy, _ = get_accuracy(np.asarray(record.checkpoints[0]))
    record.final_metrics.update(
        {
            "test_loss": record.test_loss[-1],
            "train_loss": record.train_loss[-1],
            "pairwise_accuracy": accuracy,
            "initial_pairwise_accuracy": initial_accuracy,
            "threshold": threshold,
            "K": ansatz.K,
        }
    )

    return MetricRun(record=record, grams=grams, threshold=threshold, accuracy=accuracy)
