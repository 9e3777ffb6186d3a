"""
Learn an unknown mode unitary V from its action on a few Fock states.

The body U(theta) is trained on C_train and judged by the matrix
closeness C_M(U(theta), V), which ignores local phases and mode
permutations.
"""

import logging
from dataclasses import asdict, dataclass, field

import numpy as np

from photonqml.kernel.fock import FockBasis, enumerate_basis, input_pattern
from photonqml.kernel.lift import evolve_fock_state, lift_unitary
from photonqml.modules.ansatz import CircuitAnsatz, build_ansatz, trainable_unitary
from photonqml.modules.evaluation import matrix_closeness
from photonqml.modules.losses import fidelity_loss, unitary_loss_gradient
from photonqml.modules.mesh import haar_random_unitary
from photonqml.modules.optimizers import AdamConfig, SpsaConfig
from photonqml.modules.training import TrainRecord, train

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class UnitaryTaskSpec:
    """Settings of one unitary-learning run.

    Attributes:
        m: Number of modes.
        n: Photons per training state.
        L: Number of training states.
        target_seed: Seed of the Haar-random target V.
        data_seed: Seed of the training-state encoders.
        init_seed: Seed of the initial parameters and optimizer noise.
        dataset: "haar" for Haar-encoded input patterns, "ports" for
            bare Fock states on disjoint input ports.
        closeness_side: Side on which C_M quotients phases and
            permutations.
        body_layers: Stacked meshes in the trainable body.
        layout: Rectangular mesh arrangement.
        optimizer: "spsa" or "adam".
        spsa: SPSA gains. Defaults to one step per trainable phase and
            epoch.
        adam: Adam settings.
        max_epochs: Number of training epochs.
        checkpoint_every: Epoch interval of parameter checkpoints.
        success_threshold: C_M below which the target counts as learnt.
        failure_threshold: C_M above which training counts as stalled.
    """

    m: int = 5
    n: int = 2
    L: int = 2
    target_seed: int = 0
    data_seed: int = 1
    init_seed: int = 2
    dataset: str = "haar"
    closeness_side: str = "output"
    body_layers: int = 2
    layout: str = "clements"
    optimizer: str = "spsa"
    spsa: SpsaConfig = field(default_factory=lambda: SpsaConfig(a=1.0, scaling="parameters"))
    adam: AdamConfig = field(default_factory=AdamConfig)
    max_epochs: int = 300
    checkpoint_every: int = 10
    success_threshold: float = 0.05
    failure_threshold: float = 0.15

    def __post_init__(self):
        if self.L < 1:
            raise ValueError(f"Training set size L must be at least 1, got {self.L}")
        if not 1 <= self.n <= self.m:
            raise ValueError(f"Photon count n must be in [1, m={self.m}], got {self.n}")


class UnitaryObjective:
    """Training loss C_train on fixed states and target outputs."""

    def __init__(self, ansatz: CircuitAnsatz, states: np.ndarray, targets: np.ndarray):
        self.ansatz = ansatz
        self.states = states
        self.targets = targets

    def loss(self, theta: np.ndarray, rng=None) -> float:
        unitary = trainable_unitary(self.ansatz, theta)
        outputs = lift_unitary(unitary, self.ansatz.basis) @ self.states
        return fidelity_loss(outputs, self.targets)

    def loss_and_gradient(self, theta: np.ndarray) -> tuple:
        return unitary_loss_gradient(theta, self.ansatz, self.states, self.targets)


def get_training_patterns(m: int, n: int, L: int, dataset: str) -> list:
    """Get the input occupations of the training states.

    Raises:
        ValueError: Dataset kind is not allowed, or ports do not fit.
    """
    dataset_allowed = ["haar", "ports"]
    if dataset == "haar":
        return [input_pattern(m, n, offset=l % (m - n + 1)) for l in range(L)]
    elif dataset == "ports":
        if n * L > m:
            raise ValueError(
                f"Port datasets need n*L <= m disjoint input modes, got n*L = {n * L} > m = {m}"
            )
        return [input_pattern(m, n, offset=l * n) for l in range(L)]
    else:
        error_message = (
            f'Unitary dataset = "{dataset}"',
            "is not allowed, must be one of",
            f'{", ".join(dataset_allowed)}',
        )
        raise ValueError(" ".join(error_message))


def get_training_states(spec: UnitaryTaskSpec, basis: FockBasis) -> np.ndarray:
    """Build the L training states, one per column."""
    patterns = get_training_patterns(spec.m, spec.n, spec.L, spec.dataset)
    if spec.dataset == "ports":
        return np.column_stack([basis.basis_vector(p) for p in patterns]).astype(np.complex128)

    rng = np.random.default_rng(spec.data_seed)
    return np.column_stack(
        [evolve_fock_state(haar_random_unitary(spec.m, rng), basis, p) for p in patterns]
    )


def run_unitary_learning(spec: UnitaryTaskSpec) -> TrainRecord:
    """Train U(theta) towards a Haar-random V and track C_M per epoch.

    Returns:
        Training record with per-epoch "closeness" and final metrics
        "closeness", "generalized" and "stalled".
    """
    basis = enumerate_basis(spec.m, spec.n)
    ansatz = build_ansatz(spec.m, spec.n, body_layers=spec.body_layers, variant=spec.layout)
    target = haar_random_unitary(spec.m, spec.target_seed)
    states = get_training_states(spec, basis)
    targets = lift_unitary(target, basis) @ states
    objective = UnitaryObjective(ansatz, states, targets)
    theta0 = np.random.default_rng(spec.init_seed).uniform(0.0, 2 * np.pi, ansatz.K)

    def evaluate(theta, epoch):
        unitary = trainable_unitary(ansatz, theta)
        return {"closeness": matrix_closeness(unitary, target, side=spec.closeness_side)}

    logger.info(
        "Unitary learning: m=%d, n=%d, L=%d, dataset=%s, K=%d",
        spec.m,
        spec.n,
        spec.L,
        spec.dataset,
        ansatz.K,
    )
    record = train(
        objective,
        theta0,
        optimizer=spec.optimizer,
        spsa=spec.spsa,
        adam=spec.adam,
        max_epochs=spec.max_epochs,
        seed=spec.init_seed,
        evaluate=evaluate,
        checkpoint_every=spec.checkpoint_every,
        config=asdict(spec),
    )
    closeness = record.metrics["closeness"][-1]
    record.final_metrics.update(
        {
            "closeness": closeness,
            "train_loss": record.train_loss[-1],
            "generalized": bool(closeness < spec.success_threshold),
            "stalled": bool(closeness > spec.failure_threshold),
            "K": ansatz.K,
        }
    )

    return record
