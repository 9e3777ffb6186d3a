"""Losses of the unitary-learning and metric-learning tasks."""

import numpy as np

from photonqml.kernel.lift import lift_unitary
from photonqml.modules.ansatz import CircuitAnsatz, derivative_states, trainable_unitary


def fidelity_loss(outputs: np.ndarray, targets: np.ndarray) -> float:
    """Get 1 - mean |<target_l|output_l>|^2 over state columns."""
    overlaps = np.sum(targets.conj() * outputs, axis=0)

    return float(1.0 - np.mean(np.abs(overlaps) ** 2))


def unitary_loss(
    theta: np.ndarray, ansatz: CircuitAnsatz, target: np.ndarray, states: np.ndarray
) -> float:
    """Get C_train = 1 - mean |<phi_l|V^H U(theta)|phi_l>|^2.

    Args:
        theta: Trainable parameters.
        ansatz: Circuit ansatz.
        target: Target mode unitary V.
        states: Training states in the ansatz basis, shape (D, L).

    Raises:
        ValueError: States do not live in the ansatz basis.
    """
    states = check_states(states, ansatz)
    basis = ansatz.basis
    outputs = lift_unitary(trainable_unitary(ansatz, theta), basis) @ states
    targets = lift_unitary(target, basis) @ states

    return fidelity_loss(outputs, targets)


def unitary_loss_gradient(
    theta: np.ndarray, ansatz: CircuitAnsatz, states: np.ndarray, targets: np.ndarray
) -> tuple:
    """Get C_train and its exact gradient.

    Args:
        theta: Trainable parameters.
        ansatz: Circuit ansatz.
        states: Training states, shape (D, L).
        targets: Target outputs Phi(V) states, shape (D, L).

    Returns:
        tuple[float, np.ndarray]: Loss and gradient of length K.
    """
    outputs, derivatives = derivative_states(ansatz, theta, states)
    overlaps = np.sum(targets.conj() * outputs, axis=0)
    derivative_overlaps = np.einsum("dl,kdl->kl", targets.conj(), derivatives)
    gradient = -2.0 * np.mean(
        np.real(overlaps.conj()[np.newaxis, :] * derivative_overlaps), axis=1
    )

    return fidelity_loss(outputs, targets), gradient


def check_states(states: np.ndarray, ansatz: CircuitAnsatz) -> np.ndarray:
    states = np.asarray(states, dtype=np.complex128)
    if states.ndim == 1:
        states = states[:, np.newaxis]
    if states.shape[0] != ansatz.basis.dim:
        raise ValueError(
            f"States have dimension {states.shape[0]}, ansatz basis has {ansatz.basis.dim}"
        )
    return states


def cosine_similarity(p: np.ndarray, q: np.ndarray) -> float:
    """Get S_C(p, q) = sum_i sqrt(p_i q_i).

    Raises:
        ValueError: Distributions have different lengths.
    """
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if p.shape != q.shape:
        raise ValueError(f"Distributions differ in shape: {p.shape} and {q.shape}")

    return float(np.sum(np.sqrt(np.clip(p, 0.0, None) * np.clip(q, 0.0, None))))


def metric_pair_loss(p: np.ndarray, q: np.ndarray, same_class: bool, margin: float = 0.3) -> float:
    """Get the contrastive loss of one pair of output distributions.

    Same-class pairs contribute 1 - S_C, different-class pairs
    max(0, S_C - margin).
    """
    similarity = cosine_similarity(p, q)
    if same_class:
        return 1.0 - similarity

    return max(0.0, similarity - margin)


def pair_weights(similarities: np.ndarray, same: np.ndarray, margin: float) -> tuple:
    """Get per-pair losses and their derivatives with respect to S_C."""
    losses = np.where(same, 1.0 - similarities, np.maximum(0.0, similarities - margin))
    slopes = np.where(same, -1.0, (similarities > margin).astype(np.float64))

    return losses, slopes


def metric_batch_loss(probabilities: np.ndarray, labels: np.ndarray, margin: float = 0.3) -> float:
    """Get the mean contrastive loss over all pairs of a batch.

    Args:
        probabilities: Output distributions, one per column, shape (D, N).
        labels: Class label per column.
        margin: Margin for different-class pairs.
    """
    amplitudes = np.sqrt(np.clip(probabilities, 0.0, None))
    upper = np.triu_indices(amplitudes.shape[1], k=1)
    similarities = (amplitudes.T @ amplitudes)[upper]
    labels = np.asarray(labels)
    same = labels[upper[0]] == labels[upper[1]]
    losses, _ = pair_weights(similarities, same, margin)

    return float(np.mean(losses)) if losses.size else 0.0


def metric_batch_gradient(
    outputs: np.ndarray, derivatives: np.ndarray, labels: np.ndarray, margin: float = 0.3
) -> tuple:
    """Get the mean contrastive loss and its exact gradient.

    The similarity S_ij = sum_z |psi_zi| |psi_zj| is differentiated
    through the amplitude moduli; zero amplitudes contribute nothing.

    Args:
        outputs: Output states, shape (D, N).
        derivatives: Output-state derivatives, shape (K, D, N).
        labels: Class label per column.
        margin: Margin for different-class pairs.

    Returns:
        tuple[float, np.ndarray]: Loss and gradient of length K.
    """
    moduli = np.abs(outputs)
    count = moduli.shape[1]
    upper = np.triu_indices(count, k=1)
    similarities = moduli.T @ moduli
    labels = np.asarray(labels)
    same = labels[upper[0]] == labels[upper[1]]
    losses, slopes = pair_weights(similarities[upper], same, margin)
    if not losses.size:
        return 0.0, np.zeros(derivatives.shape[0])

    weights = np.zeros((count, count))
    weights[upper] = slopes / losses.size
    weights = weights + weights.T
    loss_by_modulus = moduli @ weights

    with np.errstate(divide="ignore", invalid="ignore"):
        unit_phases = np.where(moduli > 0.0, outputs.conj() / moduli, 0.0)
    modulus_derivatives = np.real(unit_phases[np.newaxis] * derivatives)
    gradient = np.einsum("dn,kdn->k", loss_by_modulus, modulus_derivatives)

    return float(np.mean(losses)), gradient
