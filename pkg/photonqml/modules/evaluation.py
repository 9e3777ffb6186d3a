import logging
from dataclasses import dataclass, field
from itertools import permutations

import numpy as np
import pandas as pd
from scipy.optimize import linear_sum_assignment

from photonqml.constants import Constants

logger = logging.getLogger(__name__)


def matrix_closeness(
    U: np.ndarray, V: np.ndarray, side: str = "output", heuristic: bool = False
) -> float:
    """Get the distance of two mode unitaries up to phases and permutations.

    For every permutation the optimal local phases make each diagonal
    term real and positive, so

        C_M = min_sigma [1 - (1/m) sum_j |(U V^H)_{sigma(j), j}|].

    Implemented sides:

        - **output**: phases and permutation act after the circuit.
        - **input**: phases and permutation act before the circuit, i.e.
          the output form evaluated on transposes.

    Args:
        U: Mode unitary.
        V: Reference mode unitary.
        side: Side on which phases and permutations are quotiented out.
        heuristic: Use an assignment solver instead of enumerating all
            m! permutations. Required for m above the configured limit.

    Returns:
        Closeness in [0, 1].

    Raises:
        ValueError: Shapes differ, the side is not allowed, or m is too
            large for enumeration.
    """
    U = np.asarray(U, dtype=np.complex128)
    V = np.asarray(V, dtype=np.complex128)
    if U.shape != V.shape or U.ndim != 2 or U.shape[0] != U.shape[1]:
        raise ValueError(f"Unitaries must be square with equal shape, got {U.shape} and {V.shape}")
    if side == "output":
        overlap = np.abs(U @ V.conj().T)
    elif side == "input":
        overlap = np.abs(U.T @ V.conj())
    else:
        error_message = (
            f'Closeness side = "{side}"',
            "is not allowed, must be one of",
            "output, input",
        )
        raise ValueError(" ".join(error_message))

    m = U.shape[0]
    if heuristic:
        rows, columns = linear_sum_assignment(overlap, maximize=True)
        best = overlap[rows, columns].sum()
    elif m > Constants.closeness_max_modes:
        raise ValueError(
            f"Enumerating {m}! permutations is too expensive for m={m} > "
            f"{Constants.closeness_max_modes}, pass heuristic=True"
        )
    else:
        columns = np.arange(m)
        best = max(overlap[list(sigma), columns].sum() for sigma in permutations(range(m)))

    return float(np.clip(1.0 - best / m, 0.0, 1.0))


def sample_counts(p: np.ndarray, shots: int, seed) -> np.ndarray:
    """Draw photon-count histograms from an output distribution.

    Args:
        p: Probability vector.
        shots: Number of detection events.
        seed: Seed or generator.

    Raises:
        ValueError: shots below 1.
    """
    if shots < 1:
        raise ValueError(f"Need at least one shot, got {shots}")
    p = np.clip(np.asarray(p, dtype=np.float64), 0.0, None)
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)

    return rng.multinomial(shots, p / p.sum())


@dataclass(frozen=True, eq=False)
class GramMatrix:
    """Cosine similarities between all pairs of test outputs.

    Attributes:
        values: T x T similarity matrix.
        labels: Class label per row.
        epoch: Training epoch of the snapshot.
    """

    values: np.ndarray = field(repr=False)
    labels: tuple
    epoch: int

    def to_frame(self) -> pd.DataFrame:
        labels = list(self.labels)
        frame = pd.DataFrame(self.values, columns=labels)
        frame.insert(0, "label", labels)
        return frame


def gram_matrix(probabilities: np.ndarray, labels, epoch: int = 0) -> GramMatrix:
    """Compute the Gram matrix of output distributions.

    Args:
        probabilities: Output distributions, one per column, shape (D, T).
        labels: Class label per column.
        epoch: Training epoch of the snapshot.
    """
    amplitudes = np.sqrt(np.clip(probabilities, 0.0, None))
    values = np.clip(amplitudes.T @ amplitudes, 0.0, 1.0)
    values = 0.5 * (values + values.T)

    return GramMatrix(values=values, labels=tuple(labels), epoch=epoch)


def pair_similarities(probabilities: np.ndarray, labels) -> tuple:
    """Get S_C and the same-class flag for every pair i < j.

    Returns:
        tuple[np.ndarray, np.ndarray]: Similarities and flags.
    """
    values = gram_matrix(probabilities, labels).values
    upper = np.triu_indices(values.shape[0], k=1)
    labels = np.asarray(labels)

    return values[upper], labels[upper[0]] == labels[upper[1]]


def balance_weights(same: np.ndarray) -> np.ndarray:
    """Weight pairs so that same-class and different-class pairs count equally.

    Each group carries half of the total weight, or all of it when the
    other group is empty. A constant prediction then scores 0.5.
    """
    same = np.asarray(same, dtype=bool)
    weights = np.zeros(same.size)
    for group in (same, ~same):
        if group.any():
            weights[group] = 1.0 / group.sum()

    return weights / weights.sum() if weights.size else weights


def fit_threshold(similarities: np.ndarray, same: np.ndarray) -> float:
    """Find the similarity threshold with the best balanced accuracy.

    Pairs at or above the threshold are predicted to share a class.
    Candidates are midpoints between consecutive sorted similarities
    plus both ends.
    """
    similarities = np.asarray(similarities, dtype=np.float64)
    same = np.asarray(same, dtype=bool)
    if not similarities.size:
        return 0.5
    order = np.argsort(similarities)
    values = similarities[order]
    flags = same[order]
    weights = balance_weights(flags)
    candidates = np.concatenate(
        [[values[0] - 1e-12], 0.5 * (values[1:] + values[:-1]), [values[-1] + 1e-12]]
    )
    # weight of correct predictions with the first k pairs below the threshold
    different_below = np.concatenate([[0.0], np.cumsum(np.where(flags, 0.0, weights))])
    same_above = np.concatenate([[0.0], np.cumsum(np.where(flags, weights, 0.0)[::-1])])[::-1]
    correct = different_below + same_above

    return float(candidates[int(np.argmax(correct))])


def pairwise_accuracy(similarities: np.ndarray, same: np.ndarray, threshold: float) -> float:
    """Get the balanced fraction of pairs whose same-class flag is predicted correctly.

    Same-class and different-class pairs are weighted by
    :func:`balance_weights`, so the mean of the accuracies on both
    groups is returned.
    """
    similarities = np.asarray(similarities, dtype=np.float64)
    if not similarities.size:
        return float("nan")
    same = np.asarray(same, dtype=bool)
    correct = (similarities >= threshold) == same

    return float(np.sum(balance_weights(same) * correct))
