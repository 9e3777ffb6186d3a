"""Fock basis of n photons in m optical modes."""

import functools
from dataclasses import dataclass, field
from itertools import combinations_with_replacement

import numpy as np
from scipy.special import comb, factorial

from photonqml.constants import Constants


@dataclass(frozen=True, eq=False)
class FockBasis:
    """Ordered Fock basis.

    Attributes:
        m: Number of modes.
        n: Number of photons.
        states: Occupation numbers, one row per basis state, ordered
            lexicographically descending.
        mode_lists: Mode index of every photon, one row per state. Used
            to repeat rows and columns of a mode unitary.
        norms: sqrt(prod_i s_i!) for every state.
        index: Maps occupation tuples to their row in ``states``.
    """

    m: int
    n: int
    states: np.ndarray = field(repr=False)
    mode_lists: np.ndarray = field(repr=False)
    norms: np.ndarray = field(repr=False)
    index: dict = field(repr=False)

    @property
    def dim(self) -> int:
        return self.states.shape[0]

    def state_index(self, state) -> int:
        """Get the position of a Fock state in the basis.

        Raises:
            ValueError: State is not part of the basis.
        """
        key = tuple(int(k) for k in state)
        if key not in self.index:
            raise ValueError(
                f"State {key} is not in the basis with m={self.m}, n={self.n}"
            )
        return self.index[key]

    def basis_vector(self, state) -> np.ndarray:
        """Get the state vector of a single Fock state."""
        vector = np.zeros(self.dim, dtype=np.complex128)
        vector[self.state_index(state)] = 1.0

        return vector


@functools.lru_cache(maxsize=32)
def enumerate_basis(m: int, n: int) -> FockBasis:
    """Enumerate all weak compositions of n photons into m modes.

    Multisets of mode indices in lexicographic order correspond to
    occupation vectors in lexicographically descending order.

    Args:
        m: Number of modes.
        n: Number of photons.

    Returns:
        Fock basis with binomial(m + n - 1, n) states.

    Raises:
        ValueError: m < 1 or n < 0.
    """
    if m < 1:
        raise ValueError(f"Mode count must be at least 1, got m={m}")
    if n < 0:
        raise ValueError(f"Photon count must be non-negative, got n={n}")

    multisets = list(combinations_with_replacement(range(m), n))
    mode_lists = np.array(multisets, dtype=np.int64).reshape(len(multisets), n)
    states = np.zeros((mode_lists.shape[0], m), dtype=np.int64)
    for row, modes in enumerate(mode_lists):
        np.add.at(states[row], modes, 1)
    norms = np.sqrt(np.prod(factorial(states), axis=1))
    assert states.shape[0] == comb(m + n - 1, n, exact=True)

    for array in (states, mode_lists, norms):
        array.setflags(write=False)
    index = {tuple(int(k) for k in state): i for i, state in enumerate(states)}

    return FockBasis(
        m=m, n=n, states=states, mode_lists=mode_lists, norms=norms, index=index
    )


def number_operator_diagonal(mode: int, basis: FockBasis) -> np.ndarray:
    """Get the diagonal of the photon number operator of one mode.

    Raises:
        IndexError: Mode out of range.
    """
    if not 0 <= mode < basis.m:
        raise IndexError(f"Mode {mode} out of range for m={basis.m}")

    return basis.states[:, mode].astype(np.float64)


def input_pattern(m: int, n: int, offset: int = 0) -> tuple:
    """Get the input state with single photons in n consecutive modes.

    Args:
        m: Number of modes.
        n: Number of photons.
        offset: First occupied mode.

    Returns:
        Occupation tuple, e.g. (1, 1, 0, 0) for m=4, n=2.
    """
    if offset + n > m:
        raise ValueError(
            f"Cannot place {n} photons from mode {offset} in {m} modes"
        )
    occupations = [0] * m
    for mode in range(offset, offset + n):
        occupations[mode] = 1

    return tuple(occupations)


def check_input_state(state, m: int):
    """Check an input state holds at most one photon per mode.

    Raises:
        ValueError: Wrong length or bunched input.
    """
    state = np.asarray(state)
    if state.shape != (m,):
        raise ValueError(f"Input state needs {m} occupations, got {state.shape}")
    if np.any((state != 0) & (state != 1)):
        raise ValueError(
            f"Input state {tuple(state)} must hold at most one photon per mode"
        )


def output_distribution(psi: np.ndarray, basis: FockBasis) -> np.ndarray:
    """Get the photon-counting distribution p(z) = |<z|psi>|^2.

    Args:
        psi: Normalised state vector, or one state per column.
        basis: Basis of the state vector.

    Returns:
        Probabilities over the basis, same shape as ``psi``.

    Raises:
        ValueError: Dimension mismatch or unnormalised state.
    """
    psi = np.asarray(psi)
    if psi.shape[0] != basis.dim:
        raise ValueError(
            f"State has dimension {psi.shape[0]}, basis has {basis.dim}"
        )
    probabilities = np.abs(psi) ** 2
    total = probabilities.sum(axis=0)
    if np.any(np.abs(total - 1.0) > Constants.norm_tolerance):
        raise ValueError(f"State is not normalised, norm^2 = {total}")

    return probabilities
