"""Lift mode unitaries to the multi-photon Fock space.

The amplitude <t|Phi(U)|s> is Per(U_{s,t}) / sqrt(prod s_i! prod t_j!),
where U_{s,t} repeats column i of U s_i times and row j t_j times.
"""

import functools

import numpy as np
from numba import njit
from scipy.special import factorial

from photonqml.constants import Constants
from photonqml.kernel.fock import FockBasis, enumerate_basis
from photonqml.kernel.permanent import permanent, permanent_ryser


def check_mode_unitary(matrix: np.ndarray, m: int = None):
    """Check a matrix is a square mode unitary.

    Raises:
        ValueError: Wrong shape or not unitary.
    """
    matrix = np.asarray(matrix)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ValueError(f"Mode unitary must be square, got shape {matrix.shape}")
    if m is not None and matrix.shape[0] != m:
        raise ValueError(
            f"Mode unitary is {matrix.shape[0]}x{matrix.shape[0]}, basis has m={m}"
        )
    if not is_unitary(matrix, tolerance=1e3 * Constants.unitary_tolerance):
        raise ValueError("Matrix is not unitary")


def is_unitary(matrix: np.ndarray, tolerance: float = None) -> bool:
    """Check U^H U is the identity in max-norm."""
    if tolerance is None:
        tolerance = Constants.unitary_tolerance
    matrix = np.asarray(matrix)
    deviation = matrix.conj().T @ matrix - np.eye(matrix.shape[0])

    return bool(np.max(np.abs(deviation), initial=0.0) <= tolerance)


def transition_amplitude(unitary: np.ndarray, s, t) -> complex:
    """Get the amplitude <t|Phi(U)|s> between two Fock states.

    Args:
        unitary: Mode unitary.
        s: Input occupations.
        t: Output occupations.

    Returns:
        Transition amplitude.

    Raises:
        ValueError: Photon numbers or mode counts differ, or U is not unitary.
    """
    unitary = np.asarray(unitary)
    check_mode_unitary(unitary)
    s = np.asarray(s, dtype=np.int64)
    t = np.asarray(t, dtype=np.int64)
    m = unitary.shape[0]
    if s.shape != (m,) or t.shape != (m,):
        raise ValueError(f"States must have {m} occupations")
    if s.sum() != t.sum():
        raise ValueError(
            f"Photon number mismatch: input has {s.sum()}, output has {t.sum()}"
        )

    columns = np.repeat(np.arange(m), s)
    rows = np.repeat(np.arange(m), t)
    submatrix = unitary[np.ix_(rows, columns)]
    normalisation = np.sqrt(np.prod(factorial(s)) * np.prod(factorial(t)))

    return permanent(submatrix) / normalisation


@njit
def _lift_kernel(
    unitary: np.ndarray, mode_lists: np.ndarray, norms: np.ndarray
) -> np.ndarray:
    dim, n = mode_lists.shape
    lifted = np.empty((dim, dim), dtype=np.complex128)
    submatrix = np.empty((n, n), dtype=np.complex128)
    for t in range(dim):
        for s in range(dim):
            for i in range(n):
                for j in range(n):
                    submatrix[i, j] = unitary[mode_lists[t, i], mode_lists[s, j]]
            lifted[t, s] = permanent_ryser(submatrix) / (norms[t] * norms[s])

    return lifted


@njit
def _column_kernel(
    unitary: np.ndarray, mode_lists: np.ndarray, norms: np.ndarray, s: int
) -> np.ndarray:
    dim, n = mode_lists.shape
    column = np.empty(dim, dtype=np.complex128)
    submatrix = np.empty((n, n), dtype=np.complex128)
    for t in range(dim):
        for i in range(n):
            for j in range(n):
                submatrix[i, j] = unitary[mode_lists[t, i], mode_lists[s, j]]
        column[t] = permanent_ryser(submatrix) / (norms[t] * norms[s])

    return column


def lift_unitary(unitary: np.ndarray, basis: FockBasis) -> np.ndarray:
    """Lift a mode unitary to the Fock space of a basis.

    Args:
        unitary: m x m mode unitary.
        basis: Fock basis with matching m.

    Returns:
        D x D lifted unitary, rows and columns in basis order.

    Raises:
        ValueError: Dimension mismatch or U is not unitary.
    """
    unitary = np.asarray(unitary)
    check_mode_unitary(unitary, basis.m)

    return _lift_kernel(
        np.ascontiguousarray(unitary, dtype=np.complex128),
        np.ascontiguousarray(basis.mode_lists),
        np.ascontiguousarray(basis.norms),
    )


def evolve_fock_state(unitary: np.ndarray, basis: FockBasis, s) -> np.ndarray:
    """Get Phi(U)|s> without building the full lifted matrix.

    Raises:
        ValueError: Dimension mismatch, U is not unitary or state outside
            the basis.
    """
    unitary = np.asarray(unitary)
    check_mode_unitary(unitary, basis.m)

    return _column_kernel(
        np.ascontiguousarray(unitary, dtype=np.complex128),
        np.ascontiguousarray(basis.mode_lists),
        np.ascontiguousarray(basis.norms),
        basis.state_index(s),
    )


@functools.lru_cache(maxsize=32)
def get_one_body_table(m: int, n: int) -> tuple:
    """Tabulate the action of a_p^dag a_q on every basis state.

    Returns:
        tuple[np.ndarray, np.ndarray]: Target state indices and
        coefficients, both of shape (m, m, D). Targets are -1 where
        mode q is empty.
    """
    basis = enumerate_basis(m, n)
    targets = np.full((m, m, basis.dim), -1, dtype=np.int64)
    coefficients = np.zeros((m, m, basis.dim), dtype=np.float64)
    for source, state in enumerate(basis.states):
        for q in np.flatnonzero(state):
            for p in range(m):
                target = state.copy()
                target[q] -= 1
                target[p] += 1
                targets[p, q, source] = basis.index[tuple(int(k) for k in target)]
                coefficients[p, q, source] = np.sqrt(state[q] * target[p])
    targets.setflags(write=False)
    coefficients.setflags(write=False)

    return targets, coefficients


def one_body_action(states: np.ndarray, basis: FockBasis) -> np.ndarray:
    """Apply every hopping operator a_p^dag a_q to a set of states.

    Args:
        states: State vectors, shape (D,) or (D, N).
        basis: Basis of the states.

    Returns:
        Array of shape (m, m, D, N) with a_p^dag a_q |psi_k> at [p, q, :, k].
    """
    states = np.asarray(states, dtype=np.complex128)
    if states.ndim == 1:
        states = states[:, np.newaxis]
    if states.shape[0] != basis.dim:
        raise ValueError(
            f"States have dimension {states.shape[0]}, basis has {basis.dim}"
        )
    targets, coefficients = get_one_body_table(basis.m, basis.n)
    action = np.zeros(
        (basis.m, basis.m, basis.dim, states.shape[1]), dtype=np.complex128
    )
    for p in range(basis.m):
        for q in range(basis.m):
            occupied = targets[p, q] >= 0
            action[p, q, targets[p, q, occupied]] = (
                coefficients[p, q, occupied, np.newaxis] * states[occupied]
            )

    return action


def lift_one_body(operator: np.ndarray, basis: FockBasis) -> np.ndarray:
    """Lift a single-particle operator h to sum_pq h_pq a_p^dag a_q."""
    operator = np.asarray(operator)
    if operator.shape != (basis.m, basis.m):
        raise ValueError(
            f"Operator has shape {operator.shape}, basis has m={basis.m}"
        )
    action = one_body_action(np.eye(basis.dim), basis)

    return np.einsum("pq,pqdk->dk", operator, action)
