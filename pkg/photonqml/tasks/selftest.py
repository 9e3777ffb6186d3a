"""Numerical kernel checks run by ``photonqml-run selftest``."""

import logging
from itertools import permutations

import numpy as np
import scipy.linalg

from photonqml.kernel.fock import enumerate_basis, output_distribution
from photonqml.kernel.lift import evolve_fock_state, lift_one_body, lift_unitary
from photonqml.kernel.permanent import permanent
from photonqml.modules.ansatz import build_ansatz, lifted_derivative, trainable_unitary
from photonqml.modules.mesh import BALANCED_SPLITTER, haar_random_unitary

logger = logging.getLogger(__name__)


def naive_permanent(matrix: np.ndarray) -> complex:
    size = matrix.shape[0]
    rows = np.arange(size)
    return complex(sum(np.prod(matrix[rows, list(sigma)]) for sigma in permutations(range(size))))


def check_permanent(seed: int = 0) -> float:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for size in range(1, 8):
        matrix = rng.standard_normal((size, size)) + 1j * rng.standard_normal((size, size))
        expected = naive_permanent(matrix)
        worst = max(worst, abs(permanent(matrix) - expected) / max(abs(expected), 1e-300))
    return worst


def check_homomorphism(seed: int = 0) -> float:
    basis = enumerate_basis(4, 3)
    U = haar_random_unitary(4, [seed, 0])
    V = haar_random_unitary(4, [seed, 1])
    difference = lift_unitary(U @ V, basis) - lift_unitary(U, basis) @ lift_unitary(V, basis)
    return float(np.max(np.abs(difference)))


def check_generator(seed: int = 0) -> float:
    """Compare exp(i dGamma(h)) with the lift of exp(i h) for Hermitian h."""
    basis = enumerate_basis(4, 2)
    rng = np.random.default_rng(seed)
    h = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    h = (h + h.conj().T) / 2
    generated = scipy.linalg.expm(1j * lift_one_body(h, basis))
    lifted = lift_unitary(scipy.linalg.expm(1j * h), basis)
    return float(np.max(np.abs(generated - lifted)))


def check_derivative(seed: int = 0, step: float = 1e-5) -> float:
    ansatz = build_ansatz(4, 2)
    theta = np.random.default_rng(seed).uniform(0.0, 2 * np.pi, ansatz.K)
    worst = 0.0
    for i in range(ansatz.K):
        shift = np.zeros(ansatz.K)
        shift[i] = step
        forward = lift_unitary(trainable_unitary(ansatz, theta + shift), ansatz.basis)
        backward = lift_unitary(trainable_unitary(ansatz, theta - shift), ansatz.basis)
        numerical = (forward - backward) / (2 * step)
        analytic = lifted_derivative(ansatz, theta, i)
        scale = max(np.max(np.abs(analytic)), 1.0)
        worst = max(worst, float(np.max(np.abs(analytic - numerical)) / scale))
    return worst


def check_normalisation(seed: int = 0) -> float:
    basis = enumerate_basis(5, 3)
    psi = evolve_fock_state(haar_random_unitary(5, seed), basis, (1, 1, 1, 0, 0))
    return float(abs(output_distribution(psi, basis).sum() - 1.0))


def check_hong_ou_mandel() -> float:
    basis = enumerate_basis(2, 2)
    psi = evolve_fock_state(BALANCED_SPLITTER, basis, (1, 1))
    return float(output_distribution(psi, basis)[basis.state_index((1, 1))])


CHECKS = (
    ("permanent matches naive expansion", check_permanent, 1e-10),
    ("lift is a homomorphism", check_homomorphism, 1e-9),
    ("lift commutes with the exponential map", check_generator, 1e-10),
    ("lifted derivative matches finite differences", check_derivative, 1e-6),
    ("output distribution is normalised", check_normalisation, 1e-10),
    ("Hong-Ou-Mandel coincidence vanishes", check_hong_ou_mandel, 1e-12),
)


def run_selftest() -> bool:
    """Run every kernel check and print one line per check.

    Returns:
        True if all checks pass.
    """
    passed = True
    for name, check, tolerance in CHECKS:
        error = check()
        ok = error < tolerance
        passed = passed and ok
        print(f"{'PASS' if ok else 'FAIL'}\t{name}: {error:.3e} (tolerance {tolerance:g})")
        if not ok:
            logger.error("Self-test failed: %s (%.3e >= %g)", name, error, tolerance)

    return passed
