"""Data quantum Fisher information matrix and learning capacity.

For training states |phi_l> with mixture rho = sum_l |phi_l><phi_l| / L,

    Q_ij = 4 Re[ tr(d_i Phi rho d_j Phi^H)
                 - tr(d_i Phi rho Phi^H) tr(Phi rho d_j Phi^H) ],

with Phi the lifted body unitary. The rank of Q counts the directions of
U(theta) the training data can resolve.
"""

import logging
from dataclasses import dataclass, field
from math import ceil

import numpy as np
import pandas as pd
import scipy.linalg

from photonqml.constants import Constants
from photonqml.kernel.core import cell_seed, run_cells
from photonqml.kernel.fock import FockBasis, enumerate_basis, input_pattern
from photonqml.kernel.lift import evolve_fock_state, lift_unitary
from photonqml.modules.ansatz import (
    CircuitAnsatz,
    build_ansatz,
    derivative_states,
    lifted_derivative,
    trainable_unitary,
)
from photonqml.modules.mesh import haar_random_unitary

logger = logging.getLogger(__name__)

@dataclass(frozen=True, eq=False)
class TrainingEnsemble:
    """Encoded training states in a Fock basis.

    Attributes:
        states: State vectors, one per column, shape (D, L).
        basis: Basis of the states.
    """

    states: np.ndarray = field(repr=False)
    basis: FockBasis

    def __post_init__(self):
        if self.states.ndim != 2 or self.states.shape[0] != self.basis.dim:
            raise ValueError(
                f"Ensemble states must have shape (D={self.basis.dim}, L), "
                f"got {self.states.shape}"
            )
        norms = np.linalg.norm(self.states, axis=0)
        if np.any(np.abs(norms - 1.0) > Constants.norm_tolerance):
            raise ValueError(f"Training states are not normalised: {norms}")

    @property
    def L(self) -> int:
        return self.states.shape[1]

    @property
    def rho(self) -> np.ndarray:
        return self.states @ self.states.conj().T / self.L

    def subset(self, L: int) -> "TrainingEnsemble":
        return TrainingEnsemble(states=self.states[:, :L], basis=self.basis)


def haar_ensemble(
    basis: FockBasis, L: int, seed, input_states: list = None
) -> TrainingEnsemble:
    """Encode input states with independent Haar-random unitaries.

    Args:
        basis: Fock basis.
        L: Number of states.
        seed: Seed or ``np.random.SeedSequence``.
        input_states: Input occupations per state. Defaults to n photons
            in the first n modes for every state.
    """
    rng = np.random.default_rng(seed)
    if input_states is None:
        input_states = [input_pattern(basis.m, basis.n)] * L
    states = np.column_stack(
        [
            evolve_fock_state(haar_random_unitary(basis.m, rng), basis, state)
            for state in input_states[:L]
        ]
    )

    return TrainingEnsemble(states=states, basis=basis)


def get_derivative_states(
    ansatz: CircuitAnsatz, theta: np.ndarray, states: np.ndarray
) -> tuple:
    """Get evolved states and derivatives with the configured method.

    Implemented methods:

        - **generator**: one-body generator applied to the output states.
        - **lifted**: dense lifted derivative matrices.

    Raises:
        ValueError: Derivative method is not allowed.
    """
    method_allowed = ["generator", "lifted"]
    if Constants.dqfim_method == "generator":
        return derivative_states(ansatz, theta, states)
    elif Constants.dqfim_method == "lifted":
        outputs = lift_unitary(trainable_unitary(ansatz, theta), ansatz.basis) @ states
        derivatives = np.zeros((ansatz.K, *outputs.shape), dtype=np.complex128)
        for i in range(ansatz.K):
            derivatives[i] = lifted_derivative(ansatz, theta, i) @ states
        return outputs, derivatives
    else:
        error_message = (
            f'DQFIM method = "{Constants.dqfim_method}"',
            "is not allowed, must be one of",
            f'{", ".join(method_allowed)}',
        )
        raise ValueError(" ".join(error_message))


def dqfim_matrix(
    ansatz: CircuitAnsatz, theta: np.ndarray, ensemble: TrainingEnsemble
) -> np.ndarray:
    """Compute the DQFIM of an ansatz over a training ensemble.

    Args:
        ansatz: Circuit ansatz.
        theta: Trainable parameters.
        ensemble: Training states in the ansatz basis.

    Returns:
        K x K real symmetric matrix.

    Raises:
        ValueError: Ensemble basis differs from the ansatz basis.
    """
    if (ensemble.basis.m, ensemble.basis.n) != (ansatz.basis.m, ansatz.basis.n):
        raise ValueError(
            f"Ensemble basis (m={ensemble.basis.m}, n={ensemble.basis.n}) does not "
            f"match ansatz basis (m={ansatz.basis.m}, n={ansatz.basis.n})"
        )
    outputs, derivatives = get_derivative_states(ansatz, theta, ensemble.states)
    L = ensemble.L
    overlaps = np.einsum("jdl,idl->ij", derivatives.conj(), derivatives) / L
    phases = np.einsum("dl,idl->i", outputs.conj(), derivatives) / L
    qfim = 4.0 * np.real(overlaps - np.outer(phases, phases.conj()))

    return 0.5 * (qfim + qfim.T)


def numerical_rank(qfim: np.ndarray, rel_tol: float = None) -> int:
    """Count eigenvalues above a relative cutoff.

    The cutoff is rel_tol times the largest eigenvalue, but never below
    the absolute floor from the constants file.

    Raises:
        ValueError: Matrix is not symmetric.
    """
    eigenvalues = get_spectrum(qfim)

    return int(np.sum(eigenvalues > get_cutoff(eigenvalues, rel_tol)))


def get_spectrum(qfim: np.ndarray) -> np.ndarray:
    """Get eigenvalues of a symmetric matrix in descending order."""
    qfim = np.asarray(qfim, dtype=np.float64)
    if qfim.ndim != 2 or qfim.shape[0] != qfim.shape[1]:
        raise ValueError(f"Matrix must be square, got shape {qfim.shape}")
    if qfim.size == 0:
        return np.zeros(0)
    scale = max(np.max(np.abs(qfim)), 1.0)
    if np.max(np.abs(qfim - qfim.T)) > Constants.symmetry_tolerance * scale:
        raise ValueError("Matrix is not symmetric")

    return scipy.linalg.eigvalsh(qfim)[::-1]


def get_cutoff(eigenvalues: np.ndarray, rel_tol: float = None) -> float:
    if rel_tol is None:
        rel_tol = Constants.rank_rel_tol
    largest = eigenvalues[0] if eigenvalues.size else 0.0

    return max(rel_tol * largest, Constants.rank_abs_floor)


def rank_robustness(qfim: np.ndarray, rel_tol: float = None) -> dict:
    """Get ranks with the cutoff moved by the configured decades."""
    if rel_tol is None:
        rel_tol = Constants.rank_rel_tol
    shift = 10.0**Constants.rank_robustness_decades

    return {
        tolerance: numerical_rank(qfim, tolerance)
        for tolerance in (rel_tol / shift, rel_tol, rel_tol * shift)
    }


def theoretical_capacity(m: int, n: int, L: int) -> int:
    """Get the analytic maximal learning capacity.

    Raises:
        ValueError: n or L below 1.
    """
    if n < 1 or L < 1:
        raise ValueError(f"Need n >= 1 and L >= 1, got n={n}, L={L}")
    single = 1 if L == 1 else 0
    if n * L <= m:
        return 2 * m * n * L - n**2 * L**2 - 1 - (n - 1) * single

    return m**2 - 1 - (m - 1) * single


def critical_dataset_size(m: int, n: int) -> int:
    """Get the training set size at which the capacity saturates.

    Raises:
        ValueError: n outside [1, m].
    """
    if not 1 <= n <= m:
        raise ValueError(
            f"Photon count must be in [1, m={m}] with one photon per mode, got n={n}"
        )

    return ceil((m - 1) / n) + 1


@dataclass(frozen=True, eq=False)
class DqfimReport:
    Q: np.ndarray = field(repr=False)
    eigenvalues: np.ndarray = field(repr=False)
    rank: int
    tolerance_used: float
    bound: int
    K: int
    L: int
    n: int
    m: int


def dqfim_report(
    ansatz: CircuitAnsatz,
    theta: np.ndarray,
    ensemble: TrainingEnsemble,
    rel_tol: float = None,
) -> DqfimReport:
    """Compute the DQFIM with its spectrum, rank and analytic bound."""
    qfim = dqfim_matrix(ansatz, theta, ensemble)
    eigenvalues = get_spectrum(qfim)
    cutoff = get_cutoff(eigenvalues, rel_tol)

    return DqfimReport(
        Q=qfim,
        eigenvalues=eigenvalues,
        rank=int(np.sum(eigenvalues > cutoff)),
        tolerance_used=cutoff,
        bound=theoretical_capacity(ansatz.basis.m, ansatz.basis.n, ensemble.L),
        K=ansatz.K,
        L=ensemble.L,
        n=ansatz.basis.n,
        m=ansatz.basis.m,
    )


@dataclass(frozen=True, eq=False)
class CapacityScan:
    """Maximal DQFIM rank along K or L.

    Attributes:
        axis_name: "K" or "L".
        axis: Scanned values.
        ranks: Maximum rank over theta samples, per axis value.
        predicted: Analytic capacity per axis value.
        tolerance: Relative rank cutoff.
        spectra: Spectrum of the maximal-rank sample, per axis value.
        metadata: Scan settings.
    """

    axis_name: str
    axis: tuple
    ranks: tuple
    predicted: tuple
    tolerance: float
    spectra: tuple = field(repr=False)
    metadata: dict = field(repr=False)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                self.axis_name: list(self.axis),
                "measured_rank": list(self.ranks),
                "predicted": list(self.predicted),
                "tolerance": [self.tolerance] * len(self.axis),
            }
        )

    def spectra_frame(self) -> pd.DataFrame:
        rows = []
        for value, spectrum in zip(self.axis, self.spectra):
            for position, eigenvalue in enumerate(spectrum):
                rows.append(
                    {self.axis_name: value, "index": position, "eigenvalue": eigenvalue}
                )
        return pd.DataFrame(rows, columns=[self.axis_name, "index", "eigenvalue"])


def layers_for(m: int, K: int) -> int:
    """Get the number of stacked meshes exposing at least K phases."""
    per_mesh = m * (m - 1)
    return max(1, ceil(K / per_mesh)) if per_mesh else 0


def capacity_cell(
    m: int,
    n: int,
    K: int,
    layers: int,
    variant: str,
    states: np.ndarray,
    phase_seed: np.random.SeedSequence,
    rel_tol: float,
) -> tuple:
    """Compute the DQFIM rank at one parameter draw.

    Every phase of the body is drawn at random; the first K are the
    trainable parameters and the rest stay fixed at their draw, so a
    single draw defines nested ansaetze for all K.

    Returns:
        tuple[int, np.ndarray]: Rank and descending spectrum.
    """
    rng = np.random.default_rng(phase_seed)
    phase_count = 2 * layers * (m * (m - 1) // 2)
    phases = rng.uniform(0.0, 2 * np.pi, phase_count)
    ansatz = build_ansatz(
        m, n, body_layers=layers, K=K, variant=variant, fixed_values=phases
    )
    ensemble = TrainingEnsemble(states=states, basis=ansatz.basis)
    report = dqfim_report(ansatz, phases[:K], ensemble, rel_tol)

    return report.rank, report.eigenvalues


def _collect(results: list, axis: list, theta_samples: int) -> tuple:
    ranks, spectra = [], []
    for position in range(len(axis)):
        cell_results = results[position * theta_samples : (position + 1) * theta_samples]
        best = max(cell_results, key=lambda result: result[0])
        ranks.append(best[0])
        spectra.append(best[1])
    return ranks, spectra


def capacity_vs_K(
    m: int,
    n: int,
    L: int,
    K_values: list,
    theta_samples: int = 3,
    seed: int = 0,
    variant: str = "clements",
    rel_tol: float = None,
    client=None,
) -> CapacityScan:
    """Scan the maximal DQFIM rank against the number of parameters.

    Training states come from independent Haar-random encoders and stay
    fixed for the whole scan.

    Args:
        m: Number of modes.
        n: Number of photons.
        L: Number of training states.
        K_values: Parameter counts to scan.
        theta_samples: Random parameter draws per K.
        seed: Master seed.
        variant: Rectangular mesh arrangement.
        rel_tol: Relative rank cutoff.
        client (distributed.Client): Optional dask client.
    """
    if theta_samples < 1:
        raise ValueError(f"theta_samples must be at least 1, got {theta_samples}")
    if rel_tol is None:
        rel_tol = Constants.rank_rel_tol
    K_values = sorted(int(K) for K in K_values)
    basis = enumerate_basis(m, n)
    ensemble = haar_ensemble(basis, L, cell_seed(seed, 0))
    layers = layers_for(m, K_values[-1])

    cells = [
        dict(
            m=m,
            n=n,
            K=K,
            layers=layers,
            variant=variant,
            states=ensemble.states,
            phase_seed=cell_seed(seed, 1, sample),
            rel_tol=rel_tol,
        )
        for K in K_values
        for sample in range(theta_samples)
    ]
    logger.info("Capacity scan over K=%s for m=%d, n=%d, L=%d", K_values, m, n, L)
    ranks, spectra = _collect(run_cells(capacity_cell, cells, client), K_values, theta_samples)
    bound = theoretical_capacity(m, n, L)

    return CapacityScan(
        axis_name="K",
        axis=tuple(K_values),
        ranks=tuple(ranks),
        predicted=tuple([bound] * len(K_values)),
        tolerance=rel_tol,
        spectra=tuple(spectra),
        metadata={
            "m": m,
            "n": n,
            "L": L,
            "layers": layers,
            "layout": variant,
            "theta_samples": theta_samples,
            "seed": seed,
            "data": "haar-random encoders on the first n input modes",
            "bound": bound,
            "rank_abs_floor": Constants.rank_abs_floor,
        },
    )


def capacity_vs_L(
    m: int,
    n: int,
    L_values: list,
    theta_samples: int = 3,
    seed: int = 0,
    K: int = None,
    variant: str = "clements",
    rel_tol: float = None,
    client=None,
) -> CapacityScan:
    """Scan the maximal DQFIM rank against the training set size.

    Datasets are nested: the scan at L uses the first L states of one
    Haar-encoded pool. The body is overparameterised with at least
    2 (m^2 - 1) trainable phases.
    """
    if theta_samples < 1:
        raise ValueError(f"theta_samples must be at least 1, got {theta_samples}")
    if rel_tol is None:
        rel_tol = Constants.rank_rel_tol
    L_values = sorted(int(L) for L in L_values)
    if K is None:
        K = 2 * (m**2 - 1)
    layers = layers_for(m, K)
    K = layers * m * (m - 1)
    basis = enumerate_basis(m, n)
    pool = haar_ensemble(basis, L_values[-1], cell_seed(seed, 0))

    cells = [
        dict(
            m=m,
            n=n,
            K=K,
            layers=layers,
            variant=variant,
            states=pool.states[:, :L],
            phase_seed=cell_seed(seed, 1, sample),
            rel_tol=rel_tol,
        )
        for L in L_values
        for sample in range(theta_samples)
    ]
    logger.info("Capacity scan over L=%s for m=%d, n=%d, K=%d", L_values, m, n, K)
    ranks, spectra = _collect(run_cells(capacity_cell, cells, client), L_values, theta_samples)

    return CapacityScan(
        axis_name="L",
        axis=tuple(L_values),
        ranks=tuple(ranks),
        predicted=tuple(theoretical_capacity(m, n, L) for L in L_values),
        tolerance=rel_tol,
        spectra=tuple(spectra),
        metadata={
            "m": m,
            "n": n,
            "K": K,
            "layers": layers,
            "layout": variant,
            "theta_samples": theta_samples,
            "seed": seed,
            "data": "haar-random encoders on the first n input modes",
            "critical_dataset_size": critical_dataset_size(m, n),
            "plateau": m**2 - 1,
            "rank_abs_floor": Constants.rank_abs_floor,
        },
    )
