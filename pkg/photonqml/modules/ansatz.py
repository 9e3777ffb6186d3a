"""Parameterised circuits: a data encoder S(x) followed by a body U(theta).

Input Fock states pass through S(x) and then U(theta); the output state
is Phi(U(theta)) Phi(S(x)) |n>.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from photonqml.kernel.fock import (
    FockBasis,
    check_input_state,
    enumerate_basis,
    input_pattern,
    number_operator_diagonal,
)
from photonqml.kernel.lift import evolve_fock_state, lift_unitary, one_body_action
from photonqml.modules.mesh import (
    MeshLayout,
    compose_mesh,
    get_phase_generators,
    make_layout,
    port_phase_indices,
    split_at_phase,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DataEncoding:
    feature: int


@dataclass(frozen=True)
class Trainable:
    parameter: int


@dataclass(frozen=True)
class Fixed:
    value: float = 0.0


PhaseTag = Union[DataEncoding, Trainable, Fixed]


@dataclass(frozen=True)
class ParamBinding:
    """Role of every phase of a layout.

    Attributes:
        tags: One tag per phase, in layout order.
    """

    tags: tuple

    def __post_init__(self):
        parameters = sorted(t.parameter for t in self.tags if isinstance(t, Trainable))
        if parameters != list(range(len(parameters))):
            raise ValueError(
                "Trainable indices must be 0..K-1 without gaps or repeats"
            )
        features = [t.feature for t in self.tags if isinstance(t, DataEncoding)]
        if len(features) != len(set(features)):
            raise ValueError("Each feature may be bound to one phase only")
        if any(f < 0 for f in features):
            raise ValueError("Feature indices must be non-negative")

    @property
    def trainable_count(self) -> int:
        return sum(isinstance(t, Trainable) for t in self.tags)

    @property
    def feature_count(self) -> int:
        features = [t.feature for t in self.tags if isinstance(t, DataEncoding)]
        return max(features) + 1 if features else 0

    def parameter_phases(self) -> np.ndarray:
        """Get the phase index carrying each trainable parameter."""
        phases = np.empty(self.trainable_count, dtype=np.int64)
        for index, tag in enumerate(self.tags):
            if isinstance(tag, Trainable):
                phases[tag.parameter] = index
        return phases

    def resolve(
        self, theta: Optional[np.ndarray] = None, x: Optional[np.ndarray] = None
    ) -> np.ndarray:
        """Get the phase vector for given parameters and features."""
        phases = np.empty(len(self.tags), dtype=np.float64)
        for index, tag in enumerate(self.tags):
            if isinstance(tag, Trainable):
                phases[index] = theta[tag.parameter]
            elif isinstance(tag, DataEncoding):
                phases[index] = x[tag.feature]
            else:
                phases[index] = tag.value
        return phases

    def describe(self) -> list:
        labels = []
        for tag in self.tags:
            if isinstance(tag, Trainable):
                labels.append(f"theta[{tag.parameter}]")
            elif isinstance(tag, DataEncoding):
                labels.append(f"x[{tag.feature}]")
            else:
                labels.append(f"fixed({tag.value!r})")
        return labels


@dataclass(frozen=True, eq=False)
class CircuitAnsatz:
    """Encoder and trainable body acting on the same modes."""

    encoder: MeshLayout
    encoder_binding: ParamBinding
    body: MeshLayout
    body_binding: ParamBinding
    basis: FockBasis
    input_state: tuple

    def __post_init__(self):
        if not self.encoder.m == self.body.m == self.basis.m:
            raise ValueError("Encoder, body and basis must act on the same modes")
        if len(self.encoder_binding.tags) != self.encoder.phase_count:
            raise ValueError("Encoder binding does not match the encoder layout")
        if len(self.body_binding.tags) != self.body.phase_count:
            raise ValueError("Body binding does not match the body layout")
        check_input_state(self.input_state, self.basis.m)
        if sum(self.input_state) != self.basis.n:
            raise ValueError(
                f"Input state {self.input_state} does not hold n={self.basis.n} photons"
            )

    @property
    def K(self) -> int:
        return self.body_binding.trainable_count

    def describe(self) -> dict:
        return {
            "encoder": self.encoder.describe(),
            "encoder_binding": self.encoder_binding.describe(),
            "body": self.body.describe(),
            "body_binding": self.body_binding.describe(),
            "input_state": list(self.input_state),
            "K": self.K,
        }


def encoding_binding(
    layout: MeshLayout, features: int, inactive_ports: bool = True
) -> ParamBinding:
    """Bind features to the first active phases in placement order.

    Args:
        layout: Encoder layout.
        features: Number of features to write.
        inactive_ports: Fix external phases on the input ports to 0.

    Raises:
        ValueError: Not enough active phases for the features.
    """
    inactive = set(port_phase_indices(layout)) if inactive_ports else set()
    active = [i for i in range(layout.phase_count) if i not in inactive]
    if features > len(active):
        raise ValueError(
            f"Encoder has {len(active)} active phases, cannot encode {features} features"
        )
    tags = [Fixed(0.0)] * layout.phase_count
    for feature, index in enumerate(active[:features]):
        tags[index] = DataEncoding(feature)

    return ParamBinding(tags=tuple(tags))


def trainable_binding(
    layout: MeshLayout,
    K: Optional[int] = None,
    fixed_values: Optional[np.ndarray] = None,
) -> ParamBinding:
    """Make the first K phases trainable and fix the rest.

    Nested K share the same layout and fixed values, so parameter sets
    grow monotonically.

    Args:
        layout: Body layout.
        K: Number of trainable phases. Defaults to all phases.
        fixed_values: Values of non-trainable phases, indexed by phase.
            Defaults to zero.
    """
    if K is None:
        K = layout.phase_count
    if not 0 <= K <= layout.phase_count:
        raise ValueError(f"Layout has {layout.phase_count} phases, cannot train {K}")
    if fixed_values is None:
        fixed_values = np.zeros(layout.phase_count)
    tags = [
        Trainable(i) if i < K else Fixed(float(fixed_values[i]))
        for i in range(layout.phase_count)
    ]

    return ParamBinding(tags=tuple(tags))


def build_ansatz(
    m: int,
    n: int,
    body_layers: int = 1,
    K: Optional[int] = None,
    encoder_features: int = 0,
    variant: str = "clements",
    fixed_seed=None,
    fixed_values: Optional[np.ndarray] = None,
    input_state: Optional[tuple] = None,
) -> CircuitAnsatz:
    """Build an encoder plus trainable body.

    Args:
        m: Number of modes.
        n: Number of photons, placed in the first n modes.
        body_layers: Stacked meshes in the body.
        K: Number of trainable body phases. Defaults to all.
        encoder_features: Features written to the encoder; with 0 the
            encoder is a fixed mesh with all phases at 0.
        variant: Rectangular arrangement.
        fixed_seed: Seed for uniform random values of fixed body phases.
            Fixed body phases are 0 when not given.
        fixed_values: Explicit values of fixed body phases, indexed by
            phase. Takes precedence over ``fixed_seed``.
        input_state: Input occupations. Defaults to n photons in the
            first n modes.
    """
    encoder = make_layout(m, 1 if encoder_features else 0, variant)
    body = make_layout(m, body_layers, variant)
    if fixed_values is None and fixed_seed is not None:
        rng = np.random.default_rng(fixed_seed)
        fixed_values = rng.uniform(0.0, 2 * np.pi, body.phase_count)

    return CircuitAnsatz(
        encoder=encoder,
        encoder_binding=encoding_binding(encoder, encoder_features),
        body=body,
        body_binding=trainable_binding(body, K, fixed_values),
        basis=enumerate_basis(m, n),
        input_state=input_state or input_pattern(m, n),
    )


def encode_data(ansatz: CircuitAnsatz, x: np.ndarray) -> np.ndarray:
    """Get the encoder unitary S(x).

    Raises:
        IndexError: A bound feature index exceeds the feature vector.
    """
    x = np.asarray(x, dtype=np.float64)
    if ansatz.encoder_binding.feature_count > len(x):
        raise IndexError(
            f"Encoder reads feature {ansatz.encoder_binding.feature_count - 1}, "
            f"feature vector has length {len(x)}"
        )
    phases = ansatz.encoder_binding.resolve(x=x)

    return compose_mesh(ansatz.encoder, phases)


def encoded_state(ansatz: CircuitAnsatz, x: np.ndarray) -> np.ndarray:
    """Get Phi(S(x)) applied to the input state."""
    return evolve_fock_state(encode_data(ansatz, x), ansatz.basis, ansatz.input_state)


def check_theta(ansatz: CircuitAnsatz, theta: np.ndarray) -> np.ndarray:
    theta = np.asarray(theta, dtype=np.float64)
    if theta.shape != (ansatz.K,):
        raise ValueError(
            f"Ansatz has K={ansatz.K} parameters, got {theta.shape[0] if theta.ndim else 0}"
        )
    return theta


def trainable_unitary(ansatz: CircuitAnsatz, theta: np.ndarray) -> np.ndarray:
    """Get the body unitary U(theta).

    Raises:
        ValueError: Parameter vector length is not K.
    """
    theta = check_theta(ansatz, theta)

    return compose_mesh(ansatz.body, ansatz.body_binding.resolve(theta=theta))


def lifted_derivative(ansatz: CircuitAnsatz, theta: np.ndarray, i: int) -> np.ndarray:
    """Get the derivative of Phi(U(theta)) with respect to theta_i.

    The body is split as U = A . P(theta_i) . B at the phase shifter
    carrying theta_i, acting on mode j, and

        d Phi(U) / d theta_i = Phi(A) . i diag(N_j) . Phi(P) . Phi(B).

    Raises:
        IndexError: Parameter index out of range.
    """
    theta = check_theta(ansatz, theta)
    if not 0 <= i < ansatz.K:
        raise IndexError(f"Parameter index {i} out of range for K={ansatz.K}")
    phase_index = ansatz.body_binding.parameter_phases()[i]
    after, shifter, before, mode = split_at_phase(
        ansatz.body, ansatz.body_binding.resolve(theta=theta), phase_index
    )
    basis = ansatz.basis
    generator = 1j * number_operator_diagonal(mode, basis)

    return lift_unitary(after, basis) @ (
        generator[:, np.newaxis]
        * (lift_unitary(shifter, basis) @ lift_unitary(before, basis))
    )


def derivative_states(
    ansatz: CircuitAnsatz, theta: np.ndarray, states: np.ndarray
) -> tuple:
    """Get evolved states and their derivatives for all parameters.

    Uses d Phi(U) / d theta_i = i dGamma(u u^H) Phi(U) with u = A e_j,
    where dGamma lifts a single-particle operator to sum h_pq a_p^dag a_q.

    Args:
        ansatz: Circuit ansatz.
        theta: Trainable parameters.
        states: Input state vectors, shape (D, N).

    Returns:
        tuple[np.ndarray, np.ndarray]: Output states of shape (D, N)
        and derivatives of shape (K, D, N).
    """
    theta = check_theta(ansatz, theta)
    states = np.asarray(states, dtype=np.complex128)
    if states.ndim == 1:
        states = states[:, np.newaxis]
    phases = ansatz.body_binding.resolve(theta=theta)
    unitary = compose_mesh(ansatz.body, phases)
    outputs = lift_unitary(unitary, ansatz.basis) @ states

    generators = get_phase_generators(ansatz.body, phases)[
        ansatz.body_binding.parameter_phases()
    ]
    hopping = one_body_action(outputs, ansatz.basis)
    derivatives = 1j * np.einsum(
        "kp,kq,pqdn->kdn", generators, generators.conj(), hopping
    )

    return outputs, derivatives
