"""Mach-Zehnder meshes and Haar-random mode unitaries.

Each MZI is the product BS . P(theta) . BS . P(phi) with the balanced
splitter BS = [[1, i], [i, 1]] / sqrt(2) and phases P acting on the top
mode of the pair, which gives

    i e^{i theta/2} [[e^{i phi} sin(theta/2),  cos(theta/2)],
                     [e^{i phi} cos(theta/2), -sin(theta/2)]].

Slot k of a layout owns phases 2k (theta) and 2k + 1 (phi).
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

BALANCED_SPLITTER = np.array([[1.0, 1.0j], [1.0j, 1.0]]) / np.sqrt(2.0)
LAYOUTS = ["clements", "mirrored"]


@dataclass(frozen=True)
class MZI:
    """Mach-Zehnder interferometer on the adjacent modes (i, i + 1).

    Phases are stored modulo 2 pi.
    """

    mode_pair: tuple
    theta: float
    phi: float

    def __post_init__(self):
        top, bottom = self.mode_pair
        if top < 0 or bottom != top + 1:
            raise ValueError(f"MZI modes must be adjacent, got {self.mode_pair}")
        object.__setattr__(self, "theta", float(np.mod(self.theta, 2 * np.pi)))
        object.__setattr__(self, "phi", float(np.mod(self.phi, 2 * np.pi)))

    def unitary(self) -> np.ndarray:
        return mzi_unitary(self.theta, self.phi)


def mzi_unitary(theta: float, phi: float) -> np.ndarray:
    """Get the 2x2 transfer matrix of an MZI.

    Args:
        theta: Internal phase [rad].
        phi: External phase on the top input [rad].

    Returns:
        Complex unitary of shape (2, 2).
    """
    sin = np.sin(theta / 2)
    cos = np.cos(theta / 2)
    external = np.exp(1j * phi)

    return (
        1j
        * np.exp(1j * theta / 2)
        * np.array([[external * sin, cos], [external * cos, -sin]])
    )


def get_placements(m: int, variant: str = "clements") -> tuple:
    """Get the MZI slots of one rectangular mesh.

    The mesh has m columns. In the Clements arrangement even columns
    hold the pairs (0, 1), (2, 3), ... and odd columns (1, 2), (3, 4),
    ...; the mirrored arrangement swaps the two.

    Returns:
        Top mode of every slot in placement order.
    """
    if variant not in LAYOUTS:
        error_message = (
            f'Layout = "{variant}"',
            "is not allowed, must be one of",
            f'{", ".join(LAYOUTS)}',
        )
        raise ValueError(" ".join(error_message))

    offset = 0 if variant == "clements" else 1
    placements = []
    for column in range(m):
        placements.extend(range((column + offset) % 2, m - 1, 2))

    return tuple(placements)


@dataclass(frozen=True)
class MeshLayout:
    """Stack of rectangular MZI meshes.

    Attributes:
        m: Number of modes.
        placements: Top mode of every MZI slot, all layers in order.
        layer_count: Number of stacked meshes.
        variant: Rectangular arrangement of each mesh.
    """

    m: int
    placements: tuple
    layer_count: int
    variant: str = "clements"

    @property
    def slot_count(self) -> int:
        return len(self.placements)

    @property
    def phase_count(self) -> int:
        return 2 * self.slot_count

    def describe(self) -> dict:
        return {
            "m": self.m,
            "layer_count": self.layer_count,
            "variant": self.variant,
            "slots": self.slot_count,
        }


def make_layout(m: int, layer_count: int = 1, variant: str = "clements") -> MeshLayout:
    """Stack ``layer_count`` full meshes of m(m-1)/2 MZIs each."""
    if m < 1:
        raise ValueError(f"Mode count must be at least 1, got m={m}")
    if layer_count < 0:
        raise ValueError(f"Layer count must be non-negative, got {layer_count}")

    return MeshLayout(
        m=m,
        placements=get_placements(m, variant) * layer_count,
        layer_count=layer_count,
        variant=variant,
    )


def check_phases(layout: MeshLayout, phases: np.ndarray) -> np.ndarray:
    phases = np.asarray(phases, dtype=np.float64)
    if phases.shape != (layout.phase_count,):
        raise ValueError(
            f"Layout has {layout.phase_count} phases, got {phases.shape[0] if phases.ndim else 0}"
        )
    return phases


def get_mzis(layout: MeshLayout, phases: np.ndarray) -> list:
    """Get the MZIs of a layout in placement order."""
    phases = check_phases(layout, phases)

    return [
        MZI(mode_pair=(top, top + 1), theta=phases[2 * k], phi=phases[2 * k + 1])
        for k, top in enumerate(layout.placements)
    ]


def compose_mesh(layout: MeshLayout, phases: np.ndarray) -> np.ndarray:
    """Multiply the embedded MZI blocks of a layout.

    The first slot acts first, so it is the rightmost factor.

    Args:
        layout: Mesh layout.
        phases: Two phases per slot.

    Returns:
        m x m mode unitary.

    Raises:
        ValueError: Phase vector length does not match the layout.
    """
    unitary = np.eye(layout.m, dtype=np.complex128)
    for mzi in get_mzis(layout, phases):
        rows = list(mzi.mode_pair)
        unitary[rows, :] = mzi.unitary() @ unitary[rows, :]

    return unitary


def get_mesh_factors(layout: MeshLayout, phases: np.ndarray) -> list:
    """Factorise a mesh into single-mode phases and fixed splitters.

    Returns:
        list[tuple]: ``(mode, phase_index, phase)`` for phase shifters
        and ``(mode, -1, None)`` for splitters on (mode, mode + 1), in
        the order they act.
    """
    phases = check_phases(layout, phases)
    factors = []
    for k, top in enumerate(layout.placements):
        factors.append((top, 2 * k + 1, phases[2 * k + 1]))
        factors.append((top, -1, None))
        factors.append((top, 2 * k, phases[2 * k]))
        factors.append((top, -1, None))

    return factors


def apply_factor_left(matrix: np.ndarray, factor: tuple) -> np.ndarray:
    """Get F . matrix for an elementary factor F."""
    mode, index, phase = factor
    matrix = matrix.copy()
    if index < 0:
        matrix[[mode, mode + 1], :] = BALANCED_SPLITTER @ matrix[[mode, mode + 1], :]
    else:
        matrix[mode, :] *= np.exp(1j * phase)
    return matrix


def apply_factor_right(matrix: np.ndarray, factor: tuple) -> np.ndarray:
    """Get matrix . F for an elementary factor F."""
    mode, index, phase = factor
    matrix = matrix.copy()
    if index < 0:
        matrix[:, [mode, mode + 1]] = matrix[:, [mode, mode + 1]] @ BALANCED_SPLITTER
    else:
        matrix[:, mode] *= np.exp(1j * phase)
    return matrix


def compose_factors(factors: list, m: int) -> np.ndarray:
    unitary = np.eye(m, dtype=np.complex128)
    for factor in factors:
        unitary = apply_factor_left(unitary, factor)

    return unitary


def split_at_phase(layout: MeshLayout, phases: np.ndarray, index: int) -> tuple:
    """Split a mesh unitary as U = A . P . B at one phase shifter.

    Args:
        layout: Mesh layout.
        phases: Two phases per slot.
        index: Phase index in the layout.

    Returns:
        tuple[np.ndarray, np.ndarray, np.ndarray, int]: Factors A, P, B
        and the mode j on which P acts.

    Raises:
        IndexError: Phase index out of range.
    """
    if not 0 <= index < layout.phase_count:
        raise IndexError(
            f"Phase index {index} out of range for {layout.phase_count} phases"
        )
    factors = get_mesh_factors(layout, phases)
    position = next(k for k, factor in enumerate(factors) if factor[1] == index)
    mode = factors[position][0]
    after = compose_factors(factors[position + 1 :], layout.m)
    shifter = compose_factors(factors[position : position + 1], layout.m)
    before = compose_factors(factors[:position], layout.m)

    return after, shifter, before, mode


def get_phase_generators(layout: MeshLayout, phases: np.ndarray) -> np.ndarray:
    """Get A e_j for every phase shifter of a mesh.

    With U = A . P(phase) . B, the derivative of U with respect to the
    phase is i (A e_j)(A e_j)^H U.

    Returns:
        Array of shape (phase_count, m), one vector per phase index.
    """
    factors = get_mesh_factors(layout, phases)
    generators = np.zeros((layout.phase_count, layout.m), dtype=np.complex128)
    suffix = np.eye(layout.m, dtype=np.complex128)
    for factor in reversed(factors):
        mode, index, _ = factor
        if index >= 0:
            generators[index] = suffix[:, mode]
        suffix = apply_factor_right(suffix, factor)

    return generators


def port_phase_indices(layout: MeshLayout) -> list:
    """Get external phases acting directly on an input port.

    These phases act on a mode before any MZI has mixed it, so on a
    Fock input they only contribute a global phase.
    """
    touched = set()
    ports = []
    for k, top in enumerate(layout.placements):
        if top not in touched:
            ports.append(2 * k + 1)
        touched.update((top, top + 1))

    return ports


def haar_random_unitary(m: int, seed) -> np.ndarray:
    """Sample a Haar-random unitary.

    QR decomposition of a complex Ginibre matrix, with the phases of R's
    diagonal moved into Q.

    Args:
        m: Matrix size.
        seed: Seed or ``np.random.Generator``.

    Returns:
        m x m unitary.
    """
    rng = np.random.default_rng(seed)
    ginibre = (
        rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
    ) / np.sqrt(2.0)
    q, r = scipy.linalg.qr(ginibre)
    diagonal = np.diag(r)

    return q * (diagonal / np.abs(diagonal))
