from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np
from typing_extensions import Literal, TypeAlias

from ._utils import _assert_finite

if TYPE_CHECKING:
    from numpy.typing import ArrayLike, NDArray

ComplexArray: TypeAlias = "NDArray[np.complex128]"
BasisLabel: TypeAlias = Literal["Z", "X"]
KeepPart: TypeAlias = Literal["qubit", "ancilla"]

# A lone qubit, Eve's four-level ancilla, or a qubit joined with that ancilla
SUPPORTED_DIMS = (2, 4, 8)
ANCILLA_DIM = 4
TOL = 1e-10


def _frozen_array(x: ArrayLike) -> ComplexArray:
    arr = np.array(x, dtype=np.complex128)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class PureState:
    """
    A normalized state vector.

    Construction validates the dimension and the norm; states are never mutated, so every
    operation returns a fresh `PureState`.
    """

    amplitudes: ComplexArray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=np.complex128)
        if amps.ndim != 1 or amps.shape[0] not in SUPPORTED_DIMS:
            raise ValueError(
                f"A state must be a vector of dimension {SUPPORTED_DIMS}, got shape {amps.shape}."
            )

        norm = float(np.linalg.norm(amps))
        if abs(norm - 1.0) > TOL:
            raise ValueError(f"A state must be normalized, got norm {norm}.")

        object.__setattr__(self, "amplitudes", _frozen_array(amps / norm))

    @classmethod
    def from_unnormalized(cls, amplitudes: ArrayLike) -> PureState:
        amps = np.asarray(amplitudes, dtype=np.complex128)
        norm = float(np.linalg.norm(amps))
        if norm == 0.0:
            raise ValueError("Cannot normalize the zero vector.")
        return cls(amps / norm)

    @property
    def dim(self) -> int:
        return int(self.amplitudes.shape[0])

    def isclose(self, other: PureState, up_to_phase: bool = False, atol: float = TOL) -> bool:
        if self.dim != other.dim:
            return False
        if up_to_phase:
            return abs(abs(np.vdot(self.amplitudes, other.amplitudes)) - 1.0) <= atol
        return bool(np.allclose(self.amplitudes, other.amplitudes, atol=atol))

    def __repr__(self) -> str:
        amps = ", ".join(f"{a:.4g}" for a in self.amplitudes)
        return f"PureState([{amps}])"


@dataclass(frozen=True)
class QubitBasis:
    """
    An orthonormal qubit basis given by a rotation angle in degrees.

    The basis vectors are U_θ|0⟩ and U_θ|1⟩; 0° is the computational basis and 45° the
    diagonal one. Angles are reduced modulo 360.
    """

    angle: float

    def __post_init__(self):
        _assert_finite(self.angle, "angle")
        object.__setattr__(self, "angle", float(self.angle) % 360.0)

    @classmethod
    def from_label(cls, label: BasisLabel) -> QubitBasis:
        return cls(BASIS_ANGLES[label])

    @property
    def vectors(self) -> tuple[PureState, PureState]:
        u = rotation_gate(self.angle).matrix
        return PureState(u[:, 0]), PureState(u[:, 1])


@dataclass(frozen=True, eq=False)
class Unitary:
    matrix: ComplexArray

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=np.complex128)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError(f"A unitary must be a square matrix, got shape {mat.shape}.")
        if mat.shape[0] not in SUPPORTED_DIMS:
            raise ValueError(f"Unsupported operator dimension {mat.shape[0]}.")
        if not np.allclose(mat.conj().T @ mat, np.eye(mat.shape[0]), atol=TOL):
            raise ValueError("The supplied matrix is not unitary.")

        object.__setattr__(self, "matrix", _frozen_array(mat))

    @property
    def dim(self) -> int:
        return int(self.matrix.shape[0])

    def inverse(self) -> Unitary:
        return Unitary(self.matrix.conj().T)

    def lift(self, ancilla_dim: int = ANCILLA_DIM) -> Unitary:
        """Extend a single-qubit operator to act trivially on an attached ancilla."""
        return Unitary(np.kron(self.matrix, np.eye(ancilla_dim)))

    def __matmul__(self, other: Unitary) -> Unitary:
        if not isinstance(other, Unitary):
            return NotImplemented
        if self.dim != other.dim:
            raise ValueError("Cannot compose unitaries of different dimension.")
        return Unitary(self.matrix @ other.matrix)

    def isclose(self, other: Unitary, atol: float = TOL) -> bool:
        return self.dim == other.dim and bool(np.allclose(self.matrix, other.matrix, atol=atol))


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    matrix: ComplexArray

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=np.complex128)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError(f"A density matrix must be square, got shape {mat.shape}.")
        if not np.allclose(mat, mat.conj().T, atol=TOL):
            raise ValueError("A density matrix must be Hermitian.")
        if abs(np.trace(mat).real - 1.0) > TOL:
            raise ValueError("A density matrix must have unit trace.")
        if np.linalg.eigvalsh(mat).min() < -TOL:
            raise ValueError("A density matrix must be positive semi-definite.")

        object.__setattr__(self, "matrix", _frozen_array(mat))

    @classmethod
    def from_state(cls, state: PureState) -> DensityMatrix:
        return cls(np.outer(state.amplitudes, state.amplitudes.conj()))

    @property
    def dim(self) -> int:
        return int(self.matrix.shape[0])

    def expectation(self, state: PureState) -> float:
        """Return ⟨v|ρ|v⟩, the probability of projecting onto `state`."""
        v = state.amplitudes
        return float(np.real(np.vdot(v, self.matrix @ v)))


def rotation_gate(theta: float) -> Unitary:
    """
    Real rotation by `theta` degrees.

    Parameters
    ----------
    theta
        Angle in degrees. Any finite real value is accepted.

    Returns
    -------
    Unitary
        The matrix [[cos θ, -sin θ], [sin θ, cos θ]].
    """

    _assert_finite(theta, "theta")

    rad = math.radians(theta)
    c, s = math.cos(rad), math.sin(rad)
    return Unitary(np.array([[c, -s], [s, c]]))


def apply(u: Unitary, state: PureState) -> PureState:
    if u.dim != state.dim:
        raise ValueError(
            f"Operator dimension ({u.dim}) does not match state dimension ({state.dim})."
        )
    return PureState.from_unnormalized(u.matrix @ state.amplitudes)


def outcome_distribution(state: PureState, basis: QubitBasis) -> tuple[float, float]:
    if state.dim != 2:
        raise ValueError(f"Single-qubit measurement needs a qubit state, got dim {state.dim}.")

    probs = [abs(np.vdot(v.amplitudes, state.amplitudes)) ** 2 for v in basis.vectors]
    total = probs[0] + probs[1]
    return probs[0] / total, probs[1] / total


def measure(state: PureState, basis: QubitBasis, rng: np.random.Generator) -> tuple[int, PureState]:
    """
    Projectively measure a qubit.

    Exactly one uniform variate is drawn from `rng` per call, whatever the state, so the
    amount of randomness consumed never depends on the measured data.
    """

    p0, _ = outcome_distribution(state, basis)
    outcome = 0 if rng.random() < p0 else 1
    return outcome, basis.vectors[outcome]


def tensor(a: PureState, b: PureState) -> PureState:
    dim = a.dim * b.dim
    if dim not in SUPPORTED_DIMS:
        raise ValueError(f"The joint dimension {dim} is not supported.")
    return PureState(np.kron(a.amplitudes, b.amplitudes))


def _split(joint: PureState) -> ComplexArray:
    if joint.dim != 2 * ANCILLA_DIM:
        raise ValueError(
            f"Expected a qubit joined with a {ANCILLA_DIM}-level ancilla, got dim {joint.dim}."
        )
    # rows index the qubit, columns the ancilla
    return joint.amplitudes.reshape(2, ANCILLA_DIM)


def partial_measure(
    joint: PureState, basis: QubitBasis, rng: np.random.Generator
) -> tuple[int, PureState]:
    """
    Measure the qubit factor of a qubit-ancilla state, leaving the ancilla entangled.

    The post-measurement joint state is the basis vector for the outcome tensored with the
    (renormalized) conditional ancilla state.
    """

    psi = _split(joint)
    branches = [v.amplitudes.conj() @ psi for v in basis.vectors]
    probs = [float(np.vdot(b, b).real) for b in branches]
    p0 = probs[0] / (probs[0] + probs[1])

    outcome = 0 if rng.random() < p0 else 1
    ancilla = branches[outcome] / math.sqrt(probs[outcome])
    return outcome, PureState(np.kron(basis.vectors[outcome].amplitudes, ancilla))


def reduced_density(joint: PureState, keep: KeepPart) -> DensityMatrix:
    psi = _split(joint)
    if keep == "qubit":
        return DensityMatrix(psi @ psi.conj().T)
    if keep == "ancilla":
        return DensityMatrix(psi.T @ psi.conj())

    raise ValueError(f"The `keep` argument must be 'qubit' or 'ancilla', got {keep!r}.")


def trace_distance(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    if rho.dim != sigma.dim:
        raise ValueError("Trace distance needs density matrices of equal dimension.")
    eigs = np.linalg.eigvalsh(rho.matrix - sigma.matrix)
    return float(0.5 * np.abs(eigs).sum())


def computational_state(index: int, dim: int = 2) -> PureState:
    amps = np.zeros(dim, dtype=np.complex128)
    amps[index] = 1.0
    return PureState(amps)


def bb84_state(bit: int, basis_bit: int) -> PureState:
    """The BB84 state carrying `bit` in the Z (`basis_bit=0`) or X (`basis_bit=1`) basis."""

    if bit not in (0, 1) or basis_bit not in (0, 1):
        raise ValueError("Both `bit` and `basis_bit` must be 0 or 1.")
    return BB84_STATES[(basis_bit, bit)]


def probability_of(state: PureState, basis: QubitBasis, outcome: int) -> float:
    """Born probability of `outcome`, marginalizing any attached ancilla."""

    if state.dim == 2:
        return outcome_distribution(state, basis)[outcome]
    return reduced_density(state, "qubit").expectation(basis.vectors[outcome])


KET_0 = computational_state(0)
KET_1 = computational_state(1)
KET_PLUS = PureState(np.array([1.0, 1.0]) / math.sqrt(2))
KET_MINUS = PureState(np.array([1.0, -1.0]) / math.sqrt(2))

BASIS_ANGLES: dict[BasisLabel, int] = {"Z": 0, "X": 45}
Z_BASIS = QubitBasis(0)
X_BASIS = QubitBasis(45)

BB84_STATES: dict[tuple[int, int], PureState] = {
    (0, 0): KET_0,
    (0, 1): KET_1,
    (1, 0): KET_PLUS,
    (1, 1): KET_MINUS,
}

PAULI_I = Unitary(np.eye(2))
PAULI_X = Unitary(np.array([[0, 1], [1, 0]]))
I_PAULI_Y = Unitary(np.array([[0, 1], [-1, 0]]))
PAULI_Z = Unitary(np.array([[1, 0], [0, -1]]))

PAULIS: tuple[Unitary, ...] = (PAULI_I, PAULI_X, I_PAULI_Y, PAULI_Z)
