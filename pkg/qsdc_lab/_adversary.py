from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import singledispatch
from typing import TYPE_CHECKING, Callable, ClassVar, Sequence

import numpy as np

from ._quantum_core import (
    ANCILLA_DIM,
    BB84_STATES,
    PAULIS,
    TOL,
    PureState,
    QubitBasis,
    Unitary,
    apply,
    computational_state,
    measure,
    outcome_distribution,
    probability_of,
    reduced_density,
    rotation_gate,
    tensor,
    trace_distance,
)
from ._utils import _assert_probability, random_bits

if TYPE_CHECKING:
    from ._config import ProtocolConfig
    from ._protocol import SessionOutcome

logger = logging.getLogger(__name__)

# Eve's ancilla starts in the first of its four basis states
CHI = computational_state(0, ANCILLA_DIM)

# Probability that a decoy survives each of I, σx, iσy, σz unchanged
DOS_PAULI_PASS = (1.0, 0.5, 0.0, 0.5)


# Attack models ----


@dataclass(frozen=True)
class AttackModel:
    tag: ClassVar[str] = "attack"


@dataclass(frozen=True)
class NoAttack(AttackModel):
    tag: ClassVar[str] = "none"


@dataclass(frozen=True)
class ImpersonateAlice(AttackModel):
    """Eve poses as Alice, fabricating the identity qubits with guessed identities."""

    tag: ClassVar[str] = "impersonate_alice"


@dataclass(frozen=True)
class ImpersonateBob(AttackModel):
    """Eve poses as Bob and has to answer Alice's identity challenge."""

    tag: ClassVar[str] = "impersonate_bob"


@dataclass(frozen=True)
class InterceptResend(AttackModel):
    """
    Eve measures every qubit in the basis at `theta0` degrees and resends the outcome state.

    With `theta0=None` a fresh angle is drawn from {1, ..., 360} for every session.
    """

    tag: ClassVar[str] = "intercept_resend"
    theta0: float | None = None


@dataclass(frozen=True)
class EntangleMeasure(AttackModel):
    """Eve entangles every qubit with a four-level ancilla; `fidelity` is F (and D = 1 - F)."""

    tag: ClassVar[str] = "entangle_measure"
    fidelity: float = 0.5

    def __post_init__(self):
        _assert_probability(self.fidelity, "fidelity")


@dataclass(frozen=True)
class DoS(AttackModel):
    """
    Eve disturbs each qubit with probability 1/2.

    A disturbed qubit receives one of I, σx, iσy, σz drawn with probabilities w_i², where
    `weights` are the real coefficients (w1, w2, w3, w4) with Σ w_i² = 1.
    """

    tag: ClassVar[str] = "dos"
    weights: tuple[float, float, float, float] = (1.0, 0.0, 0.0, 0.0)

    def __post_init__(self):
        object.__setattr__(self, "weights", validate_weights(self.weights))


@dataclass(frozen=True)
class MITM(AttackModel):
    """Eve keeps the whole sequence and forwards uniformly random BB84 states instead."""

    tag: ClassVar[str] = "mitm"


ATTACK_TYPES: dict[str, type[AttackModel]] = {
    cls.tag: cls
    for cls in [NoAttack, ImpersonateAlice, ImpersonateBob, InterceptResend, EntangleMeasure, DoS, MITM]
}


@dataclass(frozen=True)
class EveRecord:
    """
    Everything Eve holds at the end of a session.

    Parameters
    ----------
    outcomes
        Measurement outcomes by sequence position (intercept-resend).
    theta0
        Measurement angle used by an intercept-resend attack.
    entangled_positions
        Positions whose qubit was entangled with one of Eve's ancillas. The ancilla is part of
        the joint state that travels on to Bob.
    disturbed_positions
        Positions where a denial-of-service operator was applied, with the Pauli index.
    kept_sequence
        The original sequence withheld by a man-in-the-middle.
    guessed_id_b1, true_id_b1
        Eve's guess of the random identity string Id_B¹ in a Bob impersonation, and the
        value Alice actually used.
    """

    outcomes: tuple[tuple[int, int], ...] = ()
    theta0: float | None = None
    entangled_positions: tuple[int, ...] = ()
    disturbed_positions: tuple[tuple[int, int], ...] = ()
    kept_sequence: tuple[PureState, ...] = field(default=(), repr=False)
    guessed_id_b1: str | None = None
    true_id_b1: str | None = None

    @property
    def guess_correct(self) -> bool | None:
        if self.guessed_id_b1 is None or self.true_id_b1 is None:
            return None
        return self.guessed_id_b1 == self.true_id_b1


# Channel interception ----


@singledispatch
def intercept(
    attack: AttackModel, sequence: list[PureState], rng: np.random.Generator
) -> tuple[list[PureState], EveRecord]:
    """Let Eve act on the qubits in flight from Alice to Bob."""

    raise NotImplementedError(f"Unsupported attack model: {type(attack)}")


@intercept.register
def _(attack: NoAttack, sequence: list[PureState], rng: np.random.Generator):
    return sequence, EveRecord()


@intercept.register
def _(attack: ImpersonateAlice, sequence: list[PureState], rng: np.random.Generator):
    # Eve already prepared the sequence herself
    return sequence, EveRecord()


@intercept.register
def _(attack: ImpersonateBob, sequence: list[PureState], rng: np.random.Generator):
    # Eve is the receiver; her actions happen at the receiving end
    return sequence, EveRecord()


@intercept.register
def _(attack: InterceptResend, sequence: list[PureState], rng: np.random.Generator):
    theta0 = attack.theta0 if attack.theta0 is not None else float(rng.integers(1, 361))
    return intercept_resend(sequence, theta0, rng)


@intercept.register
def _(attack: EntangleMeasure, sequence: list[PureState], rng: np.random.Generator):
    u_e = entangling_unitary(attack.fidelity)
    joint = [apply(u_e, tensor(q, CHI)) for q in sequence]
    return joint, EveRecord(entangled_positions=tuple(range(len(sequence))))


@intercept.register
def _(attack: DoS, sequence: list[PureState], rng: np.random.Generator):
    return dos_apply(sequence, attack.weights, rng)


@intercept.register
def _(attack: MITM, sequence: list[PureState], rng: np.random.Generator):
    fabricated = mitm_replace(len(sequence), rng)
    return fabricated, EveRecord(kept_sequence=tuple(sequence))


# Intercept-resend ----


def intercept_resend(
    sequence: Sequence[PureState], theta0: float, rng: np.random.Generator
) -> tuple[list[PureState], EveRecord]:
    basis = QubitBasis(theta0)
    resent: list[PureState] = []
    outcomes: list[tuple[int, int]] = []

    for pos, qubit in enumerate(sequence):
        outcome, post = measure(qubit, basis, rng)
        resent.append(post)
        outcomes.append((pos, outcome))

    return resent, EveRecord(outcomes=tuple(outcomes), theta0=basis.angle)


def _decoy_pass(transform: Callable[[PureState], list[tuple[float, PureState]]]) -> float:
    """
    Average probability that Bob reads a decoy correctly, over the four BB84 decoys.

    `transform` maps a decoy to the weighted branches of what reaches Bob.
    """

    total = 0.0
    for (basis_bit, bit), decoy in BB84_STATES.items():
        basis = QubitBasis(45 * basis_bit)
        total += sum(w * probability_of(state, basis, bit) for w, state in transform(decoy))
    return total / len(BB84_STATES)


def intercept_decoy_survival(theta0: float) -> float:
    """Exact per-decoy pass probability under intercept-resend at angle `theta0`."""

    basis = QubitBasis(theta0)

    def branches(decoy: PureState) -> list[tuple[float, PureState]]:
        probs = outcome_distribution(decoy, basis)
        return [(probs[i], basis.vectors[i]) for i in (0, 1)]

    return _decoy_pass(branches)


def detection_prob_intercept(m: int) -> float:
    if m < 0:
        raise ValueError(f"The `m` value must be non-negative, got {m}.")
    return 1.0 - 0.75**m


def p_corr_bound(N: int, l: int, n: int) -> tuple[float, bool]:
    """
    Probability that Eve, knowing the angle set, guesses both θ and the message positions.

    Parameters
    ----------
    N
        Size of the angle set.
    l
        Length of the transmitted sequence.
    n
        Number of message qubits.

    Returns
    -------
    tuple[float, bool]
        The exact probability 1 / (N C(l, n)), and whether it is at most (1/2)^n whenever
        l >= 2n (1/2)^(floor(log2 N) / n). When that condition fails the bound is not
        claimed and the flag is true.
    """

    if not 1 <= n <= l or N < 1:
        raise ValueError("Need N >= 1 and 1 <= n <= l.")

    exact = Fraction(1, N * math.comb(l, n))
    condition = l >= 2 * n * 0.5 ** (math.floor(math.log2(N)) / n)
    holds = (not condition) or exact <= Fraction(1, 2**n)
    return float(exact), holds


def p_corr_intermediate(N: int, l: int, n: int) -> float:
    """The intermediate bound (1/N)(n/l)^n obtained from C(l, n) >= (l/n)^n."""

    if not 1 <= n <= l or N < 1:
        raise ValueError("Need N >= 1 and 1 <= n <= l.")
    return float(Fraction(n**n, N * l**n))


# Entangle-measure ----


def entangling_unitary(fidelity: float) -> Unitary:
    """
    Eve's entangling operator on qubit ⊗ ancilla.

    It maps |0⟩|χ⟩ to α0|0⟩|χ00⟩ + β0|1⟩|χ01⟩ and |1⟩|χ⟩ to α1|0⟩|χ10⟩ + β1|1⟩|χ11⟩ with
    α0 = β1 = √F and α1 = β0 = √(1 - F), the four χ being the ancilla basis states. The
    remaining columns complete these two to a unitary.
    """

    _assert_probability(fidelity, "fidelity")

    f, d = math.sqrt(fidelity), math.sqrt(1.0 - fidelity)
    dim = 2 * ANCILLA_DIM

    def ket(qubit: int, ancilla: int) -> int:
        return qubit * ANCILLA_DIM + ancilla

    fixed = np.zeros((dim, 2), dtype=np.complex128)
    fixed[ket(0, 0), 0], fixed[ket(1, 1), 0] = f, d
    fixed[ket(0, 2), 1], fixed[ket(1, 3), 1] = d, f

    # orthonormal complement of the two fixed columns
    _, _, vh = np.linalg.svd(fixed.conj().T)
    complement = vh[2:].conj().T

    matrix = np.zeros((dim, dim), dtype=np.complex128)
    matrix[:, ket(0, 0)] = fixed[:, 0]
    matrix[:, ket(1, 0)] = fixed[:, 1]
    free = [c for c in range(dim) if c not in (ket(0, 0), ket(1, 0))]
    matrix[:, free] = complement

    return Unitary(matrix)


def entangle_attach(qubit: PureState, fidelity: float) -> PureState:
    return apply(entangling_unitary(fidelity), tensor(qubit, CHI))


def entangle_decoy_pass_prob(fidelity: float) -> float:
    _assert_probability(fidelity, "fidelity")
    return (fidelity + 0.5) / 2


def entangle_decoy_pass_exact(fidelity: float) -> float:
    """Per-decoy pass probability computed from the joint states by the Born rule."""

    u_e = entangling_unitary(fidelity)
    return _decoy_pass(lambda decoy: [(1.0, apply(u_e, tensor(decoy, CHI)))])


def eve_message_distinguishability(theta: float, fidelity: float) -> float:
    """
    Trace distance between Eve's ancilla states for message bits 0 and 1 under angle `theta`.
    """

    u_e = entangling_unitary(fidelity)
    rot = rotation_gate(theta)
    rhos = [
        reduced_density(apply(u_e, tensor(apply(rot, computational_state(bit)), CHI)), "ancilla")
        for bit in (0, 1)
    ]
    return trace_distance(rhos[0], rhos[1])


# Denial of service ----


def validate_weights(weights: Sequence[float]) -> tuple[float, float, float, float]:
    if len(weights) != 4:
        raise ValueError(f"The `weights` value needs exactly 4 entries, got {len(weights)}.")
    w = tuple(float(x) for x in weights)
    if any(not math.isfinite(x) for x in w):
        raise ValueError("The `weights` entries must be finite real numbers.")
    norm = math.fsum(x * x for x in w)
    if abs(norm - 1.0) > TOL:
        raise ValueError(f"The `weights` must satisfy Σ w_i² = 1, got {norm}.")
    return w  # type: ignore[return-value]


def dos_apply(
    sequence: Sequence[PureState], weights: Sequence[float], rng: np.random.Generator
) -> tuple[list[PureState], EveRecord]:
    w = validate_weights(weights)
    probs = np.array(w) ** 2
    probs = probs / probs.sum()

    out: list[PureState] = []
    disturbed: list[tuple[int, int]] = []
    for pos, qubit in enumerate(sequence):
        # one mixing draw and one operator draw per qubit, applied or not
        mixed = rng.random() < 0.5
        idx = int(rng.choice(len(PAULIS), p=probs))
        if mixed:
            out.append(apply(PAULIS[idx], qubit))
            disturbed.append((pos, idx))
        else:
            out.append(qubit)

    return out, EveRecord(disturbed_positions=tuple(disturbed))


def dos_unitary_pass(weights: Sequence[float]) -> float:
    """Pass probability p' = Σ p_i w_i² of a decoy that received the disturbance."""

    w = validate_weights(weights)
    return math.fsum(p * x * x for p, x in zip(DOS_PAULI_PASS, w))


def dos_decoy_pass_prob(weights: Sequence[float]) -> float:
    return (1.0 + dos_unitary_pass(weights)) / 2


def dos_decoy_pass_exact(weights: Sequence[float]) -> float:
    """Per-decoy pass probability averaged over the four decoys and the Pauli branches."""

    w = validate_weights(weights)

    def branches(decoy: PureState) -> list[tuple[float, PureState]]:
        hit = [(0.5 * x * x, apply(pauli, decoy)) for x, pauli in zip(w, PAULIS)]
        return [(0.5, decoy), *hit]

    return _decoy_pass(branches)


# Man in the middle ----


def mitm_replace(length: int, rng: np.random.Generator) -> list[PureState]:
    codes = rng.integers(0, 4, size=length)
    return [BB84_STATES[(int(c) // 2, int(c) % 2)] for c in codes]


def mitm_decoy_pass_exact() -> float:
    """Per-decoy pass probability when every decoy is swapped for a random BB84 state."""

    fabricated = list(BB84_STATES.values())
    return _decoy_pass(lambda decoy: [(1 / len(fabricated), s) for s in fabricated])


# Impersonation ----


def answer_identity_challenge(
    sequence: Sequence[PureState],
    groups: Sequence[Sequence[int]],
    true_id_b1: str,
    rng: np.random.Generator,
) -> tuple[str, EveRecord]:
    """
    Eve, posing as Bob, measures the I_B qubits and answers with a guessed r.

    She measures the first copy of every I_B qubit in a uniformly random Z or X basis and
    takes the outcomes as her guess of Id_B¹. Without Id_B she cannot derive r from it, so
    she announces a uniformly random r.
    """

    guess: list[str] = []
    for group in groups:
        basis = QubitBasis(45 * int(rng.integers(0, 2)))
        qubit = sequence[group[0]]
        if qubit.dim == 2:
            outcome, _ = measure(qubit, basis, rng)
        else:
            outcome = int(rng.random() >= probability_of(qubit, basis, 0))
        guess.append(str(outcome))

    r = random_bits(len(groups), rng)
    return r, EveRecord(guessed_id_b1="".join(guess), true_id_b1=true_id_b1)


def impersonate_alice_session(config: ProtocolConfig, rng: np.random.Generator) -> SessionOutcome:
    """Run one session in which Eve poses as Alice towards an honest Bob."""

    return _impersonation_session(config, ImpersonateAlice(), rng)


def impersonate_bob_session(config: ProtocolConfig, rng: np.random.Generator) -> SessionOutcome:
    """Run one session in which Eve poses as Bob towards an honest Alice."""

    return _impersonation_session(config, ImpersonateBob(), rng)


def _impersonation_session(
    config: ProtocolConfig, attack: AttackModel, rng: np.random.Generator
) -> SessionOutcome:
    from ._config import PartyIdentities
    from ._protocol import run_session

    identities = PartyIdentities.random(config.k, rng)
    message = random_bits(config.n, rng)
    seed = int(rng.integers(0, 2**63))
    return run_session(replace(config, seed=seed), identities, message, attack=attack)
