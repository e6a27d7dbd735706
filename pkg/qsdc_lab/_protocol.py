from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence, TypeVar

import numpy as np
from typing_extensions import Literal, TypeAlias

from ._adversary import (
    AttackModel,
    EveRecord,
    ImpersonateAlice,
    ImpersonateBob,
    NoAttack,
    answer_identity_challenge,
    intercept,
)
from ._config import THETA_SET_SIZE, PartyIdentities, ProtocolConfig
from ._ecc import RepetitionCode, decode_majority
from ._noise import ChannelModel, apply_channel, calibrated_rotation, readout_flip
from ._quantum_core import (
    BASIS_ANGLES,
    Z_BASIS,
    BasisLabel,
    PureState,
    QubitBasis,
    apply,
    bb84_state,
    computational_state,
    measure,
    partial_measure,
    rotation_gate,
)
from ._transcript import (
    Abort,
    AuthAPositions,
    AuthAResult,
    AuthBPositions,
    CheckReveal,
    ClassicalMessage,
    DecoyResults,
    DecoyReveal,
    Party,
    RAnnouncement,
    SessionStatus,
    ThetaPositions,
    Transcript,
    TranscriptEntry,
)
from ._utils import (
    _assert_bit_string,
    _assert_strictly_increasing,
    _group_logical,
    bits_to_int,
    int_to_bits,
    random_bits,
    xor_bits,
)

logger = logging.getLogger(__name__)

Role: TypeAlias = Literal["message", "check", "auth_a", "auth_b", "theta", "decoy"]
ROLES: tuple[Role, ...] = ("message", "check", "auth_a", "auth_b", "theta", "decoy")

T = TypeVar("T")


class InvalidThetaError(ValueError):
    """Raised when the angle Bob reconstructs lies outside the angle set."""


# Plan and layout ----


@dataclass(frozen=True)
class DecoyDescriptor:
    """Preparation basis and bit of one decoy qubit."""

    basis: BasisLabel
    bit: int

    def __post_init__(self):
        if self.basis not in BASIS_ANGLES:
            raise ValueError(f"The decoy `basis` must be 'Z' or 'X', got {self.basis!r}.")
        if self.bit not in (0, 1):
            raise ValueError(f"The decoy `bit` must be 0 or 1, got {self.bit}.")

    @classmethod
    def from_code(cls, code: int) -> DecoyDescriptor:
        return cls("Z" if code // 2 == 0 else "X", int(code % 2))

    @property
    def state(self) -> PureState:
        return bb84_state(self.bit, 0 if self.basis == "Z" else 1)


@dataclass(frozen=True)
class InsertionSlots:
    """
    Where each inserted part lands.

    Every entry lists, for one insertion stage, the slots of the grown sequence that the
    inserted qubits occupy (0-indexed, increasing). Stages run in the order I_A, I_B, Q_θ,
    decoys.
    """

    auth_a: tuple[int, ...]
    auth_b: tuple[int, ...]
    theta: tuple[int, ...]
    decoy: tuple[int, ...]

    def __post_init__(self):
        for name in ["auth_a", "auth_b", "theta", "decoy"]:
            slots = tuple(int(s) for s in getattr(self, name))
            _assert_strictly_increasing(slots, name)
            object.__setattr__(self, name, slots)


@dataclass(frozen=True)
class SessionPlan:
    """
    Every random choice Alice makes in one session.

    Drawing the plan first and preparing from it afterwards means a session can be replayed
    from an explicit plan, which is how fixed worked examples are reproduced.
    """

    theta: int
    r: str
    check_positions: tuple[int, ...]
    check_values: str
    decoys: tuple[DecoyDescriptor, ...]
    slots: InsertionSlots

    def __post_init__(self):
        object.__setattr__(self, "check_positions", tuple(int(p) for p in self.check_positions))
        object.__setattr__(self, "decoys", tuple(self.decoys))
        _assert_bit_string(self.r, "r")
        _assert_bit_string(self.check_values, "check_values", len(self.check_positions))
        _assert_strictly_increasing(self.check_positions, "check_positions")
        if not isinstance(self.theta, int) or isinstance(self.theta, bool):
            raise TypeError(f"The `theta` value must be an integer, got {type(self.theta)}.")

    def validate_for(self, config: ProtocolConfig, copies: int = 1) -> None:
        _assert_theta(self.theta, config.theta_max)
        if len(self.r) != config.k:
            raise ValueError(f"The plan's `r` must have length k={config.k}.")
        if len(self.check_positions) != config.c:
            raise ValueError(f"The plan must hold exactly c={config.c} check positions.")
        if self.check_positions and self.check_positions[-1] >= config.n + config.c:
            raise ValueError("Check positions must lie inside the augmented message.")
        if len(self.decoys) != config.m:
            raise ValueError(f"The plan must hold exactly m={config.m} decoys.")

        expected = [
            copies * config.k // 2,
            copies * config.k,
            copies * self.theta.bit_length(),
            copies * config.m,
        ]
        got = [len(self.slots.auth_a), len(self.slots.auth_b), len(self.slots.theta), len(self.slots.decoy)]
        if got != expected:
            raise ValueError(f"The plan's insertion slots have sizes {got}, expected {expected}.")


@dataclass(frozen=True)
class SequenceLayout:
    """
    Role and ordinal of every position of the transmitted sequence.

    Ordinals count physical qubits within a role in preparation order. With a repetition
    code each logical qubit occupies `copies` physical positions.
    """

    role_of: tuple[Role, ...]
    ordinal_of: tuple[int, ...]
    copies: int = 1
    interleave: bool = False

    def __post_init__(self):
        object.__setattr__(self, "role_of", tuple(self.role_of))
        object.__setattr__(self, "ordinal_of", tuple(int(o) for o in self.ordinal_of))

        if len(self.role_of) != len(self.ordinal_of):
            raise ValueError("Every position needs both a role and an ordinal.")

        for role in ROLES:
            ordinals = [o for r, o in zip(self.role_of, self.ordinal_of) if r == role]
            if ordinals != list(range(len(ordinals))):
                raise ValueError(f"Ordinals of role `{role}` must run 0, 1, ... in order.")
            if len(ordinals) % self.copies != 0:
                raise ValueError(f"Role `{role}` does not hold a whole number of copies.")

        unknown = set(self.role_of) - set(ROLES)
        if unknown:
            raise ValueError(f"Unknown roles in layout: {sorted(unknown)}.")

    @property
    def total_len(self) -> int:
        return len(self.role_of)

    def positions_of(self, *roles: Role) -> tuple[int, ...]:
        return tuple(pos for pos, role in enumerate(self.role_of) if role in roles)

    def count(self, role: Role) -> int:
        return sum(1 for r in self.role_of if r == role)

    def role_counts(self) -> dict[Role, int]:
        return {role: self.count(role) for role in ROLES}

    def logical_groups(self, *roles: Role) -> list[list[int]]:
        return _group_logical(self.positions_of(*roles), self.copies, self.interleave)

    def logical_of(self, position: int) -> int:
        """Index of the logical qubit that `position` is a copy of, within its role."""

        ordinal = self.ordinal_of[position]
        if self.interleave:
            return ordinal % (self.count(self.role_of[position]) // self.copies)
        return ordinal // self.copies

    def compact_positions(self, positions: Sequence[int]) -> tuple[int, ...]:
        """Re-index positions against the sequence with its decoys removed."""

        decoys = set(self.positions_of("decoy"))
        if decoys & set(positions):
            raise ValueError("Decoy positions have no place in the decoy-free sequence.")
        return tuple(p - sum(1 for d in decoys if d < p) for p in positions)


class PreparedSequence(NamedTuple):
    sequence: tuple[PureState, ...]
    layout: SequenceLayout
    augmented: str
    id_b1: str


@dataclass(frozen=True)
class SessionOutcome:
    """
    Result of one session.

    Error rates of stages the session never reached are `None`. `theta` is the angle Bob
    decoded, if he got that far.
    """

    status: SessionStatus
    transcript: Transcript
    recovered_message: str | None = None
    decoy_error_rate: float | None = None
    auth_a_error_rate: float | None = None
    r_match: bool = False
    check_bit_error_rate: float | None = None
    theta: int | None = None
    eve: EveRecord | None = field(default=None, repr=False)

    def __post_init__(self):
        if (self.recovered_message is not None) != (self.status == "Delivered"):
            raise ValueError("A recovered message is present exactly when it was delivered.")

    @property
    def delivered(self) -> bool:
        return self.status == "Delivered"


class SecurityCheck(NamedTuple):
    error_rate: float
    passed: bool
    entries: tuple[TranscriptEntry, ...]


class SessionStreams(NamedTuple):
    alice: np.random.Generator
    bob: np.random.Generator
    eve: np.random.Generator
    channel: np.random.Generator


def session_streams(seed: int) -> SessionStreams:
    """Spawn the four independent random streams of a session from its seed."""

    children = np.random.SeedSequence(seed).spawn(4)
    return SessionStreams(*(np.random.default_rng(child) for child in children))


# Alice: preparation ----


def _assert_theta(theta: int, theta_max: int = THETA_SET_SIZE) -> None:
    if not isinstance(theta, (int, np.integer)) or isinstance(theta, bool):
        raise TypeError(f"The `theta` value must be an integer number of degrees, got {type(theta)}.")
    if not 1 <= theta <= theta_max:
        raise ValueError(f"The `theta` value must lie in {{1, ..., {theta_max}}}, got {theta}.")


def _draw_check_bits(n: int, c: int, rng: np.random.Generator) -> tuple[tuple[int, ...], str]:
    if c < 0:
        raise ValueError(f"The `c` value must be non-negative, got {c}.")
    positions = tuple(sorted(int(p) for p in rng.choice(n + c, size=c, replace=False)))
    return positions, random_bits(c, rng)


def place_check_bits(message: str, positions: Sequence[int], values: str) -> str:
    """Interleave `values` into `message` so that they sit at `positions` of the result."""

    _assert_bit_string(message, "message")
    _assert_bit_string(values, "values", len(positions))
    _assert_strictly_increasing(positions, "positions")

    total = len(message) + len(positions)
    if positions and positions[-1] >= total:
        raise ValueError("Check positions must lie inside the augmented message.")

    checks = dict(zip(positions, values))
    rest = iter(message)
    return "".join(checks[i] if i in checks else next(rest) for i in range(total))


def insert_check_bits(
    message: str, c: int, rng: np.random.Generator
) -> tuple[str, tuple[int, ...], str]:
    """
    Mix `c` random check bits into the message at random positions.

    Returns
    -------
    tuple[str, tuple[int, ...], str]
        The augmented message M′, the check positions within M′ and the check values.
    """

    _assert_bit_string(message, "message")
    positions, values = _draw_check_bits(len(message), c, rng)
    return place_check_bits(message, positions, values), positions, values


def remove_positions(bits: str, positions: Sequence[int]) -> str:
    drop = set(positions)
    return "".join(b for i, b in enumerate(bits) if i not in drop)


def encode_message_qubits(
    augmented: str, theta: int, *, offset: float = 0.0, theta_max: int = THETA_SET_SIZE
) -> list[PureState]:
    """Prepare U_θ|b⟩ for every bit b of the augmented message."""

    _assert_bit_string(augmented, "augmented")
    _assert_theta(theta, theta_max)

    rot = calibrated_rotation(theta, offset)
    prepared = {bit: apply(rot, computational_state(bit)) for bit in (0, 1)}
    return [prepared[int(b)] for b in augmented]


def encode_identity_A(id_a: str) -> list[PureState]:
    """Encode Alice's identity two bits per qubit: 00 → |0⟩, 01 → |1⟩, 10 → |+⟩, 11 → |−⟩."""

    _assert_bit_string(id_a, "id_a")
    if len(id_a) % 2 != 0:
        raise ValueError(f"The `id_a` value must have even length, got {len(id_a)}.")

    return [bb84_state(int(id_a[i + 1]), int(id_a[i])) for i in range(0, len(id_a), 2)]


def encode_identity_B(id_b: str, r: str) -> list[PureState]:
    """
    Encode Id_B¹ = Id_B ⊕ r, one bit per qubit in the basis chosen by the matching Id_B bit.
    """

    _assert_bit_string(id_b, "id_b")
    _assert_bit_string(r, "r", len(id_b))

    id_b1 = xor_bits(id_b, r)
    return [bb84_state(int(v), int(b)) for v, b in zip(id_b1, id_b)]


def encode_theta(theta: int, id_b: str) -> list[PureState]:
    """Encode the binary digits of θ, one per qubit, in the bases chosen by Id_B."""

    _assert_bit_string(id_b, "id_b")
    _assert_theta(theta)

    bits = int_to_bits(theta)
    if len(bits) > len(id_b):
        raise ValueError(
            f"The angle {theta} needs {len(bits)} bits but identities only have {len(id_b)}."
        )
    return [bb84_state(int(v), int(b)) for v, b in zip(bits, id_b)]


def _draw_decoy_descriptors(m: int, rng: np.random.Generator) -> tuple[DecoyDescriptor, ...]:
    if m < 1:
        raise ValueError(f"The `m` value must be at least 1, got {m}.")
    return tuple(DecoyDescriptor.from_code(int(code)) for code in rng.integers(0, 4, size=m))


def sample_decoys(
    m: int, rng: np.random.Generator
) -> tuple[list[PureState], tuple[DecoyDescriptor, ...]]:
    descriptors = _draw_decoy_descriptors(m, rng)
    return [d.state for d in descriptors], descriptors


def _draw_slots(base_len: int, sizes: Sequence[int], rng: np.random.Generator) -> InsertionSlots:
    stages: list[tuple[int, ...]] = []
    length = base_len
    for size in sizes:
        grown = length + size
        stages.append(tuple(sorted(int(s) for s in rng.choice(grown, size=size, replace=False))))
        length = grown
    return InsertionSlots(*stages)


def _insert(current: list[T], part: Sequence[T], slots: Sequence[int]) -> list[T]:
    if len(part) != len(slots):
        raise ValueError(f"Inserting {len(part)} items needs as many slots, got {len(slots)}.")
    grown = len(current) + len(part)
    if slots and slots[-1] >= grown:
        raise ValueError(f"Insertion slot {slots[-1]} is outside the grown length {grown}.")

    chosen = dict(zip(slots, part))
    rest = iter(current)
    return [chosen[i] if i in chosen else next(rest) for i in range(grown)]


def _repeat(items: Sequence[T], copies: int, interleave: bool) -> list[T]:
    if interleave:
        return list(items) * copies
    return [item for item in items for _ in range(copies)]


def assemble_sequence(
    q1: Sequence[PureState],
    q1_roles: Sequence[Role],
    i_a: Sequence[PureState],
    i_b: Sequence[PureState],
    q_theta: Sequence[PureState],
    decoys: Sequence[PureState],
    rng: np.random.Generator | None = None,
    *,
    slots: InsertionSlots | None = None,
    copies: int = 1,
    interleave: bool = False,
) -> tuple[list[PureState], SequenceLayout]:
    """
    Insert I_A, I_B, Q_θ and the decoys, in that order, into the message qubits.

    Each stage puts its qubits at uniformly random slots of the grown sequence, keeping
    their own order. Pass `slots` to fix those choices instead of drawing them from `rng`.
    """

    if len(q1) != len(q1_roles):
        raise ValueError("Every message qubit needs a role.")
    if any(role not in ("message", "check") for role in q1_roles):
        raise ValueError("Message qubits can only have the roles `message` or `check`.")

    parts: list[tuple[Role, Sequence[PureState]]] = [
        ("auth_a", i_a),
        ("auth_b", i_b),
        ("theta", q_theta),
        ("decoy", decoys),
    ]
    sizes = [len(part) for _, part in parts]

    if slots is None:
        if rng is None:
            raise ValueError("Either `rng` or `slots` must be supplied.")
        slots = _draw_slots(len(q1), sizes, rng)

    ordinals: dict[Role, int] = {role: 0 for role in ROLES}

    def tagged(role: Role) -> tuple[Role, int]:
        ordinals[role] += 1
        return role, ordinals[role] - 1

    sequence = list(q1)
    tags = [tagged(role) for role in q1_roles]
    stage_slots = [slots.auth_a, slots.auth_b, slots.theta, slots.decoy]

    for (role, part), stage in zip(parts, stage_slots):
        sequence = _insert(sequence, part, stage)
        tags = _insert(tags, [tagged(role) for _ in part], stage)

    layout = SequenceLayout(
        role_of=tuple(role for role, _ in tags),
        ordinal_of=tuple(ordinal for _, ordinal in tags),
        copies=copies,
        interleave=interleave,
    )
    return sequence, layout


def draw_plan(
    config: ProtocolConfig,
    rng: np.random.Generator,
    *,
    ecc: RepetitionCode | None = None,
    theta: int | None = None,
) -> SessionPlan:
    """
    Draw Alice's random choices for one session.

    The draws happen in a fixed order (check bits, θ, r, decoys, insertion slots), so the
    plan depends only on the configuration and the stream, never on the message.
    """

    copies = ecc.distance if ecc is not None else 1

    check_positions, check_values = _draw_check_bits(config.n, config.c, rng)
    if theta is None:
        theta = int(rng.integers(1, config.theta_max + 1))
    _assert_theta(theta, config.theta_max)
    r = random_bits(config.k, rng)
    decoys = _draw_decoy_descriptors(config.m, rng)

    sizes = [config.k // 2, config.k, theta.bit_length(), config.m]
    slots = _draw_slots(copies * (config.n + config.c), [copies * s for s in sizes], rng)

    return SessionPlan(
        theta=theta,
        r=r,
        check_positions=check_positions,
        check_values=check_values,
        decoys=decoys,
        slots=slots,
    )


def prepare_sequence(
    config: ProtocolConfig,
    identities: PartyIdentities,
    message: str,
    plan: SessionPlan,
    *,
    ecc: RepetitionCode | None = None,
    calibration_offset: float = 0.0,
) -> PreparedSequence:
    """Build the transmitted sequence from Alice's inputs and her plan."""

    copies = ecc.distance if ecc is not None else 1
    interleave = ecc.interleave if ecc is not None else False

    _assert_bit_string(message, "message", config.n)
    plan.validate_for(config, copies)

    augmented = place_check_bits(message, plan.check_positions, plan.check_values)
    checks = set(plan.check_positions)
    roles: list[Role] = ["check" if i in checks else "message" for i in range(len(augmented))]

    q1 = encode_message_qubits(
        augmented, plan.theta, offset=calibration_offset, theta_max=config.theta_max
    )
    i_a = encode_identity_A(identities.id_a)
    i_b = encode_identity_B(identities.id_b, plan.r)
    q_theta = encode_theta(plan.theta, identities.id_b)
    decoys = [d.state for d in plan.decoys]

    sequence, layout = assemble_sequence(
        _repeat(q1, copies, interleave),
        _repeat(roles, copies, interleave),
        _repeat(i_a, copies, interleave),
        _repeat(i_b, copies, interleave),
        _repeat(q_theta, copies, interleave),
        _repeat(decoys, copies, interleave),
        slots=plan.slots,
        copies=copies,
        interleave=interleave,
    )

    return PreparedSequence(
        tuple(sequence), layout, augmented, xor_bits(identities.id_b, plan.r)
    )


# Bob: measurement ----


def _measure_qubit(
    state: PureState, basis: QubitBasis, rng: np.random.Generator, readout_error: float
) -> int:
    if state.dim == 2:
        outcome, _ = measure(state, basis, rng)
    else:
        outcome, _ = partial_measure(state, basis, rng)
    return readout_flip(outcome, readout_error, rng)


def _decode_qubit(state: PureState, theta: int, rng: np.random.Generator, readout_error: float) -> int:
    inverse = rotation_gate(theta).inverse()
    if state.dim != 2:
        inverse = inverse.lift()
    return _measure_qubit(apply(inverse, state), Z_BASIS, rng, readout_error)


def _majority_in(
    sequence: Sequence[PureState],
    group: Sequence[int],
    basis: QubitBasis,
    rng: np.random.Generator,
    readout_error: float,
) -> int:
    return decode_majority([_measure_qubit(sequence[p], basis, rng, readout_error) for p in group])


def _copies_of(ecc: RepetitionCode | None) -> tuple[int, bool]:
    return (ecc.distance, ecc.interleave) if ecc is not None else (1, False)


def run_security_check(
    bob_sequence: Sequence[PureState],
    layout: SequenceLayout,
    decoys: Sequence[DecoyDescriptor],
    rng: np.random.Generator,
    *,
    threshold: float = 0.0,
    readout_error: float = 0.0,
) -> SecurityCheck:
    """
    Estimate the channel error from the decoys.

    Alice reveals where the decoys are and their bases; Bob measures each physical decoy in
    the revealed basis and announces his outcomes, which Alice compares with her bits.
    """

    positions = layout.positions_of("decoy")
    expected = [decoys[layout.logical_of(p)] for p in positions]

    reveal = DecoyReveal(positions=positions, bases=tuple(d.basis for d in expected))
    outcomes = tuple(
        _measure_qubit(bob_sequence[p], QubitBasis.from_label(d.basis), rng, readout_error)
        for p, d in zip(positions, expected)
    )

    errors = sum(o != d.bit for o, d in zip(outcomes, expected))
    error_rate = errors / len(positions)

    entries = (TranscriptEntry("Alice", reveal), TranscriptEntry("Bob", DecoyResults(outcomes)))
    return SecurityCheck(error_rate, error_rate <= threshold, entries)


def authenticate_alice(
    bob_sequence: Sequence[PureState],
    id_a: str,
    positions: Sequence[int],
    rng: np.random.Generator,
    *,
    threshold: float = 0.0,
    readout_error: float = 0.0,
    ecc: RepetitionCode | None = None,
) -> tuple[float, bool]:
    """Bob measures I_A in the bases given by Id_A and compares with the encoded bits."""

    copies, interleave = _copies_of(ecc)
    groups = _group_logical(positions, copies, interleave)
    if 2 * len(groups) != len(id_a):
        raise ValueError(f"Expected {len(id_a) // 2} I_A qubits, got {len(groups)}.")

    mismatches = 0
    for i, group in enumerate(groups):
        basis_bit, bit = int(id_a[2 * i]), int(id_a[2 * i + 1])
        outcome = _majority_in(bob_sequence, group, QubitBasis(45 * basis_bit), rng, readout_error)
        mismatches += outcome != bit

    error_rate = mismatches / len(groups)
    return error_rate, error_rate <= threshold


def authenticate_bob(
    bob_sequence: Sequence[PureState],
    id_b: str,
    positions: Sequence[int],
    r: str,
    rng: np.random.Generator,
    *,
    readout_error: float = 0.0,
    ecc: RepetitionCode | None = None,
) -> tuple[str, bool]:
    """
    Bob recovers Id_B¹ from I_B and announces r = Id_B ⊕ Id_B¹; Alice checks it against `r`.
    """

    copies, interleave = _copies_of(ecc)
    groups = _group_logical(positions, copies, interleave)
    if len(groups) != len(id_b):
        raise ValueError(f"Expected {len(id_b)} I_B qubits, got {len(groups)}.")

    id_b1 = "".join(
        str(_majority_in(bob_sequence, group, QubitBasis(45 * int(b)), rng, readout_error))
        for group, b in zip(groups, id_b)
    )
    recovered_r = xor_bits(id_b, id_b1)
    return recovered_r, recovered_r == r


def decode_message(
    bob_sequence: Sequence[PureState],
    theta_positions: Sequence[int],
    mprime_positions: Sequence[int],
    id_b: str,
    rng: np.random.Generator,
    *,
    theta_max: int = THETA_SET_SIZE,
    readout_error: float = 0.0,
    ecc: RepetitionCode | None = None,
) -> tuple[int, str]:
    """
    Recover θ from Q_θ, then undo U_θ on the message qubits and read them out.

    Raises
    ------
    InvalidThetaError
        If the decoded angle lies outside {1, ..., theta_max}.
    """

    copies, interleave = _copies_of(ecc)
    theta_groups = _group_logical(theta_positions, copies, interleave)
    if len(theta_groups) > len(id_b):
        raise ValueError(f"Got {len(theta_groups)} θ qubits but Id_B has only {len(id_b)} bits.")

    theta_bits = "".join(
        str(_majority_in(bob_sequence, group, QubitBasis(45 * int(b)), rng, readout_error))
        for group, b in zip(theta_groups, id_b)
    )
    theta = bits_to_int(theta_bits)
    if not 1 <= theta <= theta_max:
        raise InvalidThetaError(f"Decoded angle {theta} lies outside {{1, ..., {theta_max}}}.")

    mprime = "".join(
        str(
            decode_majority(
                [_decode_qubit(bob_sequence[p], theta, rng, readout_error) for p in group]
            )
        )
        for group in _group_logical(mprime_positions, copies, interleave)
    )
    return theta, mprime


def verify_integrity(
    mprime: str, check_positions: Sequence[int], check_values: str, threshold: float = 0.0
) -> tuple[float, str, bool]:
    """Compare the check bits and strip them from M′."""

    _assert_bit_string(mprime, "mprime")
    _assert_bit_string(check_values, "check_values", len(check_positions))

    message = remove_positions(mprime, check_positions)
    if not check_positions:
        return 0.0, message, True

    errors = sum(mprime[p] != v for p, v in zip(check_positions, check_values))
    error_rate = errors / len(check_positions)
    return error_rate, message, error_rate <= threshold


# Session ----


def _remaining(total: int, announced: Sequence[Sequence[int]]) -> tuple[int, ...]:
    taken = {p for positions in announced for p in positions}
    return tuple(p for p in range(total) if p not in taken)


def run_session(
    config: ProtocolConfig,
    identities: PartyIdentities,
    message: str,
    channel: ChannelModel | None = None,
    attack: AttackModel | None = None,
    *,
    ecc: RepetitionCode | None = None,
    plan: SessionPlan | None = None,
    theta: int | None = None,
) -> SessionOutcome:
    """
    Run one session between Alice and Bob.

    The qubits pass from Alice through the device channel, then Eve, then reach Bob. The
    session stops at the first failed stage; failures are reported in the outcome status,
    never raised.

    Parameters
    ----------
    config
        Session sizes, thresholds and seed.
    identities
        The identities Alice and Bob share.
    message
        The n-bit message Alice sends.
    channel
        Noise and device model. Defaults to an ideal channel.
    attack
        Eve's strategy. Defaults to no attack.
    ecc
        Repetition code applied to every prepared qubit.
    plan
        Alice's random choices. Drawn from the session seed if not supplied.
    theta
        Fix the angle while drawing the plan. Ignored when `plan` is supplied.

    Returns
    -------
    SessionOutcome
        Status, error rates, Bob's message if delivered, transcript and Eve's record.
    """

    channel = channel if channel is not None else ChannelModel.ideal()
    attack = attack if attack is not None else NoAttack()
    identities.validate_for(config)
    _assert_bit_string(message, "message", config.n)

    streams = session_streams(config.seed)
    readout = channel.device.readout_error
    copies, interleave = _copies_of(ecc)

    # the sender's and receiver's view of the identities
    sender_ids = receiver_ids = identities
    sent = message
    if isinstance(attack, ImpersonateAlice):
        sender_ids = PartyIdentities.random(config.k, streams.eve)
        sent = random_bits(config.n, streams.eve)
    elif isinstance(attack, ImpersonateBob):
        receiver_ids = PartyIdentities.random(config.k, streams.eve)

    if plan is None:
        plan = draw_plan(config, streams.alice, ecc=ecc, theta=theta)

    prepared = prepare_sequence(
        config,
        sender_ids,
        sent,
        plan,
        ecc=ecc,
        calibration_offset=channel.device.calibration_offset,
    )
    layout = prepared.layout
    logger.debug("prepared %d qubits (theta=%d)", layout.total_len, plan.theta)

    in_flight = [apply_channel(q, channel, streams.channel) for q in prepared.sequence]
    received, eve = intercept(attack, in_flight, streams.eve)

    transcript = Transcript()
    results: dict[str, object] = {"eve": eve}

    def record(sender: Party, msg: ClassicalMessage) -> None:
        nonlocal transcript
        transcript = transcript.append(sender, msg)

    def abort(status: SessionStatus, sender: Party, stage: str, reason: str) -> SessionOutcome:
        logger.debug("session aborted at %s: %s", stage, reason)
        record(sender, Abort(stage=stage, reason=reason))  # type: ignore[arg-type]
        return SessionOutcome(status=status, transcript=transcript, **results)  # type: ignore[arg-type]

    # security check
    check = run_security_check(
        received,
        layout,
        plan.decoys,
        streams.bob,
        threshold=config.decoy_error_threshold,
        readout_error=readout,
    )
    for entry in check.entries:
        record(entry.sender, entry.message)
    results["decoy_error_rate"] = check.error_rate
    if not check.passed:
        return abort(
            "AbortedSecurityCheck",
            "Alice",
            "security_check",
            f"decoy error rate {check.error_rate:.4f} exceeds {config.decoy_error_threshold}",
        )

    # Bob authenticates Alice
    auth_a_positions = layout.positions_of("auth_a")
    record("Alice", AuthAPositions(auth_a_positions))
    if isinstance(attack, ImpersonateBob):
        # Eve cannot check Alice without Id_A and simply accepts
        accepted = True
    else:
        rate, accepted = authenticate_alice(
            received,
            receiver_ids.id_a,
            auth_a_positions,
            streams.bob,
            threshold=config.auth_error_threshold,
            readout_error=readout,
            ecc=ecc,
        )
        results["auth_a_error_rate"] = rate
    record("Bob", AuthAResult(accepted=accepted))
    if not accepted:
        return abort("AbortedAuthA", "Bob", "auth_a", "Alice's identity qubits do not match Id_A")

    # Alice authenticates Bob
    auth_b_positions = layout.positions_of("auth_b")
    record("Alice", AuthBPositions(auth_b_positions))
    if isinstance(attack, ImpersonateBob):
        groups = _group_logical(auth_b_positions, copies, interleave)
        announced_r, eve = answer_identity_challenge(received, groups, prepared.id_b1, streams.eve)
        results["eve"] = eve
    else:
        announced_r, _ = authenticate_bob(
            received,
            receiver_ids.id_b,
            auth_b_positions,
            plan.r,
            streams.bob,
            readout_error=readout,
            ecc=ecc,
        )
    record("Bob", RAnnouncement(announced_r))
    results["r_match"] = r_match = announced_r == plan.r
    if not r_match:
        return abort("AbortedAuthB", "Alice", "auth_b", "announced r does not match")

    # decoding
    theta_positions = layout.positions_of("theta")
    record("Alice", ThetaPositions(theta_positions))
    mprime_positions = _remaining(
        layout.total_len,
        [layout.positions_of("decoy"), auth_a_positions, auth_b_positions, theta_positions],
    )
    try:
        decoded_theta, mprime = decode_message(
            received,
            theta_positions,
            mprime_positions,
            receiver_ids.id_b,
            streams.bob,
            theta_max=config.theta_max,
            readout_error=readout,
            ecc=ecc,
        )
    except InvalidThetaError as exc:
        return abort("AbortedIntegrity", "Bob", "decode", str(exc))
    results["theta"] = decoded_theta

    # integrity
    check_groups = layout.logical_groups("check")
    reveal = CheckReveal(positions=tuple(g[0] for g in check_groups), values=plan.check_values)
    record("Alice", reveal)

    logical_index = {
        p: i for i, group in enumerate(_group_logical(mprime_positions, copies, interleave)) for p in group
    }
    check_rate, recovered, passed = verify_integrity(
        mprime,
        [logical_index[p] for p in reveal.positions],
        reveal.values,
        config.check_bit_error_threshold,
    )
    results["check_bit_error_rate"] = check_rate
    if not passed:
        return abort(
            "AbortedIntegrity",
            "Bob",
            "integrity",
            f"check bit error rate {check_rate:.4f} exceeds {config.check_bit_error_threshold}",
        )

    logger.debug("session delivered %d bits", len(recovered))
    return SessionOutcome(
        status="Delivered",
        transcript=transcript,
        recovered_message=recovered,
        **results,  # type: ignore[arg-type]
    )
