from __future__ import annotations

from dataclasses import dataclass, field
from typing import ClassVar, Iterator, Sequence, TypeVar, overload

from typing_extensions import Literal, TypeAlias

from ._quantum_core import BasisLabel
from ._utils import _assert_bit_string, _assert_strictly_increasing

Party: TypeAlias = Literal["Alice", "Bob"]
Stage: TypeAlias = Literal["security_check", "auth_a", "auth_b", "decode", "integrity"]

SessionStatus: TypeAlias = Literal[
    "Delivered",
    "AbortedSecurityCheck",
    "AbortedAuthA",
    "AbortedAuthB",
    "AbortedIntegrity",
]


# Classical messages ----
# Positions always index the transmitted sequence.


@dataclass(frozen=True)
class ClassicalMessage:
    tag: ClassVar[str] = "message"


@dataclass(frozen=True)
class _PositionsMessage(ClassicalMessage):
    positions: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "positions", tuple(int(p) for p in self.positions))
        _assert_strictly_increasing(self.positions, self.tag)


@dataclass(frozen=True)
class DecoyReveal(_PositionsMessage):
    """Alice announces where the decoys are and in which basis each was prepared."""

    tag: ClassVar[str] = "DecoyReveal"
    bases: tuple[BasisLabel, ...] = ()

    def __post_init__(self):
        super().__post_init__()
        object.__setattr__(self, "bases", tuple(self.bases))
        if len(self.bases) != len(self.positions):
            raise ValueError("Each revealed decoy position needs exactly one basis.")


@dataclass(frozen=True)
class DecoyResults(ClassicalMessage):
    tag: ClassVar[str] = "DecoyResults"
    outcomes: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "outcomes", tuple(int(o) for o in self.outcomes))


@dataclass(frozen=True)
class AuthAPositions(_PositionsMessage):
    tag: ClassVar[str] = "AuthAPositions"


@dataclass(frozen=True)
class AuthAResult(ClassicalMessage):
    tag: ClassVar[str] = "AuthAResult"
    accepted: bool


@dataclass(frozen=True)
class AuthBPositions(_PositionsMessage):
    tag: ClassVar[str] = "AuthBPositions"


@dataclass(frozen=True)
class RAnnouncement(ClassicalMessage):
    tag: ClassVar[str] = "RAnnouncement"
    r: str

    def __post_init__(self):
        _assert_bit_string(self.r, "r")


@dataclass(frozen=True)
class ThetaPositions(_PositionsMessage):
    tag: ClassVar[str] = "ThetaPositions"


@dataclass(frozen=True)
class CheckReveal(_PositionsMessage):
    """
    Alice reveals the check bits.

    `positions` holds the sequence position of (the first copy of) every check qubit and
    `values` the check bit carried there.
    """

    tag: ClassVar[str] = "CheckReveal"
    values: str = ""

    def __post_init__(self):
        super().__post_init__()
        _assert_bit_string(self.values, "values", len(self.positions))


@dataclass(frozen=True)
class Abort(ClassicalMessage):
    tag: ClassVar[str] = "Abort"
    stage: Stage
    reason: str


MESSAGE_TYPES: dict[str, type[ClassicalMessage]] = {
    cls.tag: cls
    for cls in [
        DecoyReveal,
        DecoyResults,
        AuthAPositions,
        AuthAResult,
        AuthBPositions,
        RAnnouncement,
        ThetaPositions,
        CheckReveal,
        Abort,
    ]
}


@dataclass(frozen=True)
class TranscriptEntry:
    sender: Party
    message: ClassicalMessage


M = TypeVar("M", bound=ClassicalMessage)


@dataclass(frozen=True)
class Transcript(Sequence[TranscriptEntry]):
    """The ordered classical conversation of one session."""

    entries: tuple[TranscriptEntry, ...] = field(default_factory=tuple)

    @overload
    def __getitem__(self, ii: int) -> TranscriptEntry: ...

    @overload
    def __getitem__(self, ii: slice) -> Sequence[TranscriptEntry]: ...

    def __getitem__(self, ii: int | slice) -> TranscriptEntry | Sequence[TranscriptEntry]:
        return self.entries[ii]

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[TranscriptEntry]:
        return iter(self.entries)

    def __repr__(self) -> str:
        tags = ", ".join(f"{e.sender}:{e.message.tag}" for e in self.entries)
        return f"Transcript([{tags}])"

    def append(self, sender: Party, message: ClassicalMessage) -> Transcript:
        return Transcript(self.entries + (TranscriptEntry(sender, message),))

    def messages_of(self, kind: type[M]) -> list[M]:
        return [e.message for e in self.entries if isinstance(e.message, kind)]

    @property
    def tags(self) -> list[str]:
        return [e.message.tag for e in self.entries]
