import pytest

from qsdc_lab._transcript import (
    MESSAGE_TYPES,
    Abort,
    AuthAPositions,
    AuthAResult,
    CheckReveal,
    DecoyReveal,
    DecoyResults,
    RAnnouncement,
    Transcript,
)


@pytest.fixture
def transcript() -> Transcript:
    return (
        Transcript()
        .append("Alice", DecoyReveal((1, 3), ("Z", "X")))
        .append("Bob", DecoyResults((0, 1)))
        .append("Alice", AuthAPositions((5, 9)))
        .append("Bob", AuthAResult(True))
    )


def test_transcript_append_returns_new_object():
    empty = Transcript()
    one = empty.append("Alice", AuthAPositions((2,)))

    assert len(empty) == 0
    assert len(one) == 1
    assert one[0].sender == "Alice"


def test_transcript_sequence_protocol(transcript: Transcript):
    assert len(transcript) == 4
    assert [e.sender for e in transcript] == ["Alice", "Bob", "Alice", "Bob"]
    assert transcript[-1].message == AuthAResult(True)
    assert len(transcript[1:3]) == 2


def test_transcript_tags(transcript: Transcript):
    assert transcript.tags == ["DecoyReveal", "DecoyResults", "AuthAPositions", "AuthAResult"]


def test_transcript_messages_of(transcript: Transcript):
    reveals = transcript.messages_of(DecoyReveal)

    assert len(reveals) == 1
    assert reveals[0].bases == ("Z", "X")
    assert transcript.messages_of(Abort) == []


def test_transcript_repr(transcript: Transcript):
    assert repr(transcript).startswith("Transcript([Alice:DecoyReveal, Bob:DecoyResults")


def test_transcript_equality():
    a = Transcript().append("Bob", RAnnouncement("0110"))
    b = Transcript().append("Bob", RAnnouncement("0110"))

    assert a == b


def test_message_types_registry():
    assert set(MESSAGE_TYPES) == {
        "DecoyReveal",
        "DecoyResults",
        "AuthAPositions",
        "AuthAResult",
        "AuthBPositions",
        "RAnnouncement",
        "ThetaPositions",
        "CheckReveal",
        "Abort",
    }
    assert all(cls.tag == tag for tag, cls in MESSAGE_TYPES.items())


def test_positions_are_normalized():
    msg = AuthAPositions([4, 7])

    assert msg.positions == (4, 7)


@pytest.mark.parametrize("positions", [(3, 3), (5, 2), (-1, 4)])
def test_positions_raise(positions: tuple[int, ...]):
    with pytest.raises(ValueError):
        AuthAPositions(positions)


def test_decoy_reveal_raises():
    with pytest.raises(ValueError) as exc_info:
        DecoyReveal((1, 3), ("Z",))

    assert exc_info.value.args[0] == "Each revealed decoy position needs exactly one basis."


def test_check_reveal_raises():
    assert CheckReveal((4, 13), "01").values == "01"

    with pytest.raises(ValueError):
        CheckReveal((4, 13), "0")

    with pytest.raises(ValueError):
        CheckReveal((4, 13), "0a")


def test_r_announcement_raises():
    with pytest.raises(TypeError):
        RAnnouncement(101)  # type: ignore[arg-type]
