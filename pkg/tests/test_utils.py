import numpy as np
import pytest

from qsdc_lab._utils import (
    _assert_bit_string,
    _assert_probability,
    _assert_strictly_increasing,
    _group_logical,
    _match_arg,
    bits_to_int,
    int_to_bits,
    pairwise,
    random_bits,
    xor_bits,
)


def test_match_arg():
    assert _match_arg("x", ["a", "b", "c", "x"]) == "x"


def test_match_arg_raises():
    with pytest.raises(ValueError) as exc_info:
        _match_arg("x", [])

    assert "The `lst` object must contain at least one element." in exc_info.value.args[0]

    with pytest.raises(ValueError) as exc_info:
        _match_arg("x", ["a", "a"])

    assert "The `lst` object must contain unique elements." in exc_info.value.args[0]

    with pytest.raises(ValueError) as exc_info:
        _match_arg("x", ["a"], "kind")

    assert "`kind`" in exc_info.value.args[0]
    assert "is not an allowed option." in exc_info.value.args[0]


def test_assert_probability_raises():
    with pytest.raises(ValueError) as exc_info:
        _assert_probability(1.5, "p")

    assert "The `p` value must lie in [0, 1]" in exc_info.value.args[0]

    with pytest.raises(TypeError):
        _assert_probability(True, "p")


def test_assert_bit_string_raises():
    _assert_bit_string("0110", "bits", 4)

    with pytest.raises(ValueError) as exc_info:
        _assert_bit_string("0120", "bits")

    assert "may only contain '0' and '1'" in exc_info.value.args[0]

    with pytest.raises(ValueError) as exc_info:
        _assert_bit_string("01", "bits", 3)

    assert "must have length 3" in exc_info.value.args[0]

    with pytest.raises(TypeError):
        _assert_bit_string([0, 1], "bits")


def test_assert_strictly_increasing_raises():
    _assert_strictly_increasing([0, 2, 5], "positions")

    with pytest.raises(ValueError) as exc_info:
        _assert_strictly_increasing([0, 2, 2], "positions")

    assert "strictly increasing" in exc_info.value.args[0]


def test_xor_bits():
    assert xor_bits("0111", "1001") == "1110"
    assert xor_bits("", "") == ""

    with pytest.raises(ValueError):
        xor_bits("01", "0")


@pytest.mark.parametrize("value, bits", [(1, "1"), (7, "111"), (255, "11111111"), (360, "101101000")])
def test_int_to_bits(value: int, bits: str):
    assert int_to_bits(value) == bits
    assert bits_to_int(bits) == value


def test_int_to_bits_rejects_zero():
    with pytest.raises(ValueError):
        int_to_bits(0)


def test_bits_to_int_leading_zeros():
    assert bits_to_int("0000") == 0
    assert bits_to_int("0111") == 7


def test_random_bits_is_seeded():
    a = random_bits(32, np.random.default_rng(3))
    b = random_bits(32, np.random.default_rng(3))

    assert a == b
    assert len(a) == 32
    assert set(a) <= {"0", "1"}


def test_pairwise():
    assert list(pairwise("ABC")) == [("A", "B"), ("B", "C")]
    assert list(pairwise([])) == []


def test_group_logical_contiguous_and_interleaved():
    positions = [0, 2, 3, 5, 6, 9]

    assert _group_logical(positions, 1, False) == [[p] for p in positions]
    assert _group_logical(positions, 3, False) == [[0, 2, 3], [5, 6, 9]]
    assert _group_logical(positions, 3, True) == [[0, 3, 6], [2, 5, 9]]


def test_group_logical_raises():
    with pytest.raises(ValueError) as exc_info:
        _group_logical([0, 1], 3, False)

    assert "groups of 3 copies" in exc_info.value.args[0]
