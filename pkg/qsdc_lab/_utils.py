from __future__ import annotations

import math
from collections.abc import Generator, Sequence
from typing import Any, Iterable

import numpy as np


def _match_arg(x: str, lst: Sequence[str], arg_name: str = "x") -> str:
    # Ensure that `lst` has at least one element
    if len(lst) == 0:
        raise ValueError("The `lst` object must contain at least one element.")

    # Ensure that `lst` does not have duplicates
    if len(lst) != len(set(lst)):
        raise ValueError("The `lst` object must contain unique elements.")

    if x not in lst:
        allowed = ", ".join(f"`{el}`" for el in lst)
        raise ValueError(
            f"The supplied value for `{arg_name}` (`{x}`) is not an allowed option. "
            f"Use one of: {allowed}."
        )

    return x


def _assert_probability(x: float, arg_name: str) -> None:
    if not isinstance(x, (int, float, np.floating)) or isinstance(x, bool):
        raise TypeError(f"The `{arg_name}` value must be a real number, got {type(x)}.")
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"The `{arg_name}` value must lie in [0, 1], got {x}.")


def _assert_finite(x: float, arg_name: str) -> None:
    if not math.isfinite(x):
        raise ValueError(f"The `{arg_name}` value must be finite, got {x}.")


def _assert_bit_string(x: Any, arg_name: str, length: int | None = None) -> None:
    if not isinstance(x, str):
        raise TypeError(f"The `{arg_name}` value must be a bit string, got {type(x)}.")
    if set(x) - {"0", "1"}:
        raise ValueError(f"The `{arg_name}` value (`{x}`) may only contain '0' and '1'.")
    if length is not None and len(x) != length:
        raise ValueError(
            f"The `{arg_name}` value must have length {length}, got length {len(x)}."
        )


def _assert_strictly_increasing(positions: Sequence[int], arg_name: str) -> None:
    if any(p < 0 for p in positions):
        raise ValueError(f"The `{arg_name}` positions must be non-negative.")
    if any(a >= b for a, b in pairwise(positions)):
        raise ValueError(f"The `{arg_name}` positions must be strictly increasing.")


def xor_bits(a: str, b: str) -> str:
    """Bitwise XOR of two equal-length bit strings."""

    if len(a) != len(b):
        raise ValueError("Bit strings must have equal length to be XOR-ed.")

    return "".join("1" if x != y else "0" for x, y in zip(a, b))


def int_to_bits(value: int) -> str:
    """Minimal-width binary representation of a positive integer."""

    if value < 1:
        raise ValueError(f"Only positive integers have a minimal binary form, got {value}.")

    return format(value, "b")


def bits_to_int(bits: str) -> int:
    return int(bits, 2) if bits else 0


def random_bits(length: int, rng: np.random.Generator) -> str:
    return "".join("1" if b else "0" for b in rng.integers(0, 2, size=length))


def pairwise(iterable: Iterable[Any]) -> Generator[tuple[Any, Any], None, None]:
    """
    https://docs.python.org/3/library/itertools.html#itertools.pairwise
    pairwise('ABCDEFG') → AB BC CD DE EF FG
    """
    # This function can be replaced by `itertools.pairwise` if we only plan to support
    # Python 3.10+ in the future.
    iterator = iter(iterable)
    a = next(iterator, None)
    for b in iterator:
        yield a, b
        a = b


def _group_logical(positions: Sequence[int], copies: int, interleave: bool) -> list[list[int]]:
    """
    Split the physical positions of a role group into one list per logical qubit.

    Copies are either contiguous (a a a b b b) or interleaved (a b a b a b).
    """

    if copies == 1:
        return [[p] for p in positions]

    if len(positions) % copies != 0:
        raise ValueError(
            f"Cannot split {len(positions)} positions into groups of {copies} copies."
        )

    n_logical = len(positions) // copies
    if interleave:
        return [list(positions[i::n_logical]) for i in range(n_logical)]

    return [list(positions[i * copies : (i + 1) * copies]) for i in range(n_logical)]
