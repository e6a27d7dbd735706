from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from ._quantum_core import PureState, computational_state
from ._utils import _assert_probability


@dataclass(frozen=True)
class RepetitionCode:
    """
    A distance-d repetition code.

    Every protected qubit is prepared `distance` times and decoded by majority vote. Copies
    are laid out contiguously (a a a b b b) unless `interleave` is set (a b a b a b).
    """

    distance: int = 3
    interleave: bool = False

    def __post_init__(self):
        _assert_distance(self.distance)

    @property
    def corrects(self) -> int:
        return self.distance // 2


def _assert_distance(d: int) -> None:
    if not isinstance(d, int) or isinstance(d, bool) or d < 1 or d % 2 == 0:
        raise ValueError(f"The code distance must be a positive odd integer, got {d}.")


def encode_repetition(bit: int, d: int) -> list[PureState]:
    _assert_distance(d)
    if bit not in (0, 1):
        raise ValueError(f"The `bit` value must be 0 or 1, got {bit}.")
    return [computational_state(bit)] * d


def decode_majority(outcomes: Sequence[int], d: int | None = None) -> int:
    if d is not None and len(outcomes) != d:
        raise ValueError(f"Expected {d} outcomes to decode, got {len(outcomes)}.")
    if len(outcomes) % 2 == 0:
        raise ValueError("Majority decoding needs an odd number of outcomes.")
    return int(2 * sum(outcomes) > len(outcomes))


def logical_error_rate(d: int, p: float) -> float:
    """Probability that more than half of the d copies flip: Σ_{j>d/2} C(d, j) p^j (1-p)^(d-j)."""

    _assert_distance(d)
    _assert_probability(p, "p")
    return math.fsum(math.comb(d, j) * p**j * (1 - p) ** (d - j) for j in range(d // 2 + 1, d + 1))


def threshold_check(p: float, d: int = 3, exact: bool = False) -> bool:
    """
    Whether encoding with the repetition code beats sending the bare qubit.

    By default the leading-order bound C(d, t) p^t < p with t = (d + 1) / 2 is used, which
    for d = 3 reads 3p² < p, i.e. p < 1/3. With `exact=True` the full logical error rate is
    compared instead; for d = 3 that comparison flips at p = 1/2.
    """

    _assert_distance(d)
    _assert_probability(p, "p")

    if exact:
        return logical_error_rate(d, p) < p

    t = (d + 1) // 2
    return math.comb(d, t) * p**t < p


def max_channel_length(gamma: float, p_error: float, threshold: float) -> int:
    """Largest n with (1 - p)^(γ n) >= threshold."""

    _assert_probability(threshold, "threshold")
    if not 0.0 < p_error < 1.0:
        raise ValueError(f"The `p_error` value must lie in (0, 1), got {p_error}.")
    if not gamma > 0:
        raise ValueError(f"The `gamma` value must be positive, got {gamma}.")
    if threshold == 0.0:
        raise ValueError("A zero success threshold admits channels of any length.")

    return math.floor(math.log(threshold) / (gamma * math.log1p(-p_error)))
