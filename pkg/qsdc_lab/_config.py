from __future__ import annotations

import os
import warnings
from dataclasses import dataclass, replace

import numpy as np

from ._utils import _assert_bit_string, _assert_probability, random_bits

THETA_SET_SIZE = 360
SEED_ENV_VAR = "QSDC_SEED"
MAX_SEED = 2**64

# (k, N) pairs already warned about in this process
_warned_angle_limits: set[tuple[int, int]] = set()


@dataclass(frozen=True)
class ProtocolConfig:
    """
    Size and acceptance parameters of one protocol session.

    Parameters
    ----------
    n
        Message length in bits.
    c
        Number of check bits mixed into the message for the integrity test.
    k
        Identity length in bits. Must be even since Alice's identity is encoded two bits per
        qubit.
    m
        Number of decoy qubits.
    N
        Size of the angle set Θ = {1, ..., N} (in degrees).
    decoy_error_threshold, auth_error_threshold, check_bit_error_threshold
        Largest tolerated error rate for the security check, Alice's authentication and the
        integrity test. All default to zero, the noiseless setting.
    seed
        Session seed from which every random stream of the session is spawned.
    """

    n: int
    c: int = 0
    k: int = 4
    m: int = 4
    N: int = THETA_SET_SIZE
    decoy_error_threshold: float = 0.0
    auth_error_threshold: float = 0.0
    check_bit_error_threshold: float = 0.0
    seed: int = 0

    def __post_init__(self):
        for name, minimum in [("n", 1), ("c", 0), ("k", 2), ("m", 1), ("N", 1)]:
            value = getattr(self, name)
            if not isinstance(value, int) or isinstance(value, bool):
                raise TypeError(f"The `{name}` value must be an integer, got {type(value)}.")
            if value < minimum:
                raise ValueError(f"The `{name}` value must be at least {minimum}, got {value}.")

        if self.k % 2 != 0:
            raise ValueError(f"The `k` value must be even, got {self.k}.")

        for name in ["decoy_error_threshold", "auth_error_threshold", "check_bit_error_threshold"]:
            _assert_probability(getattr(self, name), name)

        if not 0 <= self.seed < MAX_SEED:
            raise ValueError(f"The `seed` value must lie in [0, 2**64), got {self.seed}.")

        if self.theta_max < self.N and (self.k, self.N) not in _warned_angle_limits:
            _warned_angle_limits.add((self.k, self.N))
            warnings.warn(
                f"Identities of length k={self.k} can only carry angles up to {self.theta_max}; "
                "the angle set is restricted accordingly.",
                stacklevel=3,
            )

    @property
    def theta_max(self) -> int:
        """
        Largest usable angle.

        Angles are sent one bit per identity bit, so identities shorter than the binary
        width of `N` restrict the angle set to what fits in `k` bits.
        """
        return min(self.N, 2**self.k - 1)

    @property
    def theta_domain(self) -> range:
        return range(1, self.theta_max + 1)

    def with_thresholds(self, value: float) -> ProtocolConfig:
        """Set all three acceptance thresholds at once, e.g. 0.05 for noisy channels."""
        return replace(
            self,
            decoy_error_threshold=value,
            auth_error_threshold=value,
            check_bit_error_threshold=value,
        )


@dataclass(frozen=True)
class PartyIdentities:
    """The pre-shared identity strings of Alice and Bob."""

    id_a: str
    id_b: str

    def __post_init__(self):
        _assert_bit_string(self.id_a, "id_a")
        _assert_bit_string(self.id_b, "id_b", len(self.id_a))

        if len(self.id_a) == 0 or len(self.id_a) % 2 != 0:
            raise ValueError(
                f"Identities must have a positive even length, got {len(self.id_a)}."
            )

    @property
    def k(self) -> int:
        return len(self.id_a)

    @classmethod
    def random(cls, k: int, rng: np.random.Generator) -> PartyIdentities:
        return cls(random_bits(k, rng), random_bits(k, rng))

    def validate_for(self, config: ProtocolConfig) -> None:
        if self.k != config.k:
            raise ValueError(
                f"Identities have length {self.k} but the configuration uses k={config.k}."
            )


def seed_from_env(default: int = 0) -> int:
    """Read the session seed from the `QSDC_SEED` environment variable, if set."""

    raw = os.environ.get(SEED_ENV_VAR)
    if raw is None or raw.strip() == "":
        return default

    try:
        seed = int(raw)
    except ValueError:
        raise ValueError(
            f"The `{SEED_ENV_VAR}` environment variable must be an integer, got `{raw}`."
        ) from None

    if not 0 <= seed < MAX_SEED:
        raise ValueError(f"The `{SEED_ENV_VAR}` value must lie in [0, 2**64), got {seed}.")

    return seed
