from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from typing_extensions import Literal, TypeAlias

from ._quantum_core import (
    KET_0,
    PAULI_X,
    PAULI_Z,
    Z_BASIS,
    PureState,
    Unitary,
    apply,
    computational_state,
    measure,
    rotation_gate,
)
from ._utils import _assert_finite, _assert_probability, _match_arg

logger = logging.getLogger(__name__)

ErrorKind: TypeAlias = Literal["bit_flip", "amplitude_damping", "depolarizing"]
ERROR_KINDS: tuple[ErrorKind, ...] = ("bit_flip", "amplitude_damping", "depolarizing")

# σ_y up to a global phase
_PAULI_Y = Unitary(np.array([[0, -1j], [1j, 0]]))
_DEPOLARIZING_OPS = (PAULI_X, _PAULI_Y, PAULI_Z)


@dataclass(frozen=True)
class DeviceModel:
    """
    Error figures of a superconducting device.

    Parameters
    ----------
    gate_error
        Probability that one identity gate errs.
    gate_duration
        Duration of one identity gate in nanoseconds.
    t1
        Relaxation time in microseconds. `math.inf` disables relaxation.
    readout_error
        Probability that a measurement outcome is recorded flipped.
    calibration_offset
        Systematic error (degrees) added to every preparation rotation.
    """

    gate_error: float = 0.001
    gate_duration: float = 142.0
    t1: float = 140.0
    readout_error: float = 0.067
    calibration_offset: float = 0.0

    def __post_init__(self):
        _assert_probability(self.gate_error, "gate_error")
        _assert_probability(self.readout_error, "readout_error")
        _assert_finite(self.calibration_offset, "calibration_offset")

        if not self.gate_duration >= 0:
            raise ValueError(f"The `gate_duration` value must be non-negative, got {self.gate_duration}.")
        if not self.t1 > 0:
            raise ValueError(f"The `t1` value must be positive, got {self.t1}.")

    @classmethod
    def ideal(cls) -> DeviceModel:
        return cls(gate_error=0.0, readout_error=0.0, t1=math.inf, calibration_offset=0.0)

    @property
    def decay_per_gate(self) -> float:
        """Probability of a |1⟩ → |0⟩ relaxation during one identity gate."""
        # gate_duration is in ns, t1 in µs
        return 1.0 - t1_survival(self.gate_duration * 1e-3, self.t1)


@dataclass(frozen=True)
class ChannelModel:
    """A quantum channel modeled as `n_gates` noisy identity gates on `device`."""

    n_gates: int = 0
    error_kind: ErrorKind = "bit_flip"
    device: DeviceModel = field(default_factory=DeviceModel.ideal)

    def __post_init__(self):
        if not isinstance(self.n_gates, int) or self.n_gates < 0:
            raise ValueError(f"The `n_gates` value must be a non-negative integer, got {self.n_gates}.")
        _match_arg(self.error_kind, ERROR_KINDS, "error_kind")

    @classmethod
    def ideal(cls) -> ChannelModel:
        return cls()

    @property
    def is_noiseless(self) -> bool:
        if self.n_gates == 0:
            return True
        if self.error_kind == "amplitude_damping":
            return math.isinf(self.device.t1)
        return self.device.gate_error == 0.0


def apply_channel(state: PureState, channel: ChannelModel, rng: np.random.Generator) -> PureState:
    """
    Pass a qubit through `channel.n_gates` noisy identity gates.

    The gates are applied as one aggregated step with the same outcome distribution as the
    gate-by-gate process: for bit flips only the parity of the error count matters; for
    relaxation the no-jump amplitude of |1⟩ shrinks by sqrt(1 - g) per gate and a jump leaves
    the qubit in |0⟩ for good.
    """

    if state.dim != 2:
        raise ValueError(f"Channel noise acts on lone qubits, got a state of dim {state.dim}.")

    if channel.is_noiseless:
        return state

    n = channel.n_gates
    device = channel.device

    if channel.error_kind == "bit_flip":
        n_errors = int(rng.binomial(n, device.gate_error))
        return apply(PAULI_X, state) if n_errors % 2 == 1 else state

    if channel.error_kind == "depolarizing":
        n_errors = int(rng.binomial(n, device.gate_error))
        for idx in rng.integers(0, 3, size=n_errors):
            state = apply(_DEPOLARIZING_OPS[idx], state)
        return state

    if channel.error_kind == "amplitude_damping":
        keep = (1.0 - device.decay_per_gate) ** n
        a, b = state.amplitudes
        p_jump = abs(b) ** 2 * (1.0 - keep)
        if rng.random() < p_jump:
            return KET_0
        return PureState.from_unnormalized([a, b * math.sqrt(keep)])

    raise NotImplementedError(f"Unsupported error kind: {channel.error_kind}")


def t1_survival(t: float, t1: float) -> float:
    """Probability that an excited qubit has not relaxed after time `t` (same unit as `t1`)."""

    if t < 0 or not t1 > 0:
        raise ValueError("Relaxation needs `t` >= 0 and `t1` > 0.")
    return math.exp(-t / t1)


def readout_flip(outcome: int, p_readout: float, rng: np.random.Generator) -> int:
    if p_readout == 0.0:
        return outcome
    return 1 - outcome if rng.random() < p_readout else outcome


def calibrated_rotation(theta: float, offset: float) -> Unitary:
    return rotation_gate(theta + offset)


def transmit_bit(bit: int, theta: float, channel: ChannelModel, rng: np.random.Generator) -> int:
    """
    Send one bit through U_θ, the channel and U_θ⁻¹, then measure it on the device.

    The preparation carries the device's calibration offset and the measurement its readout
    error.
    """

    device = channel.device
    state = apply(calibrated_rotation(theta, device.calibration_offset), computational_state(bit))
    state = apply_channel(state, channel, rng)
    state = apply(rotation_gate(theta).inverse(), state)
    outcome, _ = measure(state, Z_BASIS, rng)
    return readout_flip(outcome, device.readout_error, rng)


def predicted_success(n: int, p_error: float, gamma: float) -> float:
    """Success probability (1 - p)^(γ n) of an n-gate channel."""

    _assert_probability(p_error, "p_error")
    if n < 0:
        raise ValueError(f"The `n` value must be non-negative, got {n}.")
    return (1.0 - p_error) ** (gamma * n)


def fit_gamma(samples: Sequence[tuple[int, float]], p_error: float) -> tuple[float, float]:
    """
    Fit the device constant γ of `(1 - p)^(γ n)` by least squares in the log domain.

    Parameters
    ----------
    samples
        Pairs of channel length `n` and observed success probability.
    p_error
        Per-gate error probability used in the model.

    Returns
    -------
    tuple[float, float]
        The fitted γ and the root-mean-square residual of the log success.
    """

    _assert_probability(p_error, "p_error")
    if not 0.0 < p_error < 1.0:
        raise ValueError("Fitting γ needs 0 < `p_error` < 1.")

    pairs = [(n, s) for n, s in samples if n > 0]
    if len({n for n, _ in pairs}) < 2:
        raise ValueError("Fitting γ needs samples at two or more distinct lengths n > 0.")
    if any(not 0.0 < s <= 1.0 for _, s in pairs):
        raise ValueError("Success probabilities must lie in (0, 1] to be fitted.")

    n_values = np.array([n for n, _ in pairs], dtype=float)
    log_success = np.log(np.array([s for _, s in pairs], dtype=float))
    design = (n_values * math.log1p(-p_error))[:, np.newaxis]

    solution, *_ = np.linalg.lstsq(design, log_success, rcond=None)
    gamma = float(solution[0])
    residual = float(np.sqrt(np.mean((log_success - design[:, 0] * gamma) ** 2)))

    logger.debug("fitted gamma=%.4f over %d samples (rms residual %.3g)", gamma, len(pairs), residual)
    return gamma, residual
