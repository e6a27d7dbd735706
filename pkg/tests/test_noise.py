import math

import numpy as np
import pytest

from qsdc_lab._noise import (
    ChannelModel,
    DeviceModel,
    apply_channel,
    calibrated_rotation,
    fit_gamma,
    predicted_success,
    readout_flip,
    t1_survival,
    transmit_bit,
)
from qsdc_lab._quantum_core import (
    KET_0,
    KET_1,
    KET_PLUS,
    Z_BASIS,
    computational_state,
    measure,
    rotation_gate,
)


@pytest.fixture
def rng():
    return np.random.default_rng(99)


def within(estimate: float, expected: float, trials: int, k: float = 4.0) -> bool:
    sigma = math.sqrt(expected * (1 - expected) / trials)
    return abs(estimate - expected) <= max(k * sigma, 1e-9)


def test_device_model_defaults():
    device = DeviceModel()

    assert device.gate_error == 0.001
    assert device.gate_duration == 142.0
    assert device.readout_error == 0.067
    assert device.decay_per_gate == pytest.approx(1 - math.exp(-0.142 / 140))


def test_device_model_ideal():
    device = DeviceModel.ideal()

    assert device.gate_error == 0.0
    assert device.readout_error == 0.0
    assert device.decay_per_gate == 0.0


def test_device_model_raises():
    with pytest.raises(ValueError) as exc_info:
        DeviceModel(t1=0.0)

    assert "The `t1` value must be positive" in exc_info.value.args[0]

    with pytest.raises(ValueError):
        DeviceModel(readout_error=1.2)


def test_channel_model_raises():
    with pytest.raises(ValueError) as exc_info:
        ChannelModel(error_kind="phase_flip")  # type: ignore[arg-type]

    assert "is not an allowed option" in exc_info.value.args[0]

    with pytest.raises(ValueError):
        ChannelModel(n_gates=-1)


def test_noiseless_channel(rng: np.random.Generator):
    assert ChannelModel.ideal().is_noiseless
    assert apply_channel(KET_PLUS, ChannelModel.ideal(), rng) is KET_PLUS
    assert ChannelModel(100, "amplitude_damping", DeviceModel(t1=math.inf)).is_noiseless


def test_bit_flip_parity(rng: np.random.Generator):
    always = DeviceModel(gate_error=1.0)

    assert apply_channel(KET_0, ChannelModel(1, "bit_flip", always), rng).isclose(KET_1)
    assert apply_channel(KET_0, ChannelModel(2, "bit_flip", always), rng).isclose(KET_0)


def test_bit_flip_rate(rng: np.random.Generator):
    channel = ChannelModel(1, "bit_flip", DeviceModel(gate_error=0.2))
    trials = 4000
    flips = sum(apply_channel(KET_0, channel, rng).isclose(KET_1) for _ in range(trials))

    assert within(flips / trials, 0.2, trials)


def test_depolarizing_flip_rate(rng: np.random.Generator):
    channel = ChannelModel(1, "depolarizing", DeviceModel(gate_error=1.0))
    trials = 3000
    flips = sum(measure(apply_channel(KET_0, channel, rng), Z_BASIS, rng)[0] for _ in range(trials))

    assert within(flips / trials, 2 / 3, trials)


def test_amplitude_damping_keeps_ground_state(rng: np.random.Generator):
    channel = ChannelModel(500, "amplitude_damping", DeviceModel())

    for _ in range(20):
        assert apply_channel(KET_0, channel, rng).isclose(KET_0)


def test_amplitude_damping_survival(rng: np.random.Generator):
    device = DeviceModel()
    channel = ChannelModel(1000, "amplitude_damping", device)
    expected = t1_survival(1000 * 0.142, device.t1)
    trials = 4000

    survived = sum(measure(apply_channel(KET_1, channel, rng), Z_BASIS, rng)[0] for _ in range(trials))

    assert expected == pytest.approx(math.exp(-142 / 140))
    assert within(survived / trials, expected, trials)


def test_apply_channel_rejects_joint_states(rng: np.random.Generator):
    with pytest.raises(ValueError):
        apply_channel(computational_state(0, 8), ChannelModel(1), rng)


def test_t1_survival():
    assert t1_survival(0.0, 140.0) == 1.0
    assert t1_survival(140.0, 140.0) == pytest.approx(math.exp(-1))

    with pytest.raises(ValueError):
        t1_survival(1.0, 0.0)


def test_readout_flip(rng: np.random.Generator):
    assert readout_flip(0, 1.0, rng) == 1
    assert readout_flip(1, 1.0, rng) == 0

    state = rng.bit_generator.state
    assert readout_flip(1, 0.0, rng) == 1
    assert rng.bit_generator.state == state


def test_calibrated_rotation():
    assert calibrated_rotation(10, 2).isclose(rotation_gate(12))
    assert calibrated_rotation(10, 0).isclose(rotation_gate(10))


@pytest.mark.parametrize("theta", [1, 7, 45, 137, 360])
@pytest.mark.parametrize("bit", [0, 1])
def test_transmit_bit_ideal(theta: int, bit: int, rng: np.random.Generator):
    assert transmit_bit(bit, theta, ChannelModel.ideal(), rng) == bit


def test_transmit_bit_calibration_offset(rng: np.random.Generator):
    device = DeviceModel(gate_error=0.0, readout_error=0.0, t1=math.inf, calibration_offset=90.0)
    channel = ChannelModel(0, "bit_flip", device)

    # a quarter turn maps |0⟩ onto |1⟩
    assert transmit_bit(0, 30, channel, rng) == 1


def test_predicted_success():
    assert predicted_success(0, 0.001, 0.18) == 1.0
    assert predicted_success(100, 0.001, 1.0) == pytest.approx(0.999**100)

    with pytest.raises(ValueError):
        predicted_success(-1, 0.001, 1.0)


def test_fit_gamma_recovers_exact_samples():
    samples = [(n, predicted_success(n, 0.001, 0.18)) for n in range(100, 401, 50)]
    gamma, residual = fit_gamma(samples, 0.001)

    assert gamma == pytest.approx(0.18, abs=1e-9)
    assert residual == pytest.approx(0.0, abs=1e-9)


@pytest.mark.parametrize("gamma0", [0.18, 0.21])
def test_fit_gamma_with_uniform_noise(gamma0: float):
    rng = np.random.default_rng(21)
    # ten noisy observations per length, each off by at most 0.005
    samples = [
        (n, predicted_success(n, 0.001, gamma0) + rng.uniform(-0.005, 0.005))
        for n in range(100, 401, 50)
        for _ in range(10)
    ]
    gamma, residual = fit_gamma(samples, 0.001)

    assert gamma == pytest.approx(gamma0, rel=0.05)
    assert residual < 0.01


def test_fit_gamma_raises():
    with pytest.raises(ValueError) as exc_info:
        fit_gamma([(100, 0.9), (100, 0.8)], 0.001)

    assert "distinct lengths" in exc_info.value.args[0]

    with pytest.raises(ValueError) as exc_info:
        fit_gamma([(100, 0.9), (200, 0.0)], 0.001)

    assert "(0, 1]" in exc_info.value.args[0]
