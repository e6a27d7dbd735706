import warnings
from dataclasses import replace

import numpy as np
import pytest

from qsdc_lab._config import SEED_ENV_VAR, PartyIdentities, ProtocolConfig, seed_from_env


def test_protocol_config_defaults():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        config = ProtocolConfig(n=8, k=10)

    assert config.c == 0
    assert config.m == 4
    assert config.N == 360
    assert config.theta_max == 360
    assert config.theta_domain == range(1, 361)


@pytest.mark.usefixtures("fresh_angle_warnings")
def test_short_identities_restrict_angles():
    with pytest.warns(UserWarning, match="only carry angles up to 15"):
        config = ProtocolConfig(n=4, k=4)

    assert config.theta_max == 15


@pytest.mark.usefixtures("fresh_angle_warnings")
def test_angle_restriction_warns_once():
    with pytest.warns(UserWarning) as record:
        config = ProtocolConfig(n=4, k=4)
        replace(config, seed=1)
        ProtocolConfig(n=8, k=4, m=6)

    assert len(record) == 1

    with pytest.warns(UserWarning, match="only carry angles up to 63"):
        ProtocolConfig(n=4, k=6)


@pytest.mark.parametrize(
    "kwargs, message",
    [
        ({"n": 0}, "The `n` value must be at least 1"),
        ({"n": 4, "k": 3}, "The `k` value must be even"),
        ({"n": 4, "m": 0}, "The `m` value must be at least 1"),
        ({"n": 4, "decoy_error_threshold": 1.5}, "decoy_error_threshold"),
        ({"n": 4, "seed": -1}, "The `seed` value must lie in [0, 2**64)"),
    ],
)
def test_protocol_config_raises(kwargs: dict, message: str):
    with pytest.raises(ValueError) as exc_info:
        ProtocolConfig(**kwargs)

    assert message in exc_info.value.args[0]


def test_protocol_config_rejects_non_int():
    with pytest.raises(TypeError):
        ProtocolConfig(n=4.0)  # type: ignore[arg-type]


def test_with_thresholds():
    config = ProtocolConfig(n=4, k=10).with_thresholds(0.05)

    assert config.decoy_error_threshold == 0.05
    assert config.auth_error_threshold == 0.05
    assert config.check_bit_error_threshold == 0.05


def test_party_identities():
    ids = PartyIdentities("1100", "0111")

    assert ids.k == 4

    with pytest.raises(ValueError) as exc_info:
        PartyIdentities("110", "011")

    assert "positive even length" in exc_info.value.args[0]

    with pytest.raises(ValueError):
        PartyIdentities("1100", "01")


def test_party_identities_validate_for():
    with pytest.raises(ValueError) as exc_info:
        PartyIdentities("1100", "0111").validate_for(ProtocolConfig(n=4, k=10))

    assert "configuration uses k=10" in exc_info.value.args[0]


def test_random_identities_are_seeded():
    a = PartyIdentities.random(10, np.random.default_rng(1))
    b = PartyIdentities.random(10, np.random.default_rng(1))

    assert a == b
    assert a.k == 10


def test_seed_from_env(monkeypatch: pytest.MonkeyPatch):
    monkeypatch.delenv(SEED_ENV_VAR, raising=False)
    assert seed_from_env() == 0
    assert seed_from_env(default=9) == 9

    monkeypatch.setenv(SEED_ENV_VAR, "42")
    assert seed_from_env() == 42

    monkeypatch.setenv(SEED_ENV_VAR, "forty-two")
    with pytest.raises(ValueError) as exc_info:
        seed_from_env()

    assert "`QSDC_SEED`" in exc_info.value.args[0]
