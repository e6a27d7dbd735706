import pytest

from qsdc_lab import _config


@pytest.fixture
def fresh_angle_warnings():
    _config._warned_angle_limits.clear()
    yield
    _config._warned_angle_limits.clear()
