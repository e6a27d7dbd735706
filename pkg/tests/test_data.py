import pytest

from qsdc_lab._config import PartyIdentities
from qsdc_lab.data import DATA_MOD, WorkedExample, worked_example


@pytest.fixture
def example(fresh_angle_warnings) -> WorkedExample:
    with pytest.warns(UserWarning, match="only carry angles up to 15"):
        return worked_example()


def test_data_files_are_packaged():
    assert (DATA_MOD / "worked_example.json").is_file()


def test_worked_example_inputs(example: WorkedExample):
    config = example.config

    assert (config.n, config.c, config.k, config.m, config.seed) == (6, 2, 4, 4, 0)
    assert example.identities == PartyIdentities("1100", "0111")
    assert example.message == "011101"


def test_worked_example_plan(example: WorkedExample):
    plan = example.plan

    assert plan.theta == 7
    assert plan.r == "1001"
    assert plan.check_positions == (1, 4)
    assert [(d.basis, d.bit) for d in plan.decoys] == [("Z", 0), ("Z", 1), ("X", 0), ("Z", 0)]
    assert plan.slots.decoy == (1, 3, 14, 18)


def test_worked_example_expected(example: WorkedExample):
    roles = example.expected["roles"]

    assert len(roles) == 21
    assert roles.count("message") == 6
    assert roles.count("decoy") == 4
    assert example.expected["augmented"] == "01110101"
