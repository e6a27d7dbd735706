from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Any

from importlib_resources import files

from .._config import PartyIdentities, ProtocolConfig
from .._protocol import SessionPlan
from .._serialize import _build, plan_from_dict

DATA_MOD = files("qsdc_lab.data")

_worked_example_fname = DATA_MOD / "worked_example.json"


@dataclass(frozen=True)
class WorkedExample:
    """Inputs, random choices and expected results of the reference session."""

    config: ProtocolConfig
    identities: PartyIdentities
    message: str
    plan: SessionPlan
    expected: dict[str, Any]


def worked_example() -> WorkedExample:
    raw = json.loads(_worked_example_fname.read_text(encoding="utf-8"))
    return WorkedExample(
        config=_build(ProtocolConfig, raw["protocol"], "protocol"),
        identities=_build(PartyIdentities, raw["identities"], "identities"),
        message=raw["message"],
        plan=plan_from_dict(raw["plan"]),
        expected=raw["expected"],
    )
