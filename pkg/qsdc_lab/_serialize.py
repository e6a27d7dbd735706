from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, fields, is_dataclass
from functools import singledispatch
from pathlib import Path, PurePath
from typing import Any, Mapping

import numpy as np

from ._adversary import ATTACK_TYPES, AttackModel, NoAttack
from ._analysis import ComparisonRow, EstimateWithCI
from ._config import PartyIdentities, ProtocolConfig
from ._ecc import RepetitionCode
from ._noise import ChannelModel, DeviceModel
from ._protocol import DecoyDescriptor, InsertionSlots, SessionPlan
from ._quantum_core import PureState
from ._transcript import ClassicalMessage, Transcript

CONFIG_SECTIONS = ("protocol", "identities", "attack", "channel", "ecc")


@singledispatch
def to_jsonable(obj: Any) -> Any:
    """
    Convert a value object into plain JSON types.

    Dataclasses become objects keyed by field name, bit strings stay "0"/"1" text and
    complex amplitudes become [re, im] pairs.
    """

    if is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_jsonable(getattr(obj, f.name)) for f in fields(obj)}

    raise NotImplementedError(f"Unsupported data type: {type(obj)}")


@to_jsonable.register(type(None))
@to_jsonable.register(str)
@to_jsonable.register(bool)
@to_jsonable.register(int)
def _(obj: Any) -> Any:
    return obj


@to_jsonable.register
def _(obj: float) -> Any:
    # non-finite values have no JSON literal
    if math.isfinite(obj):
        return obj
    return str(obj)


@to_jsonable.register
def _(obj: np.integer) -> Any:  # type: ignore[type-arg]
    return int(obj)


@to_jsonable.register
def _(obj: np.floating) -> Any:  # type: ignore[type-arg]
    return to_jsonable(float(obj))


@to_jsonable.register(list)
@to_jsonable.register(tuple)
def _(obj: Any) -> Any:
    return [to_jsonable(x) for x in obj]


@to_jsonable.register
def _(obj: dict) -> Any:  # type: ignore[type-arg]
    return {str(key): to_jsonable(val) for key, val in obj.items()}


@to_jsonable.register
def _(obj: PurePath) -> Any:
    return str(obj)


@to_jsonable.register
def _(obj: PureState) -> Any:
    return [[float(a.real), float(a.imag)] for a in obj.amplitudes]


@to_jsonable.register
def _(obj: ClassicalMessage) -> Any:
    return {"type": obj.tag, **{f.name: to_jsonable(getattr(obj, f.name)) for f in fields(obj)}}


@to_jsonable.register
def _(obj: AttackModel) -> Any:
    return {"type": obj.tag, **{f.name: to_jsonable(getattr(obj, f.name)) for f in fields(obj)}}


@to_jsonable.register
def _(obj: Transcript) -> Any:
    return [to_jsonable(entry) for entry in obj]


def dumps(obj: Any, indent: int | None = None) -> str:
    """Canonical JSON text: sorted keys and compact separators unless `indent` is given."""

    separators = (",", ":") if indent is None else None
    return json.dumps(to_jsonable(obj), sort_keys=True, separators=separators, indent=indent)


# Decoding ----


def _finite_or_special(x: Any) -> Any:
    if isinstance(x, str) and x in ("inf", "-inf", "nan"):
        return float(x)
    return x


def _build(cls: type, data: Mapping[str, Any], section: str) -> Any:
    known = {f.name for f in fields(cls)}
    unknown = set(data) - known
    if unknown:
        raise ValueError(
            f"Unknown keys in the `{section}` section: {', '.join(sorted(unknown))}."
        )

    kwargs = {
        key: tuple(val) if isinstance(val, list) else _finite_or_special(val)
        for key, val in data.items()
    }
    return cls(**kwargs)


def attack_from_dict(data: Mapping[str, Any]) -> AttackModel:
    params = dict(data)
    tag = params.pop("type", "none")
    if tag not in ATTACK_TYPES:
        allowed = ", ".join(f"`{t}`" for t in ATTACK_TYPES)
        raise ValueError(f"Unknown attack type `{tag}`. Use one of: {allowed}.")
    return _build(ATTACK_TYPES[tag], params, "attack")


def channel_from_dict(data: Mapping[str, Any]) -> ChannelModel:
    params = dict(data)
    device = params.pop("device", None)
    channel = _build(ChannelModel, params, "channel")
    if device is None:
        return channel
    return ChannelModel(channel.n_gates, channel.error_kind, _build(DeviceModel, device, "device"))


def plan_from_dict(data: Mapping[str, Any]) -> SessionPlan:
    params = dict(data)
    params["decoys"] = [DecoyDescriptor(d["basis"], int(d["bit"])) for d in params["decoys"]]
    params["slots"] = _build(InsertionSlots, params["slots"], "slots")
    return SessionPlan(
        theta=int(params["theta"]),
        r=params["r"],
        check_positions=tuple(params["check_positions"]),
        check_values=params["check_values"],
        decoys=tuple(params["decoys"]),
        slots=params["slots"],
    )


def row_from_dict(data: Mapping[str, Any]) -> ComparisonRow:
    return ComparisonRow(
        quantity=data["quantity"],
        params=dict(data["params"]),
        closed_form=float(_finite_or_special(data["closed_form"])),
        estimate=_build(EstimateWithCI, data["estimate"], "estimate"),
        within_tolerance=bool(data["within_tolerance"]),
        tolerance=float(data["tolerance"]),
    )


@dataclass(frozen=True)
class ConfigDocument:
    """The sections of a configuration file. Absent sections stay `None`."""

    protocol: ProtocolConfig | None = None
    identities: PartyIdentities | None = None
    attack: AttackModel = field(default_factory=NoAttack)
    channel: ChannelModel = field(default_factory=ChannelModel.ideal)
    ecc: RepetitionCode | None = None


def config_from_dict(data: Mapping[str, Any]) -> ConfigDocument:
    unknown = set(data) - set(CONFIG_SECTIONS)
    if unknown:
        raise ValueError(f"Unknown configuration sections: {', '.join(sorted(unknown))}.")

    protocol = data.get("protocol")
    identities = data.get("identities")
    attack = data.get("attack")
    channel = data.get("channel")
    ecc = data.get("ecc")

    return ConfigDocument(
        protocol=_build(ProtocolConfig, protocol, "protocol") if protocol is not None else None,
        identities=_build(PartyIdentities, identities, "identities") if identities is not None else None,
        attack=attack_from_dict(attack) if attack is not None else NoAttack(),
        channel=channel_from_dict(channel) if channel is not None else ChannelModel.ideal(),
        ecc=_build(RepetitionCode, ecc, "ecc") if ecc is not None else None,
    )


def load_config(path: str | Path) -> ConfigDocument:
    """Read a JSON configuration document from `path`."""

    with open(path, encoding="utf-8") as f:
        try:
            data = json.load(f)
        except json.JSONDecodeError as exc:
            raise ValueError(f"The configuration file `{path}` is not valid JSON: {exc}") from None

    if not isinstance(data, dict):
        raise ValueError(f"The configuration file `{path}` must hold a JSON object.")

    return config_from_dict(data)
