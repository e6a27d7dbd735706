from __future__ import annotations

from ._adversary import (
    NoAttack as none,
    ImpersonateAlice as impersonate_alice,
    ImpersonateBob as impersonate_bob,
    InterceptResend as intercept_resend,
    EntangleMeasure as entangle_measure,
    DoS as dos,
    MITM as mitm,
)

__all__ = (
    "none",
    "impersonate_alice",
    "impersonate_bob",
    "intercept_resend",
    "entangle_measure",
    "dos",
    "mitm",
)
