from __future__ import annotations

import logging
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from functools import partial
from itertools import count
from typing import Any, Callable, Iterable, NamedTuple, Sequence

import numpy as np

from ._adversary import (
    MITM,
    AttackModel,
    DoS,
    EntangleMeasure,
    ImpersonateAlice,
    ImpersonateBob,
    InterceptResend,
    NoAttack,
    detection_prob_intercept,
    dos_decoy_pass_prob,
    dos_unitary_pass,
    entangle_decoy_pass_prob,
    p_corr_bound,
)
from ._config import PartyIdentities, ProtocolConfig
from ._ecc import RepetitionCode, decode_majority, encode_repetition, logical_error_rate
from ._noise import (
    ChannelModel,
    DeviceModel,
    ErrorKind,
    apply_channel,
    predicted_success,
    readout_flip,
    t1_survival,
    transmit_bit,
)
from ._protocol import SessionOutcome, run_session
from ._quantum_core import KET_1, Z_BASIS, measure
from ._utils import _assert_bit_string, _match_arg, random_bits

logger = logging.getLogger(__name__)

Z_95 = 1.959963984540054
RECOMMENDED_TRIALS = 1000
DEFAULT_TOLERANCE = 0.01


# Scenarios and trials ----


@dataclass(frozen=True)
class Scenario:
    """
    A repeatable experiment: one session setup run `trials` times.

    Identities, message and angle are drawn afresh for every trial unless fixed here.
    """

    config: ProtocolConfig
    identities: PartyIdentities | None = None
    attack: AttackModel = field(default_factory=NoAttack)
    channel: ChannelModel = field(default_factory=ChannelModel.ideal)
    ecc: RepetitionCode | None = None
    trials: int = RECOMMENDED_TRIALS
    message: str | None = None
    theta: int | None = None

    def __post_init__(self):
        if not isinstance(self.trials, int) or self.trials < 1:
            raise ValueError(f"The `trials` value must be a positive integer, got {self.trials}.")
        if self.identities is not None:
            self.identities.validate_for(self.config)
        if self.message is not None:
            _assert_bit_string(self.message, "message", self.config.n)


class TrialInputs(NamedTuple):
    seed: int
    identities: PartyIdentities
    message: str


def derive_seed(*entropy: int) -> int:
    """A 64-bit seed derived from `entropy` alone, independent of call order."""

    return int(np.random.SeedSequence(list(entropy)).generate_state(1, np.uint64)[0])


def trial_inputs(scenario: Scenario, master_seed: int, index: int) -> TrialInputs:
    """The session seed, identities and message of trial `index`."""

    setup = np.random.default_rng(np.random.SeedSequence([master_seed, index, 1]))
    config = scenario.config
    identities = scenario.identities or PartyIdentities.random(config.k, setup)
    message = scenario.message or random_bits(config.n, setup)
    return TrialInputs(derive_seed(master_seed, index), identities, message)


def run_one_trial(scenario: Scenario, master_seed: int, index: int) -> SessionOutcome:
    inputs = trial_inputs(scenario, master_seed, index)
    return run_session(
        replace(scenario.config, seed=inputs.seed),
        inputs.identities,
        inputs.message,
        scenario.channel,
        scenario.attack,
        ecc=scenario.ecc,
        theta=scenario.theta,
    )


def run_trials(scenario: Scenario, master_seed: int, *, workers: int = 1) -> list[SessionOutcome]:
    """
    Run every trial of a scenario.

    Trial i is seeded from (master_seed, i) only, so results do not depend on `workers`.
    """

    run = partial(run_one_trial, scenario, master_seed)
    indices = range(scenario.trials)

    logger.info(
        "running %d trials of %s (workers=%d)",
        scenario.trials,
        type(scenario.attack).__name__,
        workers,
    )

    if workers <= 1:
        return [run(i) for i in indices]

    with ProcessPoolExecutor(max_workers=workers) as pool:
        chunksize = max(1, scenario.trials // (4 * workers))
        return list(pool.map(run, indices, chunksize=chunksize))


# Estimates ----


@dataclass(frozen=True)
class EstimateWithCI:
    point: float
    stderr: float
    ci_low: float
    ci_high: float
    n_trials: int

    @classmethod
    def from_counts(cls, successes: int, n_trials: int) -> EstimateWithCI:
        """Proportion estimate with a normal-approximation 95% interval clipped to [0, 1]."""

        if n_trials < 1:
            raise ValueError("An estimate needs at least one trial.")
        if not 0 <= successes <= n_trials:
            raise ValueError("The number of successes must lie in [0, n_trials].")

        point = successes / n_trials
        stderr = math.sqrt(point * (1.0 - point) / n_trials)
        return cls(
            point=point,
            stderr=stderr,
            ci_low=max(0.0, point - Z_95 * stderr),
            ci_high=min(1.0, point + Z_95 * stderr),
            n_trials=n_trials,
        )


def estimate(outcomes: Iterable[Any], predicate: Callable[[Any], bool] = bool) -> EstimateWithCI:
    """Estimate the probability that `predicate` holds over `outcomes`."""

    flags = [bool(predicate(o)) for o in outcomes]
    if not flags:
        raise ValueError("Cannot estimate a probability from zero outcomes.")
    return EstimateWithCI.from_counts(sum(flags), len(flags))


# Closed forms ----


def _detect(pass_prob: float, m: int) -> float:
    return 1.0 - pass_prob**m


CLOSED_FORMS: dict[str, Callable[..., float]] = {
    "impersonate_alice_detect": lambda k: 1.0 - 0.5 ** (k // 2),
    "impersonate_bob_detect": lambda k: 1.0 - 0.5**k,
    "impersonate_bob_accept": lambda k: 0.5**k,
    "eve_id_b1_guess": lambda k: 0.75**k,
    "intercept_decoy_pass": lambda: 0.75,
    "intercept_detect": detection_prob_intercept,
    "p_corr": lambda N, l, n: p_corr_bound(N, l, n)[0],
    "entangle_decoy_pass": lambda F: entangle_decoy_pass_prob(F),
    "entangle_detect": lambda F, m: _detect(entangle_decoy_pass_prob(F), m),
    "dos_unitary_pass": lambda w: dos_unitary_pass(w),
    "dos_pass": lambda w: dos_decoy_pass_prob(w),
    "dos_detect": lambda w, m: _detect(dos_decoy_pass_prob(w), m),
    "mitm_decoy_pass": lambda: 0.5,
    "mitm_detect": lambda m: _detect(0.5, m),
    "predicted_success": predicted_success,
    "ecc_logical": logical_error_rate,
    "t1_survival": t1_survival,
    "readout_flip": lambda p: p,
    "round_trip_success": lambda offset, readout: (
        math.cos(math.radians(offset)) ** 2 * (1 - readout)
        + math.sin(math.radians(offset)) ** 2 * readout
    ),
}


def closed_form(quantity: str, **params: Any) -> float:
    """
    Evaluate the analytic value of a named quantity.

    Parameters
    ----------
    quantity
        One of the keys of `CLOSED_FORMS`, e.g. `"intercept_detect"`.
    **params
        The parameters of that quantity, e.g. `m=4`.

    Examples
    --------
    >>> closed_form("intercept_detect", m=1)
    0.25
    """

    _match_arg(quantity, list(CLOSED_FORMS), "quantity")
    try:
        return float(CLOSED_FORMS[quantity](**params))
    except TypeError as exc:
        raise ValueError(f"Bad parameters for `{quantity}`: {exc}") from None


# Comparison suite ----


@dataclass(frozen=True)
class ComparisonRow:
    quantity: str
    params: dict[str, Any]
    closed_form: float
    estimate: EstimateWithCI
    within_tolerance: bool
    tolerance: float = DEFAULT_TOLERANCE

    @classmethod
    def compare(
        cls,
        quantity: str,
        params: dict[str, Any],
        estimate: EstimateWithCI,
        *,
        closed: float | None = None,
        tolerance: float = DEFAULT_TOLERANCE,
    ) -> ComparisonRow:
        """
        Build a row, judging the estimate against max(3 stderr, tolerance).

        The closed form is evaluated from `quantity` and `params` unless given as `closed`.
        """

        params = {key: list(val) if isinstance(val, tuple) else val for key, val in params.items()}
        if closed is None:
            closed = closed_form(quantity, **params)
        within = abs(closed - estimate.point) <= max(3 * estimate.stderr, tolerance)
        return cls(quantity, params, closed, estimate, within, tolerance)


def _aborted_at(status: str) -> Callable[[SessionOutcome], bool]:
    return lambda outcome: outcome.status == status


def _passed_security(outcome: SessionOutcome) -> bool:
    return outcome.status != "AbortedSecurityCheck"


def _guessed_id_b1(outcome: SessionOutcome) -> bool:
    return bool(outcome.eve is not None and outcome.eve.guess_correct)


def _attack_scenario(attack: AttackModel, trials: int, k: int = 4, m: int = 4) -> Scenario:
    return Scenario(config=ProtocolConfig(n=4, c=2, k=k, m=m), attack=attack, trials=trials)


ATTACK_DETECTION: dict[type[AttackModel], tuple[str, str]] = {
    ImpersonateAlice: ("impersonate_alice_detect", "AbortedAuthA"),
    ImpersonateBob: ("impersonate_bob_detect", "AbortedAuthB"),
    InterceptResend: ("intercept_detect", "AbortedSecurityCheck"),
    EntangleMeasure: ("entangle_detect", "AbortedSecurityCheck"),
    DoS: ("dos_detect", "AbortedSecurityCheck"),
    MITM: ("mitm_detect", "AbortedSecurityCheck"),
}


def detection_row(scenario: Scenario, master_seed: int, *, workers: int = 1) -> ComparisonRow:
    """
    Estimate how often an attack is caught at the stage designed to catch it.

    Sessions without an attack report the delivery rate, which should be one.
    """

    attack = scenario.attack
    config = scenario.config
    outcomes = run_trials(scenario, master_seed, workers=workers)

    if isinstance(attack, NoAttack):
        est = estimate(outcomes, lambda o: o.delivered)
        return ComparisonRow.compare("delivered", {}, est, closed=1.0)

    if type(attack) not in ATTACK_DETECTION:
        raise NotImplementedError(f"Unsupported attack model: {type(attack)}")

    quantity, status = ATTACK_DETECTION[type(attack)]
    params: dict[str, Any] = {"k": config.k} if quantity.startswith("impersonate") else {"m": config.m}
    if isinstance(attack, EntangleMeasure):
        params["F"] = attack.fidelity
    elif isinstance(attack, DoS):
        params["w"] = attack.weights

    return ComparisonRow.compare(quantity, params, estimate(outcomes, _aborted_at(status)))


def ecc_session_scenario(p: float, trials: int, d: int = 3) -> Scenario:
    """
    Repetition-protected sessions over a bit-flip channel, isolating the message qubits.

    The angle is 360° so the message travels in the Z basis, while every identity and angle
    qubit sits in the X basis, which bit flips leave intact.
    """

    k = 10
    device = DeviceModel(gate_error=p, readout_error=0.0, t1=math.inf)
    return Scenario(
        config=ProtocolConfig(n=8, c=0, k=k, m=2, decoy_error_threshold=1.0),
        identities=PartyIdentities("10" * (k // 2), "1" * k),
        channel=ChannelModel(1, "bit_flip", device),
        ecc=RepetitionCode(d),
        trials=trials,
        theta=360,
    )


def ecc_session_bit_errors(scenario: Scenario, master_seed: int, workers: int = 1) -> EstimateWithCI:
    """Per-bit error rate of the messages delivered over the trials of `scenario`."""

    outcomes = run_trials(scenario, master_seed, workers=workers)

    errors = total = 0
    for index, outcome in enumerate(outcomes):
        sent = trial_inputs(scenario, master_seed, index).message
        received = outcome.recovered_message or ""
        errors += sum(a != b for a, b in zip(sent, received)) + len(sent) - len(received)
        total += len(sent)

    return EstimateWithCI.from_counts(errors, total)


def ecc_logical_estimate(p: float, trials: int, seed: int, d: int = 3) -> EstimateWithCI:
    """Logical error rate of a repetition-coded bit over a single-gate bit-flip channel."""

    rng = np.random.default_rng(seed)
    channel = ChannelModel(1, "bit_flip", DeviceModel(gate_error=p, readout_error=0.0, t1=math.inf))

    failures = 0
    for _ in range(trials):
        bit = int(rng.integers(0, 2))
        copies = [apply_channel(q, channel, rng) for q in encode_repetition(bit, d)]
        outcomes = [measure(q, Z_BASIS, rng)[0] for q in copies]
        failures += decode_majority(outcomes, d) != bit

    return EstimateWithCI.from_counts(failures, trials)


def t1_survival_estimate(n_gates: int, trials: int, seed: int, device: DeviceModel) -> EstimateWithCI:
    """Fraction of |1⟩ qubits still excited after `n_gates` relaxing identity gates."""

    rng = np.random.default_rng(seed)
    channel = ChannelModel(n_gates, "amplitude_damping", device)
    survived = sum(
        measure(apply_channel(KET_1, channel, rng), Z_BASIS, rng)[0] == 1 for _ in range(trials)
    )
    return EstimateWithCI.from_counts(survived, trials)


def comparison_suite(
    master_seed: int, trials_per_row: int = 10_000, *, workers: int = 1
) -> list[ComparisonRow]:
    """
    Compare every closed-form prediction with a Monte Carlo estimate.

    Each row gets its own seed, derived from `master_seed` and the row's place in the suite.
    """

    if trials_per_row < RECOMMENDED_TRIALS:
        warnings.warn(
            f"Running the comparison suite with {trials_per_row} trials per row; estimates may "
            f"be too loose to judge (at least {RECOMMENDED_TRIALS} recommended).",
            stacklevel=2,
        )

    seeds = (derive_seed(master_seed, i) for i in count())
    rows: list[ComparisonRow] = []

    def session_row(
        quantity: str,
        params: dict[str, Any],
        attack: AttackModel,
        predicate: Callable[[SessionOutcome], bool],
        closed: float | None = None,
        **sizes: int,
    ) -> None:
        scenario = _attack_scenario(attack, trials_per_row, **sizes)
        outcomes = run_trials(scenario, next(seeds), workers=workers)
        rows.append(
            ComparisonRow.compare(quantity, params, estimate(outcomes, predicate), closed=closed)
        )

    for k in (4, 8):
        session_row(
            "impersonate_alice_detect", {"k": k}, ImpersonateAlice(), _aborted_at("AbortedAuthA"), k=k
        )
    for k in (4, 8):
        session_row(
            "impersonate_bob_detect", {"k": k}, ImpersonateBob(), _aborted_at("AbortedAuthB"), k=k
        )
    for k in (4, 8):
        session_row("eve_id_b1_guess", {"k": k}, ImpersonateBob(), _guessed_id_b1, k=k)

    for m in (1, 4, 8):
        for theta0 in (0, 45, 137):
            session_row(
                "intercept_detect",
                {"m": m, "theta0": theta0},
                InterceptResend(theta0),
                _aborted_at("AbortedSecurityCheck"),
                closed=closed_form("intercept_detect", m=m),
                m=m,
            )

    for fidelity in (0.6, 0.8, 1.0):
        session_row(
            "entangle_decoy_pass", {"F": fidelity}, EntangleMeasure(fidelity), _passed_security, m=1
        )
    for weights in ((1.0, 0.0, 0.0, 0.0), (0.0, 1.0, 0.0, 0.0), (0.5, 0.5, 0.5, 0.5)):
        session_row("dos_pass", {"w": weights}, DoS(weights), _passed_security, m=1)
    for m in (2, 6, 10):
        session_row("mitm_detect", {"m": m}, MITM(), _aborted_at("AbortedSecurityCheck"), m=m)

    for p in (0.05, 0.1, 0.2):
        est = ecc_logical_estimate(p, trials_per_row, next(seeds))
        rows.append(ComparisonRow.compare("ecc_logical", {"d": 3, "p": p}, est, tolerance=0.003))

    # every session carries 8 message bits
    scenario = ecc_session_scenario(0.1, max(1, trials_per_row // 8))
    est = ecc_session_bit_errors(scenario, next(seeds), workers)
    rows.append(
        ComparisonRow.compare(
            "ecc_logical",
            {"d": 3, "p": 0.1, "session": True},
            est,
            closed=logical_error_rate(3, 0.1),
            tolerance=0.003,
        )
    )

    device = DeviceModel()
    n_gates = 1000
    est = t1_survival_estimate(n_gates, trials_per_row, next(seeds), device)
    t_us = n_gates * device.gate_duration * 1e-3
    rows.append(ComparisonRow.compare("t1_survival", {"t": t_us, "t1": device.t1}, est))

    rng = np.random.default_rng(next(seeds))
    flips = sum(readout_flip(0, device.readout_error, rng) for _ in range(trials_per_row))
    est = EstimateWithCI.from_counts(flips, trials_per_row)
    rows.append(ComparisonRow.compare("readout_flip", {"p": device.readout_error}, est))

    logger.info(
        "comparison suite: %d of %d rows within tolerance",
        sum(r.within_tolerance for r in rows),
        len(rows),
    )
    return rows


# Sweeps ----


@dataclass(frozen=True)
class SyntheticDecay:
    """Draw sweep successes from Binomial(trials, (1 - p)^(γ n)) instead of simulating."""

    gamma: float
    p_error: float


def sweep_channel_length(
    n_values: Sequence[int],
    device: DeviceModel,
    bit: int,
    trials: int,
    master_seed: int,
    *,
    error_kind: ErrorKind = "bit_flip",
    theta: float = 360.0,
    generator: SyntheticDecay | None = None,
) -> list[tuple[int, EstimateWithCI]]:
    """
    Success probability of sending `bit` over channels of increasing length.

    Every length gets its own stream derived from `master_seed` and the length.
    """

    if bit not in (0, 1):
        raise ValueError(f"The `bit` value must be 0 or 1, got {bit}.")
    if trials < 1:
        raise ValueError(f"The `trials` value must be positive, got {trials}.")

    results: list[tuple[int, EstimateWithCI]] = []
    for n in n_values:
        rng = np.random.default_rng(np.random.SeedSequence([master_seed, int(n)]))

        if generator is not None:
            p = predicted_success(n, generator.p_error, generator.gamma)
            successes = int(rng.binomial(trials, p))
        else:
            channel = ChannelModel(int(n), error_kind, device)
            successes = sum(transmit_bit(bit, theta, channel, rng) == bit for _ in range(trials))

        results.append((int(n), EstimateWithCI.from_counts(successes, trials)))
        logger.debug("sweep n=%d: success %.4f", n, successes / trials)

    return results


def sweep_angle(
    thetas: Sequence[float] | None,
    device: DeviceModel,
    bit: int,
    trials: int,
    master_seed: int,
    *,
    n_gates: int = 0,
    error_kind: ErrorKind = "bit_flip",
) -> list[tuple[float, EstimateWithCI]]:
    """
    Success probability of the noisy encode-decode round trip at a range of angles.

    By default 20 equally spaced angles on [0, 360) are used.
    """

    if bit not in (0, 1):
        raise ValueError(f"The `bit` value must be 0 or 1, got {bit}.")
    _match_arg(error_kind, ["bit_flip", "amplitude_damping", "depolarizing"], "error_kind")

    if thetas is None:
        thetas = [float(t) for t in np.linspace(0.0, 360.0, 20, endpoint=False)]

    channel = ChannelModel(n_gates, error_kind, device)
    results: list[tuple[float, EstimateWithCI]] = []
    for i, theta in enumerate(thetas):
        rng = np.random.default_rng(np.random.SeedSequence([master_seed, i]))
        successes = sum(transmit_bit(bit, theta, channel, rng) == bit for _ in range(trials))
        results.append((float(theta), EstimateWithCI.from_counts(successes, trials)))

    return results

