"""
Command-line front end.

    qsdc-lab run --message 011101 --id-a 1100 --id-b 0111 --theta 7 --seed 42
    qsdc-lab attack --model mitm --m 4 --trials 100000
    qsdc-lab suite --trials 100000 --seed 7 --out report.csv
    qsdc-lab sweep --n-values 100,150,200,250,300,350,400 --out sweep.csv
    qsdc-lab ecc --distance 3 --p 0.1
    qsdc-lab fit-gamma --input sweep_points.csv --p-error 0.001
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Callable, Sequence

from typing_extensions import Literal, TypeAlias

from ._adversary import (
    MITM,
    AttackModel,
    DoS,
    EntangleMeasure,
    ImpersonateAlice,
    ImpersonateBob,
    InterceptResend,
    NoAttack,
)
from ._analysis import (
    ComparisonRow,
    Scenario,
    SyntheticDecay,
    closed_form,
    comparison_suite,
    detection_row,
    ecc_logical_estimate,
    sweep_angle,
    sweep_channel_length,
)
from ._config import PartyIdentities, ProtocolConfig, seed_from_env
from ._ecc import RepetitionCode, logical_error_rate, max_channel_length, threshold_check
from ._noise import ERROR_KINDS, ChannelModel, DeviceModel, fit_gamma, predicted_success
from ._protocol import run_session
from ._report import REPORT_FORMATS, emit_report
from ._serialize import ConfigDocument, dumps, load_config, to_jsonable

logger = logging.getLogger(__name__)

Subcommand: TypeAlias = Literal["run", "attack", "suite", "sweep", "ecc", "fit-gamma"]

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_USAGE = 2

ATTACK_CHOICES: dict[str, Callable[[argparse.Namespace], AttackModel]] = {
    "none": lambda a: NoAttack(),
    "impersonate-alice": lambda a: ImpersonateAlice(),
    "impersonate-bob": lambda a: ImpersonateBob(),
    "intercept-resend": lambda a: InterceptResend(a.theta0),
    "entangle-measure": lambda a: EntangleMeasure(a.fidelity),
    "dos": lambda a: DoS(a.weights),
    "mitm": lambda a: MITM(),
}


@dataclass(frozen=True)
class CliConfig:
    subcommand: Subcommand
    config_path: Path | None = None
    seed: int = 0
    trials: int = 10_000
    output_path: Path | None = None
    format: str = "csv"
    verbosity: int = 0
    workers: int = 1
    document: ConfigDocument = field(default_factory=ConfigDocument)
    options: dict[str, Any] = field(default_factory=dict)

    def header(self, **effective: Any) -> dict[str, Any]:
        """
        Configuration echoed into every report.

        `effective` holds the objects a subcommand actually ran with, after flags were merged
        into the configuration document. Flags left unset are omitted from `options`.
        """

        options = {k: to_jsonable(v) for k, v in sorted(self.options.items()) if v is not None}
        return {
            "subcommand": self.subcommand,
            "seed": self.seed,
            "trials": self.trials,
            "options": options,
            **{key: to_jsonable(val) for key, val in effective.items()},
        }


def _bits(text: str) -> str:
    if not text or set(text) - {"0", "1"}:
        raise argparse.ArgumentTypeError(f"expected a bit string of 0s and 1s, got '{text}'")
    return text


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got '{text}'") from None


def _weights(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected four comma-separated numbers, got '{text}'") from None


def _seed(text: str) -> int:
    seed = int(text)
    if not 0 <= seed < 2**64:
        raise argparse.ArgumentTypeError(f"seed must lie in [0, 2**64), got {seed}")
    return seed


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON configuration document")
    common.add_argument("--seed", type=_seed, help="master seed (default: $QSDC_SEED or 0)")
    common.add_argument("--trials", type=int, help="Monte Carlo trials (default: 10000)")
    common.add_argument("--out", type=Path, help="output file for the report or transcript")
    common.add_argument("--format", choices=REPORT_FORMATS, default="csv")
    common.add_argument("--workers", type=int, default=1, help="worker processes for trials")
    common.add_argument("-v", "--verbose", action="count", default=0)
    return common


def _session_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("session")
    group.add_argument("--n", type=int, help="message length (attack experiments)")
    group.add_argument("--c", type=int, help="number of check bits")
    group.add_argument("--k", type=int, help="identity length")
    group.add_argument("--m", type=int, help="number of decoys")
    group.add_argument("--threshold", type=float, help="acceptance threshold for every stage")
    group.add_argument("--distance", type=int, help="repetition code distance")
    _channel_flags(parser)


def _channel_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("channel")
    group.add_argument("--gates", type=int, help="channel length in identity gates")
    group.add_argument("--error-kind", choices=ERROR_KINDS)
    group.add_argument("--p-error", type=float, help="per-gate error probability")
    group.add_argument("--readout", type=float, help="readout error probability")
    group.add_argument("--t1", type=float, help="relaxation time in microseconds")
    group.add_argument("--offset", type=float, help="calibration offset in degrees")


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    parser = argparse.ArgumentParser(
        prog="qsdc-lab",
        description="Simulate and analyze direct quantum communication with mutual authentication.",
    )
    sub = parser.add_subparsers(dest="subcommand", metavar="SUBCOMMAND")
    sub.required = True

    run = sub.add_parser("run", parents=[common], help="run one session")
    run.add_argument("--message", type=_bits)
    run.add_argument("--id-a", type=_bits)
    run.add_argument("--id-b", type=_bits)
    run.add_argument("--theta", type=int, help="angle in degrees, 1 to 360")
    run.add_argument("--model", choices=list(ATTACK_CHOICES), default=None)
    run.add_argument("--theta0", type=float, default=None)
    run.add_argument("--fidelity", type=float, default=0.5)
    run.add_argument("--weights", type=_weights, default=(1.0, 0.0, 0.0, 0.0))
    run.add_argument(
        "--example", action="store_true", help="replay the packaged worked example exactly"
    )
    _session_flags(run)

    attack = sub.add_parser("attack", parents=[common], help="estimate detection of an attack")
    attack.add_argument("--model", choices=list(ATTACK_CHOICES), default=None)
    attack.add_argument("--theta0", type=float, default=None)
    attack.add_argument("--fidelity", type=float, default=0.5)
    attack.add_argument("--weights", type=_weights, default=(1.0, 0.0, 0.0, 0.0))
    _session_flags(attack)

    sub.add_parser("suite", parents=[common], help="compare closed forms with simulation")

    sweep = sub.add_parser("sweep", parents=[common], help="success against channel length or angle")
    sweep.add_argument("--over", choices=["length", "angle"], default="length")
    sweep.add_argument("--n-values", type=_int_list, default=[100, 150, 200, 250, 300, 350, 400])
    sweep.add_argument("--bit", type=int, choices=[0, 1], default=0)
    sweep.add_argument("--kind", choices=["physical", "synthetic"], default="physical")
    sweep.add_argument("--gamma", type=float, default=None)
    _channel_flags(sweep)

    ecc = sub.add_parser("ecc", parents=[common], help="repetition code analysis")
    ecc.add_argument("--distance", type=int, default=None, help="code distance (default: 3)")
    ecc.add_argument("--p", type=float, required=True, help="physical flip probability")
    ecc.add_argument("--gamma", type=float, default=None)
    ecc.add_argument("--p-error", type=float, default=0.001)
    ecc.add_argument("--success-threshold", type=float, default=2 / 3)

    fit = sub.add_parser("fit-gamma", parents=[common], help="fit γ to (n, success) samples")
    fit.add_argument("--input", type=Path, required=True, help="CSV with columns n,success")
    fit.add_argument("--p-error", type=float, default=0.001)

    return parser


def parse_args(argv: Sequence[str] | None = None) -> CliConfig:
    """
    Parse and validate the command line.

    Usage errors, including an unreadable configuration file, exit with status 2.
    """

    parser = build_parser()
    args = parser.parse_args(argv)

    document = ConfigDocument()
    if args.config is not None:
        try:
            document = load_config(args.config)
        except (OSError, ValueError, TypeError) as exc:
            parser.error(f"cannot use configuration file `{args.config}`: {exc}")

    if args.seed is not None:
        seed = args.seed
    elif document.protocol is not None:
        seed = document.protocol.seed
    else:
        try:
            seed = seed_from_env()
        except ValueError as exc:
            parser.error(str(exc))

    if args.trials is not None and args.trials < 1:
        parser.error("--trials must be positive")

    common = {"config", "seed", "trials", "out", "format", "workers", "verbose", "subcommand"}
    options = {k: v for k, v in vars(args).items() if k not in common}

    if args.subcommand == "run" and not args.example:
        have_ids = document.identities is not None or (args.id_a and args.id_b)
        if args.message is None or not have_ids:
            parser.error("run needs --message, --id-a and --id-b (or --example)")

    return CliConfig(
        subcommand=args.subcommand,
        config_path=args.config,
        seed=seed,
        trials=args.trials if args.trials is not None else 10_000,
        output_path=args.out,
        format=args.format,
        verbosity=args.verbose,
        workers=args.workers,
        document=document,
        options=options,
    )


# Merging flags into the configuration document ----


def _protocol_config(
    cfg: CliConfig, n: int | None = None, k: int | None = None
) -> ProtocolConfig:
    opts = cfg.options
    base = cfg.document.protocol
    values: dict[str, Any] = {} if base is None else dict(base.__dict__)
    values["seed"] = cfg.seed

    for key in ("n", "c", "k", "m"):
        if opts.get(key) is not None:
            values[key] = opts[key]
    if n is not None:
        values["n"] = n
    if k is not None and opts.get("k") is None:
        values["k"] = k
    values.setdefault("n", 4)
    values.setdefault("c", 2)

    config = ProtocolConfig(**values)
    if opts.get("threshold") is not None:
        config = config.with_thresholds(opts["threshold"])
    return config


def _channel(cfg: CliConfig, default: ChannelModel | None = None) -> ChannelModel:
    """The document's channel section, or `default` without `--config`, overridden by flags."""

    opts = cfg.options
    channel = cfg.document.channel
    if cfg.config_path is None and default is not None:
        channel = default
    device = channel.device

    device_flags = {
        "gate_error": opts.get("p_error"),
        "readout_error": opts.get("readout"),
        "t1": opts.get("t1"),
        "calibration_offset": opts.get("offset"),
    }
    device = replace(device, **{k: v for k, v in device_flags.items() if v is not None})

    channel_flags = {"n_gates": opts.get("gates"), "error_kind": opts.get("error_kind")}
    return replace(channel, device=device, **{k: v for k, v in channel_flags.items() if v is not None})


def _attack(cfg: CliConfig) -> AttackModel:
    model = cfg.options.get("model")
    if model is None:
        return cfg.document.attack
    return ATTACK_CHOICES[model](argparse.Namespace(**cfg.options))


def _ecc(cfg: CliConfig) -> RepetitionCode | None:
    distance = cfg.options.get("distance")
    if distance is not None:
        return RepetitionCode(distance)
    return cfg.document.ecc


# Subcommands ----


def _run(cfg: CliConfig) -> int:
    opts = cfg.options

    if opts.get("example"):
        from .data import worked_example

        example = worked_example()
        outcome = run_session(
            replace(example.config, seed=cfg.seed),
            example.identities,
            example.message,
            _channel(cfg),
            _attack(cfg),
            plan=example.plan,
        )
    else:
        identities = cfg.document.identities
        if opts.get("id_a") and opts.get("id_b"):
            identities = PartyIdentities(opts["id_a"], opts["id_b"])
        assert identities is not None

        message: str = opts["message"]
        config = _protocol_config(cfg, n=len(message), k=identities.k)

        outcome = run_session(
            config,
            identities,
            message,
            _channel(cfg),
            _attack(cfg),
            ecc=_ecc(cfg),
            theta=opts.get("theta"),
        )

    if outcome.delivered:
        print(f"Delivered M={outcome.recovered_message}")
    else:
        stage = outcome.transcript[-1].message
        print(f"{outcome.status}: {getattr(stage, 'reason', '')}")

    if cfg.output_path is not None:
        cfg.output_path.write_text(dumps(outcome, indent=2) + "\n", encoding="utf-8")
        logger.info("transcript written to %s", cfg.output_path)

    return EXIT_OK


def _emit(cfg: CliConfig, rows: list[ComparisonRow], **effective: Any) -> None:
    for row in rows:
        mark = "ok" if row.within_tolerance else "MISMATCH"
        print(
            f"{row.quantity:<26} {dumps(row.params):<32} closed={row.closed_form:.4f} "
            f"sim={row.estimate.point:.4f} ±{row.estimate.stderr:.4f} {mark}"
        )
    if cfg.output_path is not None:
        header = cfg.header(**effective)
        emit_report(rows, cfg.format, cfg.output_path, header=header)  # type: ignore[arg-type]


def _attack_cmd(cfg: CliConfig) -> int:
    scenario = Scenario(
        config=_protocol_config(cfg),
        attack=_attack(cfg),
        channel=_channel(cfg),
        ecc=_ecc(cfg),
        trials=cfg.trials,
    )
    row = detection_row(scenario, cfg.seed, workers=cfg.workers)
    _emit(
        cfg,
        [row],
        protocol=scenario.config,
        attack=scenario.attack,
        channel=scenario.channel,
        ecc=scenario.ecc,
    )
    return EXIT_OK


def _suite(cfg: CliConfig) -> int:
    rows = comparison_suite(cfg.seed, cfg.trials, workers=cfg.workers)
    _emit(cfg, rows)
    return EXIT_OK


# sweeps without `--config` run on the default device with readout errors off
SWEEP_CHANNEL = ChannelModel(0, "bit_flip", DeviceModel(readout_error=0.0))


def _sweep(cfg: CliConfig) -> int:
    opts = cfg.options
    channel = _channel(cfg, default=SWEEP_CHANNEL)
    device = channel.device

    if opts["over"] == "angle":
        points = sweep_angle(
            None,
            device,
            opts["bit"],
            cfg.trials,
            cfg.seed,
            n_gates=channel.n_gates,
            error_kind=channel.error_kind,
        )
        # the closed form covers readout and calibration only, not gate noise
        closed = closed_form(
            "round_trip_success", offset=device.calibration_offset, readout=device.readout_error
        )
        rows = [
            ComparisonRow.compare("round_trip_success", {"theta": theta}, est, closed=closed)
            for theta, est in points
        ]
        _emit(cfg, rows, channel=channel)
        return EXIT_OK

    generator = None
    if opts["kind"] == "synthetic":
        if opts["gamma"] is None:
            raise ValueError("A synthetic sweep needs `--gamma`.")
        generator = SyntheticDecay(opts["gamma"], device.gate_error)

    points = sweep_channel_length(
        opts["n_values"],
        device,
        opts["bit"],
        cfg.trials,
        cfg.seed,
        error_kind=channel.error_kind,
        generator=generator,
    )
    gamma, residual = fit_gamma([(n, est.point) for n, est in points], device.gate_error)
    print(f"fitted gamma={gamma:.4f} (rms log residual {residual:.3g})")

    rows = [
        ComparisonRow.compare(
            "predicted_success",
            {"n": n, "p_error": device.gate_error, "gamma": gamma},
            est,
            closed=predicted_success(n, device.gate_error, gamma),
        )
        for n, est in points
    ]
    _emit(cfg, rows, channel=channel, fitted_gamma=gamma)
    return EXIT_OK


def _ecc_cmd(cfg: CliConfig) -> int:
    opts = cfg.options
    code = _ecc(cfg) or RepetitionCode()
    d, p = code.distance, opts["p"]

    rate = logical_error_rate(d, p)
    print(f"logical error rate (d={d}, p={p}): {rate:.4f}")
    print(f"repetition helps (leading-order bound, p < 1/3 for d=3): {threshold_check(p, d)}")
    print(f"repetition helps (exact comparison): {threshold_check(p, d, exact=True)}")

    if opts["gamma"] is not None:
        n_max = max_channel_length(opts["gamma"], opts["p_error"], opts["success_threshold"])
        print(f"longest channel meeting success {opts['success_threshold']:.4f}: {n_max} gates")

    if cfg.output_path is not None:
        est = ecc_logical_estimate(p, cfg.trials, cfg.seed, d)
        row = ComparisonRow.compare("ecc_logical", {"d": d, "p": p}, est, tolerance=0.003)
        _emit(cfg, [row], ecc=code)

    return EXIT_OK


def _fit_gamma_cmd(cfg: CliConfig) -> int:
    opts = cfg.options
    with open(opts["input"], newline="", encoding="utf-8") as f:
        samples = [(int(rec["n"]), float(rec["success"])) for rec in csv.DictReader(f)]

    gamma, residual = fit_gamma(samples, opts["p_error"])
    print(f"gamma={gamma:.4f} residual={residual:.3g}")
    return EXIT_OK


HANDLERS: dict[str, Callable[[CliConfig], int]] = {
    "run": _run,
    "attack": _attack_cmd,
    "suite": _suite,
    "sweep": _sweep,
    "ecc": _ecc_cmd,
    "fit-gamma": _fit_gamma_cmd,
}


def execute(cfg: CliConfig) -> int:
    """
    Run the selected subcommand.

    Returns 0 on completion, including sessions aborted because an attack was detected, 2
    when the configuration is invalid and 1 on any other failure.
    """

    level = [logging.WARNING, logging.INFO, logging.DEBUG][min(cfg.verbosity, 2)]
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")

    try:
        return HANDLERS[cfg.subcommand](cfg)
    except (ValueError, TypeError) as exc:
        print(f"qsdc-lab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"qsdc-lab: I/O error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except Exception:
        logger.exception("internal error")
        return EXIT_INTERNAL


def main(argv: Sequence[str] | None = None) -> int:
    return execute(parse_args(argv))


if __name__ == "__main__":
    sys.exit(main())
