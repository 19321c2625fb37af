"""Command-line front end: single runs, parameter sweeps, and verification.

Subcommands:

* ``run --config <path> --seed <u64> [--transcript <path>] [--out <path>] [--plot]``
  executes one session and writes a structured-text report (one key per
  line). Aborted sessions are completed reports, exit code 0.
* ``sweep --config <path> --axis <name> --values <csv> --seeds <k>``
  runs k seeded sessions per value and emits one aggregate CSV row per
  value.
* ``verify`` runs the deterministic invariant suite and prints one
  pass/fail line per property.

``--plot`` renders a matplotlib figure next to the written output file.
Counts serialize as integers and rates with 12 significant digits so equal
(config, seed) pairs produce byte-identical reports.

The config file is flat ``key = value`` text mirroring the ProtocolConfig
fields; unknown keys are errors so misconfigurations fail loudly.
"""
from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

from .adversary import ATTACK_KINDS, INTERCEPT_POLICIES, AttackConfig
from .channel import NOISE_MODES, ChannelConfig
from .protocol import VARIANTS, ProtocolConfig, SessionReport, run_session
from .seeding import derive_seed
from .verify import run_all

SWEEP_AXES = ("loss_probability", "walk_step", "attack", "n")


class ConfigError(Exception):
    pass


_CONFIG_KEYS = (
    "variant",
    "n",
    "delta",
    "error_threshold",
    "noise_mode",
    "walk_step",
    "loss_probability",
    "attack",
    "intercept_policy",
    "announce_pairing_early",
    "security_margin",
)


def _parse_bool(text: str, key: str) -> bool:
    lowered = text.lower()
    if lowered in ("true", "1", "yes"):
        return True
    if lowered in ("false", "0", "no"):
        return False
    raise ConfigError(f"{key}: expected true/false, got {text!r}")


def parse_config_text(text: str) -> ProtocolConfig:
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key not in _CONFIG_KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        values[key] = value

    def take(key: str, convert, default):
        if key not in values:
            return default
        try:
            return convert(values[key])
        except ConfigError:
            raise
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{key}: {exc}") from exc

    try:
        channel = ChannelConfig(
            noise_mode=take("noise_mode", str, "collective_per_multiplet"),
            walk_step=take("walk_step", float, 0.0),
            loss_probability=take("loss_probability", float, 0.0),
        )
        attack = AttackConfig(
            kind=take("attack", str, "none"),
            intercept_policy=take("intercept_policy", str, "random"),
        )
        return ProtocolConfig(
            variant=take("variant", str, "quartet"),
            n=take("n", int, 200),
            delta=take("delta", float, 0.5),
            error_threshold=take("error_threshold", float, 0.05),
            channel=channel,
            attack=attack,
            announce_pairing_early=take(
                "announce_pairing_early", lambda v: _parse_bool(v, "announce_pairing_early"), False
            ),
            security_margin=take("security_margin", int, 64),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def parse_config(path: str | Path) -> ProtocolConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    return parse_config_text(text)


def _fmt(value) -> str:
    if value is None:
        return "-"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def format_report(report: SessionReport, seed: int) -> str:
    lines = [f"seed = {seed}"]
    lines += [f"{key} = {_fmt(value)}" for key, value in report.as_dict().items()]
    return "\n".join(lines) + "\n"


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _figure_path(out: str) -> Path:
    return Path(out).with_suffix(".png")


def cmd_run(args) -> int:
    cfg = parse_config(args.config)
    result = run_session(cfg, args.seed)
    _emit(format_report(result.report, args.seed), args.out)
    if args.transcript:
        result.transcript.write(args.transcript)
    if args.plot:
        if not args.out:
            raise ConfigError("--plot needs --out to know where to place the figure")
        from .plots import save_session_figure

        save_session_figure(result.report.as_dict(), _figure_path(args.out))
    return 0


def _axis_values(axis: str, csv: str) -> list:
    items = [item.strip() for item in csv.split(",") if item.strip()]
    if axis == "attack":
        for item in items:
            if item not in ATTACK_KINDS:
                raise ConfigError(f"unknown attack kind {item!r}, choose from {ATTACK_KINDS}")
        return items
    if axis == "n":
        return [int(item) for item in items]
    return [float(item) for item in items]


def _apply_axis(cfg: ProtocolConfig, axis: str, value) -> ProtocolConfig:
    if axis == "loss_probability":
        return dataclasses.replace(cfg, channel=dataclasses.replace(cfg.channel, loss_probability=value))
    if axis == "walk_step":
        return dataclasses.replace(cfg, channel=dataclasses.replace(cfg.channel, walk_step=value))
    if axis == "attack":
        return dataclasses.replace(cfg, attack=dataclasses.replace(cfg.attack, kind=value))
    return dataclasses.replace(cfg, n=value)

SWEEP_COLUMNS = (
    "axis", "value", "seeds", "abort_rate", "mean_test_qber", "mean_tamper_rate",
    "mean_rounds_lost", "mean_sifted_length", "mean_final_key_length", "mean_eve_information",
)


def _sweep_row(axis: str, value, reports: list[SessionReport]) -> dict:
    k = len(reports)
    qbers = [r.test_qber for r in reports if r.test_qber is not None]
    received = [max(1, r.rounds_sent - r.rounds_lost) for r in reports]
    return {
        "axis": axis,
        "value": value,
        "seeds": k,
        "abort_rate": sum(r.aborted for r in reports) / k,
        "mean_test_qber": sum(qbers) / len(qbers) if qbers else None,
        "mean_tamper_rate": sum(r.tamper_count / rx for r, rx in zip(reports, received)) / k,
        "mean_rounds_lost": sum(r.rounds_lost for r in reports) / k,
        "mean_sifted_length": sum(r.sifted_length for r in reports) / k,
        "mean_final_key_length": sum(r.final_key_length for r in reports) / k,
        "mean_eve_information": sum(r.eve_information for r in reports) / k,
    }


def cmd_sweep(args) -> int:
    if args.axis not in SWEEP_AXES:
        raise ConfigError(f"unknown sweep axis {args.axis!r}, choose from {SWEEP_AXES}")
    if args.seeds < 1:
        raise ConfigError("--seeds must be at least 1")
    base_cfg = parse_config(args.config)
    values = _axis_values(args.axis, args.values)

    rows = []
    for value_index, value in enumerate(values):
        cfg = _apply_axis(base_cfg, args.axis, value)
        reports = [
            run_session(cfg, derive_seed(args.seed, value_index, s)).report
            for s in range(args.seeds)
        ]
        rows.append(_sweep_row(args.axis, value, reports))

    lines = [",".join(SWEEP_COLUMNS)]
    lines += [",".join(_fmt(row[col]) for col in SWEEP_COLUMNS) for row in rows]
    _emit("\n".join(lines) + "\n", args.out)

    if args.plot and rows:
        if not args.out:
            raise ConfigError("--plot needs --out to know where to place the figure")
        from .plots import save_sweep_figure

        save_sweep_figure(rows, args.axis, _figure_path(args.out))
    return 0


def cmd_verify(_args) -> int:
    results = run_all()
    for result in results:
        status = "PASS" if result.passed else "FAIL"
        print(f"{status} {result.name}: {result.detail}")
    return 0 if all(r.passed for r in results) else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="singletqkd",
        description="Simulate key distribution over collective-noise channels with singlet-pairing codewords.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="execute one session and write its report")
    run_p.add_argument("--config", required=True, help="flat key=value config file")
    run_p.add_argument("--seed", type=int, required=True, help="master seed; determines all randomness")
    run_p.add_argument("--transcript", help="also write the classical-message log here")
    run_p.add_argument("--out", help="report file (default: stdout)")
    run_p.add_argument("--plot", action="store_true", help="render a figure next to --out")
    run_p.set_defaults(func=cmd_run)

    sweep_p = sub.add_parser("sweep", help="run seeded sessions across one parameter axis")
    sweep_p.add_argument("--config", required=True)
    sweep_p.add_argument("--axis", required=True, help=f"one of {', '.join(SWEEP_AXES)}")
    sweep_p.add_argument("--values", required=True, help="comma-separated axis values")
    sweep_p.add_argument("--seeds", type=int, required=True, help="sessions per value")
    sweep_p.add_argument("--seed", type=int, default=0, help="base master seed (default 0)")
    sweep_p.add_argument("--out", help="CSV file (default: stdout)")
    sweep_p.add_argument("--plot", action="store_true", help="render a figure next to --out")
    sweep_p.set_defaults(func=cmd_sweep)

    verify_p = sub.add_parser("verify", help="run the deterministic invariant suite")
    verify_p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
