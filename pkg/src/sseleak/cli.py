"""Command-line entry point: run, validate, and sweep experiment configs."""

from __future__ import annotations

import argparse
import copy
import json
import sys
from pathlib import Path

from .experiment import ConfigError, ExperimentConfig, emit_reports, run_experiment


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sseleak",
        description="Simulate SSE leakage, apply defenses, and run query-recovery attacks.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment config")
    run.add_argument("config", help="path to a json experiment config")
    run.add_argument("--out", help="output directory (overrides config output_dir)")
    run.add_argument("--trials", type=int, help="override the trial count")

    val = sub.add_parser("validate", help="check a config without running it")
    val.add_argument("config")

    sweep = sub.add_parser("sweep", help="grid over one config key")
    sweep.add_argument("config")
    sweep.add_argument("--param", required=True,
                       help="dotted config key, e.g. defense.k or tau")
    sweep.add_argument("--values", required=True,
                       help="comma-separated values for the key")
    sweep.add_argument("--out", help="output directory root")
    return parser


def _load_raw(path: str) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def _set_dotted(data: dict, dotted: str, value) -> None:
    keys = dotted.split(".")
    node = data
    for key in keys[:-1]:
        if key not in node or not isinstance(node[key], dict):
            node[key] = {}
        node = node[key]
    node[keys[-1]] = value


def _parse_value(raw: str):
    try:
        return json.loads(raw)
    except json.JSONDecodeError:
        return raw


def _summarize(report, label: str) -> None:
    agg = report.aggregate
    acc = agg.get("accuracy_mean")
    uniq = agg.get("accuracy_unique_mean")
    acc_s = "n/a" if acc is None else f"{acc:.4f}"
    uniq_s = "n/a" if uniq is None else f"{uniq:.4f}"
    print(f"{label}: trials={len(report.trials)} failed={report.failed_trials} "
          f"accuracy={acc_s} accuracy_unique={uniq_s}")


def _cmd_run(args) -> int:
    config = ExperimentConfig.from_file(args.config)
    if args.trials is not None:
        config.trials = args.trials
        config.validate()
    out_dir = args.out or config.output_dir
    if not out_dir:
        print("error: no output directory (set --out or output_dir)", file=sys.stderr)
        return 2
    report = run_experiment(config)
    for path in emit_reports(report, out_dir):
        print(f"wrote {path}")
    _summarize(report, "run")
    for trial in report.trials:
        if trial.error is not None:
            print(f"trial {trial.trial} failed: {trial.error}", file=sys.stderr)
    return 1 if report.failed_trials else 0


def _cmd_validate(args) -> int:
    try:
        ExperimentConfig.from_file(args.config)
    except (ConfigError, OSError, ValueError) as exc:
        print(f"invalid config: {exc}", file=sys.stderr)
        return 2
    print(f"{args.config}: ok")
    return 0


def _cmd_sweep(args) -> int:
    raw = _load_raw(args.config)
    out_root = args.out or raw.get("output_dir")
    if not out_root:
        print("error: no output directory (set --out or output_dir)", file=sys.stderr)
        return 2
    values = [_parse_value(v) for v in args.values.split(",")]
    rows = []
    failures = 0
    for value in values:
        variant = copy.deepcopy(raw)
        _set_dotted(variant, args.param, value)
        config = ExperimentConfig.from_dict(variant)
        report = run_experiment(config)
        label = f"{args.param}={value}"
        emit_reports(report, Path(out_root) / label.replace("/", "_"))
        _summarize(report, label)
        failures += report.failed_trials
        rows.append((value, report.aggregate, report.failed_trials))

    summary = Path(out_root) / "sweep.csv"
    lines = [f"{args.param},accuracy_mean,accuracy_std,recovery_rate_mean,"
             "accuracy_unique_mean,storage_overhead_mean,"
             "communication_overhead_mean,failed_trials"]
    for value, agg, failed in rows:
        cells = [json.dumps(value)]
        for key in ("accuracy_mean", "accuracy_std", "recovery_rate_mean",
                    "accuracy_unique_mean", "storage_overhead_mean",
                    "communication_overhead_mean"):
            v = agg.get(key)
            cells.append("" if v is None else repr(v))
        cells.append(str(failed))
        lines.append(",".join(cells))
    summary.parent.mkdir(parents=True, exist_ok=True)
    summary.write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"wrote {summary}")
    return 1 if failures else 0


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "validate":
            return _cmd_validate(args)
        return _cmd_sweep(args)
    except (ConfigError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
