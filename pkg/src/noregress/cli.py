"""Command-line front end: run one scenario, a suite, or a step-limit sweep."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .harness import policy_for, run_suite, sweep_step_limit, sweep_to_csv
from .health import SeverityWeights
from .orchestrator import Ablation, RunConfig, run_episode
from .scenarios import (
    SchemaError,
    bundled_scenario_dir,
    load_scenario,
    load_scenario_dir,
)


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--ablation",
        choices=[a.value for a in Ablation],
        default=Ablation.FULL.value,
        help="full pipeline, no retries, or naive retry without undo",
    )
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument(
        "--weights",
        default="1,1,1",
        help="severity weights w1,w2,w3 (integers or fractions like 1/2)",
    )
    parser.add_argument("--retry-limit", type=int, default=9)
    parser.add_argument("--window", type=int, default=20, help="commands per transaction")
    parser.add_argument("--step-limit", type=int, default=None)
    parser.add_argument("--report", type=Path, default=None, help="write the JSON report here")
    parser.add_argument(
        "--audit-log",
        type=Path,
        default=None,
        help="write the per-step audit trail as line-delimited JSON (run only)",
    )


def _config(args: argparse.Namespace) -> RunConfig:
    return RunConfig(
        window=args.window,
        retry_limit=args.retry_limit,
        step_limit=args.step_limit,
        ablation=Ablation(args.ablation),
        seed=args.seed,
        weights=SeverityWeights.parse(args.weights),
    )


def _emit(payload: dict, report_path: Path | None) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True)
    if report_path is not None:
        report_path.write_text(text + "\n")
        print(f"report written to {report_path}")
    else:
        print(text)


def _cmd_run(args: argparse.Namespace) -> int:
    scenario = load_scenario(args.scenario)
    config = _config(args)
    report = run_episode(scenario, policy_for(scenario, config), config)
    _emit(report.to_json(), args.report)
    if args.audit_log is not None:
        report.audit.dump(args.audit_log)
        print(f"audit log written to {args.audit_log}")
    return 0 if report.solved else 1


def _cmd_suite(args: argparse.Namespace) -> int:
    directory = args.directory or bundled_scenario_dir()
    scenarios = load_scenario_dir(directory)
    if not scenarios:
        print(f"no scenarios found in {directory}", file=sys.stderr)
        return 2
    report = run_suite(scenarios, _config(args))
    _emit(report.to_json(), args.report)
    for episode in report.episodes:
        mark = "ok " if episode.solved else "FAIL"
        print(f"  [{mark}] {episode.scenario_id}  steps={episode.total_steps} "
              f"retries={episode.retries_used}", file=sys.stderr)
    return 0


def _cmd_sweep(args: argparse.Namespace) -> int:
    directory = args.directory or bundled_scenario_dir()
    scenarios = load_scenario_dir(directory)
    limits = [int(x) for x in args.limits.split(",")]
    rows = sweep_step_limit(scenarios, limits, _config(args))
    _emit({"sweep": rows}, args.report)
    if args.csv is not None:
        args.csv.write_text(sweep_to_csv(rows))
        print(f"csv written to {args.csv}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="noregress",
        description="Transactional no-regression mitigation harness on a simulated cluster",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a single scenario episode")
    p_run.add_argument("scenario", type=Path)
    _add_common(p_run)
    p_run.set_defaults(func=_cmd_run)

    p_suite = sub.add_parser("suite", help="run every scenario in a directory")
    p_suite.add_argument("directory", type=Path, nargs="?", default=None,
                         help="defaults to the bundled corpus")
    _add_common(p_suite)
    p_suite.set_defaults(func=_cmd_suite)

    p_sweep = sub.add_parser("sweep", help="success rate as a function of the step limit")
    p_sweep.add_argument("directory", type=Path, nargs="?", default=None)
    p_sweep.add_argument("--limits", default="3,5,10,15,20,30")
    p_sweep.add_argument("--csv", type=Path, default=None)
    _add_common(p_sweep)
    p_sweep.set_defaults(func=_cmd_sweep)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SchemaError as exc:
        print(f"scenario error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
