"""Command line interface for Minimal Heatcurve."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Callable

from .artifacts import read_json
from .config import RunConfig, apply_overrides, load_config
from .errors import EXIT_CONFIG, EXIT_OK, HeatcurveError
from .logger import configure_logging, get_logger, log_event, next_log_path
from .pipeline import SUMMARY_NAME, cmd_cluster, cmd_demand, cmd_evaluate, cmd_heatcurve, cmd_ingest, cmd_loads
from .reporting import render_report

LOGGER = get_logger("cli")

COMMANDS: dict[str, tuple[Callable[[RunConfig], Path], str]] = {
    "ingest": (cmd_ingest, "Align demand and weather onto the 10-minute grid"),
    "cluster": (cmd_cluster, "Cluster the daily 10-minute intervals"),
    "demand": (cmd_demand, "Fit the quantile demand model"),
    "loads": (cmd_loads, "Allocate the demand to rooms"),
    "heatcurve": (cmd_heatcurve, "Derive the minimal heatcurve per cluster"),
    "evaluate": (cmd_evaluate, "Match a reference window and compare valve openings"),
}

# argparse destination -> RunConfig field
_OVERRIDES = {
    "n_cluster": "n_cluster",
    "seed": "seed",
    "bin_width": "bin_width_K",
    "min_samples": "min_samples",
    "hallway_t_sup": "hallway_assumed_t_sup_C",
    "safety_offset": "safety_offset_K",
    "sg_window": "sg_window",
    "sg_polyorder": "sg_polyorder",
    "output_range": "output_range",
    "output": "output_dir",
    "clamp_negative": "clamp_negative",
    "utc_offset_minutes": "utc_offset_minutes",
    "exp_range": "experiment_range",
    "ref_range": "reference_range",
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if not exc.code else EXIT_CONFIG
    if not hasattr(args, "handler"):
        parser.print_help()
        return EXIT_CONFIG
    return args.handler(args)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="minheatcurve", description="Minimal Heatcurve CLI")
    subparsers = parser.add_subparsers(dest="command")

    for name, (_, help_text) in COMMANDS.items():
        command = subparsers.add_parser(name, help=help_text)
        _add_run_arguments(command)
        if name == "evaluate":
            command.add_argument("--exp-range", nargs=2, metavar=("START", "END"), help="Experiment window")
            command.add_argument("--ref-range", nargs=2, metavar=("START", "END"), help="Reference search range")
        command.set_defaults(handler=_handle_run)

    report_parser = subparsers.add_parser("report", help="Render the summary of an output directory")
    report_parser.add_argument("summary", type=Path, help="Output directory or summary.json")
    report_parser.add_argument("--format", choices=["text", "markdown", "json"], default="text")
    report_parser.add_argument("--output", type=Path)
    report_parser.set_defaults(handler=_handle_report)

    return parser


def _add_run_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, required=True, help="Run configuration JSON")
    parser.add_argument("--output", type=Path, help="Output directory")
    parser.add_argument("--n-cluster", type=int)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--bin-width", type=float)
    parser.add_argument("--min-samples", type=int)
    parser.add_argument("--hallway-t-sup", type=float)
    parser.add_argument("--safety-offset", type=float)
    parser.add_argument("--sg-window", type=int)
    parser.add_argument("--sg-polyorder", type=int)
    parser.add_argument("--output-range", type=float, nargs=2, metavar=("LOW", "HIGH"))
    parser.add_argument("--clamp-negative", action="store_true", default=None)
    parser.add_argument("--utc-offset-minutes", type=int)


def _handle_run(args: argparse.Namespace) -> int:
    log_path = next_log_path(args.command)
    configure_logging(log_path)
    run, _ = COMMANDS[args.command]
    overrides: dict[str, Any] = {
        field: getattr(args, dest) for dest, field in _OVERRIDES.items() if hasattr(args, dest)
    }
    try:
        config = apply_overrides(load_config(args.config), overrides)
        output = run(config)
    except HeatcurveError as exc:
        log_event(
            LOGGER,
            level=logging.ERROR,
            action="cli.error",
            message=exc.qualified(),
            extra={"command": args.command, "exitCode": exc.exit_code},
        )
        print(exc.qualified(), file=sys.stderr)
        return exc.exit_code
    print(f"{args.command}: artifacts written to {output}. Log: {log_path}")
    return EXIT_OK


def _handle_report(args: argparse.Namespace) -> int:
    summary_path = args.summary / SUMMARY_NAME if args.summary.is_dir() else args.summary
    try:
        raw = read_json(summary_path)
    except FileNotFoundError:
        print(f"Summary file not found: {summary_path}", file=sys.stderr)
        return EXIT_CONFIG
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        print(f"Invalid summary JSON: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    rendered = render_report(raw, args.format)
    if args.output:
        args.output.parent.mkdir(parents=True, exist_ok=True)
        args.output.write_text(rendered + "\n", encoding="utf-8")
        print(f"Report written to {args.output}")
    else:
        print(rendered)
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(main())
