#!/usr/bin/env python3
"""
WP Lab - Main Entry Point

Command-line surface for the Weil-Petersson curve lab: norms of sampled
functions, curve synthesis, Semmes-type extensions, conformal welding and
the theorem checks.
"""

import sys
import argparse
import hashlib
import json
import logging
from pathlib import Path

# Add src to path
sys.path.insert(0, str(Path(__file__).parent))

from src.config import configure_logging
from src.errors import EXIT_NUMERICAL, EXIT_USAGE, ParameterError, WPError
from src import cli_io
from src.db import record_run

logger = logging.getLogger("wp_lab")

STATUS = {0: "✅ pass", 1: "⚠️ usage error", 2: "❌ numerical failure", 3: "❌ theorem check failed",
          4: "❔ inconclusive"}


class UsageParser(argparse.ArgumentParser):
    """ArgumentParser that reports usage errors with exit code 1"""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = UsageParser(description="Weil-Petersson curve lab")
    parser.add_argument(
        "command",
        choices=["norms", "synth", "extend", "weld", "verify", "sweep"],
        help="Command to execute"
    )
    parser.add_argument("inputs", nargs="*", help="Input file(s) for the command")
    parser.add_argument("--grid", type=int, dest="grid_n", help="Line grid size N")
    parser.add_argument("--window", type=float, help="Half-extent L of the line window")
    parser.add_argument("--levels", type=int, help="Number of dyadic levels")
    parser.add_argument("--resolution", type=int, help="Welding boundary resolution")
    parser.add_argument("--seed", type=int, help="Random seed")
    parser.add_argument("--out", dest="out_dir", help="Output directory")
    parser.add_argument("--tolerance-file", help="JSON file of per-check tolerance overrides")
    parser.add_argument("--no-ledger", action="store_true", help="Do not record the run in the ledger")
    parser.add_argument("--log-level", default=None, help="Logging level (default from WP_LOG_LEVEL)")
    return parser


def _needed(command: str) -> int:
    return {"norms": 1, "synth": 1, "extend": 2, "weld": 1, "verify": 1, "sweep": 1}[command]


def run(args) -> tuple:
    """Dispatch one command; returns (exit code, summary, config hash)"""
    if len(args.inputs) != _needed(args.command):
        raise ParameterError(f"'{args.command}' takes {_needed(args.command)} input file(s)")
    overrides = {
        "grid_n": args.grid_n, "window": args.window, "levels": args.levels,
        "resolution": args.resolution, "seed": args.seed, "out_dir": args.out_dir,
    }
    if args.tolerance_file:
        overrides["tolerances"] = cli_io.load_tolerances(args.tolerance_file)

    if args.command in ("verify", "sweep"):
        config = cli_io.read_run_config(args.inputs[0], args.command, **overrides)
    else:
        config = cli_io.build_run_config(args.command, **overrides)
    config_hash = hashlib.sha256(json.dumps(
        {"config": config.model_dump(), "inputs": args.inputs}, sort_keys=True).encode()).hexdigest()[:16]

    if args.command == "norms":
        code, summary = cli_io.cli_norms(args.inputs[0], config)
    elif args.command == "synth":
        code, summary = cli_io.cli_synth(args.inputs[0], config)
    elif args.command == "extend":
        code, summary = cli_io.cli_extend(args.inputs[0], args.inputs[1], config)
    elif args.command == "weld":
        code, summary = cli_io.cli_weld(args.inputs[0], config)
    elif args.command == "verify":
        code, summary = cli_io.cli_verify(config)
    else:
        code, summary = cli_io.cli_sweep(config)
    return code, summary, config_hash


def main(argv=None) -> int:
    """Main entry point"""
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)

    config_hash = ""
    try:
        code, summary, config_hash = run(args)
    except WPError as e:
        code, summary = e.exit_code, {"error": type(e).__name__, "message": str(e)}
        print(f"{STATUS[code]}: {e}")
    except Exception as e:
        logger.exception("unexpected failure in '%s'", args.command)
        code, summary = EXIT_NUMERICAL, {"error": type(e).__name__, "message": str(e)}
        print(f"{STATUS[code]}: {type(e).__name__}: {e}")
    else:
        print(f"{STATUS[code]} ({args.command})")
        for key, value in summary.items():
            print(f"  {key}: {value}")

    if not args.no_ledger:
        record_run(args.command, config_hash, code, summary)
    return code


if __name__ == "__main__":
    sys.exit(main())
