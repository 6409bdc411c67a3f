"""
Command-line entry point.

Usage:
    python -m src.cli validate --config config/projective_d2.json
    python -m src.cli run --config config/random_d4.json --engine both
    python -m src.cli montecarlo --config config/random_d4.json --trials 100000 --threads 4
    python -m src.cli tradeoff --config config/projective_d2.json --phi-grid 0,0.5,1.0
"""
import argparse
import sys
from pathlib import Path
from typing import List, Optional

from loguru import logger
from pydantic import BaseModel

from src.cli.commands import cmd_montecarlo, cmd_run, cmd_tradeoff, cmd_validate
from src.cli.error_handlers import EXIT_INVALID_INPUT, handle_exception
from src.cli.reports import render_text
from src.config import VALID_ENGINES, config


def setup_logging(level: Optional[str] = None) -> None:
    """Console sink on stderr (stdout carries reports) plus a rotating file sink."""
    level = level or config.logging.level
    logger.remove()
    logger.add(
        sys.stderr,
        format="<green>{time:YYYY-MM-DD HH:mm:ss}</green> | <level>{level: <8}</level> | <cyan>{name}</cyan>:<cyan>{function}</cyan> - <level>{message}</level>",
        level=level,
    )
    logger.add(
        config.logging.file,
        format="{time:YYYY-MM-DD HH:mm:ss} | {level: <8} | {name}:{function} - {message}",
        level=level,
        rotation="10 MB",
    )


def _seed(value: str) -> int:
    seed = int(value)
    if not 0 <= seed < 2**64:
        raise argparse.ArgumentTypeError(f"seed must be an unsigned 64-bit integer, got {value}")
    return seed


def _positive_int(value: str) -> int:
    number = int(value)
    if number < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return number


def _phi_grid(value: str) -> List[float]:
    try:
        return [float(item) for item in value.split(",") if item.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"phi grid must be comma-separated numbers, got '{value}'")


def build_parser() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--config", required=True, type=Path, help="ProtocolConfig JSON file")
    shared.add_argument("--seed", type=_seed, default=None, help="Global seed (overrides the config)")
    shared.add_argument("--format", choices=("json", "text"), default="json", help="Report format")
    shared.add_argument("--engine", choices=VALID_ENGINES, default=config.simulation.engine)
    shared.add_argument("--threads", type=_positive_int, default=config.simulation.threads)
    shared.add_argument("--out", type=Path, default=None, help="Also write the report here")
    shared.add_argument("--log-level", default=None, help="Override LOG_LEVEL")

    parser = argparse.ArgumentParser(
        prog="qsr",
        description="Direct-sum quantum state recovery simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("validate", parents=[shared], help="Check every instrument of a config")
    sub.add_parser("run", parents=[shared], help="Run a single trial")

    mc = sub.add_parser("montecarlo", parents=[shared], help="Run a Monte Carlo campaign")
    mc.add_argument("--trials", type=_positive_int, default=config.simulation.default_trials)
    mc.add_argument("--records", type=Path, default=None, help="Write TrialRecords as JSON lines")

    tr = sub.add_parser("tradeoff", parents=[shared], help="Compare with the QRM baseline over a phi grid")
    tr.add_argument("--phi-grid", type=_phi_grid, default=None, help="Comma-separated angles")

    return parser


def _emit(report: BaseModel, fmt: str, out: Optional[Path]) -> None:
    text = report.model_dump_json(indent=2) if fmt == "json" else render_text(report)
    print(text)
    if out is not None:
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text + "\n", encoding="utf-8")
        logger.info(f"Report written to {out}")


def main(argv: Optional[List[str]] = None) -> int:
    """Run the CLI; returns the process exit code."""
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        return EXIT_INVALID_INPUT if e.code else 0

    setup_logging(args.log_level)

    try:
        config.validate()
        if args.command == "validate":
            code, report = cmd_validate(args.config, seed=args.seed)
        elif args.command == "run":
            code, report = cmd_run(args.config, seed=args.seed, engine=args.engine)
        elif args.command == "montecarlo":
            code, report = cmd_montecarlo(
                args.config, args.trials, seed=args.seed, engine=args.engine,
                threads=args.threads, records_path=args.records,
            )
        else:
            code, report = cmd_tradeoff(args.config, phi_grid=args.phi_grid, seed=args.seed)
    except Exception as e:
        code, report = handle_exception(e)

    _emit(report, args.format, args.out)
    return code


if __name__ == "__main__":
    sys.exit(main())
