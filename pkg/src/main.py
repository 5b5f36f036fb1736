import argparse
import asyncio
import dataclasses
import logging
import os
import sys
from pathlib import Path
from typing import List, Optional

from .config import AppConfig, ConfigManager, parse_switch
from .errors import ConfigError, InputEncodingError, TilecohError
from .pipeline import compute_cohomology, invariance_suite
from .report import ReportBuilder
from .runner import BatchRunner
from .substitution import parse_substitution, split_batch
from .zlattice import parse_basis

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_IO = 1


def _switch(value: str) -> bool:
    try:
        return parse_switch(value)
    except ConfigError as e:
        raise argparse.ArgumentTypeError(str(e))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tilecoh",
        description="First Cech cohomology of one-dimensional substitution tiling spaces",
    )
    parser.add_argument("--config", help="JSON or YAML configuration file (default: $TILECOH_CONFIG)")
    parser.add_argument("--log-level", help="logging level for messages on stderr")

    analysis = argparse.ArgumentParser(add_help=False)
    analysis.add_argument("--horizon", type=int, help="word length bound of the periodicity screen")
    analysis.add_argument("--max-prime", type=int, help="largest prime checked for divisibility")
    analysis.add_argument("--timings", action="store_true", help="report per-stage timings")

    commands = parser.add_subparsers(dest="command", required=True)

    analyze = commands.add_parser("analyze", parents=[analysis], help="compute H^1 of one substitution")
    analyze.add_argument("input", help="substitution file, or - for standard input")
    analyze.add_argument("--json", action="store_true", help="emit the JSON report")
    analyze.add_argument("--dot", metavar="DIR", help="write K.dot and g.dot into DIR")
    analyze.add_argument("--basis", metavar="FILE", help="explicit basis matrix P, row-major")
    analyze.add_argument("--drop", type=int, metavar="INDEX",
                         help="component of S left out of the w-vectors (default 0)")

    check = commands.add_parser("check", parents=[analysis], help="compare invariants across presentations")
    check.add_argument("input", help="substitution file, or - for standard input")
    check.add_argument("--power", type=int, help="exponent of the power presentation")
    check.add_argument("--collar", type=_switch, metavar="on|off", help="include the collared presentation")
    check.add_argument("--json", action="store_true", help="emit the suite as JSON")

    batch = commands.add_parser("batch", parents=[analysis], help="analyse blank-line separated substitutions")
    batch.add_argument("input", help="batch file, or - for standard input")
    batch.add_argument("--workers", type=int, help="items analysed concurrently")

    return parser


def _read(path: str) -> str:
    try:
        if path == "-":
            return sys.stdin.read()
        return Path(path).read_text(encoding="utf-8")
    except UnicodeDecodeError as e:
        raise InputEncodingError("standard input" if path == "-" else path, e)


def _load_config(args) -> AppConfig:
    config_path = args.config or os.environ.get('TILECOH_CONFIG')
    config = ConfigManager(config_path).get_config()

    analysis = config.analysis
    if args.horizon is not None:
        analysis = dataclasses.replace(analysis, horizon=args.horizon)
    if args.max_prime is not None:
        analysis = dataclasses.replace(analysis, max_prime=args.max_prime)
    if getattr(args, "power", None) is not None:
        analysis = dataclasses.replace(analysis, power=args.power)
    if getattr(args, "collar", None) is not None:
        analysis = dataclasses.replace(analysis, collar=args.collar)

    output = config.output
    if args.timings:
        output = dataclasses.replace(output, report_timings=True)

    return dataclasses.replace(
        config,
        analysis=analysis,
        output=output,
        log_level=(args.log_level or config.log_level).upper(),
        workers=getattr(args, "workers", None) or config.workers,
    ).validate()


def cmd_analyze(args, config: AppConfig, builder: ReportBuilder) -> int:
    s = parse_substitution(_read(args.input))
    basis = parse_basis(_read(args.basis)) if args.basis else None
    result = compute_cohomology(s, config, basis=basis, drop=args.drop)

    if args.json:
        sys.stdout.write(builder.render_json(builder.build(result)))
    else:
        sys.stdout.write(builder.render_text(result))
    if args.dot:
        builder.write_dot(result, args.dot)
    return EXIT_OK


def cmd_check(args, config: AppConfig, builder: ReportBuilder) -> int:
    s = parse_substitution(_read(args.input))
    suite = invariance_suite(s, config)
    if args.json:
        sys.stdout.write(builder.render_json(builder.build_suite(suite)))
    else:
        sys.stdout.write(builder.render_check_table(suite))
    return EXIT_OK


def cmd_batch(args, config: AppConfig, builder: ReportBuilder) -> int:
    blocks = split_batch(_read(args.input))
    runner = BatchRunner(config, builder)
    results = asyncio.run(runner.run(blocks))
    sys.stdout.write(builder.render_json([r.report for r in results]))
    return EXIT_OK


COMMANDS = {
    "analyze": cmd_analyze,
    "check": cmd_check,
    "batch": cmd_batch,
}


def main(argv: Optional[List[str]] = None) -> int:
    """Main application entry point"""
    args = build_parser().parse_args(argv)

    try:
        config = _load_config(args)
    except FileNotFoundError as e:
        logging.basicConfig(level=logging.WARNING)
        logger.error(str(e))
        return EXIT_IO
    except TilecohError as e:
        print(f"tilecoh: {e}", file=sys.stderr)
        return e.exit_code

    # Setup logging
    logging.basicConfig(
        level=getattr(logging, config.log_level, logging.WARNING),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        stream=sys.stderr,
    )
    builder = ReportBuilder(config.output)

    try:
        return COMMANDS[args.command](args, config, builder)
    except TilecohError as e:
        logger.info(f"{args.command} stopped in stage {e.stage or e.kind}")
        if getattr(args, "json", False) and args.command == "analyze":
            sys.stdout.write(builder.render_json(builder.build_error(e)))
        print(f"tilecoh: {e.kind}: {e}", file=sys.stderr)
        return e.exit_code
    except OSError as e:
        print(f"tilecoh: {e}", file=sys.stderr)
        return EXIT_IO
    except Exception as e:
        logger.exception(f"Unexpected failure: {e}")
        return TilecohError.exit_code


def run():
    """Entry point for the application"""
    sys.exit(main())


if __name__ == "__main__":
    run()
