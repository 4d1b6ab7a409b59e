import argparse
import asyncio
import math
import sys
from typing import Any, Dict, List, Optional

from src.logger.logger import Logger
from src.qubit_channels.channel_spec import read_spec
from src.qubit_channels.errors import QubitChannelsError
from src.qubit_channels.reports import (
    Report,
    analyze_report,
    complement_report,
    compose_report,
    render,
    write_output,
)
from src.qubit_channels.selftest import CheckResult, run_selftest
from src.qubit_channels.settings import Settings, load_settings
from src.qubit_channels.sweep import COLUMNS, read_sweep_config, run_sweep, verdict_counts, write_sweep

logger = Logger(__name__)

EXIT_OK: int = 0
EXIT_INTERNAL: int = 1
EXIT_VALIDATION: int = 2
EXIT_SELFTEST: int = 3


@Logger.log_execution()
async def analyze(spec_path: str, settings: Settings) -> Report:
    """
    Analyzes a single channel spec.

    :param spec_path: Path to the JSON channel spec.
    :param settings: Effective settings.
    :return: The analysis report.
    """
    spec = await read_spec(spec_path)
    logger.info("Analyzing channel", kind=spec.kind, path=spec_path)
    return analyze_report(spec, settings)


@Logger.log_execution()
async def compose(first_path: str, second_path: str, settings: Settings) -> Report:
    """
    Composes two channels, the first spec applied first.

    :param first_path: Spec of the channel applied first.
    :param second_path: Spec of the channel applied second.
    :param settings: Effective settings.
    :return: The composition report.
    """
    first, second = await asyncio.gather(read_spec(first_path), read_spec(second_path))
    logger.info("Composing channels", first=first.kind, second=second.kind)
    return compose_report(first, second, settings)


@Logger.log_execution()
async def complement(spec_path: str, settings: Settings) -> Report:
    """
    Reports the (weak) complementary channel of a spec.

    :param spec_path: Path to the JSON channel spec.
    :param settings: Effective settings.
    :return: The complementary-channel report.
    """
    spec = await read_spec(spec_path)
    logger.info("Building complementary channel", kind=spec.kind, path=spec_path)
    return complement_report(spec, settings)


@Logger.log_execution()
async def sweep(config_path: str, settings: Settings, output_path: Optional[str]) -> str:
    """
    Runs a degradability sweep and writes the CSV.

    :param config_path: Path to the JSON grid config.
    :param settings: Effective settings; workers come from here.
    :param output_path: CSV destination, stdout when omitted.
    :return: The CSV text.
    """
    config = await read_sweep_config(config_path, settings)
    frame = await run_sweep(config, settings.sweep_workers)
    logger.info("Verdict counts", **verdict_counts(frame))
    return await write_sweep(frame, output_path)


def selftest_report(results: List[CheckResult]) -> Report:
    """
    Selftest results as a report.

    :param results: Check results in run order.
    :return: Report with the failed check names and every residual.
    """
    def check_entry(result: CheckResult) -> Dict[str, Any]:
        return {
            "name": result.name,
            "passed": result.passed,
            "residual": {
                "value": result.residual if math.isfinite(result.residual) else None,
                "tolerance": result.tolerance,
            },
            "detail": result.detail,
        }

    return {
        "command": "selftest",
        "passed": all(r.passed for r in results),
        "failed": [r.name for r in results if not r.passed],
        "checks": [check_entry(r) for r in results],
    }


def build_parser() -> argparse.ArgumentParser:
    """
    Builds the argument parser with one subcommand per operation.

    :return: The parser.
    """
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output", type=str, default=None, help="Write the result to this file instead of stdout")
    common.add_argument(
        "--format", dest="output_format", choices=["json", "text"], default="json", help="Report format"
    )
    common.add_argument("--seed", type=int, default=None, help="RNG seed (overrides QC_SEED)")
    common.add_argument("--tolerance", type=float, default=None, help="Residual gate (overrides QC_TOLERANCE)")

    parser = argparse.ArgumentParser(
        description="Grassmann characteristic-function toolkit for qubit channels"
    )
    subparsers = parser.add_subparsers(dest="command", help="Available commands")

    # Analyze Command
    parser_analyze = subparsers.add_parser("analyze", parents=[common], help="Analyze a channel spec")
    parser_analyze.add_argument("spec", type=str, help="Path to the JSON channel spec")

    # Compose Command
    parser_compose = subparsers.add_parser(
        "compose", parents=[common], help="Compose two channels (first spec applied first)"
    )
    parser_compose.add_argument("first", type=str, help="Spec of the channel applied first")
    parser_compose.add_argument("second", type=str, help="Spec of the channel applied second")

    # Complement Command
    parser_complement = subparsers.add_parser(
        "complement", parents=[common], help="Report the (weak) complementary channel"
    )
    parser_complement.add_argument("spec", type=str, help="Path to the JSON channel spec")

    # Sweep Command
    parser_sweep = subparsers.add_parser(
        "sweep",
        parents=[common],
        help="Degradability sweep over canonical parameters",
        description=f"Writes a CSV with columns {', '.join(COLUMNS)}; floats carry 17 significant digits.",
    )
    parser_sweep.add_argument("config", type=str, help="Path to the JSON grid config")
    parser_sweep.add_argument("--workers", type=int, default=None, help="Process pool size (overrides QC_SWEEP_WORKERS)")

    # Selftest Command
    subparsers.add_parser("selftest", parents=[common], help="Run the convention anchors and cross-checks")

    return parser


async def main(argv: Optional[List[str]] = None) -> int:
    """
    Parses command line arguments and executes the corresponding command.

    :param argv: Arguments, sys.argv when omitted.
    :return: Process exit code.
    """
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help()
        return EXIT_VALIDATION

    try:
        settings = load_settings().override(
            tolerance=args.tolerance,
            seed=args.seed,
            sweep_workers=getattr(args, "workers", None),
        )
        Logger.set_all_levels(settings.logging_level)

        if args.command == "analyze":
            report = await analyze(args.spec, settings)
        elif args.command == "compose":
            report = await compose(args.first, args.second, settings)
        elif args.command == "complement":
            report = await complement(args.spec, settings)
        elif args.command == "sweep":
            text = await sweep(args.config, settings, args.output)
            if args.output is None:
                await write_output(text)
            return EXIT_OK
        else:
            results = await asyncio.to_thread(run_selftest, settings.seed)
            report = selftest_report(results)
            await write_output(render(report, args.output_format), args.output)
            return EXIT_OK if report["passed"] else EXIT_SELFTEST

        await write_output(render(report, args.output_format), args.output)
        return EXIT_OK
    except QubitChannelsError as e:
        logger.error(f"{type(e).__name__}: {e.message}", **e.context())
        return e.exit_code
    except Exception as e:
        logger.exception(f"Unexpected error: {e}")
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(asyncio.run(main()))
