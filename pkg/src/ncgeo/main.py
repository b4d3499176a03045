import argparse
import asyncio
import json
import logging
import sys
from pathlib import Path

from pydantic import ValidationError

from ncgeo.api.router import UsageError, list_suites, render_text, run_suite
from ncgeo.api.schemas import OutputFormat, SuiteConfig, SuiteName
from ncgeo.api.suites import ROUTERS
from ncgeo.config import settings

logger = logging.getLogger(__name__)

EXIT_USAGE = 2

_PARAM_FLAGS = ("n", "N", "k_max", "m", "seed", "algebra")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ncgeo",
        description="Run exact verification suites for noncommutative differential calculi.",
    )
    parser.add_argument(
        "suite",
        choices=[name.value for name in SuiteName] + ["list"],
        help="suite to run, or 'list' to describe the suites",
    )
    parser.add_argument("--n", type=int, help="matrix size for M_n")
    parser.add_argument("--N", type=int, help="number of points or truncation order")
    parser.add_argument("--k-max", dest="k_max", type=int, help="top degree for graded checks")
    parser.add_argument("--m", help="Dirac entry of the two-point triple, e.g. 1/2+3/4i")
    parser.add_argument("--seed", type=int, help=f"random seed (default {settings.seed})")
    parser.add_argument("--algebra", help="matrix:n, functions:N or trunc-poly:N")
    parser.add_argument("--format", choices=[f.value for f in OutputFormat], help="report format")
    parser.add_argument("--config", type=Path, help="JSON file holding a SuiteConfig")
    parser.add_argument("--timings", action="store_true", help="add per-check wall-clock timings")
    return parser


def load_config(args: argparse.Namespace) -> SuiteConfig:
    """Merge the optional config file with the flags; flags win."""
    data: dict = {}
    if args.config is not None:
        try:
            data = json.loads(args.config.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(data, dict):
            raise UsageError(f"config {args.config} must hold a JSON object")
    data["suite"] = args.suite
    params = dict(data.get("params") or {})
    for flag in _PARAM_FLAGS:
        value = getattr(args, flag)
        if value is not None:
            params[flag] = value
    params.setdefault("seed", settings.seed)
    data["params"] = params
    if args.format is not None:
        data["format"] = args.format
    return SuiteConfig.model_validate(data)


def render(report, output: OutputFormat) -> str:
    if output is OutputFormat.TEXT:
        return render_text(report)
    return report.model_dump_json(indent=2) + "\n"


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    if args.suite == "list":
        sys.stdout.write(list_suites(ROUTERS))
        return 0

    try:
        config = load_config(args)
    except (UsageError, ValidationError) as exc:
        parser.print_usage(sys.stderr)
        sys.stderr.write(f"ncgeo: error: {exc}\n")
        return EXIT_USAGE

    explicit = "verbosity" in config.model_fields_set
    level = config.verbosity.upper() if explicit else settings.log_level
    logging.basicConfig(
        level=level,
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        stream=sys.stderr,
    )
    timings = settings.report_timings or args.timings
    try:
        report = asyncio.run(run_suite(config.suite, config.params, ROUTERS, timings=timings))
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        sys.stderr.write(f"ncgeo: error: {exc}\n")
        return EXIT_USAGE

    sys.stdout.write(render(report, config.format))
    logger.info("Suite %s finished with exit code %d", config.suite.value, report.exit_code)
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
