import argparse
import logging
import sys
from pathlib import Path

from pydantic import ValidationError

from weakjoint import __version__
from weakjoint.commands import COMMANDS
from weakjoint.commands.common import key_value
from weakjoint.config import apply_overrides
from weakjoint.errors import ConfigError, WeakJointError
from weakjoint.schemas.report import ExperimentReport, ReportVerdict
from weakjoint.services.report import emit_report, versions

LOG_FORMAT = "%(asctime)s | %(levelname)-8s | %(name)s | %(message)s"
LOG_DATEFMT = "%Y-%m-%d %H:%M:%S"

# Configure logging
logging.basicConfig(level=logging.INFO, format=LOG_FORMAT, datefmt=LOG_DATEFMT)
logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_VERDICT = 2

EXIT_CODES = {
    ReportVerdict.OK: EXIT_OK,
    ReportVerdict.INFEASIBLE: EXIT_VERDICT,
    ReportVerdict.ERROR: EXIT_ERROR,
}


def _run_options(suppress: bool) -> argparse.ArgumentParser:
    # subcommand copies use SUPPRESS so they do not overwrite values given before the subcommand
    parser = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS if suppress else None)
    parser.add_argument("--out", type=Path, help="output directory (default: <output_dir>/<command>)")
    parser.add_argument("--threads", type=int, help="worker threads (default: WEAKJOINT_THREADS or CPU count)")
    parser.add_argument("--log-level", help="DEBUG, INFO, WARNING or ERROR")
    parser.add_argument(
        "--set",
        dest="overrides",
        type=key_value,
        action="append",
        metavar="KEY=VALUE",
        help="override a setting, e.g. --set spectral_tol=1e-6 (repeatable)",
    )
    return parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="weakjoint",
        description="Numerical laboratory for joint-measurement inference through entangled pre- and postselection.",
        parents=[_run_options(suppress=False)],
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    shared = [_run_options(suppress=True)]
    for command in COMMANDS:
        command.register(subparsers, shared)
    return parser


def _validate(args: argparse.Namespace):
    raw = {k: v for k, v in vars(args).items() if k not in ("handler", "config_model") and v is not None}
    raw["overrides"] = dict(args.overrides or [])
    try:
        return args.config_model.model_validate(raw)
    except ValidationError as e:
        first = e.errors()[0]
        field = ".".join(str(part) for part in first["loc"])
        location = f"{args.command} --{field.replace('_', '-')}" if field else args.command
        raise ConfigError(first["msg"], location=location) from e


def _failure_report(command: str, config, error: Exception, verdict: ReportVerdict) -> ExperimentReport:
    results = {"error": type(error).__name__, "message": str(error)}
    for attribute in ("residual", "smallest_singular_value", "clearance", "overlap", "zeta1", "jump"):
        if hasattr(error, attribute):
            results[attribute] = getattr(error, attribute)
    return ExperimentReport(experiment=command, verdict=verdict, config=config.echo(), versions=versions(),
                            results=results)


def main(argv: list[str] | None = None) -> int:
    """Parse, validate, run one experiment and write its report.

    Returns:
        0 on success, 2 for infeasible or obstruction verdicts, 1 for any error
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # argparse exits with 2 on usage errors, which is reserved for verdicts here
        return EXIT_OK if e.code in (0, None) else EXIT_ERROR

    try:
        config = _validate(args)
        settings = apply_overrides(config.overrides)
    except ConfigError as e:
        logger.error("Invalid configuration: %s", e)
        return EXIT_ERROR

    logging.getLogger().setLevel((config.log_level or settings.log_level).upper())
    out_dir = config.out or Path(settings.output_dir) / config.command
    logger.info("Running %s (threads=%s) -> %s", config.command, config.threads or settings.threads, out_dir)

    try:
        report = args.handler(config)
        report.config = config.echo()
        report.versions = versions()
    except WeakJointError as e:
        verdict = ReportVerdict.INFEASIBLE if e.verdict else ReportVerdict.ERROR
        if e.verdict:
            logger.warning("[%s] %s verdict: %s", config.command, type(e).__name__, e)
        else:
            logger.error("[%s] %s: %s", config.command, type(e).__name__, e, exc_info=True)
        report = _failure_report(config.command, config, e, verdict)
    except (ValueError, OSError) as e:
        logger.error("[%s] failed: %s", config.command, e, exc_info=True)
        report = _failure_report(config.command, config, e, ReportVerdict.ERROR)

    try:
        emit_report([report], out_dir)
    except OSError as e:
        logger.error("Could not write the report: %s", e)
        return EXIT_ERROR

    logger.info("[%s] verdict: %s", config.command, report.verdict.value)
    return EXIT_CODES[report.verdict]


if __name__ == "__main__":
    sys.exit(main())
