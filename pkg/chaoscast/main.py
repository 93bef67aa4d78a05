"""
main.py

Command-line entry point. Resolves the run manifest (settings, then the
optional TOML manifest, then command-line flags), configures logging,
builds the services and runs the selected subcommand on the event loop.

Exit codes: 0 success, 1 failed subtask, 2 usage error.
"""
import argparse
import logging
import sys
from typing import Any, Dict, List, Optional

import anyio
import toml
from pydantic import ValidationError

from chaoscast.cli import build_parser
from chaoscast.cli.context import build_context
from chaoscast.core.config import load_toml_file, settings
from chaoscast.core.logging import configure_logging
from chaoscast.schemas.manifest import ManifestError, RunManifest
from chaoscast.schemas.methods import ForecastError, UnknownMethodError
from chaoscast.schemas.results import BenchError
from chaoscast.schemas.systems import DatasetError, DatasetExistsError, GenerationError
from chaoscast.schemas.tuning import TuningError

if sys.version_info < (3, 11):
    from exceptiongroup import BaseExceptionGroup

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2

USAGE_ERRORS = (DatasetExistsError, UnknownMethodError, ManifestError, ValidationError, toml.TomlDecodeError)
FAILURES = (ForecastError, GenerationError, DatasetError, TuningError, BenchError, OSError)


def resolve_manifest(args: argparse.Namespace) -> RunManifest:
    """
    Manifest values in increasing precedence: settings, TOML manifest, flags.

    Raises:
        ManifestError: If the manifest file is missing
        ValidationError: If a value is invalid
    """
    values: Dict[str, Any] = {
        "master_seed": settings.MASTER_SEED,
        "data_root": settings.DATA,
        "results_root": settings.RESULTS,
        "jobs": settings.JOBS,
    }
    if args.manifest is not None:
        if not args.manifest.exists():
            raise ManifestError(f"manifest {args.manifest} does not exist")
        values.update(load_toml_file(args.manifest))
    for name in RunManifest.model_fields:
        flag = getattr(args, name, None)
        if flag is not None:
            values[name] = flag
    return RunManifest(**values)


def _leaf(error: BaseException) -> BaseException:
    while isinstance(error, BaseExceptionGroup) and error.exceptions:
        error = error.exceptions[0]
    return error


async def dispatch(args: argparse.Namespace, manifest: RunManifest) -> int:
    context = build_context(manifest)
    return await args.handler(args, context)


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_USAGE

    configure_logging(args.log_level or settings.LOG_LEVEL, settings.LOG_FILE)
    try:
        manifest = resolve_manifest(args)
        logger.debug(f"Resolved manifest: {manifest.model_dump_json()}")
        return anyio.run(dispatch, args, manifest, backend=settings.ASYNC_BACKEND)
    except Exception as e:
        error = _leaf(e)
        if isinstance(error, USAGE_ERRORS):
            logger.error(f"{args.command}: {error}")
            return EXIT_USAGE
        if isinstance(error, FAILURES):
            logger.error(f"{args.command} failed: {error}", exc_info=True)
            return EXIT_FAILURE
        logger.exception(f"{args.command} failed unexpectedly")
        return EXIT_FAILURE


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
