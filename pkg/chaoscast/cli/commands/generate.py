"""
chaoscast/cli/commands/generate.py

``chaoscast generate``: writes the validation and test instances of the
selected datasets.
"""
import argparse
import logging

from chaoscast.cli.context import CommandContext

logger = logging.getLogger(__name__)


def register(subparsers, parent: argparse.ArgumentParser) -> None:
    parser = subparsers.add_parser("generate", parents=[parent], help="Generate benchmark instances")
    parser.add_argument("--force", action="store_true", help="Overwrite existing instances")
    parser.add_argument("--validation-reps", dest="validation_reps", type=int, help="Validation repetitions")
    parser.add_argument("--test-reps", dest="test_reps", type=int, help="Test repetitions")
    parser.set_defaults(handler=handle)


async def handle(args: argparse.Namespace, context: CommandContext) -> int:
    manifest = context.manifest
    failures = await context.datasets.generate(
        manifest.systems, manifest.schemes, force=args.force, limiter=context.limiter
    )
    for failure in failures:
        logger.error(f"Generation failed: {failure}")
    return 1 if failures else 0
