"""
chaoscast/cli/commands/run.py

``chaoscast run``: evaluates the tuned methods on the test split and
writes ``scores.csv``.
"""
import argparse
import logging

from chaoscast.cli.context import CommandContext, selected_methods
from chaoscast.tuner import default_grid

logger = logging.getLogger(__name__)


def register(subparsers, parent: argparse.ArgumentParser) -> None:
    parser = subparsers.add_parser("run", parents=[parent], help="Evaluate tuned methods on test data")
    parser.add_argument("--method", dest="methods", action="append", help="Method to evaluate (repeatable)")
    parser.set_defaults(handler=handle)


async def handle(args: argparse.Namespace, context: CommandContext) -> int:
    manifest = context.manifest
    methods = selected_methods(args, manifest)
    for method in methods:
        default_grid(method)

    tasks = []
    for system in manifest.systems:
        for scheme in manifest.schemes:
            for method in methods:
                tasks.append((await context.tuning.load_tuned(method, system, scheme), system, scheme))

    records = await context.bench.run(tasks)
    failed = sum(1 for r in records if r.failed)
    if failed:
        logger.error(f"{failed} of {len(records)} repetitions failed; see failures.jsonl")
    return 1 if failed else 0
