"""
chaoscast/cli/commands/tune.py

``chaoscast tune``: local grid search of each selected method on the
validation split of each selected dataset.
"""
import argparse
import logging

from chaoscast.cli.context import CommandContext, selected_methods
from chaoscast.tuner import default_grid

logger = logging.getLogger(__name__)


def register(subparsers, parent: argparse.ArgumentParser) -> None:
    parser = subparsers.add_parser("tune", parents=[parent], help="Tune hyperparameters on validation data")
    parser.add_argument("--method", dest="methods", action="append", help="Method to tune (repeatable)")
    parser.add_argument("--max-evals", dest="max_evals", type=int, help="Evaluation budget per method and dataset")
    parser.set_defaults(handler=handle)


async def handle(args: argparse.Namespace, context: CommandContext) -> int:
    manifest = context.manifest
    methods = selected_methods(args, manifest)
    for method in methods:
        default_grid(method)  # unknown names fail before any work starts

    for system in manifest.systems:
        for scheme in manifest.schemes:
            for method in methods:
                await context.tuning.tune(method, system, scheme, max_evals=manifest.max_evals)
    return 0
