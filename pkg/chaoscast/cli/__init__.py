"""
chaoscast/cli/__init__.py

Combines all subcommands into a single argument parser for main.py.
"""
import argparse

from chaoscast import __version__
from chaoscast.cli.commands import emulate, generate, metrics, perturb, report, run, tune
from chaoscast.cli.context import common_options

COMMANDS = [generate, tune, run, report, perturb, emulate, metrics]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chaoscast",
        description="Forecasting benchmark on chaotic Lorenz63 systems",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest="command", required=True)
    parent = common_options()
    for command in COMMANDS:
        command.register(subparsers, parent)
    return parser
