"""
chaoscast/cli/commands/report.py

``chaoscast report``: aggregate, rank, t-test and plot tables from ``scores.csv``.
"""
import argparse

from chaoscast.cli.context import CommandContext


def register(subparsers, parent: argparse.ArgumentParser) -> None:
    parser = subparsers.add_parser("report", parents=[parent], help="Build report tables from the scores")
    parser.set_defaults(handler=handle)


async def handle(args: argparse.Namespace, context: CommandContext) -> int:
    manifest = context.manifest
    records = [
        r for r in await context.bench.read_scores()
        if r.system in manifest.systems and r.scheme in manifest.schemes
    ]
    await context.reports.write_report(records)
    return 0
