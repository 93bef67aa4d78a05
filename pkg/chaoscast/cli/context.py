"""
chaoscast/cli/context.py

Shared state of one command-line invocation: the resolved manifest, the
thread limiter and the services built on them.
"""
import argparse
from dataclasses import dataclass
from pathlib import Path
from typing import List

import anyio

from chaoscast.forecasters import METHOD_NAMES
from chaoscast.schemas.manifest import RunManifest
from chaoscast.services.bench import BenchService
from chaoscast.services.datasets import DatasetService
from chaoscast.services.reporting import ReportService
from chaoscast.services.tuning import TuningService


@dataclass
class CommandContext:
    """Services shared by the subcommands of one invocation."""
    manifest: RunManifest
    limiter: anyio.CapacityLimiter
    datasets: DatasetService
    bench: BenchService
    tuning: TuningService
    reports: ReportService


def build_context(manifest: RunManifest) -> CommandContext:
    """Creates the services of one run; must be called inside the event loop."""
    limiter = anyio.CapacityLimiter(manifest.jobs)
    datasets = DatasetService(manifest.data_root, manifest)
    bench = BenchService(datasets, manifest, manifest.results_root, limiter)
    return CommandContext(
        manifest=manifest,
        limiter=limiter,
        datasets=datasets,
        bench=bench,
        tuning=TuningService(bench, manifest.results_root, limiter),
        reports=ReportService(manifest.results_root),
    )


def common_options() -> argparse.ArgumentParser:
    """Options accepted by every subcommand; values override the manifest."""
    parser = argparse.ArgumentParser(add_help=False)
    parser.add_argument("--manifest", type=Path, help="TOML run manifest")
    parser.add_argument("--data", dest="data_root", type=Path, help="Root of the instance tree")
    parser.add_argument("--results", dest="results_root", type=Path, help="Root of the result files")
    parser.add_argument("--seed", dest="master_seed", type=int, help="Master seed")
    parser.add_argument("--jobs", type=int, help="Maximum number of worker threads")
    parser.add_argument("--system", dest="systems", action="append", help="Restrict to a system (repeatable)")
    parser.add_argument("--scheme", dest="schemes", action="append", help="Restrict to a scheme (repeatable)")
    parser.add_argument("--log-level", help="Logging level, e.g. DEBUG")
    return parser


def selected_methods(args: argparse.Namespace, manifest: RunManifest) -> List[str]:
    """Methods named on the command line, else those of the manifest, else every method."""
    return list(getattr(args, "methods", None) or manifest.methods or METHOD_NAMES)
