"""
chaoscast/cli/commands/emulate.py

``chaoscast emulate``: error bands of the degree-6 polynomial propagator
against the exact solver from the same rounded state.
"""
import argparse
import logging
from pathlib import Path

import aiofiles
import anyio
import pandas as pd

from chaoscast.cli.context import CommandContext
from chaoscast.services.datasets import CSV_FLOAT_FORMAT
from chaoscast.services.studies import emulator_study
from chaoscast.systems.seeding import derive_rng

logger = logging.getLogger(__name__)


def register(subparsers, parent: argparse.ArgumentParser) -> None:
    parser = subparsers.add_parser("emulate", parents=[parent], help="Polynomial emulator study")
    parser.add_argument("--reps", type=int, default=10, help="Number of trajectories")
    parser.add_argument("--output", type=Path, help="CSV file (default <results>/emulator.csv)")
    parser.set_defaults(handler=handle)


async def handle(args: argparse.Namespace, context: CommandContext) -> int:
    manifest = context.manifest
    output = args.output or manifest.results_root / "emulator.csv"
    rng = derive_rng(manifest.master_seed, "emulate")
    rows = await anyio.to_thread.run_sync(
        lambda: emulator_study(args.reps, rng, train_time=manifest.train_time,
                               horizon=manifest.test_time, base_dt=manifest.base_dt),
        limiter=context.limiter,
    )

    output.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame([row.model_dump() for row in rows])
    async with aiofiles.open(output, "w", newline="\n") as f:
        await f.write(frame.to_csv(index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n"))
    logger.info(f"Wrote emulator error bands for {args.reps} trajectories to {output}")
    return 0
