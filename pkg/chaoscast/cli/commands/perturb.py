"""
chaoscast/cli/commands/perturb.py

``chaoscast perturb``: CME caused by perturbing the initial condition or the
parameters of the standard Lorenz63 system.
"""
import argparse
import json
import logging
from pathlib import Path
from typing import List

import aiofiles
import anyio
import pandas as pd

from chaoscast.cli.context import CommandContext
from chaoscast.services.datasets import CSV_FLOAT_FORMAT
from chaoscast.services.studies import perturbation_study
from chaoscast.systems.seeding import derive_rng

logger = logging.getLogger(__name__)

DEFAULT_RADII = "1e-8,1e-6,1e-4,1e-2,1,1e2"


def parse_radii(text: str) -> List[float]:
    try:
        radii = [float(value) for value in text.split(",") if value.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid radius list '{text}'") from None
    if not radii or any(r < 0 for r in radii):
        raise argparse.ArgumentTypeError("radii must be non-negative numbers")
    return radii


def register(subparsers, parent: argparse.ArgumentParser) -> None:
    parser = subparsers.add_parser("perturb", parents=[parent], help="Perturbation sensitivity study")
    parser.add_argument("--radii", type=parse_radii, default=parse_radii(DEFAULT_RADII),
                        help=f"Comma-separated perturbation radii (default {DEFAULT_RADII})")
    parser.add_argument("--reps", type=int, default=100, help="Trajectories per radius")
    parser.add_argument("--output", type=Path, help="CSV file (default <results>/perturbation.csv)")
    parser.set_defaults(handler=handle)


async def handle(args: argparse.Namespace, context: CommandContext) -> int:
    manifest = context.manifest
    output = args.output or manifest.results_root / "perturbation.csv"
    rng = derive_rng(manifest.master_seed, "perturb")
    table = await anyio.to_thread.run_sync(
        lambda: perturbation_study(args.radii, args.reps, rng, horizon=manifest.test_time,
                                   base_dt=manifest.base_dt, solver_dt=manifest.solver_dt),
        limiter=context.limiter,
    )

    output.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame([row.model_dump() for row in table.rows])
    async with aiofiles.open(output, "w", newline="\n") as f:
        await f.write(frame.to_csv(index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n"))
    summary = output.with_suffix(".json")
    async with aiofiles.open(summary, "w", newline="\n") as f:
        await f.write(json.dumps({
            "reps": table.reps,
            "rounded_initial_condition_cme": table.rounded_initial_condition_cme,
        }, indent=2) + "\n")
    logger.info(f"Wrote perturbation table to {output}")
    return 0
