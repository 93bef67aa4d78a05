"""
chaoscast/cli/commands/metrics.py

``chaoscast metrics``: scores an externally produced prediction CSV against
a truth CSV and prints the metrics as JSON.
"""
import argparse
import json
from pathlib import Path
from typing import Optional

import pandas as pd

from chaoscast.cli.context import CommandContext
from chaoscast.metrics import score
from chaoscast.schemas.manifest import ManifestError
from chaoscast.schemas.metrics import AlignedPair, MetricConfig

TIME_DECIMALS = 8


def register(subparsers, parent: argparse.ArgumentParser) -> None:
    parser = subparsers.add_parser("metrics", parents=[parent], help="Score a prediction CSV against a truth CSV")
    parser.add_argument("--truth", type=Path, required=True, help="CSV with columns time,u1,u2,u3")
    parser.add_argument("--prediction", type=Path, required=True, help="CSV with columns time,u1,u2,u3")
    parser.add_argument("--start-time", dest="start_time", type=float,
                        help="Time T of the last known state (default: one grid step before the first truth time)")
    parser.add_argument("--kappa", type=float, help="Valid-time threshold")
    parser.set_defaults(handler=handle)


def align(truth: pd.DataFrame, prediction: pd.DataFrame, start_time: Optional[float] = None) -> AlignedPair:
    """
    Matches prediction rows to truth rows by time rounded to eight decimals.
    Truth times without a prediction, and empty cells, count as missing.

    Raises:
        ManifestError: If the start time cannot be inferred
    """
    columns = [c for c in truth.columns if c != "time"]
    if "time" not in truth.columns or "time" not in prediction.columns or not columns:
        raise ManifestError("both CSV files need a 'time' column and state columns")
    if any(c not in prediction.columns for c in columns):
        raise ManifestError(f"prediction CSV must have the columns {columns}")
    truth = truth.assign(key=truth["time"].round(TIME_DECIMALS))
    prediction = (
        prediction.assign(key=prediction["time"].round(TIME_DECIMALS))
        .drop_duplicates("key")
        .drop(columns="time")
    )
    merged = truth.merge(prediction, on="key", how="left", suffixes=("", "_pred"))
    predicted = merged[[f"{c}_pred" for c in columns]].apply(pd.to_numeric, errors="coerce")

    times = merged["time"].to_numpy(dtype=float)
    if start_time is None:
        if times.shape[0] < 2:
            raise ManifestError("--start-time is required for a single truth row")
        start_time = float(times[0] - (times[1] - times[0]))
    return AlignedPair(
        times=times,
        truth=merged[columns].to_numpy(dtype=float),
        prediction=predicted.to_numpy(dtype=float),
        start_time=start_time,
    )


async def handle(args: argparse.Namespace, context: CommandContext) -> int:
    pair = align(pd.read_csv(args.truth), pd.read_csv(args.prediction), args.start_time)
    kappa = args.kappa if args.kappa is not None else context.manifest.kappa
    scores = score(pair, MetricConfig(kappa=kappa))
    print(json.dumps({"cme": scores.cme, "smape": scores.smape, "valid_time": scores.valid_time}))
    return 0
