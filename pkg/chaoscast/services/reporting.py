"""
chaoscast/services/reporting.py

Builds the report tables from ``scores.csv``: aggregate means with
confidence intervals, ranks, paired t-test matrices, relative differences
of the propagator variants and plot-ready CME data.
"""
import json
import logging
from pathlib import Path
from typing import List

import aiofiles
import pandas as pd

from chaoscast import __version__
from chaoscast.schemas.results import AggregateRow, ScoreRecord
from chaoscast.services.bench import CONFIDENCE, aggregate, relative_differences, ttest_matrix
from chaoscast.services.datasets import CSV_FLOAT_FORMAT

logger = logging.getLogger(__name__)


class ReportService:
    """Service class writing the report files into a results directory."""

    def __init__(self, results_root: Path):
        self.results_root = Path(results_root)
        self.report_dir = self.results_root / "report"

    async def _write_frame(self, name: str, frame: pd.DataFrame, index: bool = False) -> Path:
        path = self.report_dir / name
        async with aiofiles.open(path, "w", newline="\n") as f:
            await f.write(frame.to_csv(index=index, float_format=CSV_FLOAT_FORMAT, lineterminator="\n"))
        logger.debug(f"Wrote {path}")
        return path

    async def write_report(self, records: List[ScoreRecord]) -> List[Path]:
        """
        Writes every report file for the given scores.

        Returns:
            List[Path]: Files written, in writing order
        """
        self.report_dir.mkdir(parents=True, exist_ok=True)
        rows: List[AggregateRow] = aggregate(records)
        written = []

        summary = pd.DataFrame([r.model_dump() for r in rows], columns=list(AggregateRow.model_fields))
        written.append(await self._write_frame("aggregate.csv", summary))
        written.append(await self._write_frame("ranks.csv", summary[["system", "scheme", "rank", "method", "mean_cme"]]))

        plot = summary[["system", "scheme", "method", "mean_cme", "ci_half_width"]].copy()
        half_width = plot["ci_half_width"].fillna(0.0)
        plot["lower"] = plot["mean_cme"] - half_width
        plot["upper"] = plot["mean_cme"] + half_width
        written.append(await self._write_frame("plot_cme.csv", plot))

        datasets = sorted({(r.system, r.scheme) for r in rows})
        for system, scheme in datasets:
            matrix = ttest_matrix(records, system, scheme)
            written.append(await self._write_frame(f"ttest_{system}_{scheme}.csv", matrix, index=True))

        differences = pd.DataFrame(
            relative_differences(rows),
            columns=["system", "scheme", "change", "base", "variant", "relative_difference"],
        )
        written.append(await self._write_frame("relative_differences.csv", differences))

        meta = {
            "version": __version__,
            "interval_estimator": "student-t",
            "confidence": CONFIDENCE,
            "ttest": "paired, one-sided, H0: CME(M1) >= CME(M2)",
            "smape_missing_rule": "missing predictions excluded; absent when no prediction is present",
            "failed_repetition_rule": "scored as CME 1",
            "records": len(records),
            "datasets": [f"{system}/{scheme}" for system, scheme in datasets],
        }
        meta_path = self.report_dir / "report_meta.json"
        async with aiofiles.open(meta_path, "w", newline="\n") as f:
            await f.write(json.dumps(meta, indent=2) + "\n")
        written.append(meta_path)

        logger.info(f"Wrote {len(written)} report files to {self.report_dir}")
        return written
