"""
chaoscast/services/bench.py

Evaluation of methods on generated instances, plus the statistics computed
from the resulting scores: aggregation with Student-t confidence intervals,
ranks, paired one-sided t-tests and relative differences between variants.
"""
import json
import logging
import math
import time
from collections import defaultdict
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import aiofiles
import anyio
import numpy as np
import pandas as pd
from scipy import stats

from chaoscast import forecasters
from chaoscast.metrics import score
from chaoscast.schemas.manifest import RunManifest
from chaoscast.schemas.methods import MethodConfig
from chaoscast.schemas.metrics import AlignedPair, MetricConfig
from chaoscast.schemas.results import SCORE_COLUMNS, AggregateRow, BenchError, ScoreRecord, Split, TTestResult
from chaoscast.schemas.series import ForecastProblem
from chaoscast.schemas.systems import GeneratedInstance
from chaoscast.services.datasets import CSV_FLOAT_FORMAT, SPLITS, DatasetService
from chaoscast.systems.seeding import derive_rng

logger = logging.getLogger(__name__)

CONFIDENCE = 0.95
# propagator families compared by relative differences
VARIANT_FAMILIES = ("Lin", "RaFe", "Esn", "PgGp", "PgLl")


def confidence_half_width(values: Sequence[float], confidence: float = CONFIDENCE) -> Optional[float]:
    """Half-width of the Student-t interval of the mean; None for fewer than two values."""
    values = np.asarray(values, dtype=float)
    n = values.shape[0]
    if n < 2:
        return None
    sd = float(np.std(values, ddof=1))
    return float(stats.t.ppf(0.5 + confidence / 2.0, n - 1) * sd / math.sqrt(n))


def aggregate(records: Iterable[ScoreRecord]) -> List[AggregateRow]:
    """
    Per (method, system, scheme) means over repetitions, with 95% CI
    half-widths and the rank of the mean CME within (system, scheme).
    Equal means rank by method name.
    """
    groups: Dict[Tuple[str, str, str], List[ScoreRecord]] = defaultdict(list)
    for record in records:
        groups[(record.method, record.system, record.scheme)].append(record)

    summaries = []
    for (method, system, scheme), group in groups.items():
        cmes = [r.cme for r in group]
        smapes = [r.smape for r in group if r.smape is not None]
        summaries.append({
            "method": method, "system": system, "scheme": scheme, "n": len(group),
            "mean_cme": math.fsum(cmes) / len(cmes),
            "ci_half_width": confidence_half_width(cmes),
            "mean_smape": math.fsum(smapes) / len(smapes) if smapes else None,
            "mean_valid_time": math.fsum(r.valid_time for r in group) / len(group),
            "failed": sum(1 for r in group if r.failed),
        })

    rows: List[AggregateRow] = []
    by_dataset: Dict[Tuple[str, str], List[dict]] = defaultdict(list)
    for summary in summaries:
        by_dataset[(summary["system"], summary["scheme"])].append(summary)
    for key in sorted(by_dataset):
        ordered = sorted(by_dataset[key], key=lambda s: (s["mean_cme"], s["method"]))
        rows.extend(AggregateRow(rank=position, **summary) for position, summary in enumerate(ordered, start=1))
    return rows


def paired_t_test(diffs: Sequence[float]) -> TTestResult:
    """
    One-sided paired t-test of H0: mean difference ≥ 0, where each
    difference is CME(M1) − CME(M2) on one repetition. Small p-values mean
    M1 is significantly better.

    If all differences are identical the test is degenerate: p = 1 for a
    non-negative mean, otherwise the smallest positive float.

    Raises:
        BenchError: For fewer than two differences
    """
    diffs = np.asarray(diffs, dtype=float)
    n = diffs.shape[0]
    if n < 2:
        raise BenchError("a paired t-test needs at least two repetitions")
    if np.all(diffs == diffs[0]):
        p_value = 1.0 if diffs[0] >= 0 else float(np.finfo(float).tiny)
        return TTestResult(p_value=p_value, statistic=None, n=n, degenerate=True)
    result = stats.ttest_1samp(diffs, 0.0, alternative="less")
    return TTestResult(p_value=float(result.pvalue), statistic=float(result.statistic), n=n)


def ttest_matrix(records: Iterable[ScoreRecord], system: str, scheme: str) -> pd.DataFrame:
    """
    p-values of the paired t-tests for every ordered method pair of one
    dataset (rows M1, columns M2); the diagonal is empty. Pairs share the
    repetitions present for both methods.
    """
    by_method: Dict[str, Dict[int, float]] = defaultdict(dict)
    for record in records:
        if record.system == system and record.scheme == scheme:
            by_method[record.method][record.rep] = record.cme
    methods = sorted(by_method)
    matrix = pd.DataFrame(np.nan, index=pd.Index(methods, name="M1"), columns=methods)
    for first in methods:
        for second in methods:
            if first == second:
                continue
            common = sorted(set(by_method[first]) & set(by_method[second]))
            if len(common) < 2:
                continue
            diffs = [by_method[first][rep] - by_method[second][rep] for rep in common]
            matrix.loc[first, second] = paired_t_test(diffs).p_value
    return matrix


def relative_differences(rows: Iterable[AggregateRow]) -> List[dict]:
    """
    Relative mean-CME change (base − variant) / base when adding the
    timestep input (X → XT) or switching the target (S → D), for every
    propagator family present. Positive values mean the variant is better.
    """
    means = {(r.method, r.system, r.scheme): r.mean_cme for r in rows}
    out = []
    for (method, system, scheme), base in sorted(means.items()):
        for family in VARIANT_FAMILIES:
            if not method.startswith(family):
                continue
            variant = method[len(family):]
            comparisons = []
            if variant in ("S", "D"):
                comparisons.append(("timestep", f"{method}T"))
            if variant in ("S", "ST"):
                comparisons.append(("target", f"{family}D{variant[1:]}"))
            for change, other in comparisons:
                if (other, system, scheme) not in means or base == 0:
                    continue
                out.append({
                    "system": system, "scheme": scheme, "change": change,
                    "base": method, "variant": other,
                    "relative_difference": (base - means[(other, system, scheme)]) / base,
                })
    return out


def evaluate_instance(config: MethodConfig, instance: GeneratedInstance, rng: np.random.Generator,
                      metric_cfg: MetricConfig = MetricConfig()) -> Tuple[dict, float, float]:
    """
    Fits on the instance's training data, forecasts its test times from
    u(T) and scores the forecast.

    Returns:
        Tuple[dict, float, float]: Metric values, fit seconds, predict seconds
    """
    started = time.perf_counter()
    fitted = forecasters.fit(config, instance.train, rng)
    fit_seconds = time.perf_counter() - started

    problem = ForecastProblem(
        train=instance.train,
        u_T=instance.u_T,
        start_time=instance.meta.T,
        target_times=instance.truth.times,
    )
    started = time.perf_counter()
    prediction = forecasters.predict(fitted, problem)
    predict_seconds = time.perf_counter() - started

    pair = AlignedPair(times=instance.truth.times, truth=instance.truth.states,
                       prediction=prediction.states, start_time=instance.meta.T)
    return score(pair, metric_cfg).model_dump(), fit_seconds, predict_seconds


class BenchService:
    """Service class evaluating methods on the instance tree and writing score files."""

    def __init__(self, datasets: DatasetService, manifest: RunManifest, results_root: Path,
                 limiter: Optional[anyio.CapacityLimiter] = None):
        self.datasets = datasets
        self.manifest = manifest
        self.results_root = Path(results_root)
        self.limiter = limiter
        self.metric_cfg = MetricConfig(kappa=manifest.kappa)

    def fit_rng(self, system: str, scheme: str, split: Split, rep: int) -> np.random.Generator:
        return derive_rng(self.manifest.master_seed, "fit", self.manifest.system_index(system),
                          self.manifest.scheme_index(scheme), SPLITS.index(Split(split)), rep)

    def score_repetition(self, config: MethodConfig, instance: GeneratedInstance, system: str,
                         scheme: str, split: Split, rep: int) -> ScoreRecord:
        """Scores one repetition; any failure becomes a CME 1 record flagged as failed."""
        rng = self.fit_rng(system, scheme, split, rep)
        common = {"method": config.method, "system": system, "scheme": scheme, "split": split, "rep": rep}
        try:
            values, fit_seconds, predict_seconds = evaluate_instance(config, instance, rng, self.metric_cfg)
        except Exception as e:
            logger.warning(f"{config.method} failed on {system}/{scheme}/{Split(split).value}/rep{rep:04d}: {e}",
                           exc_info=True)
            return ScoreRecord(**common, cme=1.0, smape=None, valid_time=0.0, failed=True, error=str(e))
        logger.debug(f"{config.method} {system}/{scheme} rep {rep}: cme={values['cme']:.6g}")
        return ScoreRecord(**common, cme=values["cme"], smape=values["smape"], valid_time=values["valid_time"],
                           fit_seconds=fit_seconds, predict_seconds=predict_seconds)

    async def evaluate(self, config: MethodConfig, system: str, scheme: str,
                       split: Split = Split.test,
                       instances: Optional[List[Tuple[int, GeneratedInstance]]] = None) -> List[ScoreRecord]:
        """
        Evaluates one method configuration on every repetition of a dataset split.

        Returns:
            List[ScoreRecord]: One record per repetition, in repetition order
        """
        if instances is None:
            instances = await self.datasets.load_split(system, scheme, split)
        records: List[Optional[ScoreRecord]] = [None] * len(instances)

        async def run_one(slot: int, rep: int, instance: GeneratedInstance) -> None:
            records[slot] = await anyio.to_thread.run_sync(
                self.score_repetition, config, instance, system, scheme, split, rep, limiter=self.limiter
            )

        async with anyio.create_task_group() as tg:
            for slot, (rep, instance) in enumerate(instances):
                tg.start_soon(run_one, slot, rep, instance)
        return records

    async def run(self, tasks: Sequence[Tuple[MethodConfig, str, str]]) -> List[ScoreRecord]:
        """
        Evaluates every (config, system, scheme) task on the test split and
        writes the score files. Records keep task order, then repetition order.
        """
        cache: Dict[Tuple[str, str], List[Tuple[int, GeneratedInstance]]] = {}
        records: List[ScoreRecord] = []
        for config, system, scheme in tasks:
            if (system, scheme) not in cache:
                cache[(system, scheme)] = await self.datasets.load_split(system, scheme, Split.test)
            logger.info(f"Evaluating {config.method} on {system}/{scheme}")
            records.extend(await self.evaluate(config, system, scheme, Split.test, cache[(system, scheme)]))
        await self.write_scores(records)
        return records

    async def write_scores(self, records: List[ScoreRecord]) -> Path:
        """Writes scores.csv and, if any repetition failed, failures.jsonl."""
        self.results_root.mkdir(parents=True, exist_ok=True)
        frame = pd.DataFrame([r.to_row() for r in records], columns=SCORE_COLUMNS)
        path = self.results_root / "scores.csv"
        async with aiofiles.open(path, "w", newline="\n") as f:
            await f.write(frame.to_csv(index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n"))

        failed = [r for r in records if r.failed]
        failures_path = self.results_root / "failures.jsonl"
        if failed:
            async with aiofiles.open(failures_path, "w", newline="\n") as f:
                for record in failed:
                    await f.write(json.dumps({**record.to_row(), "error": record.error}) + "\n")
        elif failures_path.exists():
            failures_path.unlink()
        logger.info(f"Wrote {len(records)} scores to {path} ({len(failed)} failed)")
        return path

    async def read_scores(self) -> List[ScoreRecord]:
        """
        Reads scores.csv back.

        Raises:
            BenchError: If no score file exists
        """
        path = self.results_root / "scores.csv"
        if not path.exists():
            raise BenchError(f"{path} does not exist; run the benchmark first")
        frame = pd.read_csv(path)
        return [ScoreRecord.from_row(row) for row in frame.to_dict(orient="records")]
