"""
chaoscast/services/tuning.py

Hyperparameter tuning of one method on one dataset: local grid search with
the mean validation CME as objective, and persistence of the winner and the
search trace under ``<results>/tuned/<system>/<scheme>/``.
"""
import json
import logging
import math
from pathlib import Path
from typing import List, Optional, Tuple

import aiofiles
import anyio

from chaoscast.schemas.methods import MethodConfig
from chaoscast.schemas.results import Split
from chaoscast.schemas.systems import GeneratedInstance
from chaoscast.schemas.tuning import TuneState, TuningError
from chaoscast.services.bench import BenchService
from chaoscast.tuner import default_grid, local_grid_search

logger = logging.getLogger(__name__)


class TuningService:
    """Service class for tuning methods and reading tuned configurations."""

    def __init__(self, bench: BenchService, results_root: Path,
                 limiter: Optional[anyio.CapacityLimiter] = None):
        self.bench = bench
        self.results_root = Path(results_root)
        self.limiter = limiter

    def tuned_dir(self, system: str, scheme: str) -> Path:
        return self.results_root / "tuned" / system / scheme

    def config_path(self, method: str, system: str, scheme: str) -> Path:
        return self.tuned_dir(system, scheme) / f"{method}.json"

    def trace_path(self, method: str, system: str, scheme: str) -> Path:
        return self.tuned_dir(system, scheme) / f"{method}.trace.jsonl"

    def _evaluator(self, system: str, scheme: str, instances: List[Tuple[int, GeneratedInstance]]):
        """Mean CME over the validation repetitions; failed repetitions count as 1."""
        def evaluate(config: MethodConfig) -> float:
            records = [
                self.bench.score_repetition(config, instance, system, scheme, Split.validation, rep)
                for rep, instance in instances
            ]
            return math.fsum(r.cme for r in records) / len(records)
        return evaluate

    async def tune(self, method: str, system: str, scheme: str,
                   max_evals: int = 500) -> Tuple[MethodConfig, TuneState]:
        """
        Tunes ``method`` on the validation split of (system, scheme) and
        writes the winner and the trace.

        Tuning-free methods are written with their fixed settings and an
        empty trace, without loading the validation split.

        Raises:
            UnknownMethodError: For names outside the method vocabulary
            DatasetError: If the validation split is missing
        """
        domains = default_grid(method)
        if not domains:
            best, state = MethodConfig(method=method), TuneState()
            await self.write_tuned(best, state, system, scheme)
            logger.info(f"{method} is tuning-free, wrote its fixed settings for {system}/{scheme}")
            return best, state
        instances = await self.bench.datasets.load_split(system, scheme, Split.validation)
        logger.info(f"Tuning {method} on {system}/{scheme} over {len(instances)} validation repetitions")

        best, state = await local_grid_search(
            self._evaluator(system, scheme, instances), domains, method,
            max_evals=max_evals, limiter=self.limiter,
        )
        await self.write_tuned(best, state, system, scheme)
        logger.info(f"Tuned {method} on {system}/{scheme}: {best.params} "
                    f"(mean CME {state.best.mean_cme:.6g}, {len(state.trace)} evaluations)")
        return best, state

    async def write_tuned(self, best: MethodConfig, state: TuneState, system: str, scheme: str) -> None:
        directory = self.tuned_dir(system, scheme)
        directory.mkdir(parents=True, exist_ok=True)
        async with aiofiles.open(self.config_path(best.method, system, scheme), "w", newline="\n") as f:
            await f.write(best.model_dump_json(indent=2) + "\n")
        async with aiofiles.open(self.trace_path(best.method, system, scheme), "w", newline="\n") as f:
            for entry in state.trace:
                await f.write(entry.model_dump_json() + "\n")

    async def load_tuned(self, method: str, system: str, scheme: str) -> MethodConfig:
        """
        Tuned configuration of a method.

        Methods without search domains need no tuning file and fall back to
        their fixed settings.

        Raises:
            TuningError: If a tunable method has not been tuned on this dataset
        """
        path = self.config_path(method, system, scheme)
        if not path.exists():
            if not default_grid(method):
                return MethodConfig(method=method)
            raise TuningError(f"{method} has not been tuned on {system}/{scheme} (missing {path})")
        async with aiofiles.open(path, "r") as f:
            config = MethodConfig.model_validate(json.loads(await f.read()))
        if config.method != method:
            raise TuningError(f"{path} holds a configuration of {config.method}")
        return config
