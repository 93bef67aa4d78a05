"""
chaoscast/services/datasets.py

Owns the on-disk instance tree:

    <data>/<system>/<scheme>/<split>/rep<NNNN>/{train.csv, truth.csv, meta.json}

CSV files have the header ``time,u1,u2,u3``, UNIX newlines and every number
written with exactly eight fractional digits.
"""
import io
import json
import logging
import shutil
from pathlib import Path
from typing import List, Optional, Tuple

import aiofiles
import anyio
import numpy as np
import pandas as pd

from chaoscast.schemas.manifest import RunManifest
from chaoscast.schemas.results import Split
from chaoscast.schemas.series import SeriesError, TimeSeries
from chaoscast.schemas.systems import (
    DatasetError,
    DatasetExistsError,
    GeneratedInstance,
    GenerationError,
    InstanceMeta,
    SystemKind,
    get_scheme,
)
from chaoscast.systems.generation import generate_instance
from chaoscast.systems.seeding import derive_seed

logger = logging.getLogger(__name__)

CSV_FLOAT_FORMAT = "%.8f"
SPLITS: Tuple[Split, ...] = (Split.validation, Split.test)


def series_to_csv(series: TimeSeries) -> str:
    """CSV text of a series in the instance-tree format."""
    buffer = io.StringIO()
    series.to_frame().to_csv(buffer, index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n")
    return buffer.getvalue()


def series_from_csv(source) -> TimeSeries:
    """
    Reads a series written by :func:`series_to_csv`. Empty cells become NaN
    (missing); rows repeating a time already seen are dropped.
    """
    frame = pd.read_csv(source)
    duplicated = frame["time"].duplicated() if "time" in frame.columns else None
    if duplicated is not None and duplicated.any():
        logger.warning(f"Dropping {int(duplicated.sum())} rows with repeated times")
        frame = frame[~duplicated]
    return TimeSeries.from_frame(frame)


class DatasetService:
    """Service class for generating, writing and loading benchmark instances."""

    def __init__(self, data_root: Path, manifest: RunManifest):
        self.data_root = Path(data_root)
        self.manifest = manifest
        logger.debug(f"DatasetService initialized with data root: {self.data_root}")

    # Helper Methods
    def instance_dir(self, system: str, scheme: str, split: Split, rep: int) -> Path:
        return self.data_root / system / scheme / Split(split).value / f"rep{rep:04d}"

    def instance_seed(self, system: str, scheme: str, split: Split, rep: int) -> int:
        """Seed of one instance, derived from the master seed and the instance coordinates."""
        return derive_seed(
            self.manifest.master_seed, "instance",
            self.manifest.system_index(system), self.manifest.scheme_index(scheme),
            SPLITS.index(Split(split)), rep,
        )

    def reps_for(self, split: Split) -> int:
        return self.manifest.validation_reps if Split(split) == Split.validation else self.manifest.test_reps

    def _scheme(self, scheme: str):
        return get_scheme(scheme).model_copy(update={"base_dt": self.manifest.base_dt})

    async def _write_text(self, path: Path, text: str) -> None:
        async with aiofiles.open(path, "w", newline="\n") as f:
            await f.write(text)

    async def write_instance(self, directory: Path, instance: GeneratedInstance) -> None:
        """Writes train.csv, truth.csv and meta.json of one instance."""
        directory.mkdir(parents=True, exist_ok=True)
        await self._write_text(directory / "train.csv", series_to_csv(instance.train))
        await self._write_text(directory / "truth.csv", series_to_csv(instance.truth))
        await self._write_text(directory / "meta.json", instance.meta.model_dump_json(indent=2) + "\n")

    def _check_targets(self, systems: List[str], schemes: List[str], force: bool) -> None:
        for system in systems:
            for scheme in schemes:
                target = self.data_root / system / scheme
                if target.exists() and any(target.iterdir()):
                    if not force:
                        raise DatasetExistsError(f"{target} is not empty; use --force to overwrite")
                    logger.info(f"Removing existing instances under {target}")
                    shutil.rmtree(target)

    def _generate_one(self, system: str, scheme: str, split: Split, rep: int) -> GeneratedInstance:
        return generate_instance(
            SystemKind(system),
            self._scheme(scheme),
            self.instance_seed(system, scheme, split, rep),
            T=self.manifest.train_time,
            S=self.manifest.test_time,
            solver_dt=self.manifest.solver_dt,
        )

    async def generate(self, systems: List[str], schemes: List[str], force: bool = False,
                       limiter: Optional[anyio.CapacityLimiter] = None) -> List[str]:
        """
        Generates and writes every instance of the selected datasets.

        Args:
            systems: System names
            schemes: Observation scheme names
            force: Replace existing non-empty targets
            limiter: Shared thread capacity

        Returns:
            List[str]: Descriptions of instances that could not be generated

        Raises:
            DatasetExistsError: If a target is not empty and ``force`` is not set
        """
        self._check_targets(systems, schemes, force)
        failures: List[str] = []
        written = 0

        async def produce(system: str, scheme: str, split: Split, rep: int) -> None:
            nonlocal written
            directory = self.instance_dir(system, scheme, split, rep)
            try:
                instance = await anyio.to_thread.run_sync(
                    self._generate_one, system, scheme, split, rep, limiter=limiter
                )
            except GenerationError as e:
                logger.error(f"Could not generate {directory}: {e}", exc_info=True)
                failures.append(f"{directory}: {e}")
                return
            await self.write_instance(directory, instance)
            written += 1

        async with anyio.create_task_group() as tg:
            for system in systems:
                for scheme in schemes:
                    for split in SPLITS:
                        for rep in range(self.reps_for(split)):
                            tg.start_soon(produce, system, scheme, split, rep)

        logger.info(f"Wrote {written} instances under {self.data_root}")
        return sorted(failures)

    def list_reps(self, system: str, scheme: str, split: Split) -> List[int]:
        """Repetition indices present on disk, ascending."""
        base = self.data_root / system / scheme / Split(split).value
        if not base.is_dir():
            return []
        reps = []
        for child in base.iterdir():
            if child.is_dir() and child.name.startswith("rep") and child.name[3:].isdigit():
                reps.append(int(child.name[3:]))
        return sorted(reps)

    async def load_instance(self, system: str, scheme: str, split: Split, rep: int) -> GeneratedInstance:
        """
        Reads one instance back.

        Raises:
            DatasetError: If a file is missing or malformed
        """
        directory = self.instance_dir(system, scheme, split, rep)
        try:
            async with aiofiles.open(directory / "meta.json", "r") as f:
                meta = InstanceMeta.model_validate(json.loads(await f.read()))
            async with aiofiles.open(directory / "train.csv", "r") as f:
                train = series_from_csv(io.StringIO(await f.read()))
            async with aiofiles.open(directory / "truth.csv", "r") as f:
                truth = series_from_csv(io.StringIO(await f.read()))
        except FileNotFoundError as e:
            raise DatasetError(f"incomplete instance {directory}: {e}") from e
        except (ValueError, KeyError, SeriesError) as e:
            raise DatasetError(f"malformed instance {directory}: {e}") from e
        return GeneratedInstance(train=train, truth=truth, u_T=np.asarray(meta.u_T, dtype=float), meta=meta)

    async def load_split(self, system: str, scheme: str, split: Split) -> List[Tuple[int, GeneratedInstance]]:
        """
        All instances of one dataset split, ordered by repetition.

        Raises:
            DatasetError: If the split has no instances
        """
        reps = self.list_reps(system, scheme, split)
        if not reps:
            raise DatasetError(f"no instances under {self.data_root / system / scheme / Split(split).value}")
        return [(rep, await self.load_instance(system, scheme, split, rep)) for rep in reps]
