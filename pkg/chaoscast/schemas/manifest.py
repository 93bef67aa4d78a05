"""
chaoscast/schemas/manifest.py

Defines the run manifest: everything needed to reproduce a generate → tune →
run → report pipeline.
"""
from pathlib import Path
from typing import List

from pydantic import BaseModel, Field, field_validator, model_validator

from chaoscast.schemas.systems import SCHEMES, SYSTEMS


class ManifestError(ValueError):
    """Raised for invalid manifests or command-line selections."""
    pass


class RunManifest(BaseModel):
    """
    Reproducible run description. Every derived seed is a pure function of
    ``master_seed``, a role tag and integer indices.
    """
    master_seed: int = Field(42, ge=0)
    systems: List[str] = Field(default_factory=lambda: list(SYSTEMS))
    schemes: List[str] = Field(default_factory=lambda: list(SCHEMES))
    methods: List[str] = Field(default_factory=list)
    validation_reps: int = Field(10, ge=1)
    test_reps: int = Field(10, ge=1)
    data_root: Path = Field(Path("data"))
    results_root: Path = Field(Path("results"))
    jobs: int = Field(1, ge=1)

    # Time window and resolution
    train_time: float = Field(100.0, gt=0, description="End of the training window T")
    test_time: float = Field(10.0, gt=0, description="Forecast horizon S")
    base_dt: float = Field(1e-2, gt=0, description="Observation timestep")
    solver_dt: float = Field(1e-3, gt=0, description="Step of the data-generating RK4 solver")

    max_evals: int = Field(500, ge=1, description="Tuning budget per method and dataset")
    kappa: float = Field(0.4, gt=0)

    @field_validator('systems')
    @classmethod
    def validate_systems(cls, v):
        unknown = [s for s in v if s not in SYSTEMS]
        if unknown:
            raise ManifestError(f"Unknown systems {unknown}. Known: {SYSTEMS}")
        return v

    @field_validator('schemes')
    @classmethod
    def validate_schemes(cls, v):
        unknown = [s for s in v if s not in SCHEMES]
        if unknown:
            raise ManifestError(f"Unknown schemes {unknown}. Known: {sorted(SCHEMES)}")
        return v

    @model_validator(mode='after')
    def check_resolution(self):
        ratio = self.base_dt / self.solver_dt
        if ratio < 1 or abs(ratio - round(ratio)) > 1e-9:
            raise ManifestError("base_dt must be an integer multiple of solver_dt")
        return self

    def system_index(self, system: str) -> int:
        return SYSTEMS.index(system)

    def scheme_index(self, scheme: str) -> int:
        return list(SCHEMES).index(scheme)
