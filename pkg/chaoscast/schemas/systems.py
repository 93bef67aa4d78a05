"""
chaoscast/schemas/systems.py

Pydantic models for the benchmark systems, the observation schemes and the
metadata stored next to every generated instance.
"""
from enum import Enum
from typing import Dict, List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from chaoscast.schemas.series import TimeSeries


class GenerationError(Exception):
    """Custom exception for data-generation errors."""
    pass


class DatasetError(Exception):
    """Raised for missing or malformed instances in the data tree."""
    pass


class DatasetExistsError(DatasetError):
    """Raised when generation would overwrite existing instances without force."""
    pass


class SystemKind(str, Enum):
    standard = "lorenz63std"  # fixed classical parameters
    random = "lorenz63random"  # parameters drawn once per instance
    nonparametric = "lorenz63nonpar"  # parameters depend on the state


class TimestepMode(str, Enum):
    constant = "constant"
    exponential = "exponential"


class LorenzParams(BaseModel):
    """Parameters of the Lorenz63 vector field."""
    model_config = ConfigDict(frozen=True)

    sigma: float = Field(10.0, allow_inf_nan=False)
    rho: float = Field(28.0, allow_inf_nan=False)
    beta: float = Field(8.0 / 3.0, allow_inf_nan=False)


# Sampling intervals for random and state-dependent parameters
PARAMETER_INTERVALS: Dict[str, tuple] = {
    "sigma": (5.0, 15.0),
    "rho": (20.0, 80.0),
    "beta": (2.0, 6.0),
}


class ObservationScheme(BaseModel):
    """How a trajectory is turned into observations: timestep law and noise."""
    model_config = ConfigDict(frozen=True)

    name: str = Field(..., description="Scheme identifier used in the data tree")
    timestep_mode: TimestepMode = Field(TimestepMode.constant)
    base_dt: float = Field(1e-2, gt=0, description="Constant timestep, or mean of the exponential steps")
    noise_sd: float = Field(0.0, ge=0, description="Standard deviation of additive Gaussian noise")


SCHEMES: Dict[str, ObservationScheme] = {
    scheme.name: scheme
    for scheme in (
        ObservationScheme(name="const-noisefree"),
        ObservationScheme(name="const-noisy", noise_sd=0.1),
        ObservationScheme(name="random-noisefree", timestep_mode=TimestepMode.exponential),
        ObservationScheme(name="random-noisy", timestep_mode=TimestepMode.exponential, noise_sd=0.1),
    )
}

SYSTEMS: List[str] = [kind.value for kind in SystemKind]


def get_scheme(name: str) -> ObservationScheme:
    """Looks up a named observation scheme; raises KeyError for unknown names."""
    try:
        return SCHEMES[name]
    except KeyError:
        raise KeyError(f"Unknown observation scheme '{name}'. Known: {sorted(SCHEMES)}") from None


class InstanceMeta(BaseModel):
    """Content of ``meta.json`` for one generated instance."""
    system: SystemKind
    scheme: ObservationScheme
    seed: int = Field(..., ge=0)
    T: float = Field(..., gt=0, description="End of the training window")
    S: float = Field(..., gt=0, description="Forecast horizon")
    n: int = Field(..., ge=1, description="Number of training observations")
    m: int = Field(..., ge=1, description="Number of test times")
    u_T: List[float] = Field(..., description="Noise-free state at time T")
    params: Optional[LorenzParams] = Field(None, description="Parameters of a random-parameter system")
    rejections: int = Field(0, ge=0, description="Rejected draws before this instance was accepted")

    @field_validator('u_T')
    @classmethod
    def validate_state(cls, v):
        """The benchmark systems are three-dimensional."""
        if len(v) != 3:
            raise ValueError("u_T must have three coordinates")
        return v


class GeneratedInstance(BaseModel):
    """One benchmark instance: training observations, test truth and metadata."""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    train: TimeSeries = Field(..., description="Observations on [0, T]")
    truth: TimeSeries = Field(..., description="Noise-free states on the test grid in (T, T+S]")
    u_T: np.ndarray = Field(..., description="Noise-free state at time T")
    meta: InstanceMeta

    @property
    def seed(self) -> int:
        return self.meta.seed
