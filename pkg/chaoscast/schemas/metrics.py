"""
chaoscast/schemas/metrics.py

Pydantic models for forecast scoring: the aligned truth/prediction pair and
the metric settings.
"""
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class MetricDomainError(ValueError):
    """Raised when a metric is undefined for its input (e.g. zero spread)."""
    pass


class MetricConfig(BaseModel):
    """Settings shared by the forecast metrics."""
    model_config = ConfigDict(frozen=True)

    kappa: float = Field(0.4, gt=0, description="Valid-time threshold on the normalized error")


class AlignedPair(BaseModel):
    """
    Truth and prediction on the same test grid. Prediction rows containing
    any non-finite value are treated as missing.
    """
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    times: np.ndarray = Field(..., description="Increasing test times t_1..t_m")
    truth: np.ndarray = Field(..., description="True states, shape (m, d)")
    prediction: np.ndarray = Field(..., description="Predicted states, shape (m, d); NaN rows are missing")
    start_time: float = Field(..., description="Time T of the last known state")

    @field_validator('times', mode='before')
    @classmethod
    def validate_times(cls, v):
        return np.asarray(v, dtype=float).reshape(-1)

    @field_validator('truth', 'prediction', mode='before')
    @classmethod
    def validate_states(cls, v):
        v = np.asarray(v, dtype=float)
        return v[:, None] if v.ndim == 1 else v

    @model_validator(mode='after')
    def check_alignment(self):
        m = self.times.shape[0]
        if m == 0:
            raise ValueError("an aligned pair needs at least one time")
        if self.truth.shape[0] != m or self.prediction.shape[0] != m:
            raise ValueError("times, truth and prediction must have equal lengths")
        if self.truth.shape != self.prediction.shape:
            raise ValueError("truth and prediction must have equal dimensions")
        if not np.all(np.isfinite(self.truth)):
            raise ValueError("truth entries must be finite")
        if np.any(np.diff(self.times) <= 0) or self.times[0] <= self.start_time:
            raise ValueError("times must increase strictly after the start time")
        return self

    @property
    def present(self) -> np.ndarray:
        return np.all(np.isfinite(self.prediction), axis=1)

    @property
    def horizon(self) -> float:
        """Forecast horizon S = t_m - T."""
        return float(self.times[-1] - self.start_time)


class MetricScores(BaseModel):
    """All three metrics of one aligned pair."""
    cme: float = Field(..., ge=0, le=1)
    smape: Optional[float] = Field(None, ge=0, le=200, description="None when no prediction is present")
    valid_time: float = Field(..., ge=0)
