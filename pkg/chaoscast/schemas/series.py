"""
chaoscast/schemas/series.py

Defines the time-series containers that flow between data generation,
the forecasting methods and scoring.
"""
from typing import List

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class SeriesError(ValueError):
    """Custom exception for malformed time series."""
    pass


def state_columns(dim: int) -> List[str]:
    """Column names used for state coordinates in tables (u1, u2, ...)."""
    return [f"u{i + 1}" for i in range(dim)]


class TimeSeries(BaseModel):
    """
    Ordered (time, state) samples. Prediction series may contain NaN rows,
    which stand for missing entries.
    """
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    times: np.ndarray = Field(..., description="Strictly increasing sample times, shape (n,)")
    states: np.ndarray = Field(..., description="State vectors, shape (n, d)")

    @field_validator('times', mode='before')
    @classmethod
    def validate_times(cls, v):
        v = np.asarray(v, dtype=float).reshape(-1)
        if not np.all(np.isfinite(v)):
            raise SeriesError("times must be finite")
        if v.size > 1 and np.any(np.diff(v) <= 0):
            raise SeriesError("times must be strictly increasing")
        return v

    @field_validator('states', mode='before')
    @classmethod
    def validate_states(cls, v):
        v = np.asarray(v, dtype=float)
        if v.ndim == 1:
            v = v[:, None]
        if v.ndim != 2:
            raise SeriesError("states must be a (n, d) array")
        return v

    @model_validator(mode='after')
    def check_lengths(self):
        if self.times.shape[0] != self.states.shape[0]:
            raise SeriesError(
                f"times and states disagree in length: {self.times.shape[0]} != {self.states.shape[0]}"
            )
        return self

    def __len__(self) -> int:
        return int(self.times.shape[0])

    @property
    def dim(self) -> int:
        return int(self.states.shape[1])

    @property
    def present(self) -> np.ndarray:
        """Boolean mask of rows whose state is entirely finite."""
        return np.all(np.isfinite(self.states), axis=1)

    def head(self, count: int) -> "TimeSeries":
        return TimeSeries(times=self.times[:count], states=self.states[:count])

    def tail_from(self, start: int) -> "TimeSeries":
        return TimeSeries(times=self.times[start:], states=self.states[start:])

    def to_frame(self) -> pd.DataFrame:
        """Table with a ``time`` column followed by ``u1..ud``."""
        frame = pd.DataFrame(self.states, columns=state_columns(self.dim))
        frame.insert(0, "time", self.times)
        return frame

    @classmethod
    def from_frame(cls, frame: pd.DataFrame) -> "TimeSeries":
        """Builds a series from a table laid out as produced by ``to_frame``."""
        if "time" not in frame.columns:
            raise SeriesError("table has no 'time' column")
        value_columns = [c for c in frame.columns if c != "time"]
        if not value_columns:
            raise SeriesError("table has no state columns")
        return cls(
            times=frame["time"].to_numpy(dtype=float),
            states=frame[value_columns].to_numpy(dtype=float),
        )


class ForecastProblem(BaseModel):
    """
    One forecasting task: training observations, the noise-free state at the
    end of training and the times at which predictions are requested.
    """
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    train: TimeSeries = Field(..., description="Observed training series")
    u_T: np.ndarray = Field(..., description="True state at the start of the forecast")
    start_time: float = Field(..., description="Time T at which u_T holds")
    target_times: np.ndarray = Field(..., description="Increasing prediction times in (T, T+S]")

    @field_validator('u_T', 'target_times', mode='before')
    @classmethod
    def as_float_vector(cls, v):
        return np.asarray(v, dtype=float).reshape(-1)

    @model_validator(mode='after')
    def check_problem(self):
        if len(self.train) == 0:
            raise SeriesError("training series is empty")
        if self.target_times.size == 0:
            raise SeriesError("no target times given")
        if self.u_T.shape[0] != self.train.dim:
            raise SeriesError("u_T dimension does not match the training data")
        if np.any(np.diff(self.target_times) <= 0) or self.target_times[0] <= self.start_time:
            raise SeriesError("target times must increase strictly after the start time")
        return self
