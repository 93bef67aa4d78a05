"""
chaoscast/schemas/methods.py

Defines method configurations (method name plus hyperparameters), the
propagator settings shared by the propagator family, and forecasting errors.
"""
import json
from enum import Enum
from typing import Any, Dict, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

ParamValue = Union[int, float, str]


class ForecastError(Exception):
    """Custom exception for fitting and prediction errors."""
    pass


class UnknownMethodError(ForecastError):
    """Raised for method names outside the supported vocabulary."""
    pass


class MethodConfig(BaseModel):
    """
    Method identity plus hyperparameter assignment.

    Serialized as ``{"method": ..., "params": {...}}``; two configs are equal
    when their canonical (key-sorted) JSON forms are equal.
    """
    model_config = ConfigDict(frozen=True)

    method: str = Field(..., min_length=1, description="Method name, e.g. 'LinD' or 'SpPo2'")
    params: Dict[str, ParamValue] = Field(default_factory=dict, description="Flat hyperparameter map")

    @field_validator('params')
    @classmethod
    def validate_params(cls, v):
        """Rejects nested values and booleans, which do not round-trip through the trace files."""
        for name, value in v.items():
            if isinstance(value, bool) or not isinstance(value, (int, float, str)):
                raise ValueError(f"parameter '{name}' must be a number or a string")
        return dict(v)

    def canonical_key(self) -> str:
        return json.dumps({"method": self.method, "params": self.params}, sort_keys=True)

    def with_params(self, **updates: ParamValue) -> "MethodConfig":
        return MethodConfig(method=self.method, params={**self.params, **updates})

    def get(self, name: str, default: Any = None) -> Any:
        return self.params.get(name, default)

    def __hash__(self) -> int:
        return hash(self.canonical_key())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MethodConfig):
            return NotImplemented
        return self.canonical_key() == other.canonical_key()


class Target(str, Enum):
    state = "S"  # regress the next state
    diff_quotient = "D"  # regress (next - current) / dt


class PropagatorConfig(BaseModel):
    """Target form, timestep input and lag structure of a propagator model."""
    model_config = ConfigDict(frozen=True)

    target: Target = Field(Target.state)
    timestep_input: bool = Field(False, description="Feed the step length as an extra input")
    past_steps: int = Field(0, ge=0, le=32, description="Number of lagged states K")
    skip: int = Field(1, ge=1, le=9, description="Index distance s between lags")
    forward_skip: int = Field(0, ge=0, description="Observations skipped by the target")

    @model_validator(mode='after')
    def check_forward_skip(self):
        if self.forward_skip > 0 and self.past_steps > 0:
            raise ValueError("forward skip requires a memoryless input (past_steps = 0)")
        return self

    @property
    def history_length(self) -> int:
        """Number of observations spanned by one input row."""
        return self.past_steps * self.skip + 1
