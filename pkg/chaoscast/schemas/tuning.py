"""
chaoscast/schemas/tuning.py

Pydantic models for hyperparameter domains, the tuning trace and the
state of a local grid search.
"""
from enum import Enum
from typing import Dict, List, Optional, Sequence

from pydantic import BaseModel, Field, model_validator

from chaoscast.schemas.methods import MethodConfig, ParamValue


class TuningError(Exception):
    """Custom exception for tuning errors."""
    pass


class DomainKind(str, Enum):
    categorical = "categorical"
    scalar = "scalar"


class CategoricalPolicy(str, Enum):
    persistent = "persistent"  # every step re-evaluates all options
    yielding = "yielding"  # after step 0 only the incumbent option


class Scale(str, Enum):
    linear = "linear"
    exponential = "exponential"
    lattice = "lattice"  # explicit ordered value set


class ParamDomain(BaseModel):
    """Search domain of a single hyperparameter."""
    name: str = Field(..., min_length=1)
    kind: DomainKind
    initial: List[ParamValue] = Field(..., min_length=1, description="Values evaluated at step 0")
    options: Optional[List[ParamValue]] = Field(None, description="Categorical options")
    policy: Optional[CategoricalPolicy] = None
    scale: Optional[Scale] = None
    step: Optional[float] = Field(None, description="Additive step (linear) or factor (exponential)")
    lower: Optional[float] = None
    upper: Optional[float] = None
    integer: bool = Field(False, description="Keep values on the integer lattice")
    values: Optional[List[float]] = Field(None, description="Ordered value set of a lattice domain")

    @model_validator(mode='after')
    def check_domain(self):
        if self.kind == DomainKind.categorical:
            if not self.options or self.policy is None:
                raise ValueError(f"categorical domain '{self.name}' needs options and a policy")
            if any(v not in self.options for v in self.initial):
                raise ValueError(f"initial values of '{self.name}' must be options")
            return self

        if self.scale is None:
            raise ValueError(f"scalar domain '{self.name}' needs a scale")
        if self.scale == Scale.lattice:
            if not self.values or sorted(self.values) != list(self.values):
                raise ValueError(f"lattice domain '{self.name}' needs an increasing value set")
            if any(v not in self.values for v in self.initial):
                raise ValueError(f"initial values of '{self.name}' must lie on the lattice")
            return self

        if self.step is None or self.lower is None or self.upper is None:
            raise ValueError(f"scalar domain '{self.name}' needs step and bounds")
        if self.scale == Scale.exponential and (self.lower <= 0 or self.step <= 1):
            raise ValueError(f"exponential domain '{self.name}' needs lower > 0 and factor > 1")
        if self.scale == Scale.linear and self.step <= 0:
            raise ValueError(f"linear domain '{self.name}' needs a positive step")
        if any(not (self.lower <= float(v) <= self.upper) for v in self.initial):
            raise ValueError(f"initial values of '{self.name}' must lie within bounds")
        return self

    @classmethod
    def categorical(cls, name: str, options: Sequence[ParamValue],
                    policy: CategoricalPolicy = CategoricalPolicy.persistent) -> "ParamDomain":
        return cls(name=name, kind=DomainKind.categorical, initial=list(options),
                   options=list(options), policy=policy)

    @classmethod
    def linear(cls, name: str, initial: Sequence[int], lower: int, upper: int, step: int = 1) -> "ParamDomain":
        return cls(name=name, kind=DomainKind.scalar, scale=Scale.linear, initial=list(initial),
                   step=step, lower=lower, upper=upper, integer=True)

    @classmethod
    def exponential(cls, name: str, initial: Sequence[float], factor: float,
                    lower: float, upper: float) -> "ParamDomain":
        return cls(name=name, kind=DomainKind.scalar, scale=Scale.exponential,
                   initial=[float(v) for v in initial], step=factor, lower=lower, upper=upper)

    @classmethod
    def lattice(cls, name: str, initial: Sequence[float], values: Sequence[float],
                integer: bool = True) -> "ParamDomain":
        return cls(name=name, kind=DomainKind.scalar, scale=Scale.lattice, initial=list(initial),
                   values=list(values), integer=integer)


class TuneTraceEntry(BaseModel):
    """One evaluated configuration, as written to the trace file."""
    config: MethodConfig
    mean_cme: float = Field(..., ge=0, le=1)
    step: int = Field(..., ge=0)
    failed: bool = False


class TuneState(BaseModel):
    """Evaluated configurations in evaluation order plus the current step."""
    trace: List[TuneTraceEntry] = Field(default_factory=list)
    step: int = 0
    seen: Dict[str, int] = Field(default_factory=dict, description="Canonical key -> trace position")

    def record(self, entry: TuneTraceEntry) -> None:
        key = entry.config.canonical_key()
        if key in self.seen:
            raise TuningError(f"configuration evaluated twice: {key}")
        self.seen[key] = len(self.trace)
        self.trace.append(entry)

    def has_evaluated(self, config: MethodConfig) -> bool:
        return config.canonical_key() in self.seen

    @property
    def best(self) -> Optional[TuneTraceEntry]:
        """First entry with the minimal score (earliest evaluation wins ties)."""
        best_entry = None
        for entry in self.trace:
            if best_entry is None or entry.mean_cme < best_entry.mean_cme:
                best_entry = entry
        return best_entry
