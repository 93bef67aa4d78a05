"""
chaoscast/schemas/results.py

Defines Pydantic models for benchmark outputs: per-repetition scores,
aggregated tables, significance tests and the perturbation/emulator studies.
"""
from enum import Enum
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field


class BenchError(Exception):
    """Custom exception for evaluation and reporting errors."""
    pass


SCORE_COLUMNS: List[str] = [
    "method", "system", "scheme", "split", "rep", "cme", "smape", "tvalid", "fit_s", "predict_s",
]


class Split(str, Enum):
    validation = "validation"
    test = "test"


class ScoreRecord(BaseModel):
    """Scores of one method on one repetition of one dataset."""
    method: str
    system: str
    scheme: str
    split: Split
    rep: int = Field(..., ge=0)
    cme: float = Field(..., ge=0, le=1, description="Cumulative maximum error")
    smape: Optional[float] = Field(None, ge=0, le=200, description="Absent when no prediction is present")
    valid_time: float = Field(..., ge=0)
    fit_seconds: float = Field(0.0, ge=0)
    predict_seconds: float = Field(0.0, ge=0)
    failed: bool = Field(False, description="Fit or prediction raised; scored as CME 1")
    error: Optional[str] = Field(None, description="Error message of a failed repetition")

    def to_row(self) -> Dict[str, Any]:
        """Row in the results CSV layout."""
        return {
            "method": self.method,
            "system": self.system,
            "scheme": self.scheme,
            "split": self.split.value,
            "rep": self.rep,
            "cme": self.cme,
            "smape": self.smape,
            "tvalid": self.valid_time,
            "fit_s": self.fit_seconds,
            "predict_s": self.predict_seconds,
        }

    @classmethod
    def from_row(cls, row: Dict[str, Any]) -> "ScoreRecord":
        smape = row.get("smape")
        if smape is not None and smape != smape:  # NaN from an empty CSV cell
            smape = None
        return cls(
            method=row["method"], system=row["system"], scheme=row["scheme"], split=row["split"],
            rep=int(row["rep"]), cme=float(row["cme"]), smape=smape, valid_time=float(row["tvalid"]),
            fit_seconds=float(row["fit_s"]), predict_seconds=float(row["predict_s"]),
        )


class AggregateRow(BaseModel):
    """Per (method, system, scheme) summary over repetitions."""
    method: str
    system: str
    scheme: str
    n: int = Field(..., ge=1, description="Number of repetitions")
    mean_cme: float
    ci_half_width: Optional[float] = Field(None, description="95% Student-t half-width; absent for one repetition")
    rank: int = Field(..., ge=1)
    mean_smape: Optional[float] = None
    mean_valid_time: float
    failed: int = Field(0, ge=0, description="Failed repetitions")


class TTestResult(BaseModel):
    """One-sided paired t-test of H0: CME(M1) >= CME(M2)."""
    p_value: float = Field(..., ge=0, le=1)
    statistic: Optional[float] = Field(None, description="t statistic; absent when degenerate")
    n: int = Field(..., ge=2)
    degenerate: bool = Field(False, description="All differences were identical")


class PerturbationRow(BaseModel):
    """Median CME caused by perturbations of a given radius."""
    radius: float = Field(..., ge=0)
    initial_condition_cme: float = Field(..., ge=0, le=1)
    parameter_cme: float = Field(..., ge=0, le=1)


class PerturbationTable(BaseModel):
    rows: List[PerturbationRow]
    rounded_initial_condition_cme: float = Field(
        ..., ge=0, le=1, description="Median CME of the solver started from u(0) rounded to 8 decimals"
    )
    reps: int


class EmulatorRow(BaseModel):
    """Error bands of the polynomial emulator and the exact solver at one lead time."""
    lead_time: float
    emulator_median: float
    emulator_q05: float
    emulator_q95: float
    solver_median: float
    solver_q05: float
    solver_q95: float
