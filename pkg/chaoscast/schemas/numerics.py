"""
chaoscast/schemas/numerics.py

Pydantic models describing the shared numerical kernels (feature maps,
kernel specifications, fitted linear models) and the exceptions raised by them.
"""
from math import comb
from typing import Any, Dict, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator


class NumericsError(Exception):
    """Custom exception for numerical-kernel errors."""
    pass


class ConditioningError(NumericsError):
    """Raised when a linear system is numerically singular."""
    pass


class IntegrationError(NumericsError):
    """Raised when an integrator meets a non-finite or exploding state."""

    def __init__(self, message: str, step_index: int):
        super().__init__(f"{message} (step {step_index})")
        self.step_index = step_index


class NormalizationError(NumericsError):
    """Raised when data cannot be normalized (too short or degenerate)."""
    pass


class FeatureMap(BaseModel):
    """
    Polynomial feature map: all monomials of the input up to total degree
    ``degree`` in graded lexicographic order, constant first, optionally
    followed by the timestep as one extra linear feature.
    """
    model_config = ConfigDict(frozen=True)

    input_dim: int = Field(..., gt=0, description="Dimension of the input vector")
    degree: int = Field(..., ge=0, description="Maximum total degree of the monomials")
    append_timestep: bool = Field(False, description="Append the timestep as the last feature")

    @property
    def output_dim(self) -> int:
        return comb(self.input_dim + self.degree, self.degree) + int(self.append_timestep)


class KernelSpec(BaseModel):
    """Gaussian kernel settings shared by GP and local-linear predictors."""
    model_config = ConfigDict(frozen=True)

    bandwidth: float = Field(..., gt=0, description="Kernel bandwidth h")
    regularization: float = Field(0.0, ge=0, description="Nugget added to the kernel diagonal")
    neighbors: Optional[int] = Field(None, ge=1, description="Restrict each prediction to the k nearest inputs")


class RidgeModel(BaseModel):
    """
    Linear model ``Y ≈ X W``. Also returned by sparse regression, in which
    case ``metadata`` records the thresholding outcome.
    """
    model_config = ConfigDict(arbitrary_types_allowed=True)

    weights: np.ndarray = Field(..., description="Weight matrix (feature_dim x output_dim)")
    penalty: float = Field(0.0, ge=0, description="Ridge penalty used for the fit")
    metadata: Dict[str, Any] = Field(default_factory=dict, description="Solver diagnostics")

    @field_validator('weights', mode='before')
    @classmethod
    def validate_weights(cls, v):
        """Ensures the weights form a finite 2-D float array."""
        v = np.asarray(v, dtype=float)
        if v.ndim == 1:
            v = v[:, None]
        if v.ndim != 2 or not np.all(np.isfinite(v)):
            raise ValueError("weights must be a finite matrix")
        return v

    def predict(self, features: np.ndarray) -> np.ndarray:
        """Applies the model to a feature matrix (or a single feature vector)."""
        return np.asarray(features, dtype=float) @ self.weights
