"""
chaoscast/preprocess.py

Affine normalization of training data before fitting, with exact inverse.

* ``full``: subtract the sample mean and whiten with the symmetric inverse
  square root of the sample covariance (normalized by n − 1).
* ``scale_only``: divide by √(Σ YᵢᵀYᵢ / (n − 1)); no centering, no rotation,
  so monomial sparsity patterns survive.
* ``identity``: no transformation.
"""
import logging
from enum import Enum

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy import linalg

from chaoscast.schemas.numerics import NormalizationError

logger = logging.getLogger(__name__)

EIGENVALUE_FLOOR = 1e-12


class NormalizationMode(str, Enum):
    full = "full"
    scale_only = "scale_only"
    identity = "identity"


class AffineNormalizer(BaseModel):
    """Maps states x to whitener·(x − mean) and back."""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    mean: np.ndarray = Field(..., description="Subtracted mean (zero unless mode is full)")
    whitener: np.ndarray = Field(..., description="Symmetric positive-definite matrix applied after centering")
    dewhitener: np.ndarray = Field(..., description="Inverse of the whitener")
    mode: NormalizationMode

    @property
    def dim(self) -> int:
        return int(self.mean.shape[0])

    def apply(self, states) -> np.ndarray:
        """Data units → normalized units; accepts (d,) or (n, d)."""
        return (np.asarray(states, dtype=float) - self.mean) @ self.whitener

    def invert(self, states) -> np.ndarray:
        """Normalized units → data units."""
        return np.asarray(states, dtype=float) @ self.dewhitener + self.mean

    def scale_rate(self, rates) -> np.ndarray:
        """Transforms time derivatives (no translation)."""
        return np.asarray(rates, dtype=float) @ self.whitener


def _identity(dim: int) -> AffineNormalizer:
    eye = np.eye(dim)
    return AffineNormalizer(mean=np.zeros(dim), whitener=eye, dewhitener=eye.copy(),
                            mode=NormalizationMode.identity)


def fit_normalizer(observations, mode: NormalizationMode = NormalizationMode.full) -> AffineNormalizer:
    """
    Estimates the normalization from training observations.

    Args:
        observations: Training states (n x d)
        mode: Normalization mode

    Returns:
        AffineNormalizer: Fitted transform

    Raises:
        NormalizationError: For fewer than two observations, non-finite or
            degenerate (all-equal) data
    """
    Y = np.asarray(observations, dtype=float)
    if Y.ndim == 1:
        Y = Y[:, None]
    mode = NormalizationMode(mode)
    if mode == NormalizationMode.identity:
        return _identity(Y.shape[1])
    if Y.shape[0] < 2:
        raise NormalizationError("normalization needs at least two observations")
    if not np.all(np.isfinite(Y)):
        raise NormalizationError("observations contain non-finite values")
    dim = Y.shape[1]

    if mode == NormalizationMode.scale_only:
        scale = float(np.sqrt(np.sum(Y * Y) / (Y.shape[0] - 1)))
        if scale == 0.0:
            raise NormalizationError("cannot scale all-zero data")
        return AffineNormalizer(mean=np.zeros(dim), whitener=np.eye(dim) / scale,
                                dewhitener=np.eye(dim) * scale, mode=mode)

    mean = Y.mean(axis=0)
    centered = Y - mean
    covariance = centered.T @ centered / (Y.shape[0] - 1)
    trace = float(np.trace(covariance))
    if trace == 0.0:
        raise NormalizationError("observations are all equal")
    eigenvalues, eigenvectors = linalg.eigh(covariance)
    floor = EIGENVALUE_FLOOR * trace
    if np.any(eigenvalues < floor):
        logger.debug(f"Flooring {int(np.sum(eigenvalues < floor))} covariance eigenvalue(s)")
    eigenvalues = np.maximum(eigenvalues, floor)
    whitener = (eigenvectors / np.sqrt(eigenvalues)) @ eigenvectors.T
    dewhitener = (eigenvectors * np.sqrt(eigenvalues)) @ eigenvectors.T
    # symmetrize away round-off
    whitener = 0.5 * (whitener + whitener.T)
    dewhitener = 0.5 * (dewhitener + dewhitener.T)
    return AffineNormalizer(mean=mean, whitener=whitener, dewhitener=dewhitener, mode=mode)


def apply(normalizer: AffineNormalizer, states) -> np.ndarray:
    return normalizer.apply(states)


def invert(normalizer: AffineNormalizer, states) -> np.ndarray:
    return normalizer.invert(states)
