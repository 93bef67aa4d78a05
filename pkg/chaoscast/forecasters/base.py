"""
chaoscast/forecasters/base.py

The fit/predict contract shared by every forecasting method.

Fitting drops missing training rows, normalizes the remaining observations
and hands them to the method-specific estimator. Prediction maps u(T) into
normalized coordinates, runs the method and maps the result back, keeping
missing entries as NaN rows aligned with the target times.
"""
import logging
from abc import ABC, abstractmethod
from typing import Any, Dict, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from chaoscast.preprocess import AffineNormalizer, NormalizationMode, fit_normalizer
from chaoscast.schemas.methods import ForecastError, MethodConfig
from chaoscast.schemas.numerics import NumericsError
from chaoscast.schemas.series import ForecastProblem, TimeSeries

logger = logging.getLogger(__name__)

MIN_TRAIN_POINTS = 10
# Rollouts leaving this max-norm ball in normalized coordinates count as diverged
DIVERGENCE_BOUND = 1e6


class FittedForecaster(BaseModel):
    """Immutable result of a fit; prediction never modifies it."""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    forecaster: Any = Field(..., description="Method object that produced the fit")
    config: MethodConfig = Field(..., description="Configuration snapshot")
    normalizer: AffineNormalizer
    model: Any = Field(..., description="Method-specific learned state")
    fit_info: Dict[str, Any] = Field(default_factory=dict, description="Diagnostics for logging")

    @property
    def method(self) -> str:
        return self.config.method

    def vector_field_coefficients(self):
        """Monomial exponents and vector-field coefficients in data units (sparse-regression methods only)."""
        extractor = getattr(self.forecaster, "vector_field_coefficients", None)
        if extractor is None:
            raise ForecastError(f"{self.method} does not estimate a polynomial vector field")
        return extractor(self)


class Forecaster(ABC):
    """
    Base class of all methods.

    Subclasses implement ``_fit`` and ``_predict`` on normalized data and
    may override ``normalization`` and ``min_points``.
    """
    normalization: NormalizationMode = NormalizationMode.full

    def __init__(self, config: MethodConfig, fixed: Optional[Dict[str, Any]] = None):
        self.config = config
        self.fixed = dict(fixed or {})

    @property
    def name(self) -> str:
        return self.config.method

    @property
    def min_points(self) -> int:
        return MIN_TRAIN_POINTS

    def param(self, name: str, default: Any = None) -> Any:
        """Hyperparameter value; settings fixed by the method take precedence over the config."""
        if name in self.fixed:
            return self.fixed[name]
        return self.config.get(name, default)

    @abstractmethod
    def _fit(self, train: TimeSeries, rng: np.random.Generator) -> tuple:
        """Returns (model, fit_info) for normalized training data."""

    @abstractmethod
    def _predict(self, model: Any, u_T: np.ndarray, start_time: float, target_times: np.ndarray) -> np.ndarray:
        """Normalized predictions at the target times; NaN rows for missing entries."""

    def fit(self, train: TimeSeries, rng: Optional[np.random.Generator] = None) -> FittedForecaster:
        """
        Fits the method to a training series.

        Args:
            train: Observed training series (rows with NaN are dropped)
            rng: Random stream for methods with random components

        Returns:
            FittedForecaster: Learned state

        Raises:
            ForecastError: If the data are too short or the estimator fails
        """
        rng = rng if rng is not None else np.random.default_rng(0)
        present = train.present
        if not np.all(present):
            logger.debug(f"{self.name}: dropping {int(np.sum(~present))} missing training rows")
            train = TimeSeries(times=train.times[present], states=train.states[present])
        if len(train) < self.min_points:
            raise ForecastError(f"{self.name} needs at least {self.min_points} training points, got {len(train)}")

        try:
            normalizer = fit_normalizer(train.states, self.normalization)
            normalized = TimeSeries(times=train.times, states=normalizer.apply(train.states))
            model, info = self._fit(normalized, rng)
        except NumericsError as e:
            raise ForecastError(f"{self.name} fit failed: {e}") from e

        logger.debug(f"Fitted {self.config.canonical_key()} on {len(train)} points: {info}")
        return FittedForecaster(forecaster=self, config=self.config, normalizer=normalizer,
                                model=model, fit_info=info)

    def predict(self, fitted: FittedForecaster, problem: ForecastProblem) -> TimeSeries:
        """
        Forecasts the problem's target times from its u(T).

        Raises:
            ForecastError: If u(T) is not finite
        """
        if not np.all(np.isfinite(problem.u_T)):
            raise ForecastError("u(T) must be finite")
        u_T = fitted.normalizer.apply(problem.u_T)
        try:
            with np.errstate(over="ignore", invalid="ignore"):
                normalized = self._predict(fitted.model, u_T, problem.start_time, problem.target_times)
        except NumericsError as e:
            raise ForecastError(f"{self.name} prediction failed: {e}") from e

        states = fitted.normalizer.invert(normalized)
        states[~np.all(np.isfinite(states), axis=1)] = np.nan
        return TimeSeries(times=problem.target_times, states=states)
