"""
chaoscast/forecasters

The method suite behind one fit/predict contract.
"""
from typing import Optional

import numpy as np

from chaoscast.forecasters.base import FittedForecaster, Forecaster
from chaoscast.forecasters.baselines import analog_predict
from chaoscast.forecasters.propagators import build_propagator_data, propagator_rollout
from chaoscast.forecasters.registry import METHOD_NAMES, build_forecaster, parse_method
from chaoscast.schemas.methods import MethodConfig
from chaoscast.schemas.series import ForecastProblem, TimeSeries


def fit(method: MethodConfig, train: TimeSeries, rng: Optional[np.random.Generator] = None) -> FittedForecaster:
    """Fits the method named by the configuration."""
    return build_forecaster(method).fit(train, rng)


def predict(fitted: FittedForecaster, problem: ForecastProblem) -> TimeSeries:
    """Forecast of a fitted method; one row per target time, NaN rows where missing."""
    return fitted.forecaster.predict(fitted, problem)


__all__ = [
    "FittedForecaster",
    "Forecaster",
    "METHOD_NAMES",
    "analog_predict",
    "build_forecaster",
    "build_propagator_data",
    "fit",
    "parse_method",
    "predict",
    "propagator_rollout",
]
