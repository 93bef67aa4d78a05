"""
chaoscast/forecasters/baselines.py

Baselines: climatology (ConstM), persistence (ConstL) and the analog
forecast, which replays the training series after its closest match to u(T).
"""
import logging

import numpy as np

from chaoscast.forecasters.base import Forecaster
from chaoscast.schemas.methods import ForecastError
from chaoscast.schemas.series import TimeSeries

logger = logging.getLogger(__name__)


class ConstMean(Forecaster):
    """Predicts the training mean at every target time."""

    def _fit(self, train, rng):
        return train.states.mean(axis=0), {}

    def _predict(self, model, u_T, start_time, target_times):
        return np.tile(model, (target_times.shape[0], 1))


class ConstLast(Forecaster):
    """Predicts u(T) at every target time."""

    def _fit(self, train, rng):
        return None, {}

    def _predict(self, model, u_T, start_time, target_times):
        return np.tile(u_T, (target_times.shape[0], 1))


def _constant_stride(times: np.ndarray, stride: float) -> bool:
    return bool(np.allclose(np.diff(times), stride, rtol=1e-9, atol=0.0))


def analog_predict(train: TimeSeries, u_T, target_times, margin: int, start_time: float = None) -> TimeSeries:
    """
    Analog forecast.

    Finds the training state closest to the current state among all but the
    last ``margin`` observations (smallest index on ties) and emits its
    successors. Once the training series is exhausted, the search restarts
    from the last emitted state.

    Args:
        train: Training series (n > margin)
        u_T: State at the forecast start
        target_times: Increasing prediction times
        margin: Number ω of final observations excluded from the search
        start_time: Forecast start T; defaults to the last training time

    Returns:
        TimeSeries: Predictions at the target times

    Raises:
        ForecastError: For an empty training set or n ≤ margin
    """
    target_times = np.asarray(target_times, dtype=float).reshape(-1)
    Y = train.states
    n = len(train)
    if n == 0:
        raise ForecastError("analog forecast needs training data")
    if margin < 1 or n <= margin:
        raise ForecastError(f"analog margin {margin} needs more than {margin} training points, got {n}")
    if start_time is None:
        start_time = float(train.times[-1])

    offsets = np.diff(np.concatenate([[start_time], target_times]))
    by_index = n > 1 and _constant_stride(train.times, offsets[0]) and _constant_stride(offsets, offsets[0])
    searchable = Y[: n - margin]

    out = np.empty((target_times.shape[0], Y.shape[1]))
    x = np.asarray(u_T, dtype=float)
    j = 0
    restarts = 0
    while j < target_times.shape[0]:
        k = int(np.argmin(np.linalg.norm(searchable - x, axis=1)))
        emitted = 0
        if by_index:
            for source in range(k + 1, n):
                if j == target_times.shape[0]:
                    break
                out[j] = Y[source]
                j += 1
                emitted += 1
        else:
            segment_start = start_time if j == 0 else target_times[j - 1]
            while j < target_times.shape[0]:
                query = train.times[k] + (target_times[j] - segment_start)
                if query > train.times[-1]:
                    break
                out[j] = [np.interp(query, train.times, Y[:, c]) for c in range(Y.shape[1])]
                j += 1
                emitted += 1
        if emitted == 0:
            out[j] = Y[-1]
            j += 1
        x = out[j - 1]
        if j < target_times.shape[0]:
            restarts += 1
    if restarts:
        logger.debug(f"Analog forecast restarted {restarts} time(s)")
    return TimeSeries(times=target_times, states=out)


class Analog(Forecaster):
    """Analog forecast on the normalized training series."""

    @property
    def min_points(self) -> int:
        return max(super().min_points, int(self.param("margin", 1)) + 1)

    def _fit(self, train, rng):
        margin = self.param("margin", 1)
        if not isinstance(margin, int) or margin < 1:
            raise ForecastError(f"analog margin must be a positive integer, got {margin!r}")
        return train, {"margin": margin}

    def _predict(self, model, u_T, start_time, target_times):
        return analog_predict(model, u_T, target_times, int(self.param("margin", 1)), start_time).states
