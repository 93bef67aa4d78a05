"""
chaoscast/numkit/interpolation.py

Interpolants of vector-valued samples that also return their time
derivative: not-a-knot cubic splines and piecewise-linear interpolation.
"""
import numpy as np
from scipy.interpolate import CubicSpline

from chaoscast.schemas.numerics import NumericsError


class InterpolantWithDerivative:
    """Base class: value and first derivative anywhere in the knot span."""

    def __init__(self, knot_times: np.ndarray, knot_values: np.ndarray):
        self.knot_times = knot_times
        self.knot_values = knot_values

    def __call__(self, t) -> np.ndarray:
        raise NotImplementedError

    def derivative(self, t) -> np.ndarray:
        raise NotImplementedError


def _validate_knots(times, values, minimum: int):
    times = np.asarray(times, dtype=float).reshape(-1)
    values = np.asarray(values, dtype=float)
    if values.ndim == 1:
        values = values[:, None]
    if times.shape[0] < minimum:
        raise NumericsError(f"at least {minimum} knots are required, got {times.shape[0]}")
    if values.shape[0] != times.shape[0]:
        raise NumericsError("knot times and values disagree in length")
    if np.any(np.diff(times) <= 0):
        raise NumericsError("knot times must be strictly increasing")
    if not (np.all(np.isfinite(times)) and np.all(np.isfinite(values))):
        raise NumericsError("knots must be finite")
    return times, values


class CubicSplineInterpolant(InterpolantWithDerivative):
    """C² cubic spline with not-a-knot end conditions."""

    def __init__(self, knot_times: np.ndarray, knot_values: np.ndarray):
        super().__init__(knot_times, knot_values)
        self._spline = CubicSpline(knot_times, knot_values, bc_type="not-a-knot", axis=0)
        self._slope = self._spline.derivative(1)

    def __call__(self, t) -> np.ndarray:
        return self._spline(t)

    def derivative(self, t) -> np.ndarray:
        return self._slope(t)


class PiecewiseLinearInterpolant(InterpolantWithDerivative):
    """Linear interpolation; at a knot the derivative is the slope of the left segment."""

    def __init__(self, knot_times: np.ndarray, knot_values: np.ndarray):
        super().__init__(knot_times, knot_values)
        self._slopes = np.diff(knot_values, axis=0) / np.diff(knot_times)[:, None]

    def _segment(self, t: np.ndarray) -> np.ndarray:
        index = np.searchsorted(self.knot_times, t, side="left") - 1
        return np.clip(index, 0, self.knot_times.shape[0] - 2)

    def __call__(self, t) -> np.ndarray:
        t_arr = np.asarray(t, dtype=float)
        columns = [np.interp(t_arr, self.knot_times, self.knot_values[:, j])
                   for j in range(self.knot_values.shape[1])]
        return np.stack(columns, axis=-1)

    def derivative(self, t) -> np.ndarray:
        return self._slopes[self._segment(np.asarray(t, dtype=float))]


def cubic_spline(times, values) -> CubicSplineInterpolant:
    """
    Not-a-knot cubic spline through (times, values).

    Raises:
        NumericsError: For fewer than 4 knots or non-increasing times
    """
    times, values = _validate_knots(times, values, minimum=4)
    return CubicSplineInterpolant(times, values)


def piecewise_linear(times, values) -> PiecewiseLinearInterpolant:
    """
    Piecewise-linear interpolant through (times, values).

    Raises:
        NumericsError: For fewer than 2 knots or non-increasing times
    """
    times, values = _validate_knots(times, values, minimum=2)
    return PiecewiseLinearInterpolant(times, values)
