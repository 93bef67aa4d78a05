"""
chaoscast/numkit/integrate.py

Classical fixed-step fourth-order Runge-Kutta integration of autonomous
vector fields. States may be single vectors (d,) or batches (..., d).
"""
from typing import Callable, Optional

import numpy as np

from chaoscast.schemas.numerics import IntegrationError, NumericsError
from chaoscast.schemas.series import TimeSeries

VectorField = Callable[[np.ndarray], np.ndarray]


def rk4_step(f: VectorField, u: np.ndarray, dt: float) -> np.ndarray:
    """One classical RK4 step of length ``dt``."""
    k1 = f(u)
    k2 = f(u + 0.5 * dt * k1)
    k3 = f(u + 0.5 * dt * k2)
    k4 = f(u + dt * k3)
    return u + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def rk4_trajectory(f: VectorField, u0: np.ndarray, dt: float, steps: int) -> np.ndarray:
    """
    Integrates ``steps`` RK4 steps and returns the states, u0 included.

    Raises:
        IntegrationError: When a state becomes non-finite
    """
    if dt <= 0:
        raise NumericsError("step size must be positive")
    if steps < 0:
        raise NumericsError("number of steps must be non-negative")
    u = np.array(u0, dtype=float)
    states = np.empty((steps + 1,) + u.shape)
    states[0] = u
    for step in range(1, steps + 1):
        u = rk4_step(f, u, dt)
        if not np.all(np.isfinite(u)):
            raise IntegrationError("state diverged", step_index=step)
        states[step] = u
    return states


def rk4_integrate(f: VectorField, u0: np.ndarray, t0: float, dt: float, steps: int) -> TimeSeries:
    """
    Fixed-step RK4 from (t0, u0); returns all ``steps + 1`` states.

    Args:
        f: Autonomous vector field
        u0: Initial state (d,)
        t0: Initial time
        dt: Positive step size
        steps: Number of steps

    Returns:
        TimeSeries: Times t0 + k·dt and the corresponding states

    Raises:
        IntegrationError: Carrying the index of the first non-finite step
    """
    states = rk4_trajectory(f, np.asarray(u0, dtype=float).reshape(-1), dt, steps)
    times = t0 + dt * np.arange(steps + 1)
    return TimeSeries(times=times, states=states)


def integrate_to_times(
    f: VectorField,
    u0: np.ndarray,
    t0: float,
    times: np.ndarray,
    substeps: int = 10,
    bound: Optional[float] = None,
) -> np.ndarray:
    """
    Integrates through increasing output times with ``substeps`` equal RK4
    steps per interval.

    Divergence does not raise: once the state is non-finite, or exceeds
    ``bound`` in max-norm, that output and all later ones are NaN.

    Returns:
        np.ndarray: States at ``times``, shape (len(times), d)
    """
    times = np.asarray(times, dtype=float).reshape(-1)
    u = np.array(u0, dtype=float)
    out = np.full((times.shape[0], u.shape[-1]), np.nan)
    previous = t0
    with np.errstate(over="ignore", invalid="ignore"):
        for index, target in enumerate(times):
            h = (target - previous) / substeps
            for _ in range(substeps):
                u = rk4_step(f, u, h)
            if not np.all(np.isfinite(u)) or (bound is not None and np.max(np.abs(u)) > bound):
                break
            out[index] = u
            previous = target
    return out
