"""
chaoscast/services/studies.py

Two sensitivity studies on the standard Lorenz63 system.

The perturbation study measures how much CME a tiny change of the initial
condition or of the parameters causes on its own, which bounds what any
forecaster can achieve from data stored at finite precision. The emulator
study compares a degree-6 polynomial propagator trained on rounded
observations with the exact solver started from the same rounded state.
"""
import logging
from typing import List, Sequence

import numpy as np

from chaoscast import forecasters
from chaoscast.metrics import cme
from chaoscast.numkit.integrate import rk4_step
from chaoscast.schemas.methods import MethodConfig
from chaoscast.schemas.metrics import AlignedPair
from chaoscast.schemas.results import EmulatorRow, PerturbationRow, PerturbationTable
from chaoscast.schemas.series import ForecastProblem, TimeSeries
from chaoscast.systems.lorenz import STANDARD_PARAMS, lorenz_rhs, sample_initial_condition

logger = logging.getLogger(__name__)

CSV_DECIMALS = 8
EMULATOR_DIGITS = 9
EMULATOR_METHOD = "LinPo6"


def sphere_points(rng: np.random.Generator, count: int, dim: int = 3) -> np.ndarray:
    """Points drawn uniformly from the unit sphere."""
    points = rng.standard_normal((count, dim))
    return points / np.linalg.norm(points, axis=1, keepdims=True)


def round_significant(values: np.ndarray, digits: int) -> np.ndarray:
    """Rounds every entry to ``digits`` significant decimal digits."""
    values = np.asarray(values, dtype=float)
    magnitude = np.floor(np.log10(np.abs(np.where(values == 0.0, 1.0, values))))
    scale = 10.0 ** (digits - 1 - magnitude)
    return np.round(values * scale) / scale


def sample_batch(u0: np.ndarray, params: np.ndarray, solver_dt: float, ratio: int, count: int) -> np.ndarray:
    """
    Integrates a batch of Lorenz63 systems with RK4 and keeps every
    ``ratio``-th state after the start.

    Args:
        u0: Initial states (B, 3)
        params: Per-row (sigma, rho, beta), shape (B, 3)
        solver_dt: RK4 step
        ratio: Solver steps per sample
        count: Number of samples

    Returns:
        np.ndarray: States (count, B, 3); rows that diverged are NaN from then on
    """
    sigma, rho, beta = params[:, 0], params[:, 1], params[:, 2]

    def field(u):
        return lorenz_rhs(u, sigma, rho, beta)

    u = np.array(u0, dtype=float)
    out = np.empty((count,) + u.shape)
    with np.errstate(over="ignore", invalid="ignore"):
        for sample in range(count):
            for _ in range(ratio):
                u = rk4_step(field, u, solver_dt)
            u[~np.all(np.isfinite(u), axis=1)] = np.nan
            out[sample] = u
    return out


def _solver_ratio(base_dt: float, solver_dt: float) -> int:
    ratio = int(round(base_dt / solver_dt))
    if ratio < 1 or abs(ratio * solver_dt - base_dt) > 1e-9 * base_dt:
        raise ValueError("base_dt must be an integer multiple of solver_dt")
    return ratio


def _median_cme(times: np.ndarray, truth: np.ndarray, prediction: np.ndarray) -> float:
    scores = [
        cme(AlignedPair(times=times, truth=truth[:, rep], prediction=prediction[:, rep], start_time=0.0))
        for rep in range(truth.shape[1])
    ]
    return float(np.median(scores))


def perturbation_study(
    radii: Sequence[float],
    reps: int,
    rng: np.random.Generator,
    horizon: float = 10.0,
    base_dt: float = 1e-2,
    solver_dt: float = 1e-3,
) -> PerturbationTable:
    """
    Median CME over ``reps`` trajectories caused by perturbing either the
    initial condition or the parameter vector (sigma, rho, beta) by a
    uniform point on the sphere of each radius. The reference is the
    unperturbed standard system from the same initial condition, scored on
    [0, horizon] every ``base_dt``.

    All trajectories are integrated as one batch.
    """
    if reps < 1:
        raise ValueError("reps must be positive")
    radii = [float(r) for r in radii]
    ratio = _solver_ratio(base_dt, solver_dt)
    count = int(round(horizon / base_dt))
    times = base_dt * np.arange(1, count + 1)
    standard = np.array([STANDARD_PARAMS.sigma, STANDARD_PARAMS.rho, STANDARD_PARAMS.beta])

    u0 = np.stack([sample_initial_condition(rng) for _ in range(reps)])
    starts = [u0, np.round(u0, CSV_DECIMALS)]
    params = [np.tile(standard, (reps, 1)), np.tile(standard, (reps, 1))]
    for radius in radii:
        starts.append(u0 + radius * sphere_points(rng, reps))
        params.append(np.tile(standard, (reps, 1)))
        starts.append(u0)
        params.append(standard + radius * sphere_points(rng, reps))

    logger.info(f"Integrating {len(starts) * reps} perturbation trajectories over {horizon} time units")
    samples = sample_batch(np.concatenate(starts), np.concatenate(params), solver_dt, ratio, count)
    blocks = samples.reshape(count, len(starts), reps, 3)
    reference = blocks[:, 0]

    rows = []
    for position, radius in enumerate(radii):
        rows.append(PerturbationRow(
            radius=radius,
            initial_condition_cme=_median_cme(times, reference, blocks[:, 2 + 2 * position]),
            parameter_cme=_median_cme(times, reference, blocks[:, 3 + 2 * position]),
        ))
        logger.debug(f"radius {radius:g}: {rows[-1].initial_condition_cme:.4g} / {rows[-1].parameter_cme:.4g}")
    return PerturbationTable(
        rows=rows,
        rounded_initial_condition_cme=_median_cme(times, reference, blocks[:, 1]),
        reps=reps,
    )


def emulator_study(
    reps: int,
    rng: np.random.Generator,
    train_time: float = 100.0,
    horizon: float = 10.0,
    base_dt: float = 1e-2,
) -> List[EmulatorRow]:
    """
    Error bands of the polynomial propagator against the exact solver.

    Per repetition the truth comes from RK4 at ``base_dt / 10``; the
    emulator is trained on the observations rounded to nine significant
    digits and both forecasts start from the rounded state at the end of
    training.

    Returns:
        List[EmulatorRow]: Median and central 90% band of the Euclidean
            error per lead time, for both forecasts
    """
    if reps < 1:
        raise ValueError("reps must be positive")
    ratio = 10
    solver_dt = base_dt / ratio
    n_train = int(round(train_time / base_dt))
    count = int(round(horizon / base_dt))
    standard = np.array([[STANDARD_PARAMS.sigma, STANDARD_PARAMS.rho, STANDARD_PARAMS.beta]])

    u0 = np.stack([sample_initial_condition(rng) for _ in range(reps)])
    # index 0 of the path is u0; the batch is integrated once for all reps
    path = np.concatenate([u0[None], sample_batch(u0, np.repeat(standard, reps, axis=0),
                                                  solver_dt, ratio, n_train + count)])
    train_times = base_dt * np.arange(n_train + 1)
    test_times = train_time + base_dt * np.arange(1, count + 1)

    start = round_significant(path[n_train], EMULATOR_DIGITS)
    solver = sample_batch(start, np.repeat(standard, reps, axis=0), solver_dt, ratio, count)
    truth = path[n_train + 1:]

    emulator = np.empty_like(truth)
    config = MethodConfig(method=EMULATOR_METHOD)
    for rep in range(reps):
        train = TimeSeries(times=train_times, states=round_significant(path[: n_train + 1, rep], EMULATOR_DIGITS))
        fitted = forecasters.fit(config, train, rng)
        problem = ForecastProblem(train=train, u_T=start[rep], start_time=train_time, target_times=test_times)
        emulator[:, rep] = forecasters.predict(fitted, problem).states
        logger.debug(f"Emulator repetition {rep} done")

    emulator_errors = np.linalg.norm(emulator - truth, axis=2)
    solver_errors = np.linalg.norm(solver - truth, axis=2)
    rows = []
    for index, t in enumerate(test_times):
        e_q05, e_med, e_q95 = np.nanquantile(emulator_errors[index], [0.05, 0.5, 0.95])
        s_q05, s_med, s_q95 = np.nanquantile(solver_errors[index], [0.05, 0.5, 0.95])
        rows.append(EmulatorRow(
            lead_time=float(t - train_time),
            emulator_median=float(e_med), emulator_q05=float(e_q05), emulator_q95=float(e_q95),
            solver_median=float(s_med), solver_q05=float(s_q05), solver_q95=float(s_q95),
        ))
    return rows
