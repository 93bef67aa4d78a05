"""
chaoscast/systems/generation.py

Turns a benchmark system and an observation scheme into a generated
instance: RK4 solution on a fine grid, observation times (constant or
exponential increments), additive noise, and the noise-free test truth.
"""
import logging
from typing import Optional, Tuple

import numpy as np

from chaoscast.numkit.integrate import rk4_step, rk4_trajectory
from chaoscast.schemas.numerics import IntegrationError
from chaoscast.schemas.series import TimeSeries
from chaoscast.schemas.systems import (
    GeneratedInstance,
    GenerationError,
    InstanceMeta,
    LorenzParams,
    ObservationScheme,
    SystemKind,
    TimestepMode,
)
from chaoscast.systems.lorenz import (
    ConstantLorenzField,
    VectorFieldSpec,
    sample_initial_condition,
    sample_nonpar_field,
    sample_random_params,
)

logger = logging.getLogger(__name__)

MAX_REJECTIONS = 20
FIXED_POINT_WINDOW = 20.0
FIXED_POINT_RATIO = 1e-3


def build_field(system: SystemKind, rng: np.random.Generator) -> Tuple[VectorFieldSpec, Optional[LorenzParams]]:
    """Vector field of a system; random draws come from ``rng``."""
    if system == SystemKind.standard:
        return ConstantLorenzField(), None
    if system == SystemKind.random:
        params = sample_random_params(rng)
        return ConstantLorenzField(params, kind=SystemKind.random), params
    return sample_nonpar_field(rng), None


def observation_times(scheme: ObservationScheme, T: float, rng: np.random.Generator) -> np.ndarray:
    """
    Training observation times in (0, T].

    Constant schemes use i·Δt₀. Exponential schemes accumulate Exp(mean Δt₀)
    increments and drop the first time that reaches T.
    """
    if scheme.timestep_mode == TimestepMode.constant:
        count = int(round(T / scheme.base_dt))
        return scheme.base_dt * np.arange(1, count + 1)

    chunk = int(np.ceil(T / scheme.base_dt)) + 1
    pieces = []
    current = 0.0
    while current < T:
        times = current + np.cumsum(rng.exponential(scheme.base_dt, size=chunk))
        pieces.append(times)
        current = float(times[-1])
    times = np.concatenate(pieces)
    return times[times < T]


def sample_states(field: VectorFieldSpec, trajectory: np.ndarray, solver_dt: float,
                  times: np.ndarray) -> np.ndarray:
    """
    States at arbitrary times from a solver-grid trajectory started at t = 0:
    one partial RK4 step from the preceding grid node.
    """
    index = np.floor(times / solver_dt + 1e-9).astype(int)
    index = np.minimum(index, trajectory.shape[0] - 1)
    remainder = times - index * solver_dt
    states = trajectory[index].copy()
    between = remainder > 1e-12
    if np.any(between):
        states[between] = rk4_step(field, trajectory[index[between]], remainder[between][:, None])
    return states


def approaches_fixed_point(trajectory: np.ndarray, solver_dt: float,
                           window: float = FIXED_POINT_WINDOW, ratio: float = FIXED_POINT_RATIO) -> bool:
    """True when the state variance over the last ``window`` time units is below ``ratio`` of the total."""
    tail = trajectory[-int(round(window / solver_dt)):]
    total = float(np.sum(np.var(trajectory, axis=0)))
    return float(np.sum(np.var(tail, axis=0))) < ratio * total


def generate_instance(
    system: SystemKind,
    scheme: ObservationScheme,
    seed: int,
    T: float = 100.0,
    S: float = 10.0,
    solver_dt: float = 1e-3,
) -> GeneratedInstance:
    """
    Generates one instance from a seed.

    For the state-dependent system, draws that approach a fixed point or
    diverge are rejected and redrawn from the same stream.

    Args:
        system: Benchmark system
        scheme: Observation scheme
        seed: Seed of the instance's random stream
        T: End of the training window
        S: Forecast horizon
        solver_dt: Step of the RK4 solver

    Returns:
        GeneratedInstance: Observations, test truth and metadata

    Raises:
        GenerationError: On divergence of a fixed-parameter system or after
            more than MAX_REJECTIONS consecutive rejections
    """
    system = SystemKind(system)
    rng = np.random.default_rng(seed)
    steps = int(round((T + S) / solver_dt))
    rejections = 0

    while True:
        field, params = build_field(system, rng)
        u0 = sample_initial_condition(rng, dt=solver_dt)
        try:
            trajectory = rk4_trajectory(field, u0, solver_dt, steps)
            reason = None
            if system == SystemKind.nonparametric and approaches_fixed_point(trajectory, solver_dt):
                reason = "approaches a fixed point"
        except IntegrationError as e:
            if system != SystemKind.nonparametric:
                raise GenerationError(f"{system.value} trajectory diverged: {e}") from e
            reason = f"diverged at step {e.step_index}"

        if reason is None:
            break
        rejections += 1
        logger.warning(f"Rejected {system.value} draw for seed {seed}: {reason}")
        if rejections > MAX_REJECTIONS:
            raise GenerationError(f"more than {MAX_REJECTIONS} consecutive rejections for seed {seed}")

    train_times = observation_times(scheme, T, rng)
    observations = sample_states(field, trajectory, solver_dt, train_times)
    if scheme.noise_sd > 0:
        observations = observations + rng.normal(0.0, scheme.noise_sd, size=observations.shape)

    test_count = int(round(S / scheme.base_dt))
    test_times = T + scheme.base_dt * np.arange(1, test_count + 1)
    truth = sample_states(field, trajectory, solver_dt, test_times)
    u_T = trajectory[int(round(T / solver_dt))].copy()

    meta = InstanceMeta(
        system=system,
        scheme=scheme,
        seed=seed,
        T=T,
        S=S,
        n=int(train_times.shape[0]),
        m=test_count,
        u_T=u_T.tolist(),
        params=params,
        rejections=rejections,
    )
    logger.debug(f"Generated {system.value}/{scheme.name} instance with n={meta.n}, seed={seed}")
    return GeneratedInstance(
        train=TimeSeries(times=train_times, states=observations),
        truth=TimeSeries(times=test_times, states=truth),
        u_T=u_T,
        meta=meta,
    )
