"""
chaoscast/systems/lorenz.py

The three Lorenz63 vector fields of the benchmark: classical parameters,
parameters drawn once per instance, and parameters that vary smoothly with the
state (random Fourier feature realizations of a squared-exponential Gaussian
process, squashed into the sampling intervals).

All fields accept a single state (3,) or a batch (..., 3).
"""
import logging
from functools import lru_cache
from typing import Dict, Tuple, Union

import numpy as np
from scipy.special import expit

from chaoscast.numkit.integrate import rk4_step, rk4_trajectory
from chaoscast.schemas.numerics import IntegrationError, NumericsError
from chaoscast.schemas.systems import (
    PARAMETER_INTERVALS,
    GenerationError,
    LorenzParams,
    SystemKind,
)

logger = logging.getLogger(__name__)

ParamValue = Union[float, np.ndarray]

STANDARD_PARAMS = LorenzParams()

# Random Fourier feature realization of the state-dependent parameters
NONPAR_FEATURES = 64
NONPAR_LENGTH_SCALE = 20.0
# sd of the latent process; its 10%-90% quantiles squash onto 80% of each interval
NONPAR_LATENT_SD = 1.75


def lorenz_rhs(u: np.ndarray, sigma: ParamValue, rho: ParamValue, beta: ParamValue) -> np.ndarray:
    """Lorenz63 right-hand side; parameters may be scalars or arrays broadcasting with u[..., 0]."""
    if u.ndim == 1:
        x, y, z = u
        return np.array([sigma * (y - x), x * (rho - z) - y, x * y - beta * z])
    x, y, z = u[..., 0], u[..., 1], u[..., 2]
    return np.stack([sigma * (y - x), x * (rho - z) - y, x * y - beta * z], axis=-1)


class VectorFieldSpec:
    """Autonomous three-dimensional vector field of one benchmark system."""

    kind: SystemKind
    dim = 3

    def parameters(self, u: np.ndarray) -> Tuple[ParamValue, ParamValue, ParamValue]:
        raise NotImplementedError

    def __call__(self, u: np.ndarray) -> np.ndarray:
        sigma, rho, beta = self.parameters(u)
        return lorenz_rhs(u, sigma, rho, beta)


class ConstantLorenzField(VectorFieldSpec):
    """Lorenz63 with fixed parameters (classical or randomly drawn)."""

    def __init__(self, params: LorenzParams = STANDARD_PARAMS, kind: SystemKind = SystemKind.standard):
        self.params = params
        self.kind = kind

    def parameters(self, u):
        return self.params.sigma, self.params.rho, self.params.beta


class RandomFourierFunction:
    """
    Smooth scalar function ``lo + (hi − lo)·expit(g(u))`` where ``g`` is a
    finite random-Fourier-feature draw of a zero-mean squared-exponential GP.
    """

    def __init__(self, frequencies: np.ndarray, phases: np.ndarray, amplitudes: np.ndarray,
                 latent_sd: float, interval: Tuple[float, float]):
        self.frequencies = frequencies
        self.phases = phases
        self.amplitudes = amplitudes
        self.interval = interval
        self._scale = latent_sd * np.sqrt(2.0 / frequencies.shape[0])

    @classmethod
    def sample(cls, rng: np.random.Generator, interval: Tuple[float, float], dim: int = 3,
               features: int = NONPAR_FEATURES, length_scale: float = NONPAR_LENGTH_SCALE,
               latent_sd: float = NONPAR_LATENT_SD) -> "RandomFourierFunction":
        frequencies = rng.normal(0.0, 1.0 / length_scale, size=(features, dim))
        phases = rng.uniform(0.0, 2.0 * np.pi, size=features)
        amplitudes = rng.normal(0.0, 1.0, size=features)
        return cls(frequencies, phases, amplitudes, latent_sd, interval)

    def latent(self, u: np.ndarray) -> np.ndarray:
        return self._scale * (np.cos(u @ self.frequencies.T + self.phases) @ self.amplitudes)

    def __call__(self, u: np.ndarray) -> np.ndarray:
        lo, hi = self.interval
        return lo + (hi - lo) * expit(self.latent(u))

    def gradient(self, u: np.ndarray) -> np.ndarray:
        """Analytic gradient with respect to the state."""
        lo, hi = self.interval
        squashed = expit(self.latent(u))
        inner = -np.sin(u @ self.frequencies.T + self.phases) * self.amplitudes
        latent_gradient = self._scale * (inner @ self.frequencies)
        return np.asarray((hi - lo) * squashed * (1.0 - squashed))[..., None] * latent_gradient

    def to_dict(self) -> Dict[str, list]:
        return {
            "frequencies": self.frequencies.tolist(),
            "phases": self.phases.tolist(),
            "amplitudes": self.amplitudes.tolist(),
            "interval": list(self.interval),
        }


class NonparametricLorenzField(VectorFieldSpec):
    """Lorenz63 whose σ, ρ and β are smooth functions of the state."""

    kind = SystemKind.nonparametric

    def __init__(self, functions: Dict[str, RandomFourierFunction]):
        self.functions = functions

    def parameters(self, u):
        return self.functions["sigma"](u), self.functions["rho"](u), self.functions["beta"](u)

    def parameter_gradient(self, name: str, u: np.ndarray) -> np.ndarray:
        return self.functions[name].gradient(u)


def eval_field(spec: VectorFieldSpec, u) -> np.ndarray:
    """
    Evaluates the vector field at a state or a batch of states.

    Raises:
        NumericsError: If the state is not finite or not three-dimensional
    """
    u = np.asarray(u, dtype=float)
    if u.shape[-1:] != (3,):
        raise NumericsError(f"Lorenz63 states are three-dimensional, got shape {u.shape}")
    if not np.all(np.isfinite(u)):
        raise NumericsError("cannot evaluate the vector field at a non-finite state")
    return spec(u)


def sample_random_params(rng: np.random.Generator) -> LorenzParams:
    """Independent uniform draws of σ, ρ and β from their sampling intervals."""
    values = {name: float(rng.uniform(lo, hi)) for name, (lo, hi) in PARAMETER_INTERVALS.items()}
    return LorenzParams(**values)


def sample_nonpar_field(rng: np.random.Generator) -> NonparametricLorenzField:
    """Draws the three state-dependent parameter functions (σ, then ρ, then β)."""
    functions = {
        name: RandomFourierFunction.sample(rng, interval)
        for name, interval in PARAMETER_INTERVALS.items()
    }
    return NonparametricLorenzField(functions)


@lru_cache(maxsize=4)
def attractor_window(burn_in: float = 100.0, window: float = 100.0, dt: float = 1e-3) -> np.ndarray:
    """
    Standard Lorenz63 states on the solver grid over ``window`` time units,
    after a burn-in of ``burn_in`` units started at (1, 1, 1). Computed once per process.
    """
    field = ConstantLorenzField()
    burn_steps = int(round(burn_in / dt))
    window_steps = int(round(window / dt))
    try:
        start = rk4_trajectory(field, np.ones(3), dt, burn_steps)[-1]
        states = rk4_trajectory(field, start, dt, window_steps)
    except IntegrationError as e:
        raise GenerationError(f"burn-in diverged: {e}") from e
    states.flags.writeable = False
    logger.debug(f"Computed attractor window of {window_steps} steps")
    return states


def sample_initial_condition(rng: np.random.Generator, burn_in: float = 100.0,
                             window: float = 100.0, dt: float = 1e-3) -> np.ndarray:
    """
    State of the standard Lorenz63 system at a uniformly random time of the
    window following the burn-in.
    """
    states = attractor_window(burn_in, window, dt)
    offset = float(rng.uniform(0.0, window))
    index = min(int(offset // dt), states.shape[0] - 2)
    remainder = offset - index * dt
    if remainder <= 0.0:
        return states[index].copy()
    return rk4_step(ConstantLorenzField(), states[index], remainder)
