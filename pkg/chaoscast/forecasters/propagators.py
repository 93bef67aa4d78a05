"""
chaoscast/forecasters/propagators.py

Propagator methods: learn the map from the (lagged) current state to the
next state (S target) or to the difference quotient (D target), then apply
it recursively from u(T).

Lagged inputs are concatenated oldest first, so the input row of
observation i is (Y[i − sK], ..., Y[i − s], Y[i]). T-variants additionally
see the step length divided by the mean training timestep.
"""
import logging
import math
from typing import Callable, Optional, Tuple

import numpy as np

from chaoscast.forecasters.base import DIVERGENCE_BOUND, Forecaster
from chaoscast.numkit.features import polynomial_features
from chaoscast.numkit.kernels import KernelRegressor
from chaoscast.numkit.regression import ridge_fit
from chaoscast.schemas.methods import ForecastError, PropagatorConfig, Target
from chaoscast.schemas.numerics import FeatureMap, KernelSpec
from chaoscast.schemas.series import TimeSeries

logger = logging.getLogger(__name__)

MAX_FEATURES = 2000

StepModel = Callable[[np.ndarray, float], np.ndarray]


def build_propagator_data(train: TimeSeries, cfg: PropagatorConfig) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Assembles the regression problem of a propagator.

    Args:
        train: Training series
        cfg: Target form and lag structure

    Returns:
        Tuple[np.ndarray, np.ndarray, np.ndarray]: Input rows (lagged states),
        targets, and the time span Δt covered by each target

    Raises:
        ForecastError: If the series is too short for the lags and skip
    """
    Y = train.states
    t = train.times
    n = len(train)
    first = cfg.past_steps * cfg.skip
    last = n - 2 - cfg.forward_skip
    if last < first:
        raise ForecastError(
            f"{n} observations cannot supply K={cfg.past_steps}, s={cfg.skip} lags "
            f"with forward skip {cfg.forward_skip}"
        )

    rows = np.arange(first, last + 1)
    lags = [Y[rows - cfg.skip * lag] for lag in range(cfg.past_steps, 0, -1)]
    inputs = np.hstack(lags + [Y[rows]])
    ahead = rows + 1 + cfg.forward_skip
    dts = t[ahead] - t[rows]
    if cfg.target == Target.state:
        targets = Y[ahead].copy()
    else:
        targets = (Y[ahead] - Y[rows]) / dts[:, None]
    return inputs, targets, dts


def _chain_values(chain: np.ndarray, start_time: float, stride: float, target_times: np.ndarray) -> np.ndarray:
    """Linear interpolation along a chain of states spaced ``stride`` apart; NaN propagates."""
    position = (target_times - start_time) / stride
    lower = np.floor(position + 1e-9).astype(int)
    fraction = position - lower
    fraction[fraction < 1e-9] = 0.0
    out = chain[lower].copy()
    between = fraction > 0
    if np.any(between):
        upper = chain[lower[between] + 1]
        out[between] = (1.0 - fraction[between, None]) * out[between] + fraction[between, None] * upper
    return out


def propagator_rollout(step_model: StepModel, u_T, start_time: float, target_times,
                       cfg: PropagatorConfig, bound: Optional[float] = DIVERGENCE_BOUND) -> TimeSeries:
    """
    Applies a one-step model recursively from u(T).

    The chain advances by (1 + ψ)·Δt₀ per step, where Δt₀ is the target
    stride; target times between chain nodes are filled by linear
    interpolation. Missing lags are filled with copies of u(T). After a
    non-finite state, or one whose max-norm exceeds ``bound``, the rest of
    the forecast is missing.

    Args:
        step_model: Maps (input row, step length) to the regression output
        u_T: Start state
        start_time: Time T of u_T
        target_times: Uniformly spaced prediction times after T
        cfg: Propagator settings of the model

    Returns:
        TimeSeries: Predictions at the target times

    Raises:
        ForecastError: If the target times are not uniformly spaced
    """
    target_times = np.asarray(target_times, dtype=float).reshape(-1)
    u_T = np.asarray(u_T, dtype=float)
    base = float(target_times[0] - start_time)
    if not np.allclose(np.diff(np.concatenate([[start_time], target_times])), base, rtol=1e-6, atol=0.0):
        raise ForecastError("propagator rollout needs uniformly spaced target times")

    stride = base * (1 + cfg.forward_skip)
    nodes = int(math.ceil((target_times[-1] - start_time) / stride - 1e-9))
    history = cfg.past_steps * cfg.skip
    chain = np.full((history + nodes + 1, u_T.shape[0]), np.nan)
    chain[: history + 1] = u_T
    lag_index = np.arange(-cfg.past_steps * cfg.skip, 1, cfg.skip)

    with np.errstate(over="ignore", invalid="ignore"):
        for node in range(history, history + nodes):
            current = chain[node]
            x = chain[node + lag_index].reshape(-1)
            output = np.asarray(step_model(x, stride), dtype=float).reshape(-1)
            following = output if cfg.target == Target.state else current + stride * output
            if not np.all(np.isfinite(following)) or (bound is not None and np.max(np.abs(following)) > bound):
                logger.debug(f"Rollout diverged after {node - history + 1} step(s)")
                break
            chain[node + 1] = following

    states = _chain_values(chain[history:], start_time, stride, target_times)
    return TimeSeries(times=target_times, states=states)


def propagator_settings(variant: str, param: Callable) -> PropagatorConfig:
    """Builds the PropagatorConfig of a method variant such as ``"DT"``."""
    try:
        return PropagatorConfig(
            target=Target(variant[0]),
            timestep_input=variant.endswith("T"),
            past_steps=int(param("past_steps", 0)),
            skip=int(param("skip", 1)),
            forward_skip=int(param("forward_skip", 0)),
        )
    except ValueError as e:
        raise ForecastError(f"invalid propagator settings: {e}") from e


class Propagator(Forecaster):
    """
    Shared plumbing of propagator methods. Subclasses turn the input matrix
    (and the scaled timestep column) into a step model.
    """

    def __init__(self, config, variant: str, **fixed):
        super().__init__(config, fixed)
        self.variant = variant
        self.settings = propagator_settings(variant, self.param)

    @property
    def min_points(self) -> int:
        return max(super().min_points, self.settings.past_steps * self.settings.skip + 2 + self.settings.forward_skip)

    def timestep_feature(self, dts, mean_dt: float) -> Optional[np.ndarray]:
        if not self.settings.timestep_input:
            return None
        return np.asarray(dts, dtype=float) / mean_dt

    def _fit(self, train, rng):
        inputs, targets, dts = build_propagator_data(train, self.settings)
        mean_dt = float(np.mean(np.diff(train.times)))
        model, info = self._fit_step(inputs, targets, self.timestep_feature(dts, mean_dt), rng)
        info["pairs"] = int(inputs.shape[0])
        return (model, mean_dt), info

    def _predict(self, model, u_T, start_time, target_times):
        step_model = self._step_model(*model)
        return propagator_rollout(step_model, u_T, start_time, target_times, self.settings).states

    def _fit_step(self, inputs, targets, timestep, rng) -> tuple:
        raise NotImplementedError

    def _step_model(self, model, mean_dt: float) -> StepModel:
        raise NotImplementedError


class LinearPropagator(Propagator):
    """Lin*: ridge regression on polynomial features of the lagged state."""

    def feature_map(self, input_dim: int) -> FeatureMap:
        return FeatureMap(input_dim=input_dim, degree=int(self.param("degree", 1)),
                          append_timestep=self.settings.timestep_input)

    def _fit_step(self, inputs, targets, timestep, rng):
        fmap = self.feature_map(inputs.shape[1])
        if fmap.output_dim > MAX_FEATURES:
            raise ForecastError(f"feature map with {fmap.output_dim} columns exceeds the limit of {MAX_FEATURES}")
        X = polynomial_features(inputs, fmap, timestep)
        ridge = ridge_fit(X, targets, float(self.param("penalty", 0.0)))
        return (fmap, ridge), {"features": fmap.output_dim, "jitter": ridge.metadata.get("jitter", False)}

    def _step_model(self, model, mean_dt):
        fmap, ridge = model

        def step(x, dt):
            timestep = dt / mean_dt if fmap.append_timestep else None
            return ridge.predict(polynomial_features(x, fmap, timestep))

        return step


def random_feature_weights(rng: np.random.Generator, units: int, input_dim: int,
                           input_scale: float) -> Tuple[np.ndarray, np.ndarray]:
    """Input weights and biases drawn from Unif(−c, c)."""
    w_in = rng.uniform(-input_scale, input_scale, size=(units, input_dim))
    bias = rng.uniform(-input_scale, input_scale, size=units)
    return w_in, bias


def weight_rng(forecaster: Forecaster, rng: np.random.Generator) -> np.random.Generator:
    """The ``seed`` hyperparameter fixes the random weights; otherwise the fit stream is used."""
    seed = forecaster.param("seed")
    return rng if seed is None else np.random.default_rng(int(seed))


class RandomFeaturePropagator(Propagator):
    """RaFe*: untrained tanh layer, ridge readout from [1, features]."""

    def _inputs(self, inputs, timestep):
        return inputs if timestep is None else np.column_stack([inputs, timestep])

    def _fit_step(self, inputs, targets, timestep, rng):
        x = self._inputs(inputs, timestep)
        units = int(self.param("units", 400))
        w_in, bias = random_feature_weights(weight_rng(self, rng), units, x.shape[1],
                                            float(self.param("input_scale", 0.1)))
        features = np.tanh(x @ w_in.T + bias)
        X = np.column_stack([np.ones(x.shape[0]), features])
        ridge = ridge_fit(X, targets, float(self.param("penalty", 1e-8)))
        return (w_in, bias, ridge), {"units": units, "jitter": ridge.metadata.get("jitter", False)}

    def _step_model(self, model, mean_dt):
        w_in, bias, ridge = model
        timestep_input = self.settings.timestep_input

        def step(x, dt):
            if timestep_input:
                x = np.append(x, dt / mean_dt)
            features = np.tanh(w_in @ x + bias)
            return ridge.predict(np.concatenate([[1.0], features]))

        return step


class KernelPropagator(Propagator):
    """PgGp* and PgLl*: kernel regression of the step map on memorized training pairs."""

    def __init__(self, config, variant: str, kind: str):
        super().__init__(config, variant, past_steps=0, skip=1, forward_skip=0)
        self.kind = kind

    def _fit_step(self, inputs, targets, timestep, rng):
        x = inputs if timestep is None else np.column_stack([inputs, timestep])
        spec = KernelSpec(
            bandwidth=float(self.param("bandwidth", 0.2)),
            regularization=float(self.param("penalty", 0.0)) if self.kind == "gp" else 0.0,
            neighbors=int(self.param("neighbors", 50)),
        )
        return KernelRegressor(x, targets, spec, kind=self.kind), {"neighbors": spec.neighbors}

    def _step_model(self, model, mean_dt):
        timestep_input = self.settings.timestep_input

        def step(x, dt):
            if timestep_input:
                x = np.append(x, dt / mean_dt)
            return model.predict(x)

        return step
