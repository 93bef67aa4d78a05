"""
chaoscast/forecasters/smoothers.py

Solution-smoother methods. Three steps:

1. estimate the solution and its time derivative from the observations
   (piecewise-linear or cubic-spline interpolation, local-linear or GP
   smoothing in time);
2. regress the estimated derivative on the estimated state to obtain a
   vector field (nearest neighbour, polynomial ridge, localized GP, or
   sequentially thresholded polynomial regression);
3. integrate the estimated field from u(T) with RK4.
"""
import logging
import math
from typing import Dict, Tuple

import numpy as np
from scipy.spatial import cKDTree

from chaoscast.forecasters.base import DIVERGENCE_BOUND, Forecaster
from chaoscast.numkit.features import monomial_exponents, polynomial_features
from chaoscast.numkit.integrate import integrate_to_times
from chaoscast.numkit.interpolation import cubic_spline, piecewise_linear
from chaoscast.numkit.kernels import KernelRegressor, gp_predict_with_gradient, local_linear_fit
from chaoscast.numkit.regression import ridge_fit
from chaoscast.numkit.sparse import stlsq
from chaoscast.preprocess import NormalizationMode
from chaoscast.schemas.methods import ForecastError
from chaoscast.schemas.numerics import FeatureMap, KernelSpec, RidgeModel
from chaoscast.schemas.series import TimeSeries

logger = logging.getLogger(__name__)

SOLUTION_ESTIMATORS = ("pwlin", "spline", "local_linear", "gp")
FIELD_ESTIMATORS = ("nn", "poly", "gp", "sindy")
INTEGRATOR_SUBSTEPS = 10


def local_linear_neighbors(bandwidth: float, mean_dt: float, n: int) -> int:
    """Observations within six bandwidths of a grid point, at least 3."""
    return int(np.clip(math.ceil(6.0 * bandwidth / mean_dt) + 1, 3, n))


def estimate_solution(train: TimeSeries, estimator: str, params: Dict) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Smooths the observations in time.

    Interpolating estimators return values on the observation times;
    local-linear and GP smoothing evaluate on n equispaced points spanning
    the observations.

    Args:
        train: Observed series
        estimator: One of ``SOLUTION_ESTIMATORS``
        params: Method hyperparameters (``bandwidth``, ``solution_bandwidth``,
            ``solution_penalty``, ``neighbors``)

    Returns:
        Tuple[np.ndarray, np.ndarray, np.ndarray]: Grid times, estimated
        states and estimated derivatives
    """
    t = train.times
    Y = train.states
    n = len(train)
    if estimator == "pwlin":
        return t, Y, piecewise_linear(t, Y).derivative(t)
    if estimator == "spline":
        return t, Y, cubic_spline(t, Y).derivative(t)

    grid = np.linspace(t[0], t[-1], n)
    if estimator == "local_linear":
        bandwidth = float(params.get("bandwidth", 0.2))
        k = local_linear_neighbors(bandwidth, float(np.mean(np.diff(t))), n)
        values, jacobians = local_linear_fit(t[:, None], Y, grid[:, None], bandwidth, neighbors=k)
        return grid, values, jacobians[..., 0]
    if estimator == "gp":
        spec = KernelSpec(
            bandwidth=float(params.get("solution_bandwidth", 0.1)),
            regularization=float(params.get("solution_penalty", 1e-4)),
            neighbors=int(params.get("neighbors", 50)),
        )
        values, jacobians = gp_predict_with_gradient(t[:, None], Y, grid[:, None], spec)
        return grid, values, jacobians[..., 0]
    raise ForecastError(f"unknown solution estimator '{estimator}'")


class NearestNeighborField:
    """Derivative estimate of the closest estimated state."""

    def __init__(self, states: np.ndarray, rates: np.ndarray):
        self.tree = cKDTree(states)
        self.rates = rates

    def __call__(self, u):
        _, index = self.tree.query(u, k=1)
        return self.rates[index]


class PolynomialField:
    """Linear combination of monomials; rows of ``weights`` follow the feature order."""

    def __init__(self, fmap: FeatureMap, model: RidgeModel):
        self.fmap = fmap
        self.model = model

    @property
    def exponents(self) -> np.ndarray:
        return monomial_exponents(self.fmap.input_dim, self.fmap.degree)

    def __call__(self, u):
        return self.model.predict(polynomial_features(u, self.fmap))


class KernelField:
    """Localized GP regression of the derivative on the state."""

    def __init__(self, regressor: KernelRegressor):
        self.regressor = regressor

    def __call__(self, u):
        return self.regressor.predict(u)


def fit_vector_field(states: np.ndarray, rates: np.ndarray, estimator: str, params: Dict):
    """
    Regresses estimated derivatives on estimated states.

    Returns:
        tuple: (field callable, diagnostics)

    Raises:
        ConditioningError: If a polynomial system is singular
    """
    dim = states.shape[1]
    if estimator == "nn":
        return NearestNeighborField(states, rates), {}
    if estimator == "poly":
        fmap = FeatureMap(input_dim=dim, degree=int(params.get("degree", 2)))
        model = ridge_fit(polynomial_features(states, fmap), rates, float(params.get("penalty", 0.0)))
        return PolynomialField(fmap, model), {"features": fmap.output_dim}
    if estimator == "gp":
        spec = KernelSpec(
            bandwidth=float(params.get("bandwidth", 0.2)),
            regularization=float(params.get("penalty", 1e-4)),
            neighbors=int(params.get("neighbors", 50)),
        )
        return KernelField(KernelRegressor(states, rates, spec, kind="gp")), {}
    if estimator == "sindy":
        fmap = FeatureMap(input_dim=dim, degree=int(params.get("sindy_degree", 5)))
        model = stlsq(polynomial_features(states, fmap), rates, float(params.get("threshold", 0.1)),
                      int(params.get("iterations", 100)))
        return PolynomialField(fmap, model), {"active": model.metadata["active"],
                                              "all_zero": model.metadata["all_zero"]}
    raise ForecastError(f"unknown vector-field estimator '{estimator}'")


class SolutionSmoother(Forecaster):
    """Two-stage vector-field estimate, integrated from u(T)."""

    def __init__(self, config, stage1: str, stage2: str, **fixed):
        super().__init__(config, fixed)
        if stage1 not in SOLUTION_ESTIMATORS or stage2 not in FIELD_ESTIMATORS:
            raise ForecastError(f"unknown smoother stages {stage1}/{stage2}")
        self.stage1 = stage1
        self.stage2 = stage2

    @property
    def params(self) -> Dict:
        return {**self.config.params, **self.fixed}

    def _fit(self, train, rng):
        _, states, rates = estimate_solution(train, self.stage1, self.params)
        field, info = fit_vector_field(states, rates, self.stage2, self.params)
        info["stages"] = f"{self.stage1}/{self.stage2}"
        return field, info

    def _predict(self, model, u_T, start_time, target_times):
        return integrate_to_times(model, u_T, start_time, target_times,
                                  substeps=INTEGRATOR_SUBSTEPS, bound=DIVERGENCE_BOUND)


class SparseDynamics(SolutionSmoother):
    """
    SINDy: spline derivatives and thresholded polynomial regression. The
    plain variant only rescales the data so that monomial sparsity survives.
    """

    def __init__(self, config, normalization: NormalizationMode = NormalizationMode.scale_only):
        super().__init__(config, "spline", "sindy")
        self.normalization = normalization

    def vector_field_coefficients(self, fitted) -> Tuple[np.ndarray, np.ndarray]:
        """
        Monomial exponents and coefficients of the estimated field in data units.

        For a scale-only normalization x̄ = x / c, the coefficient of monomial α
        becomes w·c^(1 − |α|).

        Raises:
            ForecastError: For a fit under full (rotating, centering) normalization
        """
        if fitted.normalizer.mode == NormalizationMode.full:
            raise ForecastError("coefficients in data units need a scale-only normalization")
        field: PolynomialField = fitted.model
        exponents = field.exponents
        scale = float(fitted.normalizer.dewhitener[0, 0])
        factors = scale ** (1.0 - exponents.sum(axis=1))
        return exponents, field.model.weights * factors[:, None]
