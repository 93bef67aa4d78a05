"""
chaoscast/numkit

Shared numerical kernels used by data generation and the forecasting methods.
"""
from chaoscast.numkit.features import monomial_exponents, polynomial_features
from chaoscast.numkit.integrate import integrate_to_times, rk4_integrate, rk4_step, rk4_trajectory
from chaoscast.numkit.interpolation import (
    InterpolantWithDerivative,
    cubic_spline,
    piecewise_linear,
)
from chaoscast.numkit.kernels import (
    KernelRegressor,
    gp_predict,
    gp_predict_with_gradient,
    local_linear_fit,
    local_linear_predict,
)
from chaoscast.numkit.regression import ridge_fit, solve_spd
from chaoscast.numkit.sparse import stlsq

__all__ = [
    "InterpolantWithDerivative",
    "KernelRegressor",
    "cubic_spline",
    "gp_predict",
    "gp_predict_with_gradient",
    "integrate_to_times",
    "local_linear_fit",
    "local_linear_predict",
    "monomial_exponents",
    "piecewise_linear",
    "polynomial_features",
    "ridge_fit",
    "rk4_integrate",
    "rk4_step",
    "rk4_trajectory",
    "solve_spd",
    "stlsq",
]
