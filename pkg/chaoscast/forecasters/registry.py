"""
chaoscast/forecasters/registry.py

Maps method names (``LinD``, ``SpPo2``, ``EsnST``, ...) to forecaster
objects with their fixed settings.
"""
import re
from typing import Callable, Dict, List

from chaoscast.forecasters.base import Forecaster
from chaoscast.forecasters.baselines import Analog, ConstLast, ConstMean
from chaoscast.forecasters.propagators import KernelPropagator, LinearPropagator, RandomFeaturePropagator
from chaoscast.forecasters.reservoir import EchoStateNetwork
from chaoscast.forecasters.smoothers import SolutionSmoother, SparseDynamics
from chaoscast.preprocess import NormalizationMode
from chaoscast.schemas.methods import MethodConfig, UnknownMethodError

_PROPAGATOR_PATTERN = re.compile(r"^(Lin|RaFe|Esn|PgGp|PgLl)(S|D)(T?)$")
_LINPO_PATTERN = re.compile(r"^LinPo(4|6)(T?)$")
_VARIANTS = ("S", "D", "ST", "DT")

_FIXED: Dict[str, Callable[[MethodConfig], Forecaster]] = {
    "ConstM": ConstMean,
    "ConstL": ConstLast,
    "Analog": Analog,
    "PwNn": lambda c: SolutionSmoother(c, "pwlin", "nn"),
    "SpNn": lambda c: SolutionSmoother(c, "spline", "nn"),
    "LlNn": lambda c: SolutionSmoother(c, "local_linear", "nn"),
    "SpPo": lambda c: SolutionSmoother(c, "spline", "poly"),
    "SpPo2": lambda c: SolutionSmoother(c, "spline", "poly", degree=2, penalty=0.0),
    "SpPo4": lambda c: SolutionSmoother(c, "spline", "poly", degree=4, penalty=0.0),
    "SpGp": lambda c: SolutionSmoother(c, "spline", "gp"),
    "GpGp": lambda c: SolutionSmoother(c, "gp", "gp"),
    "SINDy": SparseDynamics,
    "SINDyN": lambda c: SparseDynamics(c, NormalizationMode.full),
}

METHOD_NAMES: List[str] = (
    ["ConstM", "ConstL", "Analog"]
    + [f"{family}{variant}" for family in ("Lin", "RaFe", "Esn", "PgGp", "PgLl") for variant in _VARIANTS]
    + ["LinPo4", "LinPo6", "LinPo4T", "LinPo6T"]
    + ["PwNn", "SpNn", "LlNn", "SpPo", "SpPo2", "SpPo4", "SpGp", "GpGp", "SINDy", "SINDyN"]
)


def build_forecaster(config: MethodConfig) -> Forecaster:
    """
    Instantiates the forecaster of a method configuration.

    Raises:
        UnknownMethodError: For names outside ``METHOD_NAMES``
        ForecastError: For hyperparameters outside their domains
    """
    name = config.method
    if name in _FIXED:
        return _FIXED[name](config)

    match = _LINPO_PATTERN.match(name)
    if match:
        variant = "DT" if match.group(2) else "D"
        return LinearPropagator(config, variant, degree=int(match.group(1)), penalty=0.0,
                                past_steps=0, skip=1, forward_skip=0)

    match = _PROPAGATOR_PATTERN.match(name)
    if match is None:
        raise UnknownMethodError(f"unknown method '{name}'")
    family, variant = match.group(1), match.group(2) + match.group(3)
    if family == "Lin":
        return LinearPropagator(config, variant, forward_skip=0)
    if family == "RaFe":
        return RandomFeaturePropagator(config, variant, past_steps=0, skip=1)
    if family == "Esn":
        return EchoStateNetwork(config, variant)
    return KernelPropagator(config, variant, kind="gp" if family == "PgGp" else "local_linear")


def parse_method(name: str) -> MethodConfig:
    """Validates a method name and returns its configuration with no parameters set."""
    config = MethodConfig(method=name)
    build_forecaster(config)
    return config
