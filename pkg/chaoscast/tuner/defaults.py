"""
chaoscast/tuner/defaults.py

Default search domains of every tuned method.
"""
from typing import List

from chaoscast.forecasters.registry import METHOD_NAMES
from chaoscast.schemas.methods import UnknownMethodError
from chaoscast.schemas.tuning import CategoricalPolicy, ParamDomain

FORWARD_SKIP_LATTICE = [0, 1, 2, 4, 8, 16, 32, 64]


def _penalty(name: str = "penalty") -> ParamDomain:
    return ParamDomain.exponential(name, [1e-12, 1e-8, 1e-4], factor=10.0, lower=1e-15, upper=1e2)


def _bandwidth() -> ParamDomain:
    return ParamDomain.exponential("bandwidth", [0.05, 0.2, 0.8], factor=2.0, lower=1e-4, upper=10.0)


def _random_features() -> List[ParamDomain]:
    return [
        ParamDomain.exponential("input_scale", [0.025, 0.1, 0.4], factor=2.0, lower=1e-7, upper=1e2),
        _penalty(),
        ParamDomain.lattice("forward_skip", [0, 1], FORWARD_SKIP_LATTICE),
        ParamDomain.categorical("seed", [1, 2, 3, 4], CategoricalPolicy.persistent),
    ]


def default_grid(method: str) -> List[ParamDomain]:
    """
    Search domains of a method; empty for tuning-free methods.

    Raises:
        UnknownMethodError: For names outside the method vocabulary
    """
    if method not in METHOD_NAMES:
        raise UnknownMethodError(f"unknown method '{method}'")

    if method.startswith("LinPo") or method in ("SpPo2", "SpPo4", "PwNn", "SpNn", "ConstM", "ConstL"):
        return []
    if method.startswith("Lin"):
        return [
            ParamDomain.linear("past_steps", [0, 1, 4], lower=0, upper=32),
            ParamDomain.linear("skip", [1, 2], lower=1, upper=9),
            ParamDomain.linear("degree", [1, 4], lower=1, upper=8),
            _penalty(),
        ]
    if method.startswith(("RaFe", "Esn")):
        return _random_features()
    if method.startswith("PgGp") or method == "SpGp":
        return [_bandwidth(), _penalty()]
    if method.startswith("PgLl") or method == "LlNn":
        return [_bandwidth()]
    if method == "GpGp":
        return [_bandwidth(), _penalty(), _penalty("solution_penalty")]
    if method == "SpPo":
        return [ParamDomain.linear("degree", [2, 3, 4], lower=1, upper=8), _penalty()]
    if method in ("SINDy", "SINDyN"):
        return [ParamDomain.exponential("threshold", [0.04, 0.16, 0.64], factor=2.0, lower=1e-7, upper=1e2)]
    if method == "Analog":
        return [ParamDomain.categorical("margin", [1, 10, 100], CategoricalPolicy.persistent)]
    raise UnknownMethodError(f"no search domains for '{method}'")
