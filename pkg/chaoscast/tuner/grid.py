"""
chaoscast/tuner/grid.py

Neighbour sets of the local grid search and the grid of the next step.
"""
import itertools
import logging
from typing import List, Sequence

from chaoscast.schemas.methods import MethodConfig, ParamValue
from chaoscast.schemas.tuning import CategoricalPolicy, DomainKind, ParamDomain, Scale, TuneState, TuningError

logger = logging.getLogger(__name__)

SIGNIFICANT_DIGITS = 12


def _rounded(value: float) -> float:
    return float(f"{value:.{SIGNIFICANT_DIGITS}g}")


def neighbors(domain: ParamDomain, value: ParamValue) -> List[ParamValue]:
    """
    Values to evaluate next around the incumbent ``value``, in increasing
    order (option order for categoricals).

    * persistent categorical: all initial options;
    * yielding categorical: the incumbent only;
    * linear: {a − s, a, a + s} within bounds;
    * exponential: {a / s, a, a · s} within bounds;
    * lattice: the incumbent and its adjacent lattice values.
    """
    if domain.kind == DomainKind.categorical:
        if domain.policy == CategoricalPolicy.persistent:
            return list(domain.initial)
        return [value]

    if domain.scale == Scale.lattice:
        lattice = list(domain.values)
        if value not in lattice:
            raise TuningError(f"{value!r} is not on the lattice of '{domain.name}'")
        position = lattice.index(value)
        chosen = lattice[max(0, position - 1): position + 2]
        return [int(v) for v in chosen] if domain.integer else chosen

    if domain.scale == Scale.linear:
        candidates = [value - domain.step, value, value + domain.step]
    else:
        candidates = [_rounded(value / domain.step), value, _rounded(value * domain.step)]
    chosen = [v for v in candidates if domain.lower <= v <= domain.upper]
    if domain.integer:
        return [int(round(v)) for v in chosen]
    return chosen


def _product(method: str, names: Sequence[str], value_sets: Sequence[Sequence[ParamValue]]) -> List[MethodConfig]:
    return [MethodConfig(method=method, params=dict(zip(names, combo)))
            for combo in itertools.product(*value_sets)]


def initial_grid(domains: Sequence[ParamDomain], method: str) -> List[MethodConfig]:
    """Cartesian product of the initial sets, in canonical order."""
    names = [d.name for d in domains]
    return _product(method, names, [list(d.initial) for d in domains])


def next_grid(state: TuneState, domains: Sequence[ParamDomain], method: str) -> List[MethodConfig]:
    """
    Configurations of the next step that have not been evaluated yet.

    Before any evaluation this is the initial grid; afterwards the product
    of the neighbour sets around the best configuration so far. An empty
    result terminates the search.
    """
    if state.best is None:
        candidates = initial_grid(domains, method)
    else:
        incumbent = state.best.config
        names = [d.name for d in domains]
        candidates = _product(method, names, [neighbors(d, incumbent.params[d.name]) for d in domains])
    fresh = [c for c in candidates if not state.has_evaluated(c)]
    logger.debug(f"Step {state.step} grid for {method}: {len(fresh)} new of {len(candidates)}")
    return fresh
