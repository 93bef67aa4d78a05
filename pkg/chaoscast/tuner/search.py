"""
chaoscast/tuner/search.py

Local grid search: evaluate the current grid, move to the neighbourhood of
the best configuration, repeat until no new configuration remains or the
evaluation budget is spent.
"""
import logging
import math
from typing import Callable, List, Optional, Sequence, Tuple

import anyio

from chaoscast.schemas.methods import MethodConfig
from chaoscast.schemas.tuning import ParamDomain, TuneState, TuneTraceEntry, TuningError
from chaoscast.tuner.grid import next_grid

logger = logging.getLogger(__name__)

FAILED_SCORE = 1.0

Evaluator = Callable[[MethodConfig], float]


def _safe_score(evaluator: Evaluator, config: MethodConfig) -> Tuple[float, bool]:
    try:
        score = float(evaluator(config))
    except Exception as e:
        logger.warning(f"Evaluation of {config.canonical_key()} failed: {e}", exc_info=True)
        return FAILED_SCORE, True
    if not math.isfinite(score):
        logger.warning(f"Evaluation of {config.canonical_key()} returned {score}")
        return FAILED_SCORE, True
    return min(max(score, 0.0), 1.0), False


async def local_grid_search(
    evaluator: Evaluator,
    domains: Sequence[ParamDomain],
    method: str,
    max_evals: int = 500,
    limiter: Optional[anyio.CapacityLimiter] = None,
) -> Tuple[MethodConfig, TuneState]:
    """
    Runs the local grid search.

    Configurations of one step are evaluated concurrently in worker threads;
    their trace order is the canonical grid order. A configuration whose
    evaluation raises scores 1.

    Args:
        evaluator: Maps a configuration to its mean validation CME
        domains: Search domains; empty for tuning-free methods, which are
            returned unevaluated with their fixed settings
        method: Method name stored in every configuration
        max_evals: Budget of evaluations
        limiter: Shared thread capacity

    Returns:
        Tuple[MethodConfig, TuneState]: Best configuration and the full search state

    Raises:
        TuningError: If the budget does not allow a single evaluation
    """
    if max_evals < 1:
        raise TuningError("max_evals must be at least 1")
    state = TuneState()
    if not domains:
        logger.info(f"{method} has no search domains, keeping its fixed settings")
        return MethodConfig(method=method), state

    while len(state.trace) < max_evals:
        grid: List[MethodConfig] = next_grid(state, domains, method)
        if not grid:
            break
        grid = grid[: max_evals - len(state.trace)]
        results: List[Optional[Tuple[float, bool]]] = [None] * len(grid)

        async def evaluate(slot: int, config: MethodConfig) -> None:
            results[slot] = await anyio.to_thread.run_sync(_safe_score, evaluator, config, limiter=limiter)

        async with anyio.create_task_group() as tg:
            for slot, config in enumerate(grid):
                tg.start_soon(evaluate, slot, config)

        for config, (score, failed) in zip(grid, results):
            state.record(TuneTraceEntry(config=config, mean_cme=score, step=state.step, failed=failed))
        best = state.best
        logger.info(f"{method} step {state.step}: {len(grid)} evaluated, best {best.mean_cme:.6g} "
                    f"at {best.config.params}")
        state.step += 1

    return state.best.config, state
