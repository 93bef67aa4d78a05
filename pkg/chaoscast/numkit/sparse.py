"""
chaoscast/numkit/sparse.py

Sequentially thresholded least squares for sparse dictionary regression.
"""
import logging

import numpy as np

from chaoscast.numkit.regression import ridge_fit
from chaoscast.schemas.numerics import NumericsError, RidgeModel

logger = logging.getLogger(__name__)


def stlsq(X: np.ndarray, Y: np.ndarray, threshold: float, iterations: int = 100) -> RidgeModel:
    """
    Sequential thresholded least squares, one output column at a time.

    Solves the unpenalized least-squares problem, zeroes coefficients with
    magnitude below ``threshold`` and re-solves on the remaining columns until
    the active set stops changing or ``iterations`` rounds have run.

    Args:
        X: Dictionary matrix (n x p)
        Y: Targets (n,) or (n x q)
        threshold: Non-negative threshold τ
        iterations: Maximum number of thresholding rounds

    Returns:
        RidgeModel: Sparse weights; ``metadata['all_zero']`` flags an empty model

    Raises:
        NumericsError: On invalid arguments
        ConditioningError: If an active-set system is singular
    """
    if threshold < 0:
        raise NumericsError("threshold must be non-negative")
    if iterations < 1:
        raise NumericsError("at least one thresholding iteration is required")
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if Y.ndim == 1:
        Y = Y[:, None]

    weights = ridge_fit(X, Y, 0.0).weights.copy()
    rounds = []
    for column in range(Y.shape[1]):
        w = weights[:, column]
        active = np.ones(X.shape[1], dtype=bool)
        used = 0
        for used in range(1, iterations + 1):
            shrunk = active & (np.abs(w) >= threshold)
            if np.array_equal(shrunk, active):
                break
            active = shrunk
            w = np.zeros(X.shape[1])
            if not active.any():
                break
            w[active] = ridge_fit(X[:, active], Y[:, column], 0.0).weights[:, 0]
        weights[:, column] = w
        rounds.append(used)

    all_zero = not np.any(weights)
    if all_zero:
        logger.warning(f"Thresholding at {threshold} removed every coefficient")
    return RidgeModel(
        weights=weights,
        penalty=0.0,
        metadata={"all_zero": all_zero, "iterations": rounds, "active": int(np.count_nonzero(weights))},
    )
