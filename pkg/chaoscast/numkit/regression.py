"""
chaoscast/numkit/regression.py

Ridge regression and the symmetric positive-definite solver shared with the
kernel predictors.
"""
import logging
from typing import Tuple

import numpy as np
from scipy import linalg

from chaoscast.schemas.numerics import ConditioningError, NumericsError, RidgeModel

logger = logging.getLogger(__name__)

RELATIVE_JITTER = 1e-12
# Singular values below this fraction of the largest one make an unpenalized design rank-deficient
RANK_TOLERANCE = 1e-12


def solve_spd(matrix: np.ndarray, rhs: np.ndarray, allow_jitter: bool = True) -> Tuple[np.ndarray, bool]:
    """
    Solves ``matrix @ x = rhs`` for a symmetric positive semi-definite matrix.

    Tries a Cholesky factorization first. If that fails and jitter is allowed,
    adds ``RELATIVE_JITTER`` times the mean diagonal and retries, finally
    falling back to a symmetric indefinite solve.

    Args:
        matrix: Symmetric (p x p) matrix
        rhs: Right-hand side (p,) or (p x q)
        allow_jitter: Whether a failed factorization may be regularized

    Returns:
        Tuple[np.ndarray, bool]: Solution and whether jitter was needed

    Raises:
        ConditioningError: If the system cannot be solved
    """
    try:
        factor = linalg.cho_factor(matrix, check_finite=False)
        return linalg.cho_solve(factor, rhs, check_finite=False), False
    except linalg.LinAlgError:
        if not allow_jitter:
            raise ConditioningError("matrix is not positive definite")

    scale = max(float(np.mean(np.diag(matrix))), np.finfo(float).tiny)
    jittered = matrix + RELATIVE_JITTER * scale * np.eye(matrix.shape[0])
    logger.debug(f"Cholesky failed on a {matrix.shape[0]}x{matrix.shape[0]} system, retrying with jitter")
    try:
        factor = linalg.cho_factor(jittered, check_finite=False)
        return linalg.cho_solve(factor, rhs, check_finite=False), True
    except linalg.LinAlgError:
        pass
    try:
        return linalg.solve(jittered, rhs, assume_a="sym", check_finite=False), True
    except (linalg.LinAlgError, ValueError) as e:
        raise ConditioningError(f"linear system is singular: {e}") from e


def ridge_fit(X: np.ndarray, Y: np.ndarray, penalty: float) -> RidgeModel:
    """
    Minimizes ``‖XW − Y‖² + penalty·‖W‖²``, penalizing every coefficient.

    Features are column-equilibrated first, which leaves the minimizer
    unchanged. With a positive penalty the normal equations are solved by
    Cholesky; at λ = 0 the least-squares problem is solved by SVD on the
    design itself.

    Args:
        X: Design matrix (n x p)
        Y: Targets (n,) or (n x q)
        penalty: Non-negative ridge penalty λ

    Returns:
        RidgeModel: Weights of shape (p x q)

    Raises:
        NumericsError: On non-finite or mismatched input
        ConditioningError: If the system is numerically singular at λ = 0
    """
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if Y.ndim == 1:
        Y = Y[:, None]
    if X.ndim != 2 or X.shape[0] < 1 or X.shape[0] != Y.shape[0]:
        raise NumericsError(f"incompatible shapes X{X.shape} and Y{Y.shape}")
    if penalty < 0:
        raise NumericsError("penalty must be non-negative")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(Y))):
        raise NumericsError("ridge regression input contains non-finite values")

    scale = np.sqrt(np.einsum("ij,ij->j", X, X))
    scale[scale == 0.0] = 1.0
    Xs = X / scale
    if penalty == 0.0:
        solution, _, rank, _ = linalg.lstsq(Xs, Y, cond=RANK_TOLERANCE, lapack_driver="gelsd", check_finite=False)
        if rank < Xs.shape[1]:
            raise ConditioningError(f"unpenalized least-squares design has rank {rank} < {Xs.shape[1]}")
        jitter = False
    else:
        gram = Xs.T @ Xs
        gram[np.diag_indices_from(gram)] += penalty / scale ** 2
        solution, jitter = solve_spd(gram, Xs.T @ Y)

    weights = solution / scale[:, None]
    if not np.all(np.isfinite(weights)):
        raise ConditioningError("ridge solution is not finite")
    return RidgeModel(weights=weights, penalty=penalty, metadata={"jitter": jitter})
