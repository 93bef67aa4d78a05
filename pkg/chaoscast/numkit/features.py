"""
chaoscast/numkit/features.py

Polynomial feature maps.

Monomials are ordered by total degree, and within one degree by the
lexicographic order of their sorted variable-index tuples (the order of
``itertools.combinations_with_replacement``). For input (x1, x2) and degree 2
the features are 1, x1, x2, x1², x1·x2, x2².
"""
from functools import lru_cache
from itertools import combinations_with_replacement
from typing import Optional, Tuple

import numpy as np

from chaoscast.schemas.numerics import FeatureMap, NumericsError


@lru_cache(maxsize=64)
def _monomial_recipe(input_dim: int, degree: int) -> Tuple[Tuple[int, int], ...]:
    """
    For every non-constant monomial, the position of its parent monomial
    (one degree lower) and the variable that multiplies it.
    """
    position = {(): 0}
    recipe = []
    for total in range(1, degree + 1):
        for combo in combinations_with_replacement(range(input_dim), total):
            position[combo] = len(position)
            recipe.append((position[combo[:-1]], combo[-1]))
    return tuple(recipe)


@lru_cache(maxsize=64)
def monomial_exponents(input_dim: int, degree: int) -> np.ndarray:
    """Exponent matrix (num_monomials x input_dim) in feature order."""
    rows = [np.zeros(input_dim, dtype=int)]
    for parent, variable in _monomial_recipe(input_dim, degree):
        row = rows[parent].copy()
        row[variable] += 1
        rows.append(row)
    exponents = np.vstack(rows)
    exponents.flags.writeable = False
    return exponents


def polynomial_features(x: np.ndarray, fmap: FeatureMap, dt: Optional[np.ndarray] = None) -> np.ndarray:
    """
    Evaluates the feature map on one input vector or on the rows of a matrix.

    Args:
        x: Input of shape (input_dim,) or (n, input_dim)
        fmap: Feature map settings
        dt: Timestep (scalar or length-n vector); required iff fmap.append_timestep

    Returns:
        np.ndarray: Features of shape (output_dim,) or (n, output_dim)

    Raises:
        NumericsError: On dimension mismatch or a missing/unexpected timestep
    """
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    rows = x[None, :] if single else x
    if rows.ndim != 2 or rows.shape[1] != fmap.input_dim:
        raise NumericsError(f"expected input dimension {fmap.input_dim}, got shape {x.shape}")
    if fmap.append_timestep and dt is None:
        raise NumericsError("feature map appends the timestep but none was given")
    if not fmap.append_timestep and dt is not None:
        raise NumericsError("timestep given to a feature map without timestep input")

    recipe = _monomial_recipe(fmap.input_dim, fmap.degree)
    features = np.empty((rows.shape[0], fmap.output_dim))
    features[:, 0] = 1.0
    for column, (parent, variable) in enumerate(recipe, start=1):
        features[:, column] = features[:, parent] * rows[:, variable]
    if fmap.append_timestep:
        features[:, -1] = np.broadcast_to(np.asarray(dt, dtype=float).reshape(-1), rows.shape[0])

    return features[0] if single else features
