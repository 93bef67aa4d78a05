"""
chaoscast/numkit/kernels.py

Kernel predictors with Gaussian weights: kernel-ridge (GP posterior mean with
zero prior mean) and local-linear regression, both optionally restricted to
the k nearest training inputs of each query.

The training set is stored in lexicographic row order and neighbour ties are
resolved in that order, so predictions do not depend on how the caller
ordered the training pairs.
"""
import logging
from typing import Literal, Optional, Tuple

import numpy as np
from scipy import linalg

from chaoscast.numkit.regression import solve_spd
from chaoscast.schemas.numerics import KernelSpec, NumericsError

logger = logging.getLogger(__name__)

KernelKind = Literal["gp", "local_linear"]


def _as_matrix(a) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    return a[:, None] if a.ndim == 1 else a


class KernelRegressor:
    """Memorizes a training set once and answers repeated kernel predictions."""

    def __init__(self, train_x, train_y, spec: KernelSpec, kind: KernelKind = "gp"):
        x = _as_matrix(train_x)
        y = _as_matrix(train_y)
        minimum = 1 if kind == "gp" else 2
        if x.shape[0] < minimum:
            raise NumericsError(f"{kind} prediction needs at least {minimum} training points")
        if x.shape[0] != y.shape[0]:
            raise NumericsError("training inputs and targets disagree in length")

        keys = np.hstack([x, y])
        order = np.lexsort(keys.T[::-1])
        self.x = x[order]
        self.y = y[order]
        self.spec = spec
        self.kind = kind
        self._global_alpha: Optional[np.ndarray] = None

    @property
    def input_dim(self) -> int:
        return int(self.x.shape[1])

    def _neighbors(self, query: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Indices (in stored order) and squared distances of the selected neighbours."""
        diff = self.x - query
        d2 = np.einsum("ij,ij->i", diff, diff)
        k = self.spec.neighbors
        n = d2.shape[0]
        if k is None or k >= n:
            return np.arange(n), d2
        kth = np.partition(d2, k - 1)[k - 1]
        closer = np.flatnonzero(d2 < kth)
        tied = np.flatnonzero(d2 == kth)[: k - closer.size]
        index = np.sort(np.concatenate([closer, tied]))
        return index, d2[index]

    def _gp_weights(self, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
        h2 = self.spec.bandwidth ** 2
        sq = np.sum((xs[:, None, :] - xs[None, :, :]) ** 2, axis=-1)
        gram = np.exp(-sq / (2.0 * h2))
        gram[np.diag_indices_from(gram)] += self.spec.regularization
        alpha, jitter = solve_spd(gram, ys)
        if jitter:
            logger.debug("Kernel matrix needed jitter")
        return alpha

    def _predict_one(self, query: np.ndarray, with_gradient: bool):
        index, d2 = self._neighbors(query)
        xs, ys = self.x[index], self.y[index]
        h2 = self.spec.bandwidth ** 2

        if self.kind == "gp":
            global_fit = index.shape[0] == self.x.shape[0]
            if global_fit:
                if self._global_alpha is None:
                    self._global_alpha = self._gp_weights(xs, ys)
                alpha = self._global_alpha
            else:
                alpha = self._gp_weights(xs, ys)
            kq = np.exp(-d2 / (2.0 * h2))
            value = kq @ alpha
            if not with_gradient:
                return value, None
            jacobian = alpha.T @ (kq[:, None] * (xs - query)) / h2
            return value, jacobian

        # Relative weights: shifting by the smallest distance cannot underflow them all
        w = np.exp(-(d2 - d2.min()) / h2)
        design = np.hstack([np.ones((xs.shape[0], 1)), xs - query])
        root = np.sqrt(w)[:, None]
        coef, _, rank, _ = linalg.lstsq(design * root, ys * root, cond=1e-12, check_finite=False)
        if rank < design.shape[1] or not np.all(np.isfinite(coef)):
            value = w @ ys / np.sum(w)
            return value, np.zeros((ys.shape[1], xs.shape[1]))
        return coef[0], coef[1:].T

    def predict(self, query) -> np.ndarray:
        """Predictions for one query (d,) or a batch (m, d)."""
        q = np.asarray(query, dtype=float)
        if q.ndim == 1:
            return self._predict_one(q, with_gradient=False)[0]
        return np.vstack([self._predict_one(row, with_gradient=False)[0] for row in q])

    def predict_with_gradient(self, query) -> Tuple[np.ndarray, np.ndarray]:
        """Predictions and their Jacobians with respect to the query."""
        q = np.asarray(query, dtype=float)
        rows = q[None, :] if q.ndim == 1 else q
        results = [self._predict_one(row, with_gradient=True) for row in rows]
        values = np.vstack([value for value, _ in results])
        jacobians = np.stack([jacobian for _, jacobian in results])
        if q.ndim == 1:
            return values[0], jacobians[0]
        return values, jacobians


def gp_predict(train_x, train_y, query_x, spec: KernelSpec) -> np.ndarray:
    """
    Kernel-ridge mean with kernel exp(−‖x−x′‖²/(2h²)) and nugget λ.

    Raises:
        NumericsError: If the training set is empty
    """
    return KernelRegressor(train_x, train_y, spec, kind="gp").predict(query_x)


def gp_predict_with_gradient(train_x, train_y, query_x, spec: KernelSpec) -> Tuple[np.ndarray, np.ndarray]:
    """Kernel-ridge mean and its derivative with respect to the query."""
    return KernelRegressor(train_x, train_y, spec, kind="gp").predict_with_gradient(query_x)


def local_linear_fit(train_x, train_y, query_x, bandwidth: float,
                     neighbors: Optional[int] = None) -> Tuple[np.ndarray, np.ndarray]:
    """
    Weighted least-squares affine fit around the query with weights
    exp(−‖x−x_i‖²/h²). Returns the fitted value and slope; a singular local
    system falls back to the weighted mean with zero slope.
    """
    spec = KernelSpec(bandwidth=bandwidth, neighbors=neighbors)
    return KernelRegressor(train_x, train_y, spec, kind="local_linear").predict_with_gradient(query_x)


def local_linear_predict(train_x, train_y, query_x, bandwidth: float,
                         neighbors: Optional[int] = None) -> np.ndarray:
    """Value part of :func:`local_linear_fit`."""
    spec = KernelSpec(bandwidth=bandwidth, neighbors=neighbors)
    return KernelRegressor(train_x, train_y, spec, kind="local_linear").predict(query_x)
