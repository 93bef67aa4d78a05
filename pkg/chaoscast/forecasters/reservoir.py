"""
chaoscast/forecasters/reservoir.py

Echo state networks (Esn*): a fixed sparse random reservoir driven by the
observations, r ← tanh(A r + W_in x + b), with a ridge readout from [1, r].
"""
import logging
from typing import Tuple

import numpy as np
from scipy import linalg
from scipy.sparse import csr_matrix
from scipy.sparse.linalg import ArpackNoConvergence, eigs

from chaoscast.forecasters.propagators import Propagator, random_feature_weights, weight_rng
from chaoscast.numkit.regression import ridge_fit
from chaoscast.schemas.methods import ForecastError, Target

logger = logging.getLogger(__name__)


def spectral_radius(matrix: csr_matrix) -> float:
    """
    Largest eigenvalue magnitude, from ARPACK with a dense fallback.

    Random reservoirs usually have a complex conjugate pair on the spectral
    circle, where a fixed number of plain power-iteration steps oscillates
    instead of converging; ARPACK returns the exact magnitude, so the
    rescaled matrix meets its target radius to machine precision.
    """
    try:
        values = eigs(matrix, k=1, which="LM", v0=np.ones(matrix.shape[0]), return_eigenvectors=False)
        return float(np.abs(values[0]))
    except (ArpackNoConvergence, ValueError, TypeError):
        logger.debug("ARPACK did not converge, computing the spectrum densely")
        return float(np.max(np.abs(linalg.eigvals(matrix.toarray()))))


def reservoir_matrix(rng: np.random.Generator, units: int = 400, node_degree: int = 6,
                     radius: float = 0.1) -> csr_matrix:
    """
    Sparse reservoir with exactly ``node_degree`` nonzeros per row, drawn from
    Unif(−1, 1) in distinct random columns, scaled to the given spectral radius.
    """
    if node_degree > units:
        raise ForecastError(f"node degree {node_degree} exceeds the reservoir size {units}")
    columns = np.vstack([rng.choice(units, size=node_degree, replace=False) for _ in range(units)])
    values = rng.uniform(-1.0, 1.0, size=(units, node_degree))
    rows = np.repeat(np.arange(units), node_degree)
    matrix = csr_matrix((values.reshape(-1), (rows, columns.reshape(-1))), shape=(units, units))
    current = spectral_radius(matrix)
    if current == 0.0:
        raise ForecastError("reservoir matrix has a zero spectrum")
    return matrix * (radius / current)


class EchoStateNetwork(Propagator):
    """
    Esn*. The reservoir reads every training observation in sequence; the
    readout maps the state after reading Y[i] to the target of pair i.
    Prediction continues from the reservoir state reached after all but the
    last training observation, then reads u(T) and its own forecasts.
    """

    def __init__(self, config, variant: str):
        super().__init__(config, variant, past_steps=0, skip=1)

    def _reservoir(self, rng, input_dim: int) -> Tuple[csr_matrix, np.ndarray, np.ndarray]:
        units = int(self.param("units", 400))
        source = weight_rng(self, rng)
        matrix = reservoir_matrix(source, units, int(self.param("node_degree", 6)),
                                  float(self.param("spectral_radius", 0.1)))
        w_in, bias = random_feature_weights(source, units, input_dim, float(self.param("input_scale", 0.1)))
        return matrix, w_in, bias

    def _fit(self, train, rng):
        Y = train.states
        t = train.times
        n = len(train)
        skip = self.settings.forward_skip
        mean_dt = float(np.mean(np.diff(t)))

        pairs = n - 1 - skip
        if pairs < 1:
            raise ForecastError(f"{n} observations cannot supply forward skip {skip}")
        # step spanned by the prediction made after reading Y[i]
        spans = t[np.minimum(np.arange(n - 1) + 1 + skip, n - 1)] - t[: n - 1]
        inputs = Y[: n - 1]
        if self.settings.timestep_input:
            inputs = np.column_stack([inputs, spans / mean_dt])

        matrix, w_in, bias = self._reservoir(rng, inputs.shape[1])
        drive = inputs @ w_in.T + bias
        states = np.empty((n - 1, matrix.shape[0]))
        r = np.zeros(matrix.shape[0])
        for i in range(n - 1):
            r = np.tanh(matrix @ r + drive[i])
            states[i] = r

        ahead = np.arange(pairs) + 1 + skip
        if self.settings.target == Target.state:
            targets = Y[ahead]
        else:
            targets = (Y[ahead] - Y[:pairs]) / spans[:pairs, None]
        X = np.column_stack([np.ones(pairs), states[:pairs]])
        ridge = ridge_fit(X, targets, float(self.param("penalty", 1e-8)))

        # state before reading the last observation, which u(T) replaces
        warm = states[-1]
        model = {"matrix": matrix, "w_in": w_in, "bias": bias, "ridge": ridge, "warm": warm}
        info = {"units": matrix.shape[0], "pairs": pairs, "jitter": ridge.metadata.get("jitter", False)}
        return (model, mean_dt), info

    def _step_model(self, model, mean_dt):
        matrix, w_in, bias, ridge = model["matrix"], model["w_in"], model["bias"], model["ridge"]
        state = model["warm"].copy()
        timestep_input = self.settings.timestep_input

        def step(x, dt):
            nonlocal state
            if timestep_input:
                x = np.append(x, dt / mean_dt)
            state = np.tanh(matrix @ state + w_in @ x + bias)
            return ridge.predict(np.concatenate([[1.0], state]))

        return step
