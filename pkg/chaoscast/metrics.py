"""
chaoscast/metrics.py

Discrete-time forecast metrics: cumulative maximum error (CME), symmetric
mean absolute percent error (sMAPE) and valid time.

Missing predictions (rows with any non-finite entry) count as maximal error
for CME and valid time and are excluded from the sMAPE average.
"""
import math
from typing import Optional, Tuple

import numpy as np

from chaoscast.schemas.metrics import AlignedPair, MetricConfig, MetricDomainError, MetricScores


def sd_mu(truth) -> Tuple[float, np.ndarray]:
    """
    Mean state and root-mean-square Euclidean deviation from it.

    Returns:
        Tuple[float, np.ndarray]: (sd, mu)
    """
    truth = np.asarray(truth, dtype=float)
    if truth.ndim == 1:
        truth = truth[:, None]
    mu = truth.mean(axis=0)
    sd = float(np.sqrt(np.mean(np.sum((truth - mu) ** 2, axis=1))))
    return sd, mu


def error_norms(pair: AlignedPair) -> np.ndarray:
    """Euclidean error per test time; NaN where the prediction is missing."""
    norms = np.linalg.norm(pair.prediction - pair.truth, axis=1)
    norms[~pair.present] = np.nan
    return norms


def normalized_errors(pair: AlignedPair) -> np.ndarray:
    """Errors divided by the spread of the truth; NaN where missing.

    Raises:
        MetricDomainError: If the truth has zero spread
    """
    sd, _ = sd_mu(pair.truth)
    if sd == 0.0:
        raise MetricDomainError("normalized errors are undefined for a constant truth")
    return error_norms(pair) / sd


def cme(pair: AlignedPair) -> float:
    """Cumulative maximum error in [0, 1]."""
    present = pair.present
    sd, _ = sd_mu(pair.truth)
    if sd == 0.0:
        perfect = bool(np.all(present)) and np.array_equal(pair.prediction, pair.truth)
        return 0.0 if perfect else 1.0

    clipped = np.minimum(1.0, error_norms(pair) / sd)
    clipped[~present] = 1.0
    running = np.maximum.accumulate(clipped)
    return math.fsum(running) / running.shape[0]


def smape(pair: AlignedPair) -> Optional[float]:
    """
    sMAPE in [0, 200] over the present entries; None if nothing is present.

    Raises:
        MetricDomainError: If a present entry has û = u = 0
    """
    present = pair.present
    if not np.any(present):
        return None
    prediction = pair.prediction[present]
    truth = pair.truth[present]
    numerator = np.linalg.norm(prediction - truth, axis=1)
    denominator = np.linalg.norm(prediction, axis=1) + np.linalg.norm(truth, axis=1)
    if np.any(denominator == 0.0):
        raise MetricDomainError("sMAPE is undefined where prediction and truth are both zero")
    value = 200.0 * math.fsum(numerator / denominator) / numerator.shape[0]
    return min(200.0, max(0.0, value))


def valid_time(pair: AlignedPair, cfg: MetricConfig = MetricConfig()) -> float:
    """
    Time from T until the normalized error first exceeds κ; S if it never does.

    Raises:
        MetricDomainError: If the truth has zero spread
    """
    errors = normalized_errors(pair)
    exceeded = ~pair.present | (errors > cfg.kappa)
    hits = np.flatnonzero(exceeded)
    if hits.size == 0:
        return pair.horizon
    return float(pair.times[hits[0]] - pair.start_time)


def score(pair: AlignedPair, cfg: MetricConfig = MetricConfig()) -> MetricScores:
    """
    All three metrics. Where a metric is undefined, the score falls back:
    valid time 0 for a constant truth, sMAPE absent for a 0/0 entry.
    """
    try:
        tvalid = valid_time(pair, cfg)
    except MetricDomainError:
        tvalid = 0.0
    try:
        smape_value = smape(pair)
    except MetricDomainError:
        smape_value = None
    return MetricScores(cme=cme(pair), smape=smape_value, valid_time=tvalid)
