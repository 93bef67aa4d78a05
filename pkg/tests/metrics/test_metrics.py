import math

import numpy as np
import pytest

from chaoscast.metrics import cme, normalized_errors, score, sd_mu, smape, valid_time
from chaoscast.schemas.metrics import AlignedPair, MetricConfig, MetricDomainError


def pair(truth, prediction, start_time=0.0, dt=0.01):
    truth = np.asarray(truth, dtype=float)
    times = start_time + dt * np.arange(1, truth.shape[0] + 1)
    return AlignedPair(times=times, truth=truth, prediction=prediction, start_time=start_time)


def brute_force_cme(truth: np.ndarray, prediction: np.ndarray) -> float:
    """Direct nested-loop evaluation of the discrete CME."""
    m = truth.shape[0]
    mu = truth.mean(axis=0)
    sd = float(np.sqrt(np.mean(np.sum((truth - mu) ** 2, axis=1))))
    norms = np.linalg.norm(prediction - truth, axis=1)
    terms = []
    for j in range(m):
        running = 0.0
        for k in range(j + 1):
            if not np.all(np.isfinite(prediction[k])):
                value = 1.0
            else:
                value = min(1.0, norms[k] / sd)
            running = max(running, value)
        terms.append(running)
    return math.fsum(terms) / m


class TestSdMu:
    def test_constant(self):
        """Test zero spread of a constant truth"""
        sd, mu = sd_mu(np.full((4, 2), 3.0))
        assert sd == 0.0
        np.testing.assert_array_equal(mu, [3.0, 3.0])

    def test_symmetric(self):
        """Test a symmetric two-point truth"""
        sd, mu = sd_mu(np.array([[1.0, 0.0], [-1.0, 0.0]]))
        assert sd == pytest.approx(1.0)
        np.testing.assert_array_equal(mu, [0.0, 0.0])

    def test_three_points(self):
        """Test sd = √(2/3) for (0, 1, 2)"""
        sd, mu = sd_mu(np.array([0.0, 1.0, 2.0]))
        assert sd == pytest.approx(math.sqrt(2.0 / 3.0))
        assert mu[0] == pytest.approx(1.0)


class TestCme:
    def test_perfect(self, rng):
        """Test zero CME for a perfect prediction"""
        truth = rng.normal(size=(10, 3))
        assert cme(pair(truth, truth.copy())) == 0.0

    def test_large_first_error(self, rng):
        """Test that an error above sd at the first time gives 1"""
        truth = rng.normal(size=(10, 3))
        sd, _ = sd_mu(truth)
        prediction = truth.copy()
        prediction[0, 0] += 2 * sd
        assert cme(pair(truth, prediction)) == 1.0

    def test_worked_example(self):
        """Test (0.2 + 0.2 + 0.5) / 3 for normalized errors (0.2, 0.1, 0.5)"""
        truth = np.array([0.0, 1.0, 2.0])
        sd = math.sqrt(2.0 / 3.0)
        prediction = truth + sd * np.array([0.2, 0.1, 0.5])
        assert cme(pair(truth, prediction)) == pytest.approx(0.3, abs=1e-12)

    def test_missing_counts_as_one(self, rng):
        """Test that missing rows contribute 1 and never NaN"""
        truth = rng.normal(size=(4, 3))
        prediction = truth.copy()
        prediction[2] = np.nan
        assert cme(pair(truth, prediction)) == pytest.approx(0.5)
        assert cme(pair(truth, np.full_like(truth, np.nan))) == 1.0
        prediction[1, 0] = np.inf
        assert math.isfinite(cme(pair(truth, prediction)))

    def test_constant_truth(self):
        """Test the zero-spread convention"""
        truth = np.full((3, 2), 1.0)
        assert cme(pair(truth, truth.copy())) == 0.0
        assert cme(pair(truth, truth + 1e-9)) == 1.0

    def test_brute_force_oracle(self):
        """Test exact agreement with a nested-loop oracle"""
        rng = np.random.default_rng(2024)
        for _ in range(1000):
            m = int(rng.integers(1, 21))
            truth = rng.normal(size=(m, 3))
            if m == 1:
                truth = np.vstack([truth, truth + 1.0])
                m = 2
            prediction = truth + rng.normal(scale=rng.uniform(0.01, 2.0), size=(m, 3))
            if rng.uniform() < 0.2:
                prediction[int(rng.integers(0, m))] = np.nan
            assert cme(pair(truth, prediction)) == brute_force_cme(truth, prediction)

    def test_bounded(self):
        """Test CME ∈ [0, 1] on random instances"""
        rng = np.random.default_rng(7)
        for _ in range(1000):
            truth = rng.normal(size=(8, 3))
            prediction = truth + rng.normal(scale=rng.uniform(0, 5), size=(8, 3))
            assert 0.0 <= cme(pair(truth, prediction)) <= 1.0

    def test_running_max_monotone(self, rng):
        """Test that the clipped running maximum never decreases"""
        truth = rng.normal(size=(30, 3))
        prediction = truth + rng.normal(scale=0.3, size=(30, 3))
        errors = np.minimum(1.0, normalized_errors(pair(truth, prediction)))
        assert np.all(np.diff(np.maximum.accumulate(errors)) >= 0)

    def test_affine_invariance(self):
        """Test invariance of CME and valid time under (cû + b, cu + b)"""
        rng = np.random.default_rng(3)
        cfg = MetricConfig()
        for _ in range(200):
            truth = rng.normal(size=(12, 3))
            prediction = truth + rng.normal(scale=0.4, size=(12, 3))
            c = rng.choice([-1.0, 1.0]) * rng.uniform(0.1, 10.0)
            b = rng.normal(size=3) * 5
            base = pair(truth, prediction)
            moved = pair(c * truth + b, c * prediction + b)
            assert cme(moved) == pytest.approx(cme(base), abs=1e-12)
            assert valid_time(moved, cfg) == pytest.approx(valid_time(base, cfg), abs=1e-12)

    def test_dominance(self, rng):
        """Test that a strictly smaller first error gives a strictly smaller CME"""
        truth = rng.normal(size=(10, 3))
        sd, _ = sd_mu(truth)
        worse = truth + 0.3 * sd / math.sqrt(3)
        better = worse.copy()
        better[0] = truth[0] + 0.1 * sd / math.sqrt(3)
        assert cme(pair(truth, better)) < cme(pair(truth, worse))
        worse[0] = truth[0] + 0.35 * sd / math.sqrt(3)
        assert cme(pair(truth, better)) < cme(pair(truth, worse))


class TestSmape:
    def test_perfect(self, rng):
        """Test zero sMAPE for û ≡ u"""
        truth = rng.normal(size=(5, 3)) + 5
        assert smape(pair(truth, truth.copy())) == 0.0

    def test_opposite(self, rng):
        """Test 200 for û = −u"""
        truth = rng.normal(size=(5, 3)) + 5
        assert smape(pair(truth, -truth)) == pytest.approx(200.0)

    def test_single_time(self):
        """Test 200·|3 − 1| / (3 + 1) = 100"""
        assert smape(pair(np.array([[1.0]]), np.array([[3.0]]))) == pytest.approx(100.0)

    def test_symmetric(self, rng):
        """Test sMAPE(û, u) = sMAPE(u, û)"""
        a = rng.normal(size=(6, 3))
        b = rng.normal(size=(6, 3))
        assert smape(pair(a, b)) == smape(pair(b, a))

    def test_missing_excluded(self):
        """Test the average over present entries only"""
        truth = np.array([[1.0], [1.0]])
        prediction = np.array([[3.0], [np.nan]])
        assert smape(pair(truth, prediction)) == pytest.approx(100.0)
        assert smape(pair(truth, np.full_like(truth, np.nan))) is None

    def test_zero_over_zero(self):
        """Test the domain error for û = u = 0"""
        truth = np.array([[0.0], [1.0]])
        with pytest.raises(MetricDomainError):
            smape(pair(truth, truth.copy()))


class TestValidTime:
    def test_never_exceeded(self, rng):
        """Test that a perfect forecast is valid over the whole horizon"""
        truth = rng.normal(size=(10, 3))
        assert valid_time(pair(truth, truth.copy(), start_time=100.0)) == pytest.approx(0.1)

    def test_first_time(self, rng):
        """Test an exceedance at the first test time"""
        truth = rng.normal(size=(10, 3))
        prediction = truth + 100.0
        assert valid_time(pair(truth, prediction, start_time=100.0)) == pytest.approx(0.01)

    def test_second_time(self):
        """Test normalized errors (0.1, 0.5, 0.2) with κ = 0.4"""
        truth = np.array([0.0, 1.0, 2.0])
        sd = math.sqrt(2.0 / 3.0)
        prediction = truth + sd * np.array([0.1, 0.5, 0.2])
        assert valid_time(pair(truth, prediction), MetricConfig(kappa=0.4)) == pytest.approx(0.02)

    def test_missing_is_exceedance(self, rng):
        """Test that a missing row ends the valid period"""
        truth = rng.normal(size=(5, 3))
        prediction = truth.copy()
        prediction[3] = np.nan
        assert valid_time(pair(truth, prediction)) == pytest.approx(0.04)

    def test_constant_truth(self):
        """Test the domain error for zero spread"""
        truth = np.ones((3, 3))
        with pytest.raises(MetricDomainError):
            valid_time(pair(truth, truth.copy()))


class TestScore:
    def test_all_metrics(self, rng):
        """Test that score bundles the three metrics"""
        truth = rng.normal(size=(10, 3))
        prediction = truth + 0.01
        result = score(pair(truth, prediction))
        assert result.cme == cme(pair(truth, prediction))
        assert result.smape == smape(pair(truth, prediction))
        assert result.valid_time == pytest.approx(0.1)

    def test_fallbacks(self):
        """Test valid time 0 for a constant truth and absent sMAPE for 0/0"""
        truth = np.zeros((3, 3))
        result = score(pair(truth, truth.copy()))
        assert result.cme == 0.0
        assert result.valid_time == 0.0
        assert result.smape is None

    def test_misaligned(self):
        """Test validation of unequal lengths"""
        with pytest.raises(ValueError):
            AlignedPair(times=[1.0, 2.0], truth=np.ones((2, 3)), prediction=np.ones((3, 3)), start_time=0.0)
