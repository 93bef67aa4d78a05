import numpy as np
import pytest
from pydantic import ValidationError
from scipy.sparse import csr_matrix

from chaoscast.forecasters import build_propagator_data, fit, predict, propagator_rollout
from chaoscast.forecasters.reservoir import reservoir_matrix, spectral_radius
from chaoscast.schemas.methods import ForecastError, MethodConfig, PropagatorConfig, Target
from chaoscast.schemas.series import ForecastProblem, TimeSeries


def series(values, dt=1.0) -> TimeSeries:
    values = np.asarray(values, dtype=float)
    return TimeSeries(times=dt * np.arange(values.shape[0]), states=values)


def continuation(train: TimeSeries, steps: int, dt: float) -> ForecastProblem:
    start = float(train.times[-1])
    return ForecastProblem(train=train, u_T=train.states[-1], start_time=start,
                           target_times=start + dt * np.arange(1, steps + 1))


class TestPropagatorData:
    def test_one_step_pairs(self, rng):
        """Test K=0, ψ=0 with S target: pairs (Y_i, Y_{i+1})"""
        train = series(rng.normal(size=(8, 3)), dt=0.5)
        inputs, targets, dts = build_propagator_data(train, PropagatorConfig())
        np.testing.assert_array_equal(inputs, train.states[:-1])
        np.testing.assert_array_equal(targets, train.states[1:])
        np.testing.assert_allclose(dts, 0.5)

    def test_constant_series(self):
        """Test all-zero difference quotients for a constant series"""
        train = series(np.full((6, 3), 2.0))
        _, targets, _ = build_propagator_data(train, PropagatorConfig(target=Target.diff_quotient))
        np.testing.assert_array_equal(targets, 0.0)

    def test_lags(self):
        """Test K=1, s=2 on a scripted six-point series"""
        train = series(10.0 * np.arange(6))
        inputs, targets, _ = build_propagator_data(train, PropagatorConfig(past_steps=1, skip=2))
        np.testing.assert_array_equal(inputs, [[0.0, 20.0], [10.0, 30.0], [20.0, 40.0]])
        np.testing.assert_array_equal(targets, [[30.0], [40.0], [50.0]])

    def test_forward_skip(self):
        """Test ψ=1 difference quotients over two observation intervals"""
        train = TimeSeries(times=[0.0, 1.0, 3.0, 4.0], states=[0.0, 1.0, 9.0, 16.0])
        cfg = PropagatorConfig(target=Target.diff_quotient, forward_skip=1)
        inputs, targets, dts = build_propagator_data(train, cfg)
        np.testing.assert_array_equal(dts, [3.0, 3.0])
        np.testing.assert_allclose(targets[:, 0], [3.0, 5.0])

    def test_too_short(self):
        """Test the error when the lags do not fit"""
        with pytest.raises(ForecastError):
            build_propagator_data(series([0.0, 1.0, 2.0]), PropagatorConfig(past_steps=1, skip=2))

    def test_forward_skip_needs_memoryless_input(self):
        """Test that ψ > 0 with lags is rejected"""
        with pytest.raises(ValidationError):
            PropagatorConfig(past_steps=1, forward_skip=1)


class TestRollout:
    def test_identity_is_persistence(self):
        """Test that an identity S-map repeats u(T)"""
        u_T = np.array([1.0, 2.0, 3.0])
        out = propagator_rollout(lambda x, dt: x, u_T, 0.0, 0.1 * np.arange(1, 6), PropagatorConfig())
        np.testing.assert_array_equal(out.states, np.tile(u_T, (5, 1)))

    def test_linear_recursion(self):
        """Test an exact multi-step forecast of a two-state linear map"""
        A = np.array([[0.9, 0.2], [-0.1, 0.95]])
        u = np.array([1.0, -1.0])
        out = propagator_rollout(lambda x, dt: A @ x, u, 0.0, np.arange(1.0, 5.0), PropagatorConfig())
        expected = [np.linalg.matrix_power(A, k) @ u for k in range(1, 5)]
        np.testing.assert_allclose(out.states, expected, rtol=1e-12)

    def test_forward_skip_interpolation(self):
        """Test exact intermediate points of a line with ψ=1"""
        cfg = PropagatorConfig(target=Target.diff_quotient, forward_skip=1)
        targets = 0.1 * np.arange(1, 5)
        out = propagator_rollout(lambda x, dt: np.array([2.0]), np.array([1.0]), 0.0, targets, cfg)
        np.testing.assert_allclose(out.states[:, 0], 1.0 + 2.0 * targets, rtol=1e-12)

    def test_divergence_leaves_missing_tail(self):
        """Test that a state beyond the bound ends the forecast"""
        out = propagator_rollout(lambda x, dt: 1e4 * x, np.array([1.0]), 0.0, [1.0, 2.0, 3.0], PropagatorConfig())
        assert out.states[0, 0] == 1e4
        assert np.all(np.isnan(out.states[1:]))

    def test_lag_history_replicates_start(self):
        """Test that missing lags are filled with u(T)"""
        seen = []

        def step(x, dt):
            seen.append(x.copy())
            return x[-1:]

        propagator_rollout(step, np.array([5.0]), 0.0, [1.0], PropagatorConfig(past_steps=2, skip=1))
        np.testing.assert_array_equal(seen[0], [5.0, 5.0, 5.0])

    def test_non_uniform_targets(self):
        """Test the error for unevenly spaced target times"""
        with pytest.raises(ForecastError):
            propagator_rollout(lambda x, dt: x, np.array([1.0]), 0.0, [0.1, 0.3], PropagatorConfig())


class TestLinear:
    def test_recovers_linear_map(self):
        """Test an exact forecast of data generated by a linear contraction"""
        angle = 0.3
        A = 0.97 * np.array([
            [np.cos(angle), -np.sin(angle), 0.0],
            [np.sin(angle), np.cos(angle), 0.0],
            [0.0, 0.0, 1.0],
        ])
        states = [np.array([1.0, 2.0, 3.0])]
        for _ in range(59):
            states.append(A @ states[-1])
        train = series(np.array(states), dt=0.1)
        fitted = fit(MethodConfig(method="LinS", params={"degree": 1, "penalty": 0.0}), train)
        out = predict(fitted, continuation(train, 5, 0.1))
        expected = [np.linalg.matrix_power(A, k) @ states[-1] for k in range(1, 6)]
        np.testing.assert_allclose(out.states, expected, atol=1e-6)

    def test_heavy_penalty_is_persistence(self, lorenz_train):
        """Test that λ → ∞ shrinks the D-increment to zero"""
        fitted = fit(MethodConfig(method="LinD", params={"degree": 1, "penalty": 1e12}), lorenz_train)
        out = predict(fitted, continuation(lorenz_train, 10, 0.01))
        np.testing.assert_allclose(out.states, np.tile(lorenz_train.states[-1], (10, 1)), atol=1e-3)

    def test_feature_limit(self, lorenz_train):
        """Test the error for an oversized feature map"""
        config = MethodConfig(method="LinD", params={"degree": 6, "past_steps": 4, "penalty": 1.0})
        with pytest.raises(ForecastError):
            fit(config, lorenz_train)

    def test_timestep_variant(self, lorenz_train):
        """Test that T-variants fit and forecast"""
        fitted = fit(MethodConfig(method="LinDT", params={"degree": 2, "penalty": 1e-6}), lorenz_train)
        out = predict(fitted, continuation(lorenz_train, 10, 0.01))
        assert np.all(np.isfinite(out.states))
        assert fitted.fit_info["features"] == 11


class TestRandomFeatures:
    def test_seed_fixes_weights(self, lorenz_train):
        """Test reproducible random weights for a fixed seed"""
        config = MethodConfig(method="RaFeD", params={"units": 50, "seed": 4})
        first = fit(config, lorenz_train, np.random.default_rng(1))
        second = fit(config, lorenz_train, np.random.default_rng(2))
        np.testing.assert_array_equal(first.model[0][0], second.model[0][0])
        np.testing.assert_array_equal(first.model[0][2].weights, second.model[0][2].weights)

    def test_fit_stream(self, lorenz_train):
        """Test that the fit stream drives the weights when no seed is set"""
        config = MethodConfig(method="RaFeS", params={"units": 50})
        first = fit(config, lorenz_train, np.random.default_rng(1))
        second = fit(config, lorenz_train, np.random.default_rng(2))
        assert not np.array_equal(first.model[0][0], second.model[0][0])


class TestEchoStateNetwork:
    def test_spectral_radius_complex_pair(self):
        """Test the exact magnitude when the dominant eigenvalues are a rotating pair"""
        dense = np.zeros((10, 10))
        dense[:2, :2] = [[0.0, -2.0], [2.0, 0.0]]
        dense[2:, 2:] = 0.5 * np.eye(8)
        assert spectral_radius(csr_matrix(dense)) == pytest.approx(2.0, rel=1e-10)
        assert spectral_radius(csr_matrix(dense[:2, :2])) == pytest.approx(2.0, rel=1e-10)

    def test_spectral_radius(self):
        """Test scaling of the reservoir to radius 0.1"""
        matrix = reservoir_matrix(np.random.default_rng(0), units=100, node_degree=6, radius=0.1)
        assert 0.099 <= spectral_radius(matrix) <= 0.101
        np.testing.assert_array_equal(matrix.getnnz(axis=1), 6)

    def test_bit_identical_reservoir(self):
        """Test identical reservoirs for identical seeds"""
        a = reservoir_matrix(np.random.default_rng(5), units=40)
        b = reservoir_matrix(np.random.default_rng(5), units=40)
        np.testing.assert_array_equal(a.toarray(), b.toarray())

    def test_node_degree_too_large(self):
        """Test the error for more connections than units"""
        with pytest.raises(ForecastError):
            reservoir_matrix(np.random.default_rng(0), units=4, node_degree=6)

    def test_deterministic_fit(self, lorenz_train):
        """Test identical readouts for the same fit stream"""
        train = lorenz_train.head(300)
        config = MethodConfig(method="EsnS", params={"units": 50})
        first = fit(config, train, np.random.default_rng(3))
        second = fit(config, train, np.random.default_rng(3))
        np.testing.assert_array_equal(first.model[0]["ridge"].weights, second.model[0]["ridge"].weights)
        out = predict(first, continuation(train, 10, 0.01))
        assert out.states.shape == (10, 3)


class TestKernelPropagators:
    def test_exact_training_pair(self, make_lorenz):
        """Test that λ=0 reproduces the next state of a training input"""
        train = make_lorenz(n=30, dt=0.1)
        fitted = fit(MethodConfig(method="PgGpS", params={"bandwidth": 0.05, "penalty": 0.0}), train)
        problem = ForecastProblem(train=train, u_T=train.states[10], start_time=train.times[-1],
                                  target_times=[train.times[-1] + 0.1])
        np.testing.assert_allclose(predict(fitted, problem).states[0], train.states[11], atol=1e-8)

    def test_local_linear_forecast(self, make_lorenz):
        """Test a short local-linear D forecast against the continuation"""
        full = make_lorenz(n=2005)
        train = full.head(2000)
        fitted = fit(MethodConfig(method="PgLlD", params={"bandwidth": 0.1, "neighbors": 30}), train)
        out = predict(fitted, continuation(train, 5, 0.01))
        np.testing.assert_allclose(out.states, full.states[2000:], atol=1.0)
