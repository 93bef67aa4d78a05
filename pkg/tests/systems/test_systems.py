import numpy as np
import pytest

from chaoscast.numkit.integrate import rk4_trajectory
from chaoscast.schemas.numerics import NumericsError
from chaoscast.schemas.systems import LorenzParams, ObservationScheme, SystemKind, TimestepMode, get_scheme
from chaoscast.systems import (
    ConstantLorenzField,
    derive_rng,
    derive_seed,
    eval_field,
    generate_instance,
    sample_initial_condition,
    sample_nonpar_field,
    sample_random_params,
)
from chaoscast.systems.generation import approaches_fixed_point, observation_times


class TestVectorFields:
    def test_origin_is_fixed(self):
        """Test the standard field at the origin"""
        np.testing.assert_array_equal(eval_field(ConstantLorenzField(), np.zeros(3)), np.zeros(3))

    def test_standard_at_ones(self):
        """Test direct substitution with σ=10, ρ=28, β=8/3"""
        out = eval_field(ConstantLorenzField(), np.ones(3))
        np.testing.assert_allclose(out, [0.0, 26.0, -5.0 / 3.0], atol=1e-14)

    def test_zero_parameters(self):
        """Test the reduction (0, −u₂, u₁u₂) for zero parameters"""
        field = ConstantLorenzField(LorenzParams(sigma=0.0, rho=0.0, beta=0.0), kind=SystemKind.random)
        u = np.array([2.0, -3.0, 5.0])
        np.testing.assert_allclose(eval_field(field, u), [0.0, 3.0, -6.0])

    def test_batch_evaluation(self, rng):
        """Test that a batch equals row-wise evaluation"""
        u = rng.normal(size=(4, 3))
        field = ConstantLorenzField()
        batch = eval_field(field, u)
        for row in range(4):
            np.testing.assert_allclose(batch[row], eval_field(field, u[row]))

    def test_non_finite_state(self):
        """Test the error on a NaN state"""
        with pytest.raises(NumericsError):
            eval_field(ConstantLorenzField(), np.array([np.nan, 0.0, 0.0]))


class TestRandomParameters:
    def test_intervals(self):
        """Test that draws stay in their sampling intervals"""
        rng = np.random.default_rng(0)
        for _ in range(200):
            p = sample_random_params(rng)
            assert 5 <= p.sigma <= 15 and 20 <= p.rho <= 80 and 2 <= p.beta <= 6

    def test_deterministic(self):
        """Test identical parameters for the same seed"""
        assert sample_random_params(np.random.default_rng(7)) == sample_random_params(np.random.default_rng(7))

    def test_rho_mean(self):
        """Test the Monte Carlo mean of ρ"""
        rng = np.random.default_rng(1)
        rhos = [sample_random_params(rng).rho for _ in range(10_000)]
        assert 48 <= np.mean(rhos) <= 52


class TestNonparametricField:
    def test_parameters_in_intervals(self, rng):
        """Test σ(u), ρ(u), β(u) on a probe grid"""
        field = sample_nonpar_field(np.random.default_rng(3))
        probes = rng.uniform(-60, 60, size=(2000, 3))
        sigma, rho, beta = field.parameters(probes)
        assert np.all((sigma >= 5) & (sigma <= 15))
        assert np.all((rho >= 20) & (rho <= 80))
        assert np.all((beta >= 2) & (beta <= 6))

    def test_repeatable(self, rng):
        """Test identical values for the same seed"""
        probes = rng.normal(size=(10, 3)) * 10
        first = sample_nonpar_field(np.random.default_rng(5)).parameters(probes)
        second = sample_nonpar_field(np.random.default_rng(5)).parameters(probes)
        for a, b in zip(first, second):
            np.testing.assert_array_equal(a, b)

    def test_gradient_matches_differences(self):
        """Test the analytic gradient of ρ(u) against central differences"""
        field = sample_nonpar_field(np.random.default_rng(11))
        u = np.array([3.0, -4.0, 20.0])
        analytic = field.parameter_gradient("rho", u)
        eps = 1e-4
        numeric = np.array([
            (field.functions["rho"](u + eps * e) - field.functions["rho"](u - eps * e)) / (2 * eps)
            for e in np.eye(3)
        ])
        np.testing.assert_allclose(analytic, numeric, atol=1e-5)


class TestInitialConditions:
    def test_on_attractor(self):
        """Test that sampled states lie in the attractor's bounding region"""
        rng = np.random.default_rng(2)
        for _ in range(20):
            assert np.linalg.norm(sample_initial_condition(rng)) < 100

    def test_same_seed(self):
        """Test determinism of the initial condition"""
        a = sample_initial_condition(np.random.default_rng(9))
        b = sample_initial_condition(np.random.default_rng(9))
        np.testing.assert_array_equal(a, b)

    def test_different_seeds(self):
        """Test that different seeds give different states"""
        a = sample_initial_condition(np.random.default_rng(1))
        b = sample_initial_condition(np.random.default_rng(2))
        assert np.linalg.norm(a - b) > 1e-3


class TestObservationTimes:
    def test_constant_grid(self):
        """Test the constant scheme grid i·Δt₀"""
        times = observation_times(get_scheme("const-noisefree"), 100.0, np.random.default_rng(0))
        assert times.shape == (10_000,)
        np.testing.assert_allclose(times[:3], [0.01, 0.02, 0.03])
        assert times[-1] == pytest.approx(100.0)

    def test_exponential_count(self):
        """Test the mean count of exponential observation times"""
        scheme = get_scheme("random-noisefree")
        counts = [observation_times(scheme, 100.0, np.random.default_rng(seed)).shape[0] for seed in range(50)]
        assert 9_500 <= np.mean(counts) <= 10_500

    def test_exponential_times_increase(self):
        """Test strictly increasing times below T"""
        times = observation_times(get_scheme("random-noisy"), 10.0, np.random.default_rng(4))
        assert np.all(np.diff(times) > 0)
        assert times[-1] < 10.0


class TestGenerateInstance:
    def test_constant_noise_free(self):
        """Test a short noise-free instance against the solver"""
        scheme = get_scheme("const-noisefree")
        instance = generate_instance(SystemKind.standard, scheme, seed=17, T=5.0, S=1.0)
        assert len(instance.train) == 500
        assert len(instance.truth) == 100
        np.testing.assert_allclose(instance.truth.times[0], 5.01)
        assert instance.meta.n == 500 and instance.meta.m == 100
        # u_T continues the training trajectory
        assert np.linalg.norm(instance.train.states[-1] - instance.u_T) < 1e-12

    def test_noise_free_matches_solver(self):
        """Test observations against a direct RK4 run at the solver step"""
        scheme = get_scheme("const-noisefree")
        instance = generate_instance(SystemKind.standard, scheme, seed=3, T=1.0, S=0.1)
        rng = np.random.default_rng(3)
        u0 = sample_initial_condition(rng)
        trajectory = rk4_trajectory(ConstantLorenzField(), u0, 1e-3, 1000)
        np.testing.assert_allclose(instance.train.states, trajectory[10::10], atol=1e-8)

    def test_bit_reproducible(self):
        """Test identical instances for identical seeds"""
        scheme = get_scheme("random-noisy")
        a = generate_instance(SystemKind.random, scheme, seed=21, T=2.0, S=0.5)
        b = generate_instance(SystemKind.random, scheme, seed=21, T=2.0, S=0.5)
        np.testing.assert_array_equal(a.train.states, b.train.states)
        np.testing.assert_array_equal(a.train.times, b.train.times)
        assert a.meta.params == b.meta.params

    def test_noisy_u_T_is_clean(self):
        """Test that noise affects observations but not u_T"""
        noisy = generate_instance(SystemKind.standard, get_scheme("const-noisy"), seed=8, T=2.0, S=0.5)
        clean = generate_instance(SystemKind.standard, get_scheme("const-noisefree"), seed=8, T=2.0, S=0.5)
        np.testing.assert_array_equal(noisy.u_T, clean.u_T)
        residual = noisy.train.states - clean.train.states
        assert 0.05 < residual.std() < 0.15

    def test_noise_uncorrelated(self):
        """Test the lag-1 autocorrelation of the observation noise"""
        noisy = generate_instance(SystemKind.standard, get_scheme("const-noisy"), seed=12, T=35.0, S=0.5)
        clean = generate_instance(SystemKind.standard, get_scheme("const-noisefree"), seed=12, T=35.0, S=0.5)
        eps = (noisy.train.states - clean.train.states).reshape(-1)
        assert abs(np.corrcoef(eps[:-1], eps[1:])[0, 1]) < 0.05

    def test_nonparametric_bounded(self):
        """Test that an accepted nonparametric trajectory stays bounded"""
        instance = generate_instance(SystemKind.nonparametric, get_scheme("const-noisefree"), seed=5, T=10.0, S=1.0)
        assert np.max(np.abs(instance.train.states)) < 200
        assert instance.meta.rejections <= 20

    def test_fixed_point_detection(self):
        """Test the tail-variance rejection rule on a decaying trajectory"""
        t = np.arange(0, 50, 1e-2)
        decaying = np.exp(-t)[:, None] * np.ones((1, 3))
        assert approaches_fixed_point(decaying, 1e-2)
        oscillating = np.sin(t)[:, None] * np.ones((1, 3))
        assert not approaches_fixed_point(oscillating, 1e-2)


class TestSeeding:
    def test_pure_function(self):
        """Test that seeds depend only on their arguments"""
        assert derive_seed(42, "instance", 0, 1, 2, 3) == derive_seed(42, "instance", 0, 1, 2, 3)

    def test_role_and_indices_matter(self):
        """Test that role tags and indices separate streams"""
        base = derive_seed(42, "instance", 0, 0, 0, 1)
        assert base != derive_seed(42, "fit", 0, 0, 0, 1)
        assert base != derive_seed(42, "instance", 0, 0, 0, 2)
        assert base != derive_seed(43, "instance", 0, 0, 0, 1)
        assert 0 <= base < 2 ** 64

    def test_rng(self):
        """Test that derived generators reproduce their streams"""
        a = derive_rng(1, "perturb").normal(size=3)
        b = derive_rng(1, "perturb").normal(size=3)
        np.testing.assert_array_equal(a, b)
