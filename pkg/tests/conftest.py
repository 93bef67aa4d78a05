import numpy as np
import pytest

from chaoscast.schemas.series import TimeSeries


@pytest.fixture(params=["asyncio", "trio"])
def anyio_backend(request):
    """Runs every async test under both supported backends."""
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def lorenz_series(n: int = 2000, dt: float = 1e-2, start=(1.0, 1.0, 20.0), burn: int = 500) -> TimeSeries:
    """Standard Lorenz63 observations on a constant grid, integrated with RK4 at dt/10."""
    from chaoscast.numkit.integrate import rk4_trajectory
    from chaoscast.systems.lorenz import ConstantLorenzField

    states = rk4_trajectory(ConstantLorenzField(), np.asarray(start, dtype=float), dt / 10, (burn + n - 1) * 10)
    states = states[burn * 10::10]
    return TimeSeries(times=dt * np.arange(n), states=states)


@pytest.fixture(scope="session")
def lorenz_train():
    return lorenz_series()


@pytest.fixture
def make_lorenz():
    """Factory for Lorenz63 observation series of a chosen length and step."""
    return lorenz_series
