import pytest

from chaoscast.schemas.manifest import RunManifest


@pytest.fixture
def small_manifest(tmp_path):
    """One short noise-free standard dataset with two repetitions per split."""
    return RunManifest(
        systems=["lorenz63std"],
        schemes=["const-noisefree"],
        validation_reps=2,
        test_reps=2,
        train_time=3.0,
        test_time=0.5,
        data_root=tmp_path / "data",
        results_root=tmp_path / "results",
    )
