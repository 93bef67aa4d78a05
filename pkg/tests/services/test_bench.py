import json

import numpy as np
import pytest

from chaoscast.schemas.methods import MethodConfig
from chaoscast.schemas.results import SCORE_COLUMNS, AggregateRow, BenchError, ScoreRecord, Split
from chaoscast.services.bench import (
    BenchService,
    aggregate,
    confidence_half_width,
    paired_t_test,
    relative_differences,
    ttest_matrix,
)
from chaoscast.services.datasets import DatasetService


def record(method, rep, cme, system="lorenz63std", scheme="const-noisefree", **extra):
    return ScoreRecord(method=method, system=system, scheme=scheme, split=Split.test, rep=rep,
                       cme=cme, smape=extra.pop("smape", 10.0), valid_time=extra.pop("valid_time", 1.0), **extra)


def summary(method, mean_cme, system="lorenz63std", scheme="const-noisefree"):
    return AggregateRow(method=method, system=system, scheme=scheme, n=3, mean_cme=mean_cme,
                        rank=1, mean_valid_time=1.0)


async def bench_for(manifest) -> BenchService:
    datasets = DatasetService(manifest.data_root, manifest)
    assert await datasets.generate(manifest.systems, manifest.schemes) == []
    return BenchService(datasets, manifest, manifest.results_root)


class TestAggregate:
    def test_confidence_interval(self):
        """Test mean 0.2 and half-width 0.2484 for scores {0.1, 0.2, 0.3}"""
        rows = aggregate([record("LinD", rep, cme) for rep, cme in enumerate([0.1, 0.2, 0.3])])
        assert len(rows) == 1
        assert rows[0].mean_cme == pytest.approx(0.2)
        assert rows[0].ci_half_width == pytest.approx(0.2484, abs=1e-4)

    def test_single_repetition(self):
        """Test that one repetition has no interval"""
        assert aggregate([record("LinD", 0, 0.4)])[0].ci_half_width is None
        assert confidence_half_width([0.4]) is None

    def test_identical_scores(self):
        """Test a zero half-width for identical scores"""
        assert confidence_half_width([0.3, 0.3, 0.3]) == 0.0

    def test_ranks(self):
        """Test ranks within a dataset with ties broken by method name"""
        records = [
            record("ConstM", 0, 0.9), record("LinD", 0, 0.2), record("Analog", 0, 0.2),
            record("ConstM", 0, 0.1, scheme="const-noisy"),
        ]
        ranks = {(r.scheme, r.method): r.rank for r in aggregate(records)}
        assert ranks[("const-noisefree", "Analog")] == 1
        assert ranks[("const-noisefree", "LinD")] == 2
        assert ranks[("const-noisefree", "ConstM")] == 3
        assert ranks[("const-noisy", "ConstM")] == 1

    def test_missing_smape_and_failures(self):
        """Test the sMAPE mean over present values and the failure count"""
        records = [record("LinD", 0, 1.0, smape=None, failed=True), record("LinD", 1, 0.5, smape=20.0)]
        row = aggregate(records)[0]
        assert row.mean_smape == 20.0
        assert row.failed == 1


class TestPairedTTest:
    def test_degenerate_zero(self):
        """Test p = 1 for all-zero differences"""
        result = paired_t_test([0.0, 0.0, 0.0])
        assert result.degenerate and result.p_value == 1.0

    def test_degenerate_negative(self):
        """Test a tiny positive p for identical negative differences"""
        result = paired_t_test([-0.1] * 5)
        assert result.degenerate
        assert 0.0 < result.p_value < 1e-300

    def test_clearly_better(self):
        """Test p < 10⁻⁶ for differences around −1"""
        diffs = np.random.default_rng(0).normal(-1.0, 0.01, size=100)
        assert paired_t_test(diffs).p_value < 1e-6

    def test_sign_flip(self, rng):
        """Test p′ = 1 − p for negated differences"""
        diffs = rng.normal(0.05, 0.2, size=20)
        assert paired_t_test(-diffs).p_value == pytest.approx(1.0 - paired_t_test(diffs).p_value)

    def test_too_few(self):
        """Test the error for a single repetition"""
        with pytest.raises(BenchError):
            paired_t_test([0.1])

    def test_matrix(self):
        """Test the p-value matrix with an empty diagonal"""
        records = [record("A", rep, 0.1 + 0.01 * rep) for rep in range(4)]
        records += [record("B", rep, 0.5 + 0.02 * rep) for rep in range(4)]
        matrix = ttest_matrix(records, "lorenz63std", "const-noisefree")
        assert list(matrix.index) == ["A", "B"] and list(matrix.columns) == ["A", "B"]
        assert np.isnan(matrix.loc["A", "A"])
        assert matrix.loc["A", "B"] < 0.01
        assert matrix.loc["B", "A"] > 0.99


class TestRelativeDifferences:
    def test_timestep_and_target(self):
        """Test (base − variant) / base for the timestep and target changes"""
        rows = [summary("LinS", 0.5), summary("LinST", 0.4), summary("LinD", 0.25), summary("ConstM", 0.9)]
        found = {(d["change"], d["base"], d["variant"]): d["relative_difference"]
                 for d in relative_differences(rows)}
        assert found == {
            ("timestep", "LinS", "LinST"): pytest.approx(0.2),
            ("target", "LinS", "LinD"): pytest.approx(0.5),
        }

    def test_zero_base_skipped(self):
        """Test that a zero base score yields no comparison"""
        assert relative_differences([summary("EsnS", 0.0), summary("EsnST", 0.1)]) == []


class TestBenchService:
    @pytest.mark.anyio
    async def test_evaluate(self, small_manifest):
        """Test one record per repetition in repetition order"""
        bench = await bench_for(small_manifest)
        records = await bench.evaluate(MethodConfig(method="ConstM"), "lorenz63std", "const-noisefree")
        assert [r.rep for r in records] == [0, 1]
        for r in records:
            assert r.split == Split.test and not r.failed
            assert 0.0 <= r.cme <= 1.0
            assert 0.0 <= r.valid_time <= small_manifest.test_time + 1e-9

    @pytest.mark.anyio
    async def test_deterministic(self, small_manifest):
        """Test identical scores of a randomized method across runs"""
        bench = await bench_for(small_manifest)
        config = MethodConfig(method="RaFeS", params={"units": 30})
        first = await bench.evaluate(config, "lorenz63std", "const-noisefree", Split.validation)
        second = await bench.evaluate(config, "lorenz63std", "const-noisefree", Split.validation)
        assert [r.cme for r in first] == [r.cme for r in second]

    @pytest.mark.anyio
    async def test_failure_scores_one(self, small_manifest):
        """Test that a failing fit yields a CME 1 record"""
        bench = await bench_for(small_manifest)
        config = MethodConfig(method="LinD", params={"degree": 6, "past_steps": 4})
        records = await bench.evaluate(config, "lorenz63std", "const-noisefree")
        assert all(r.failed and r.cme == 1.0 and r.error for r in records)

    @pytest.mark.anyio
    async def test_run_writes_scores(self, small_manifest):
        """Test the score file layout and reading it back"""
        bench = await bench_for(small_manifest)
        tasks = [(MethodConfig(method="ConstL"), "lorenz63std", "const-noisefree"),
                 (MethodConfig(method="LinD", params={"degree": 6, "past_steps": 4}),
                  "lorenz63std", "const-noisefree")]
        records = await bench.run(tasks)
        assert len(records) == 4

        path = small_manifest.results_root / "scores.csv"
        assert path.read_text().split("\n")[0] == ",".join(SCORE_COLUMNS)
        back = await bench.read_scores()
        assert [(r.method, r.rep) for r in back] == [(r.method, r.rep) for r in records]
        assert back[0].cme == pytest.approx(records[0].cme, abs=1e-8)
        assert back[2].smape is None

        failures = (small_manifest.results_root / "failures.jsonl").read_text().splitlines()
        assert len(failures) == 2
        assert json.loads(failures[0])["method"] == "LinD"

    @pytest.mark.anyio
    async def test_read_missing(self, small_manifest):
        """Test the error when no scores were written"""
        bench = BenchService(DatasetService(small_manifest.data_root, small_manifest), small_manifest,
                             small_manifest.results_root)
        with pytest.raises(BenchError):
            await bench.read_scores()
