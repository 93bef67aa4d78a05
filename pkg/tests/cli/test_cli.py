import json

import pandas as pd
import pytest

from chaoscast.cli.commands.metrics import align
from chaoscast.cli.commands.perturb import parse_radii
from chaoscast.main import EXIT_FAILURE, EXIT_OK, EXIT_USAGE, main
from chaoscast.schemas.results import EmulatorRow

TRUTH = "time,u1,u2,u3\n0.01,1.0,2.0,3.0\n0.02,2.0,3.0,4.0\n0.03,3.0,5.0,7.0\n"


@pytest.fixture
def workspace(tmp_path):
    """Manifest with one short dataset and the matching command-line roots."""
    manifest = tmp_path / "run.toml"
    manifest.write_text(
        "[run]\n"
        "systems = [\"lorenz63std\"]\n"
        "schemes = [\"const-noisefree\"]\n"
        "validation_reps = 1\n"
        "test_reps = 1\n"
        "train_time = 2.0\n"
        "test_time = 0.5\n"
    )
    return tmp_path, [
        "--manifest", str(manifest),
        "--data", str(tmp_path / "data"),
        "--results", str(tmp_path / "results"),
    ]


def json_line(text: str) -> dict:
    return json.loads(next(line for line in text.splitlines() if line.startswith("{")))


class TestUsage:
    def test_no_command(self):
        """Test the usage exit code without a subcommand"""
        assert main([]) == EXIT_USAGE

    def test_version(self):
        """Test that --version exits successfully"""
        assert main(["--version"]) == EXIT_OK

    def test_unknown_system(self, tmp_path):
        """Test the usage exit code for an unknown system"""
        assert main(["generate", "--system", "lorenz96", "--data", str(tmp_path)]) == EXIT_USAGE

    def test_missing_manifest(self, tmp_path):
        """Test the usage exit code for a manifest path that does not exist"""
        assert main(["report", "--manifest", str(tmp_path / "nope.toml")]) == EXIT_USAGE

    def test_unknown_method(self, workspace):
        """Test the usage exit code for an unknown method"""
        _, roots = workspace
        assert main(["tune", "--method", "Foo", *roots]) == EXIT_USAGE

    def test_parse_radii(self):
        """Test the radius list parser"""
        assert parse_radii("0, 1e-8,1") == [0.0, 1e-8, 1.0]


class TestPipeline:
    def test_generate_twice(self, workspace):
        """Test refusal to overwrite and replacement with --force"""
        tmp_path, roots = workspace
        assert main(["generate", *roots]) == EXIT_OK
        assert main(["generate", *roots]) == EXIT_USAGE
        assert main(["generate", "--force", *roots]) == EXIT_OK

    def test_flags_override_manifest(self, workspace):
        """Test that --test-reps wins over the manifest value"""
        tmp_path, roots = workspace
        assert main(["generate", "--test-reps", "2", *roots]) == EXIT_OK
        test_dir = tmp_path / "data" / "lorenz63std" / "const-noisefree" / "test"
        assert sorted(p.name for p in test_dir.iterdir()) == ["rep0000", "rep0001"]

    def test_tune_run_report(self, workspace):
        """Test the generate → tune → run → report sequence"""
        tmp_path, roots = workspace
        assert main(["generate", *roots]) == EXIT_OK
        assert main(["tune", "--method", "ConstL", *roots]) == EXIT_OK
        assert (tmp_path / "results" / "tuned" / "lorenz63std" / "const-noisefree" / "ConstL.json").exists()
        assert main(["run", "--method", "ConstL", "--method", "ConstM", *roots]) == EXIT_OK
        assert (tmp_path / "results" / "scores.csv").exists()
        assert main(["report", *roots]) == EXIT_OK
        assert (tmp_path / "results" / "report" / "aggregate.csv").exists()

    def test_run_untuned(self, workspace):
        """Test the failure exit code for a method that was never tuned"""
        _, roots = workspace
        assert main(["generate", *roots]) == EXIT_OK
        assert main(["run", "--method", "LinD", *roots]) == EXIT_FAILURE

    def test_report_without_scores(self, workspace):
        """Test the failure exit code when no scores exist"""
        _, roots = workspace
        assert main(["report", *roots]) == EXIT_FAILURE


class TestStudyCommands:
    def test_emulate_fixed_point_csv(self, workspace, monkeypatch):
        """Test that emulator bands are written fixed-point with eight decimals"""
        tmp_path, roots = workspace
        row = EmulatorRow(lead_time=0.01, emulator_median=1.5e-9, emulator_q05=1e-10, emulator_q95=2.5e-6,
                          solver_median=3e-12, solver_q05=0.0, solver_q95=12.345678912)
        monkeypatch.setattr("chaoscast.cli.commands.emulate.emulator_study", lambda reps, rng, **kwargs: [row])
        output = tmp_path / "emulator.csv"
        assert main(["emulate", "--reps", "1", "--output", str(output), *roots]) == EXIT_OK
        lines = output.read_text().splitlines()
        assert lines[1] == "0.01000000,0.00000000,0.00000000,0.00000250,0.00000000,0.00000000,12.34567891"
        assert "e" not in lines[1]


class TestMetricsCommand:
    def test_identical(self, tmp_path, capsys):
        """Test zero CME for a prediction equal to the truth"""
        (tmp_path / "truth.csv").write_text(TRUTH)
        (tmp_path / "prediction.csv").write_text(TRUTH)
        code = main(["metrics", "--truth", str(tmp_path / "truth.csv"),
                     "--prediction", str(tmp_path / "prediction.csv")])
        assert code == EXIT_OK
        result = json_line(capsys.readouterr().out)
        assert result["cme"] == 0.0
        assert result["smape"] == 0.0
        assert result["valid_time"] == pytest.approx(0.03)

    def test_missing_rows(self, tmp_path, capsys):
        """Test that truth times without a prediction count as missing"""
        (tmp_path / "truth.csv").write_text(TRUTH)
        (tmp_path / "prediction.csv").write_text("time,u1,u2,u3\n0.01,1.0,2.0,3.0\n")
        code = main(["metrics", "--truth", str(tmp_path / "truth.csv"),
                     "--prediction", str(tmp_path / "prediction.csv")])
        assert code == EXIT_OK
        result = json_line(capsys.readouterr().out)
        assert result["cme"] == pytest.approx(2.0 / 3.0)
        assert result["valid_time"] == pytest.approx(0.02)

    def test_missing_columns(self, tmp_path):
        """Test the usage exit code for a prediction without state columns"""
        (tmp_path / "truth.csv").write_text(TRUTH)
        (tmp_path / "prediction.csv").write_text("time,u1\n0.01,1.0\n")
        code = main(["metrics", "--truth", str(tmp_path / "truth.csv"),
                     "--prediction", str(tmp_path / "prediction.csv")])
        assert code == EXIT_USAGE

    def test_single_row_needs_start(self, tmp_path):
        """Test that one truth row requires --start-time"""
        (tmp_path / "truth.csv").write_text("time,u1\n1.0,2.0\n")
        (tmp_path / "prediction.csv").write_text("time,u1\n1.0,2.0\n")
        args = ["metrics", "--truth", str(tmp_path / "truth.csv"), "--prediction", str(tmp_path / "prediction.csv")]
        assert main(args) == EXIT_USAGE
        assert main([*args, "--start-time", "0.5"]) == EXIT_OK

    def test_align_rounds_times(self):
        """Test matching of times that differ below eight decimals"""
        truth = pd.DataFrame({"time": [0.1, 0.2], "u1": [1.0, 2.0]})
        prediction = pd.DataFrame({"time": [0.1 + 1e-12, 0.2 - 1e-12], "u1": [1.5, 2.5]})
        pair = align(truth, prediction)
        assert pair.prediction[:, 0].tolist() == [1.5, 2.5]
        assert pair.start_time == pytest.approx(0.0)
