"""Tests for the command-line interface."""

import json
import logging

import pytest
import yaml

from hazdispatch import __version__
from hazdispatch.cli.main import (
    EXIT_CONFIG,
    EXIT_RUNTIME,
    EXIT_SUCCESS,
    EXIT_USAGE,
    SeedRange,
    cmd_solve,
    main,
)
from hazdispatch.core.config import ScenarioConfig


@pytest.fixture(autouse=True)
def reset_logging():
    """Drop handlers bound to captured streams after each test."""
    yield
    logging.getLogger("hazdispatch").handlers.clear()


@pytest.fixture
def config_file(tmp_path):
    """Small scenario written to YAML."""
    path = tmp_path / "small.yml"
    ScenarioConfig(num_sites=5, max_rounds=8).to_yaml(path)
    return path


def write_instance(path, sites, vehicles, mode="sensing"):
    path.write_text(
        json.dumps(
            {
                "type": "instance",
                "mode": mode,
                "sites": sites,
                "vehicles": vehicles,
            }
        )
    )
    return path


@pytest.fixture
def instance_file(tmp_path):
    """Two-site sensing instance with a 0.5 km budget."""
    return write_instance(
        tmp_path / "instance.json",
        [
            {"id": 0, "x": 0.0, "y": 0.1, "value": 10.0},
            {"id": 1, "x": 0.0, "y": 0.4, "value": 1.0},
        ],
        [{"max_distance": 0.5}],
    )


class TestGroup:
    """Test the top-level command group."""

    def test_version(self, capsys):
        """Test --version prints the version."""
        assert main(["--version"]) == EXIT_SUCCESS
        assert capsys.readouterr().out.strip() == f"hazdispatch {__version__}"

    def test_unknown_command(self, capsys):
        """Test an unknown command is a usage error."""
        assert main(["fly"]) == EXIT_USAGE
        assert "Error" in capsys.readouterr().err

    def test_log_file(self, tmp_path, instance_file):
        """Test --log-file receives debug output."""
        log_file = tmp_path / "debug.log"
        code = main(
            ["--log-file", str(log_file), "solve", str(instance_file),
             "--exact"]
        )
        assert code == EXIT_SUCCESS
        assert "Exact sensing solve" in log_file.read_text()


class TestSolve:
    """Test the solve command."""

    def test_exact(self, capsys, instance_file):
        """Test the exact objective is printed and saved."""
        assert main(["solve", str(instance_file), "--exact"]) == EXIT_SUCCESS
        assert capsys.readouterr().out.strip() == "9.800000"

        solution = json.loads(
            instance_file.with_suffix(".solution.json").read_text()
        )
        assert solution["type"] == "solution"
        assert solution["solver"] == "exact"
        assert solution["routes"] == [[0]]

    def test_heuristic(self, capsys, tmp_path, instance_file):
        """Test the heuristic run with an explicit output path."""
        out = tmp_path / "sol.json"
        code = main(
            ["solve", str(instance_file), "--seed", "3", "--budget", "4",
             "--out", str(out)]
        )
        assert code == EXIT_SUCCESS
        assert capsys.readouterr().out.strip() == "9.800000"
        data = json.loads(out.read_text())
        assert data["solver"] == "heuristic"
        assert data["seed"] == 3
        assert data["budget"] == 4

    def test_heuristic_rerun_identical(self, tmp_path, instance_file):
        """Test a fixed-seed heuristic solve rewrites the same file."""
        first, second = tmp_path / "a.json", tmp_path / "b.json"
        for out in (first, second):
            main(["-q", "solve", str(instance_file), "--seed", "5",
                  "--out", str(out)])
        assert first.read_bytes() == second.read_bytes()

    def test_cmd_solve_direct(self, instance_file):
        """Test cmd_solve returns the document and its path."""
        result, path = cmd_solve(instance_file, exact=True)
        assert path == instance_file.with_suffix(".solution.json")
        assert result.objective == pytest.approx(9.8)
        assert result.seed is None
        assert result.budget is None

    def test_exact_too_large(self, capsys, tmp_path):
        """Test the exact solver refuses a 20-site instance."""
        path = write_instance(
            tmp_path / "big.json",
            [
                {"id": i, "x": 0.01 * i, "y": 0.0, "value": 1.0}
                for i in range(20)
            ],
            [{"max_distance": 1.5}],
        )
        assert main(["solve", str(path), "--exact"]) == EXIT_RUNTIME
        captured = capsys.readouterr()
        assert "exact solver limit is 8" in captured.err
        assert captured.out == ""

    def test_malformed_instance(self, capsys, tmp_path):
        """Test a malformed instance file is an input error."""
        path = tmp_path / "bad.json"
        path.write_text("{oops")
        assert main(["solve", str(path)]) == EXIT_CONFIG
        assert "Malformed" in capsys.readouterr().err

    def test_wrong_document_type(self, tmp_path):
        """Test a non-instance document is rejected."""
        path = tmp_path / "summary.json"
        path.write_text(
            json.dumps(
                {"type": "summary", "strategy": "bucb", "seed": 0,
                 "config": {}, "metrics": {}}
            )
        )
        assert main(["solve", str(path)]) == EXIT_CONFIG


class TestRun:
    """Test the run command."""

    def test_writes_files(self, capsys, tmp_path, config_file):
        """Test one trace and one summary path on stdout."""
        out = tmp_path / "results"
        code = main(
            ["--quiet", "run", "--config", str(config_file), "--seed", "7",
             "--out", str(out)]
        )
        assert code == EXIT_SUCCESS
        lines = capsys.readouterr().out.split()
        assert lines == [
            str(out / "bucb_seed0007_trace.csv"),
            str(out / "bucb_seed0007_summary.json"),
        ]
        assert sorted(p.name for p in out.iterdir()) == [
            "bucb_seed0007_summary.json",
            "bucb_seed0007_trace.csv",
        ]

    def test_yaml_format(self, tmp_path, config_file):
        """Test --format yaml writes YAML summaries."""
        out = tmp_path / "results"
        code = main(
            ["-q", "run", "--config", str(config_file), "--out", str(out),
             "--format", "yaml"]
        )
        assert code == EXIT_SUCCESS
        summary = out / "bucb_seed0000_summary.yaml"
        assert yaml.safe_load(summary.read_text())["seed"] == 0

    def test_output_path_is_file(self, capsys, tmp_path, config_file):
        """Test an unusable output path fails and writes nothing."""
        blocker = tmp_path / "blocker"
        blocker.write_text("")
        code = main(
            ["-q", "run", "--config", str(config_file), "--out",
             str(blocker)]
        )
        assert code == EXIT_RUNTIME
        assert capsys.readouterr().out == ""
        assert sorted(p.name for p in tmp_path.iterdir()) == [
            "blocker", "small.yml",
        ]

    def test_seed_and_seeds(self, capsys, config_file, tmp_path):
        """Test --seed and --seeds together is a usage error."""
        code = main(
            ["run", "--config", str(config_file), "--seed", "1",
             "--seeds", "0..3", "--out", str(tmp_path / "r")]
        )
        assert code == EXIT_USAGE
        assert "either --seed or --seeds" in capsys.readouterr().err

    def test_bad_seed_range(self, config_file):
        """Test an inverted seed range is a usage error."""
        assert main(
            ["run", "--config", str(config_file), "--seeds", "5..2"]
        ) == EXIT_USAGE

    def test_invalid_config(self, capsys, tmp_path):
        """Test an invalid config value exits with the config code."""
        path = tmp_path / "bad.yml"
        path.write_text("belief:\n  decay: -1\n")
        code = main(["run", "--config", str(path), "--out", str(tmp_path)])
        assert code == EXIT_CONFIG
        assert "belief.decay" in capsys.readouterr().err

    def test_missing_config(self, tmp_path):
        """Test a missing config file exits with the config code."""
        code = main(
            ["run", "--config", str(tmp_path / "nope.yml"), "--out",
             str(tmp_path)]
        )
        assert code == EXIT_CONFIG


class TestCompare:
    """Test the compare command."""

    def test_single_strategy(self, capsys, config_file, tmp_path):
        """Test compare refuses a single strategy."""
        code = main(
            ["compare", "--config", str(config_file), "--strategy", "bucb",
             "--out", str(tmp_path / "r")]
        )
        assert code == EXIT_USAGE
        assert "at least two strategies" in capsys.readouterr().err

    def test_all_strategies(self, capsys, config_file, tmp_path):
        """Test the default compares all four strategies."""
        out = tmp_path / "r"
        code = main(
            ["-q", "compare", "--config", str(config_file), "--seeds",
             "0..1", "--out", str(out)]
        )
        assert code == EXIT_SUCCESS
        assert capsys.readouterr().out.strip() == str(out / "report.json")
        report = json.loads((out / "report.json").read_text())
        assert len(report["rows"]) == 8
        assert (out / "report.csv").exists()


class TestSeedRange:
    """Test the seed range parameter type."""

    @pytest.mark.parametrize(
        "text,expected", [("0..99", (0, 99)), ("4", (4, 4)), ("3..3", (3, 3))]
    )
    def test_convert(self, text, expected):
        """Test valid ranges."""
        assert SeedRange().convert(text, None, None) == expected
