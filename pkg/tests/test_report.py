"""Tests for the strategy comparison report."""

import json

import pandas as pd
import pytest

from hazdispatch.cli.report import (
    METRICS,
    Report,
    ReportRow,
    aggregate_rows,
    closest_to_oracle,
    cmd_compare,
    termination_reduction,
)
from hazdispatch.cli.runner import RunSpec
from hazdispatch.core.config import ScenarioConfig
from hazdispatch.core.exceptions import (
    ConfigurationError,
    ReportError,
    ValidationError,
)
from hazdispatch.core.policy import StrategyKind


def row(strategy, seed, t_end, kind=None, hazard=100.0, mae=1.0):
    return ReportRow(
        strategy=strategy,
        kind=kind or StrategyKind(strategy),
        seed=seed,
        termination_round=t_end,
        cumulative_hazard=hazard,
        cleaning_rate=10.0,
        final_mae=mae,
        completed=True,
    )


@pytest.fixture
def rows():
    """Two seeds of every strategy."""
    return [
        row("bucb", 0, 6, mae=2.0),
        row("bucb", 1, 8, mae=4.0),
        row("random", 0, 10, mae=9.0),
        row("random", 1, 10, mae=7.0),
        row("round_robin", 0, 12, mae=5.0),
        row("round_robin", 1, 8, mae=5.0),
        row("oracle", 0, 5, mae=0.0),
        row("oracle", 1, 5, mae=0.0),
    ]


class TestAggregates:
    """Test aggregate_rows and the comparisons."""

    def test_mean_std_median(self, rows):
        """Test per-strategy statistics with sample std."""
        aggregates = aggregate_rows(rows)
        bucb = {
            a.metric: a for a in aggregates if a.strategy == "bucb"
        }
        assert set(bucb) == set(METRICS)
        t_end = bucb["termination_round"]
        assert t_end.mean == pytest.approx(7.0)
        assert t_end.std == pytest.approx(2 ** 0.5)
        assert t_end.median == pytest.approx(7.0)
        assert t_end.count == 2

    def test_single_seed_std(self):
        """Test one seed gives std 0."""
        aggregates = aggregate_rows([row("bucb", 0, 6)])
        assert all(a.std == 0.0 for a in aggregates)

    def test_empty(self):
        """Test no rows gives no aggregates."""
        assert aggregate_rows([]) == []

    def test_reduction(self, rows):
        """Test percent fewer rounds for bucb than each baseline."""
        reduction = termination_reduction(rows, aggregate_rows(rows))
        assert reduction["random"] == pytest.approx(30.0)
        assert reduction["round_robin"] == pytest.approx(30.0)

    def test_reduction_without_bucb(self, rows):
        """Test no reduction is reported without bucb."""
        rest = [r for r in rows if r.strategy != "bucb"]
        assert termination_reduction(rest, aggregate_rows(rest)) == {}

    def test_closest_to_oracle(self, rows):
        """Test the non-oracle strategy nearest oracle per metric."""
        closest = closest_to_oracle(rows, aggregate_rows(rows))
        assert closest["termination_round"] == "bucb"
        assert closest["final_mae"] == "bucb"

    def test_duplicate_labels_kept_apart(self):
        """Test a repeated strategy is aggregated under its own label."""
        rows = [
            row("bucb", 0, 6),
            row("bucb_2", 0, 9, kind=StrategyKind.BUCB),
        ]
        report = Report.build(rows, scenario="scenario1")
        labels = {a.strategy for a in report.aggregates}
        assert labels == {"bucb", "bucb_2"}


class TestReport:
    """Test Report persistence and consistency."""

    def test_save_and_load(self, tmp_path, rows):
        """Test a saved report loads back with its CSV table."""
        path = tmp_path / "report.json"
        report = Report.build(rows, scenario="scenario1")
        report.save(path)

        loaded = Report.load(path)
        assert loaded == report
        table = pd.read_csv(tmp_path / "report.csv")
        assert set(table["strategy"]) == {
            "bucb", "oracle", "random", "round_robin"
        }
        assert "termination_round_mean" in table.columns

    def test_tampered_aggregate(self, tmp_path, rows):
        """Test aggregates that disagree with rows are rejected."""
        path = tmp_path / "report.json"
        Report.build(rows, scenario="scenario1").save(path)
        data = json.loads(path.read_text())
        data["aggregates"][0]["mean"] += 1.0
        path.write_text(json.dumps(data))
        with pytest.raises(ReportError):
            Report.load(path)

    def test_missing_aggregate(self, rows):
        """Test aggregates must cover every strategy."""
        report = Report.build(rows, scenario="scenario1")
        report.aggregates = report.aggregates[1:]
        with pytest.raises(ReportError):
            report.check_consistency()

    def test_not_a_report(self, tmp_path):
        """Test a malformed file is an input error."""
        path = tmp_path / "report.json"
        path.write_text("{}")
        with pytest.raises(ValidationError):
            Report.load(path)


class TestCmdCompare:
    """Test cmd_compare end to end."""

    def test_compare_writes_report(self, tmp_path):
        """Test every strategy and seed lands in the report."""
        config_path = tmp_path / "small.yml"
        ScenarioConfig(num_sites=5, max_rounds=8).to_yaml(config_path)
        spec = RunSpec(
            config_path=config_path,
            seeds=(0, 1),
            strategies=list(StrategyKind),
            out_dir=tmp_path / "out",
        )
        path = cmd_compare(spec)
        assert path == tmp_path / "out" / "report.json"

        report = Report.load(path)
        assert len(report.rows) == 8
        assert {r.strategy for r in report.rows} == {
            k.value for k in StrategyKind
        }
        assert set(report.reduction_vs_baseline) <= {"random", "round_robin"}

    def test_repeated_strategy_agrees(self, tmp_path):
        """Test a strategy listed twice aggregates to the same values."""
        config_path = tmp_path / "small.yml"
        ScenarioConfig(num_sites=5, max_rounds=8).to_yaml(config_path)
        spec = RunSpec(
            config_path=config_path,
            seeds=(0, 1),
            strategies=["bucb", "bucb"],
            out_dir=tmp_path / "out",
        )
        report = Report.load(cmd_compare(spec))
        by_label = {
            (a.strategy, a.metric): a.mean for a in report.aggregates
        }
        for metric in METRICS:
            assert by_label[("bucb", metric)] == by_label[("bucb_2", metric)]

    def test_single_strategy_rejected(self, tmp_path):
        """Test one strategy is refused before anything is written."""
        spec = RunSpec(strategies=["bucb"], out_dir=tmp_path / "out")
        with pytest.raises(ConfigurationError) as exc_info:
            cmd_compare(spec)
        assert "at least two strategies" in str(exc_info.value)
        assert exc_info.value.key == "strategies"
        assert not (tmp_path / "out").exists()
