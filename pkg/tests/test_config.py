"""Tests for DepthConfig loading, environment overrides and invariant reports."""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path

import pytest

from bdepth.audit.report import AuditMetric, InvariantReport
from bdepth.core.config import DepthConfig, SuiteSizes
from bdepth.core.errors import GapViolated, InvariantViolation, ParseError

ENV_VARS = ("BDEPTH_SEED", "BDEPTH_CUTOFF", "BDEPTH_TOLERANCE", "BDEPTH_RESOLUTION", "BDEPTH_OUT")


@pytest.fixture(autouse=True)
def _clean_env(monkeypatch: pytest.MonkeyPatch) -> None:
    for name in ENV_VARS:
        monkeypatch.delenv(name, raising=False)


class TestDepthConfig:
    def test_defaults(self) -> None:
        config = DepthConfig()
        assert config.seed == 0
        assert config.cutoff is None
        assert config.resolution == 200
        assert config.output_dir == Path("output")
        assert config.suite.circle_instances == 1000

    def test_environment_overrides(self, monkeypatch: pytest.MonkeyPatch) -> None:
        monkeypatch.setenv("BDEPTH_SEED", "7")
        monkeypatch.setenv("BDEPTH_CUTOFF", "5/2")
        monkeypatch.setenv("BDEPTH_RESOLUTION", "50")
        monkeypatch.setenv("BDEPTH_OUT", "elsewhere")
        config = DepthConfig()
        assert config.seed == 7
        assert config.cutoff == Fraction(5, 2)
        assert config.resolution == 50
        assert config.output_dir == Path("elsewhere")

    def test_explicit_values_beat_environment(self, monkeypatch: pytest.MonkeyPatch) -> None:
        monkeypatch.setenv("BDEPTH_SEED", "7")
        assert DepthConfig(seed=3).seed == 3

    def test_validation(self) -> None:
        with pytest.raises(ValueError):
            DepthConfig(steps=7)
        with pytest.raises(ValueError):
            DepthConfig(resolution=2)
        with pytest.raises(ValueError):
            DepthConfig(max_cutoff_doublings=-1)

    def test_from_file(self, tmp_path: Path) -> None:
        path = tmp_path / "config.yaml"
        path.write_text(
            "seed: 11\n"
            "cutoff: 3/2\n"
            "tolerance: 1.0e-6\n"
            "output_dir: runs\n"
            "suite:\n"
            "  circle_instances: 5\n"
            "  not_a_field: 1\n"
        )
        config = DepthConfig.from_file(path)
        assert config.seed == 11
        assert config.cutoff == Fraction(3, 2)
        assert config.tolerance == pytest.approx(1e-6)
        assert config.output_dir == Path("runs")
        assert config.suite.circle_instances == 5
        assert config.suite.tensor_instances == SuiteSizes().tensor_instances

    def test_load_missing_path(self, tmp_path: Path) -> None:
        with pytest.raises(FileNotFoundError):
            DepthConfig.load(config_path=tmp_path / "absent.yaml")

    def test_load_rejects_escaping_profile(self) -> None:
        with pytest.raises(ValueError):
            DepthConfig.load(profile="../../etc/passwd")


class TestInvariantReport:
    def test_failing_error_metric_fails_report(self) -> None:
        report = InvariantReport(check="demo")
        report.record("fine", 1)
        report.record("broken", Fraction(1, 2), threshold=0, passed=False)
        assert not report.passed
        assert report.errors == ["broken: 1/2"]

    def test_warning_metric_keeps_report_passing(self) -> None:
        report = InvariantReport(check="demo")
        report.add_metric(AuditMetric("soft", 3, passed=False, severity="warning"))
        assert report.passed
        assert report.warnings == ["soft: 3"]

    def test_merge_prefixes_names(self) -> None:
        inner = InvariantReport(check="inner")
        inner.record("x", 1)
        outer = InvariantReport(check="outer")
        outer.merge(inner, prefix="inner.")
        assert outer.value("inner.x") == 1
        with pytest.raises(KeyError):
            outer.value("x")

    def test_save_is_canonical(self, tmp_path: Path) -> None:
        report = InvariantReport(check="demo")
        report.record("gap", Fraction(3, 2))
        report.record("bound", float("inf"))
        path = tmp_path / "sub" / "report.json"
        report.save(path)
        text = path.read_text()
        assert text.endswith("}\n")
        data = json.loads(text)
        assert data["metrics"][0]["value"] == "3/2"
        assert data["metrics"][1]["value"] == "inf"

        loaded = InvariantReport.load(path)
        assert loaded.passed
        assert loaded.value("gap") == "3/2"


class TestErrorDetails:
    def test_invariant_violation_entry(self) -> None:
        err = InvariantViolation("d^2 != 0", entry=("x1", "y1"))
        assert err.details() == {"entry": ["x1", "y1"]}

    def test_gap_violated_payload(self) -> None:
        err = GapViolated("too low", entry="x1", required=Fraction(1), actual=Fraction(1, 2))
        assert err.details() == {"entry": "x1", "required": "1", "actual": "1/2"}

    def test_parse_error_position(self) -> None:
        err = ParseError("bad", line=3, column=5)
        assert "line 3, column 5" in str(err)
        assert isinstance(err, ValueError)
        assert err.details() == {"line": 3, "column": 5}
