"""Tests for the bdepth command line: artifacts, manifests and exit codes."""

from __future__ import annotations

import json
from pathlib import Path

import pytest
from click.testing import CliRunner, Result

from bdepth import __version__
from bdepth.cli import cli

ENV_VARS = ("BDEPTH_SEED", "BDEPTH_CUTOFF", "BDEPTH_TOLERANCE", "BDEPTH_RESOLUTION", "BDEPTH_OUT")

HIDDEN_GAP = """\
format: bdepth-complex
version: 1
grading:
  labels: ['0', '1']
generators:
  '0': [[x1, '0'], [x2, '0']]
  '1': [[y1, '0'], [y2, '0']]
differential:
- [x1, y1, 1*T^0]
- [x1, y2, 1*T^0]
- [x2, y2, 1*T^3]
"""

PAIR = """\
format: bdepth-complex
version: 1
grading:
  labels: ['0', '1']
generators:
  '0': [[{bottom}, '0']]
  '1': [[{top}, '{gap}']]
differential:
- [{bottom}, {top}, 1*T^0]
parity: {{{bottom}: 0, {top}: 1}}
"""

CORRECTION = """\
format: bdepth-correction
version: 1
grading:
  labels: ['0', '1']
generators:
  '0': [[x, '0']]
  '1': [[y, '0']]
base: []
differential:
- [x, y, 1*T^1]
gaps: {'0': '1'}
"""


# ---------------------------------------------------------------------------
# Fixtures & helpers
# ---------------------------------------------------------------------------


@pytest.fixture(autouse=True)
def _clean_env(monkeypatch: pytest.MonkeyPatch) -> None:
    for name in ENV_VARS:
        monkeypatch.delenv(name, raising=False)


def _write(tmp_path: Path, name: str, text: str) -> Path:
    path = tmp_path / name
    path.write_text(text)
    return path


def _run(*args: str) -> Result:
    return CliRunner().invoke(cli, [str(a) for a in args])


def _json(path: Path) -> dict:
    return json.loads(path.read_text())


# ---------------------------------------------------------------------------
# depth
# ---------------------------------------------------------------------------


class TestDepthCommand:
    def test_depth_artifacts(self, tmp_path: Path) -> None:
        out = tmp_path / "out"
        result = _run("depth", _write(tmp_path, "c.yaml", HIDDEN_GAP), "--out", out, "-q")
        assert result.exit_code == 0, result.output
        data = _json(out / "depth.json")
        assert data["b"] == "3"
        assert data["profile"] == {"0": "3", "1": "0"}
        assert data["witness"]["grading"] == "0"
        assert data["witness"]["gap"] == "3"
        manifest = _json(out / "manifest.json")
        assert manifest["command"] == "depth"
        assert manifest["artifacts"] == ["depth.json"]
        assert manifest["version"] == __version__

    def test_reruns_are_identical(self, tmp_path: Path) -> None:
        path = _write(tmp_path, "c.yaml", HIDDEN_GAP)
        for name in ("a", "b"):
            assert _run("depth", path, "--out", tmp_path / name, "-q").exit_code == 0
        assert (tmp_path / "a" / "depth.json").read_bytes() == (tmp_path / "b" / "depth.json").read_bytes()

    def test_single_grading(self, tmp_path: Path) -> None:
        out = tmp_path / "out"
        result = _run("depth", _write(tmp_path, "c.yaml", HIDDEN_GAP), "--grading", "1", "--out", out)
        assert result.exit_code == 0, result.output
        data = _json(out / "depth.json")
        assert data["b"] == "0"
        assert data["witness"] is None

    def test_unknown_grading_is_usage_error(self, tmp_path: Path) -> None:
        result = _run("depth", _write(tmp_path, "c.yaml", HIDDEN_GAP), "--grading", "7",
                      "--out", tmp_path / "out")
        assert result.exit_code == 2

    def test_parse_error_exits_2(self, tmp_path: Path) -> None:
        out = tmp_path / "out"
        bad = _write(tmp_path, "c.yaml", HIDDEN_GAP.replace("1*T^3", "1*T^q"))
        result = _run("depth", bad, "--out", out)
        assert result.exit_code == 2
        failure = _json(out / "failure.json")
        assert failure["error"] == "ParseError"
        assert failure["details"]["line"] == 11

    def test_invariant_violation_exits_1(self, tmp_path: Path) -> None:
        out = tmp_path / "out"
        bad = _write(tmp_path, "c.yaml", HIDDEN_GAP.replace("[x1, '0'], [x2, '0']", "[x1, '5'], [x2, '0']"))
        result = _run("depth", bad, "--out", out)
        assert result.exit_code == 1
        assert _json(out / "failure.json")["error"] == "InvariantViolation"
        assert not (out / "manifest.json").exists()

    def test_missing_input(self, tmp_path: Path) -> None:
        assert _run("depth", tmp_path / "absent.yaml").exit_code == 2

    def test_bad_cutoff(self, tmp_path: Path) -> None:
        result = _run("depth", _write(tmp_path, "c.yaml", HIDDEN_GAP), "--cutoff", "abc")
        assert result.exit_code == 2

    def test_fixed_cutoff_recorded(self, tmp_path: Path) -> None:
        out = tmp_path / "out"
        result = _run("depth", _write(tmp_path, "c.yaml", HIDDEN_GAP), "--cutoff", "8", "--out", out)
        assert result.exit_code == 0, result.output
        assert _json(out / "manifest.json")["cutoff"] == "8"


# ---------------------------------------------------------------------------
# morse, tensor, qc
# ---------------------------------------------------------------------------


class TestAlgebraCommands:
    def test_morse_circle_file(self, tmp_path: Path) -> None:
        out = tmp_path / "out"
        path = _write(tmp_path, "circle.yaml", "format: bdepth-circle\nversion: 1\nvalues: [6, 2, 10, 0]\n")
        result = _run("morse", path, "--out", out)
        assert result.exit_code == 0, result.output
        data = _json(out / "morse.json")
        assert data["beta"] == "4"
        assert data["quadruple"] == [1, 1, 2, 2]

    def test_morse_samples_with_embedding(self, tmp_path: Path) -> None:
        out = tmp_path / "out"
        samples = "position,value\n" + "".join(
            f"{i},{v}\n" for i, v in enumerate((10, 5, 0, 3, 6, 4, 2, 8))
        )
        result = _run("morse", _write(tmp_path, "f.csv", samples), "--v", "1,-2", "--w", "0",
                      "--out", out)
        assert result.exit_code == 0, result.output
        data = _json(out / "morse.json")
        assert data["beta"] == "4"
        assert data["mm"] == "6"
        assert data["embedding_passed"] is True
        assert (out / "embedding.csv").read_text().startswith("metric,value,threshold,passed\n")

    def test_tensor(self, tmp_path: Path) -> None:
        out = tmp_path / "out"
        left = _write(tmp_path, "l.yaml", PAIR.format(top="w", bottom="x", gap=2))
        right = _write(tmp_path, "r.yaml", PAIR.format(top="v", bottom="z", gap=3))
        result = _run("tensor", left, right, "--out", out)
        assert result.exit_code == 0, result.output
        assert (out / "product.yaml").read_text().startswith("format: bdepth-complex\n")
        bounds = _json(out / "bounds.json")
        assert bounds["passed"] is True
        assert sorted(_json(out / "manifest.json")["artifacts"]) == ["bounds.json", "product.yaml"]

    def test_tensor_without_parity_fails(self, tmp_path: Path) -> None:
        out = tmp_path / "out"
        left = _write(tmp_path, "l.yaml", HIDDEN_GAP)
        result = _run("tensor", left, left, "--out", out)
        assert result.exit_code == 1
        assert _json(out / "failure.json")["error"] == "SignRuleUnavailable"

    def test_qc(self, tmp_path: Path) -> None:
        out = tmp_path / "out"
        result = _run("qc", _write(tmp_path, "q.yaml", CORRECTION), "--out", out)
        assert result.exit_code == 0, result.output
        metrics = {m["name"]: m["value"] for m in _json(out / "qc.json")["metrics"]}
        assert metrics["alternative[0]"] == "ii"


# ---------------------------------------------------------------------------
# Lab commands
# ---------------------------------------------------------------------------


class TestLabCommands:
    def test_scan_constant_family(self, tmp_path: Path) -> None:
        out = tmp_path / "out"
        family = _write(tmp_path, "family.csv", "s,b1_1_1,b2_1_1\n-1,0.3,0\n1,0.3,0\n")
        result = _run("scan", family, "--eta-min", "1", "--eta-max", "3", "--resolution", "5",
                      "--picard-eta", "1", "--out", out)
        assert result.exit_code == 0, result.output
        summary = _json(out / "scan.json")
        assert summary["candidates"] == []
        assert summary["flow_passed"] is True
        assert len((out / "scan.csv").read_text().splitlines()) == 6

    def test_scan_below_eta0(self, tmp_path: Path) -> None:
        out = tmp_path / "out"
        family = _write(tmp_path, "family.csv", "s,b1_1_1,b2_1_1\n-1,0.3,0\n1,0.3,0\n")
        result = _run("scan", family, "--eta-min", "0.1", "--eta-max", "3", "--out", out)
        assert result.exit_code == 1
        assert _json(out / "failure.json")["error"] == "OutOfRange"

    def test_resolution_too_small(self, tmp_path: Path) -> None:
        family = _write(tmp_path, "family.csv", "s,b1_1_1,b2_1_1\n-1,0.3,0\n1,0.3,0\n")
        result = _run("scan", family, "--eta-min", "1", "--eta-max", "3", "--resolution", "2")
        assert result.exit_code == 2

    def test_fourier(self, tmp_path: Path) -> None:
        out = tmp_path / "out"
        hessians = _write(tmp_path, "h.csv", "s,h_1_1,h_1_2,h_2_1,h_2_2\n-1,0.1,0,0,0.1\n1,0.1,0,0,0.1\n")
        result = _run("fourier", hessians, "-k", "1", "--resolution", "5", "--out", out)
        assert result.exit_code == 0, result.output
        data = _json(out / "fourier.json")
        assert data["lambdas"] == []
        assert data["eta_at_lambda_max"] == pytest.approx(6.283185307179586)
        assert (out / "family.csv").exists()


# ---------------------------------------------------------------------------
# suite
# ---------------------------------------------------------------------------


class TestSuiteCommand:
    def test_suite_is_deterministic(self, tmp_path: Path) -> None:
        for name in ("a", "b"):
            result = _run("suite", "--check", "circle", "--check", "periodic", "--instances", "5",
                          "--seed", "1", "--out", tmp_path / name, "-q")
            assert result.exit_code == 0, result.output
        first = (tmp_path / "a" / "suite.json").read_bytes()
        assert first == (tmp_path / "b" / "suite.json").read_bytes()
        data = json.loads(first)
        assert data["seed"] == 1
        assert [c["name"] for c in data["checks"]] == ["circle", "periodic"]

    def test_suite_writes_timings_apart(self, tmp_path: Path) -> None:
        result = _run("suite", "--check", "circle", "--instances", "3", "--workers", "1",
                      "--out", tmp_path, "-q")
        assert result.exit_code == 0, result.output
        assert sorted(_json(tmp_path / "manifest.json")["artifacts"]) == ["suite.json", "timings.json"]
        assert _json(tmp_path / "timings.json")["circle"]["budget"] == 10.0

    def test_seed_from_environment(self, tmp_path: Path, monkeypatch: pytest.MonkeyPatch) -> None:
        monkeypatch.setenv("BDEPTH_SEED", "9")
        result = _run("suite", "--check", "circle", "--instances", "2", "--out", tmp_path)
        assert result.exit_code == 0, result.output
        assert _json(tmp_path / "suite.json")["seed"] == 9

    def test_unknown_check(self, tmp_path: Path) -> None:
        assert _run("suite", "--check", "nope", "--out", tmp_path).exit_code == 2

    def test_version(self) -> None:
        result = _run("--version")
        assert result.exit_code == 0
        assert __version__ in result.output
