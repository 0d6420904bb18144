"""Tests for complex/circle/correction files, CSV I/O and run manifests."""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from bdepth.algebra.reduction import boundary_depth
from bdepth.core.config import DepthConfig
from bdepth.core.errors import InvariantViolation, ParseError, ZeroMap
from bdepth.core.novikov import ExponentGroup
from bdepth.formats.complex_file import (
    loads_circle,
    loads_complex,
    loads_correction,
    loads_signed_complex,
    parse_complex,
    serialize_circle,
    serialize_complex,
    serialize_correction,
)
from bdepth.formats.csv_io import (
    format_number,
    read_family,
    read_hessians,
    read_samples,
    write_family,
    write_rows,
)
from bdepth.formats.manifest import RunManifest, failure_record, write_failure
from bdepth.lab.flow import BlockOperatorFamily

# ---------------------------------------------------------------------------
# Fixtures & helpers
# ---------------------------------------------------------------------------

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


def _write(tmp_path: Path, name: str, text: str) -> Path:
    path = tmp_path / name
    path.write_text(text)
    return path


# ---------------------------------------------------------------------------
# Complex files
# ---------------------------------------------------------------------------


class TestComplexFile:
    def test_parse(self, tmp_path: Path) -> None:
        cx = parse_complex(_write(tmp_path, "c.yaml", HIDDEN_GAP))
        assert cx.group == ExponentGroup.integers(3)
        assert cx.pieces["1"].basis == ("y1", "y2")
        assert boundary_depth(cx) == 3

    def test_declared_group(self) -> None:
        text = HIDDEN_GAP.replace("version: 1\n", "version: 1\ngroup: ['1']\n")
        assert loads_complex(text).group == ExponentGroup.integers(1)

    def test_serialize_is_canonical(self, tmp_path: Path) -> None:
        text = serialize_complex(loads_complex(HIDDEN_GAP))
        again = serialize_complex(loads_complex(text), tmp_path / "out" / "c.yaml")
        assert again == text
        assert (tmp_path / "out" / "c.yaml").read_text() == text
        assert text.startswith("format: bdepth-complex\nversion: 1\n")

    def test_bad_coefficient_reports_line(self) -> None:
        text = HIDDEN_GAP.replace("1*T^3", "1*T^q")
        with pytest.raises(ParseError) as excinfo:
            loads_complex(text)
        assert excinfo.value.line == 11

    def test_unknown_key(self) -> None:
        with pytest.raises(ParseError) as excinfo:
            loads_complex(HIDDEN_GAP + "extra: 1\n")
        assert excinfo.value.line == 12

    def test_missing_grading(self) -> None:
        text = "format: bdepth-complex\nversion: 1\ngenerators: {}\n"
        with pytest.raises(ParseError):
            loads_complex(text)

    def test_wrong_format_and_version(self) -> None:
        with pytest.raises(ParseError):
            loads_complex(HIDDEN_GAP.replace("bdepth-complex", "bdepth-circle"))
        with pytest.raises(ParseError):
            loads_complex(HIDDEN_GAP.replace("version: 1", "version: 2"))

    def test_unknown_generator(self) -> None:
        with pytest.raises(ParseError):
            loads_complex(HIDDEN_GAP.replace("[x2, y2, 1*T^3]", "[x9, y2, 1*T^3]"))

    def test_malformed_yaml(self) -> None:
        with pytest.raises(ParseError) as excinfo:
            loads_complex("format: [unclosed\n")
        assert excinfo.value.line is not None

    def test_level_raising_differential(self) -> None:
        text = HIDDEN_GAP.replace("[x1, '0'], [x2, '0']", "[x1, '5'], [x2, '0']")
        with pytest.raises(InvariantViolation):
            loads_complex(text)

    def test_empty_file(self) -> None:
        with pytest.raises(ParseError):
            loads_complex("")


class TestSignedComplex:
    def test_parity_table(self) -> None:
        text = HIDDEN_GAP + "parity: {x1: 0, x2: 0, y1: 1, y2: 1}\n"
        signed = loads_signed_complex(text)
        assert signed.parity == {"x1": 0, "x2": 0, "y1": 1, "y2": 1}

    def test_parity_must_be_a_bit(self) -> None:
        text = HIDDEN_GAP + "parity: {x1: 0, x2: 2, y1: 1, y2: 1}\n"
        with pytest.raises(ParseError):
            loads_signed_complex(text)

    def test_characteristic_two_flag(self) -> None:
        signed = loads_signed_complex(HIDDEN_GAP + "characteristic_two: true\n")
        assert signed.characteristic_two
        assert signed.parity is None


class TestCorrectionFile:
    def test_parse_and_serialize(self) -> None:
        q = loads_correction(CORRECTION)
        assert q.gap("0") == 1
        assert q.base.differential == {}
        text = serialize_correction(q)
        assert serialize_correction(loads_correction(text)) == text

    def test_non_rational_base(self) -> None:
        text = CORRECTION.replace("base: []", "base:\n- [x, y, 1*T^1]")
        with pytest.raises(ParseError):
            loads_correction(text)


class TestCircleFile:
    def test_values_are_normalized(self) -> None:
        data = loads_circle("format: bdepth-circle\nversion: 1\nvalues: [6, 2, 10, 0]\n")
        assert data.values == (10, 0, 6, 2)
        assert serialize_circle(data) == (
            "format: bdepth-circle\nversion: 1\nvalues: ['10', '0', '6', '2']\n"
        )

    def test_pattern_with_copies(self) -> None:
        data = loads_circle("format: bdepth-circle\nversion: 1\npattern: [3, 0]\ncopies: 4\n")
        assert data.m == 4

    def test_rational_values(self) -> None:
        data = loads_circle("format: bdepth-circle\nversion: 1\nvalues: [5/2, 0]\n")
        assert data.maxima == (Fraction(5, 2),)

    def test_bad_copies(self) -> None:
        with pytest.raises(ParseError):
            loads_circle("format: bdepth-circle\nversion: 1\npattern: [3, 0]\ncopies: 0\n")

    def test_not_a_morse_function(self) -> None:
        with pytest.raises(ParseError) as excinfo:
            loads_circle("format: bdepth-circle\nversion: 1\nvalues: [5, 0, 3, 4]\n")
        assert excinfo.value.line == 3


# ---------------------------------------------------------------------------
# CSV
# ---------------------------------------------------------------------------


class TestCsv:
    def test_format_number(self) -> None:
        assert format_number(0.1) == "0.10000000000000001"
        assert format_number(float("-inf")) == "-inf"
        assert format_number(True) == "1"
        assert format_number(Fraction(3, 4)) == "3/4"

    def test_write_rows(self, tmp_path: Path) -> None:
        text = write_rows(tmp_path / "a.csv", ("eta", "value"), [(1.5, Fraction(1, 3))])
        assert text == "eta,value\n1.5,1/3\n"
        assert (tmp_path / "a.csv").read_text() == text

    def test_read_samples_sorts_and_keeps_exact(self, tmp_path: Path) -> None:
        path = _write(tmp_path, "f.csv", "position,value\n0.5,0.1\n0.25,2\n\n")
        positions, values = read_samples(path)
        assert positions == [Fraction(1, 4), Fraction(1, 2)]
        assert values == [Fraction(2), Fraction(1, 10)]

    def test_read_samples_errors(self, tmp_path: Path) -> None:
        with pytest.raises(ParseError):
            read_samples(_write(tmp_path, "h.csv", "x,y\n0,1\n"))
        with pytest.raises(ParseError):
            read_samples(_write(tmp_path, "d.csv", "position,value\n0,1\n0,2\n"))
        with pytest.raises(ParseError) as excinfo:
            read_samples(_write(tmp_path, "n.csv", "position,value\n0,1\n1,oops\n"))
        assert (excinfo.value.line, excinfo.value.column) == (3, 2)
        with pytest.raises(ParseError):
            read_samples(_write(tmp_path, "e.csv", ""))

    def test_family_round_trip(self, tmp_path: Path) -> None:
        fam = BlockOperatorFamily.constant(np.array([[0.5]]), np.array([[0.25]]), T=2.0)
        path = tmp_path / "family.csv"
        write_family(path, fam)
        loaded = read_family(path)
        assert loaded.T == 2.0
        np.testing.assert_array_equal(loaded.b1, fam.b1)
        np.testing.assert_array_equal(loaded.b2, fam.b2)

    def test_family_header_must_be_square(self, tmp_path: Path) -> None:
        with pytest.raises(ParseError):
            read_family(_write(tmp_path, "f.csv", "s,b1_1_1,b1_1_2,b2_1_1\n-1,0,0,0\n"))

    def test_hessians(self, tmp_path: Path) -> None:
        path = _write(tmp_path, "h.csv", "s,h_1_1,h_1_2,h_2_1,h_2_2\n-1,1,0,0,1\n1,1,0,0,1\n")
        positions, hessians, T = read_hessians(path)
        assert T == 1.0
        assert hessians.shape == (2, 2, 2)
        np.testing.assert_array_equal(positions, [-1.0, 1.0])

    def test_hessians_need_even_size(self, tmp_path: Path) -> None:
        with pytest.raises(ParseError):
            read_hessians(_write(tmp_path, "h.csv", "s,h_1_1\n-1,1\n1,1\n"))


# ---------------------------------------------------------------------------
# Manifests
# ---------------------------------------------------------------------------


class TestManifest:
    def test_from_config(self) -> None:
        config = DepthConfig(seed=3, cutoff=Fraction(5, 2), output_dir=Path("runs"))
        manifest = RunManifest.from_config("depth", config, [Path("a.yaml")])
        assert manifest.cutoff == "5/2"
        assert manifest.inputs == ["a.yaml"]
        assert manifest.output_dir == "runs"

    def test_save_and_load(self, tmp_path: Path) -> None:
        manifest = RunManifest(command="suite", seed=1)
        manifest.artifacts.extend(["b.json", "a.json"])
        path = tmp_path / "manifest.json"
        manifest.save(path)
        text = path.read_text()
        assert text.endswith("}\n")
        assert json.loads(text)["artifacts"] == ["a.json", "b.json"]
        assert RunManifest.load(path).to_dict() == manifest.to_dict()

    def test_failure_record(self, tmp_path: Path) -> None:
        manifest = RunManifest(command="depth", inputs=["c.yaml"])
        error = ZeroMap("step into 0 is zero")
        record = failure_record(manifest, error)
        assert record["error"] == "ZeroMap"
        assert record["inputs"] == ["c.yaml"]
        write_failure(tmp_path / "failure.json", manifest, error)
        assert json.loads((tmp_path / "failure.json").read_text())["message"] == "step into 0 is zero"
