"""CSV readers and writers for sampled functions, operator families and scan output.

Numbers are written with 17 significant digits (floats) or as exact
``p/q`` text (rationals) so reruns produce identical files.
"""

from __future__ import annotations

import csv
import io
import math
from fractions import Fraction
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from bdepth.audit.report import InvariantReport
from bdepth.core.errors import ParseError
from bdepth.core.novikov import as_fraction
from bdepth.lab.flow import BlockOperatorFamily
from bdepth.lab.scan import ScanResult


def format_number(value: Any) -> str:
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return f"{value:.17g}"
    return str(value)


def write_rows(path: Path | str | None, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    """Write a CSV with ``\\n`` line endings; returns the text."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_number(v) for v in row])
    text = buffer.getvalue()
    if path is not None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
    return text


def _read_rows(path: Path | str, expected: Sequence[str] | None = None) -> tuple[list[str], list[tuple[int, list[str]]]]:
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.reader(f)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise ParseError(f"{path}: empty CSV", 1, 1) from None
        if expected is not None and header[: len(expected)] != list(expected):
            raise ParseError(f"{path}: header must start with {','.join(expected)}", 1, 1)
        rows = []
        for row in reader:
            if not any(cell.strip() for cell in row):
                continue
            if len(row) != len(header):
                raise ParseError(f"{path}: expected {len(header)} fields, got {len(row)}",
                                 reader.line_num)
            rows.append((reader.line_num, [cell.strip() for cell in row]))
    return header, rows


def _exact(text: str, line: int, column: int) -> Fraction:
    try:
        return as_fraction(text)
    except (ValueError, ZeroDivisionError):
        raise ParseError(f"{text!r} is not a number", line, column) from None


def _float(text: str, line: int, column: int) -> float:
    try:
        return float(text)
    except ValueError:
        raise ParseError(f"{text!r} is not a number", line, column) from None


# ---------------------------------------------------------------------------
# Sampled functions
# ---------------------------------------------------------------------------


def read_samples(path: Path | str) -> tuple[list[Fraction], list[Fraction]]:
    """``position,value`` rows, sorted by position; decimal literals are read exactly."""
    _, rows = _read_rows(path, ("position", "value"))
    pairs = [(_exact(r[0], line, 1), _exact(r[1], line, 2)) for line, r in rows]
    pairs.sort()
    for (a, _), (b, _) in zip(pairs, pairs[1:]):
        if a == b:
            raise ParseError(f"{path}: duplicate position {a}")
    return [p for p, _ in pairs], [v for _, v in pairs]


def write_report(path: Path | str | None, report: InvariantReport) -> str:
    """An invariant report as ``metric,value,threshold,passed`` rows."""
    rows = [
        (m.name, m.value, "" if m.threshold is None else m.threshold, m.passed)
        for m in report.metrics
    ]
    return write_rows(path, ("metric", "value", "threshold", "passed"), rows)


# ---------------------------------------------------------------------------
# Operator families and Hessians
# ---------------------------------------------------------------------------


def _matrix_columns(prefix: str, n: int) -> list[str]:
    return [f"{prefix}_{i + 1}_{j + 1}" for i in range(n) for j in range(n)]


def family_header(n: int) -> list[str]:
    return ["s", *_matrix_columns("b1", n), *_matrix_columns("b2", n)]


def _square_size(count: int, blocks: int, path: Path | str) -> int:
    n = math.isqrt(count // blocks) if count % blocks == 0 else -1
    if n < 1 or blocks * n * n != count:
        raise ParseError(f"{path}: {count} matrix columns do not form {blocks} square matrices", 1, 1)
    return n


def read_family(path: Path | str) -> BlockOperatorFamily:
    """Rows ``s, B1 entries, B2 entries`` (row-major); ``T`` is the last position."""
    header, rows = _read_rows(path, ("s",))
    n = _square_size(len(header) - 1, 2, path)
    if header != family_header(n):
        raise ParseError(f"{path}: header must be {','.join(family_header(n))}", 1, 1)
    if not rows:
        raise ParseError(f"{path}: no samples")
    data = np.array([[_float(cell, line, col + 1) for col, cell in enumerate(r)] for line, r in rows])
    positions = data[:, 0]
    b1 = data[:, 1:1 + n * n].reshape(-1, n, n)
    b2 = data[:, 1 + n * n:].reshape(-1, n, n)
    T = float(positions[-1])
    return BlockOperatorFamily(positions, b1, b2, T)


def write_family(path: Path | str | None, fam: BlockOperatorFamily) -> str:
    rows = [
        (s, *a.ravel(), *b.ravel())
        for s, a, b in zip(fam.positions, fam.b1, fam.b2)
    ]
    return write_rows(path, family_header(fam.dim), rows)


def read_hessians(path: Path | str) -> tuple[np.ndarray, np.ndarray, float]:
    """Rows ``s, h_1_1, ..., h_m_m`` for ``m = 2n``; returns positions, Hessians and ``T``."""
    header, rows = _read_rows(path, ("s",))
    m = _square_size(len(header) - 1, 1, path)
    if m % 2 or header != ["s", *_matrix_columns("h", m)]:
        raise ParseError(f"{path}: expected an even-sized Hessian header s,h_1_1,...", 1, 1)
    if not rows:
        raise ParseError(f"{path}: no samples")
    data = np.array([[_float(cell, line, col + 1) for col, cell in enumerate(r)] for line, r in rows])
    return data[:, 0], data[:, 1:].reshape(-1, m, m), float(data[-1, 0])


def write_scan(path: Path | str | None, result: ScanResult) -> str:
    return write_rows(path, ("eta", "singular_value", "candidate"), result.rows())
