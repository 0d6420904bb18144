"""YAML files for complexes, circle Morse data and quantum corrections.

Every file starts with ``format`` and ``version`` keys. Parsing walks the
composed YAML node tree instead of the loaded Python objects so that errors
carry the line and column of the offending node, and so that scalars are
read as written (``3/2`` stays a rational, ``0`` stays text).

A complex file looks like::

    format: bdepth-complex
    version: 1
    group: ['1']
    grading:
      labels: ['0', '1']
      successor: {'0': '1', '1': '0'}
    generators:
      '0': [[y, '0']]
      '1': [[x, '1']]
    differential:
    - [y, x, 1*T^0]

Serialization is canonical: it preserves basis order, lists differential
entries grading by grading in basis order and always writes the group, so
parsing a serialized file and serializing again is byte-identical.
"""

from __future__ import annotations

import logging
from fractions import Fraction
from pathlib import Path
from typing import Any, NoReturn

import yaml

from bdepth.algebra.filtered import Chain, FilteredComplex, FilteredVectorSpace, GradingSet
from bdepth.algebra.quantum import QuantumCorrection
from bdepth.algebra.tensor import SignedComplex
from bdepth.core.errors import GroupMismatch, ParseError
from bdepth.core.novikov import ExponentGroup, NovikovElement, as_fraction
from bdepth.morse.circle import CircleMorseData

logger = logging.getLogger(__name__)

FORMAT_COMPLEX = "bdepth-complex"
FORMAT_CIRCLE = "bdepth-circle"
FORMAT_CORRECTION = "bdepth-correction"
VERSION = 1

_COMPLEX_KEYS = {"format", "version", "group", "grading", "generators", "differential",
                 "parity", "characteristic_two"}
_CORRECTION_KEYS = {"format", "version", "group", "grading", "generators", "base",
                    "differential", "gaps"}
_CIRCLE_KEYS = {"format", "version", "values", "pattern", "copies"}


# ---------------------------------------------------------------------------
# Node walking
# ---------------------------------------------------------------------------


def _fail(node: yaml.Node, message: str) -> NoReturn:
    mark = node.start_mark
    raise ParseError(message, mark.line + 1, mark.column + 1)


def _compose(text: str, source: str) -> yaml.Node:
    try:
        node = yaml.compose(text, Loader=yaml.SafeLoader)
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark or exc.context_mark
        line = mark.line + 1 if mark else None
        column = mark.column + 1 if mark else None
        raise ParseError(f"{source}: {exc.problem or exc.context}", line, column) from exc
    except yaml.YAMLError as exc:
        raise ParseError(f"{source}: {exc}") from exc
    if node is None:
        raise ParseError(f"{source}: empty file", 1, 1)
    return node


def _mapping(node: yaml.Node, what: str) -> dict[str, yaml.Node]:
    if not isinstance(node, yaml.MappingNode):
        _fail(node, f"{what} must be a mapping")
    out: dict[str, yaml.Node] = {}
    for key, value in node.value:
        name = _scalar(key, f"key in {what}")
        if name in out:
            _fail(key, f"duplicate key {name!r} in {what}")
        out[name] = value
    return out


def _sequence(node: yaml.Node, what: str) -> list[yaml.Node]:
    if not isinstance(node, yaml.SequenceNode):
        _fail(node, f"{what} must be a list")
    return list(node.value)


def _scalar(node: yaml.Node, what: str) -> str:
    if not isinstance(node, yaml.ScalarNode):
        _fail(node, f"{what} must be a single value")
    return node.value


def _tuple(node: yaml.Node, size: int, what: str) -> list[yaml.Node]:
    items = _sequence(node, what)
    if len(items) != size:
        _fail(node, f"{what} must have {size} entries, got {len(items)}")
    return items


def _rational(node: yaml.Node, what: str) -> Fraction:
    text = _scalar(node, what).strip()
    try:
        return as_fraction(text)
    except (ValueError, ZeroDivisionError):
        _fail(node, f"{what}: {text!r} is not a rational number")


def _element(node: yaml.Node, group: ExponentGroup | None, what: str) -> NovikovElement:
    text = _scalar(node, what)
    try:
        return NovikovElement.parse(text, group)
    except ParseError as exc:
        mark = node.start_mark
        column = mark.column + (exc.column or 1)
        raise ParseError(f"{what}: {exc.message}", mark.line + 1, column) from exc


def _require(root: dict[str, yaml.Node], key: str, parent: yaml.Node) -> yaml.Node:
    if key not in root:
        _fail(parent, f"missing required key {key!r}")
    return root[key]


def _header(node: yaml.Node, expected: str, allowed: set[str]) -> dict[str, yaml.Node]:
    root = _mapping(node, "file")
    fmt = _scalar(_require(root, "format", node), "format")
    if fmt != expected:
        _fail(root["format"], f"expected format {expected!r}, got {fmt!r}")
    version = _scalar(_require(root, "version", node), "version")
    if version != str(VERSION):
        _fail(root["version"], f"unsupported version {version!r} (expected {VERSION})")
    for key, value in root.items():
        if key not in allowed:
            _fail(value, f"unknown key {key!r}")
    return root


# ---------------------------------------------------------------------------
# Complex sections
# ---------------------------------------------------------------------------


def _group(node: yaml.Node | None) -> ExponentGroup | None:
    if node is None:
        return None
    gens = [_rational(item, "group generator") for item in _sequence(node, "group")]
    try:
        return ExponentGroup(tuple(gens))
    except ValueError as exc:
        _fail(node, str(exc))


def _grading(node: yaml.Node) -> GradingSet:
    section = _mapping(node, "grading")
    labels = [_scalar(item, "grading label") for item in _sequence(_require(section, "labels", node),
                                                                  "grading labels")]
    try:
        if "successor" not in section:
            return GradingSet.cyclic(labels)
        succ = {k: _scalar(v, f"successor of {k!r}")
                for k, v in _mapping(section["successor"], "successor").items()}
        return GradingSet(tuple(labels), succ)
    except ValueError as exc:
        _fail(node, str(exc))


def _generators(node: yaml.Node, grading: GradingSet) -> dict[str, tuple[list[str], list[Fraction]]]:
    section = _mapping(node, "generators")
    out: dict[str, tuple[list[str], list[Fraction]]] = {}
    for label, value in section.items():
        if label not in grading:
            _fail(value, f"generators for unknown grading {label!r}")
        names, levels = [], []
        for item in _sequence(value, f"generators of grading {label!r}"):
            name_node, level_node = _tuple(item, 2, "generator entry [name, level]")
            names.append(_scalar(name_node, "generator name"))
            levels.append(_rational(level_node, f"level of {names[-1]!r}"))
        out[label] = (names, levels)
    for label in grading.labels:
        out.setdefault(label, ([], []))
    return out


def _entries(node: yaml.Node | None, what: str) -> list[tuple[yaml.Node, str, str, yaml.Node]]:
    if node is None:
        return []
    out = []
    for item in _sequence(node, what):
        tgt, src, coeff = _tuple(item, 3, f"{what} entry [target, source, coefficient]")
        out.append((item, _scalar(tgt, "target"), _scalar(src, "source"), coeff))
    return out


def _assemble(
    parent: yaml.Node,
    grading: GradingSet,
    generators: dict[str, tuple[list[str], list[Fraction]]],
    entries: list[tuple[yaml.Node, str, str, NovikovElement]],
    group: ExponentGroup,
) -> FilteredComplex:
    owner = {name: label for label, (names, _) in generators.items() for name in names}
    differential: dict[str, Chain] = {}
    for item, tgt, src, coeff in entries:
        for name in (tgt, src):
            if name not in owner:
                _fail(item, f"unknown generator {name!r}")
        column = differential.setdefault(src, {})
        if tgt in column:
            _fail(item, f"duplicate differential entry ({tgt}, {src})")
        try:
            column[tgt] = coeff.with_group(group)
        except GroupMismatch as exc:
            _fail(item, str(exc))
    try:
        pieces = {label: FilteredVectorSpace(tuple(names), tuple(levels), group)
                  for label, (names, levels) in generators.items()}
        return FilteredComplex(grading, pieces, differential)
    except ValueError as exc:
        _fail(parent, str(exc))


def _complex_sections(node: yaml.Node, root: dict[str, yaml.Node],
                      key: str = "differential") -> FilteredComplex:
    declared = _group(root.get("group"))
    grading = _grading(_require(root, "grading", node))
    generators = _generators(_require(root, "generators", node), grading)
    raw = _entries(root.get(key), key)
    entries = [(item, tgt, src, _element(coeff, declared, f"coefficient of ({tgt}, {src})"))
               for item, tgt, src, coeff in raw]
    group = declared
    if group is None:
        group = ExponentGroup.trivial().join(*(e for *_, c in entries for e, _ in c.terms))
    return _assemble(node, grading, generators, entries, group)


def _read(path: Path | str) -> tuple[str, str]:
    path = Path(path)
    try:
        return path.read_text(encoding="utf-8"), str(path)
    except UnicodeDecodeError as exc:
        raise ParseError(f"{path}: not UTF-8 text") from exc


# ---------------------------------------------------------------------------
# Public API
# ---------------------------------------------------------------------------


def loads_complex(text: str, source: str = "<string>") -> FilteredComplex:
    """Parse complex text.

    Raises:
        ParseError: malformed YAML, missing keys or bad literals.
        InvariantViolation: the differential raises a level or squares to nonzero.
    """
    node = _compose(text, source)
    root = _header(node, FORMAT_COMPLEX, _COMPLEX_KEYS)
    return _complex_sections(node, root)


def parse_complex(path: Path | str) -> FilteredComplex:
    text, source = _read(path)
    return loads_complex(text, source)


def loads_signed_complex(text: str, source: str = "<string>") -> SignedComplex:
    """A complex file with an optional ``parity`` table or ``characteristic_two: true``."""
    node = _compose(text, source)
    root = _header(node, FORMAT_COMPLEX, _COMPLEX_KEYS)
    complex_ = _complex_sections(node, root)
    parity = None
    if "parity" in root:
        parity = {}
        for name, value in _mapping(root["parity"], "parity").items():
            bit = _scalar(value, f"parity of {name!r}")
            if bit not in ("0", "1"):
                _fail(value, f"parity of {name!r} must be 0 or 1, got {bit!r}")
            parity[name] = int(bit)
    two = False
    if "characteristic_two" in root:
        flag = _scalar(root["characteristic_two"], "characteristic_two").lower()
        if flag not in ("true", "false"):
            _fail(root["characteristic_two"], "characteristic_two must be true or false")
        two = flag == "true"
    try:
        return SignedComplex(complex_, parity, two)
    except ValueError as exc:
        _fail(root.get("parity", node), str(exc))


def parse_signed_complex(path: Path | str) -> SignedComplex:
    text, source = _read(path)
    return loads_signed_complex(text, source)


def loads_correction(text: str, source: str = "<string>") -> QuantumCorrection:
    """A correction file: the deformed differential plus a rational ``base`` and ``gaps``."""
    node = _compose(text, source)
    root = _header(node, FORMAT_CORRECTION, _CORRECTION_KEYS)
    deformed = _complex_sections(node, root)
    grading = deformed.grading
    generators = {k: (list(p.basis), list(p.levels)) for k, p in deformed.pieces.items()}
    trivial = ExponentGroup.trivial()
    base_entries = [
        (item, tgt, src, NovikovElement.constant(_rational(coeff, f"base entry ({tgt}, {src})"), trivial))
        for item, tgt, src, coeff in _entries(root.get("base"), "base")
    ]
    base = _assemble(node, grading, generators, base_entries, trivial)
    gaps = {}
    if "gaps" in root:
        for label, value in _mapping(root["gaps"], "gaps").items():
            gaps[label] = _rational(value, f"gap of grading {label!r}")
    try:
        return QuantumCorrection(base, deformed, gaps)
    except ValueError as exc:
        _fail(node, str(exc))


def parse_correction(path: Path | str) -> QuantumCorrection:
    text, source = _read(path)
    return loads_correction(text, source)


def loads_circle(text: str, source: str = "<string>") -> CircleMorseData:
    """Circle data from ``values`` or from ``pattern`` repeated ``copies`` times.

    The values are rotated so that the first maximum is a global maximum.
    """
    node = _compose(text, source)
    root = _header(node, FORMAT_CIRCLE, _CIRCLE_KEYS)
    if "values" in root:
        values = [_rational(v, "critical value") for v in _sequence(root["values"], "values")]
    elif "pattern" in root:
        pattern = [_rational(v, "critical value") for v in _sequence(root["pattern"], "pattern")]
        copies = 1
        if "copies" in root:
            text_copies = _scalar(root["copies"], "copies")
            if not text_copies.isdigit() or int(text_copies) < 1:
                _fail(root["copies"], f"copies must be a positive integer, got {text_copies!r}")
            copies = int(text_copies)
        values = pattern * copies
    else:
        _fail(node, "missing required key 'values' (or 'pattern')")
    try:
        return CircleMorseData.normalized(values)
    except ValueError as exc:
        _fail(root.get("values", root.get("pattern", node)), str(exc))


def parse_circle(path: Path | str) -> CircleMorseData:
    text, source = _read(path)
    return loads_circle(text, source)


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def _entry_rows(complex_: FilteredComplex) -> list[list[str]]:
    rows = []
    for label in complex_.grading.labels:
        target = complex_.pieces[complex_.grading.predecessor(label)]
        for src in complex_.pieces[label].basis:
            column = complex_.differential.get(src, {})
            rows.extend([tgt, src, str(column[tgt])] for tgt in target.basis if tgt in column)
    return rows


def _body(complex_: FilteredComplex) -> dict[str, Any]:
    group = complex_.group
    labels = complex_.grading.labels
    return {
        "group": [] if group.is_trivial else [str(group.generator)],
        "grading": {
            "labels": list(labels),
            "successor": {k: complex_.grading.successor(k) for k in labels},
        },
        "generators": {
            k: [[name, str(lvl)] for name, lvl in zip(complex_.pieces[k].basis, complex_.pieces[k].levels)]
            for k in labels
        },
        "differential": _entry_rows(complex_),
    }


def _dump(data: dict[str, Any], path: Path | str | None) -> str:
    text = yaml.safe_dump(data, sort_keys=False, allow_unicode=True, default_flow_style=None,
                          width=1000)
    if path is not None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
        logger.debug("wrote %s", path)
    return text


def serialize_complex(complex_: FilteredComplex, path: Path | str | None = None) -> str:
    """Canonical text of ``complex_``, also written to ``path`` when given."""
    return _dump({"format": FORMAT_COMPLEX, "version": VERSION, **_body(complex_)}, path)


def serialize_signed_complex(signed: SignedComplex, path: Path | str | None = None) -> str:
    data = {"format": FORMAT_COMPLEX, "version": VERSION, **_body(signed.complex)}
    if signed.parity is not None:
        data["parity"] = {name: signed.parity[name] for name in signed.complex.generators}
    if signed.characteristic_two:
        data["characteristic_two"] = True
    return _dump(data, path)


def serialize_correction(q: QuantumCorrection, path: Path | str | None = None) -> str:
    body = _body(q.deformed)
    base_rows = [[tgt, src, str(q.base.differential[src][tgt].reduction())]
                 for tgt, src, _ in _entry_rows(q.base)]
    data = {
        "format": FORMAT_CORRECTION,
        "version": VERSION,
        "group": body["group"],
        "grading": body["grading"],
        "generators": body["generators"],
        "base": base_rows,
        "differential": body["differential"],
        "gaps": {k: str(q.gaps[k]) for k in q.labels if k in q.gaps},
    }
    return _dump(data, path)


def serialize_circle(data: CircleMorseData, path: Path | str | None = None) -> str:
    return _dump({"format": FORMAT_CIRCLE, "version": VERSION,
                  "values": [str(v) for v in data.values]}, path)
