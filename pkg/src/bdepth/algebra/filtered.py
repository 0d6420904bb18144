"""Filtered vector spaces, graded filtered complexes and filtered maps.

Chains are plain dicts from generator name to Novikov coefficient. Generator
names are unique across a whole complex, so a chain never needs to say which
piece it lives in.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping

from bdepth.core.errors import GroupMismatch, InvariantViolation, ShiftExceeded
from bdepth.core.novikov import (
    NEG_INF,
    ExponentGroup,
    ExtRational,
    NovikovElement,
    Rational,
    as_fraction,
)

logger = logging.getLogger(__name__)

Chain = dict[str, NovikovElement]


# ---------------------------------------------------------------------------
# Chain helpers
# ---------------------------------------------------------------------------


def chain_add(a: Mapping[str, NovikovElement], b: Mapping[str, NovikovElement]) -> Chain:
    out = dict(a)
    for name, coeff in b.items():
        out[name] = out[name] + coeff if name in out else coeff
    return {k: v for k, v in out.items() if not v.vanishes()}


def chain_neg(a: Mapping[str, NovikovElement]) -> Chain:
    return {k: -v for k, v in a.items()}


def chain_sub(a: Mapping[str, NovikovElement], b: Mapping[str, NovikovElement]) -> Chain:
    return chain_add(a, chain_neg(b))


def chain_scale(a: Mapping[str, NovikovElement], coeff: NovikovElement | Rational) -> Chain:
    out = {k: v * coeff for k, v in a.items()}
    return {k: v for k, v in out.items() if not v.vanishes()}


def chain_vanishes(a: Mapping[str, NovikovElement]) -> bool:
    """True when every coefficient has no terms below its cutoff."""
    return all(v.vanishes() for v in a.values())


def chains_equal(a: Mapping[str, NovikovElement], b: Mapping[str, NovikovElement]) -> bool:
    return chain_vanishes(chain_sub(a, b))


def chain_strip(a: Mapping[str, NovikovElement]) -> Chain:
    """Drop truncation markers, keeping the represented terms as an exact chain."""
    out = {k: NovikovElement.from_terms(v.terms, v.group) for k, v in a.items()}
    return {k: v for k, v in out.items() if not v.is_zero()}


def chain_with_group(a: Mapping[str, NovikovElement], group: ExponentGroup) -> Chain:
    return {k: v.with_group(group) for k, v in a.items()}


def chain_text(a: Mapping[str, NovikovElement]) -> dict[str, str]:
    """Stable text form used in reports and failure records."""
    return {k: str(a[k]) for k in sorted(a)}


def basis_chain(name: str, group: ExponentGroup) -> Chain:
    return {name: NovikovElement.one(group)}


# ---------------------------------------------------------------------------
# Gradings and spaces
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GradingSet:
    """Finite grading labels with the Z-action given by a successor bijection."""

    labels: tuple[str, ...]
    successor_map: Mapping[str, str]

    def __post_init__(self) -> None:
        labels = tuple(str(k) for k in self.labels)
        object.__setattr__(self, "labels", labels)
        if len(set(labels)) != len(labels):
            raise ValueError(f"grading labels must be distinct: {labels}")
        succ = {str(k): str(v) for k, v in self.successor_map.items()}
        if set(succ) != set(labels) or set(succ.values()) != set(labels):
            raise ValueError("successor must be a bijection on the grading labels")
        object.__setattr__(self, "successor_map", succ)
        object.__setattr__(self, "_pred", {v: k for k, v in succ.items()})

    @classmethod
    def cyclic(cls, labels: Iterable[str]) -> GradingSet:
        """Labels forming one successor cycle in the given order."""
        labels = tuple(str(k) for k in labels)
        succ = {k: labels[(i + 1) % len(labels)] for i, k in enumerate(labels)}
        return cls(labels, succ)

    @classmethod
    def ungraded(cls) -> GradingSet:
        return cls(("*",), {"*": "*"})

    def successor(self, label: str) -> str:
        return self.successor_map[label]

    def predecessor(self, label: str) -> str:
        return self._pred[label]  # type: ignore[attr-defined]

    def __contains__(self, label: object) -> bool:
        return label in self.successor_map


@dataclass(frozen=True)
class FilteredVectorSpace:
    """A finite-dimensional space with a distinguished orthogonal basis.

    The level of a chain is ``max_i (levels[i] - nu(lambda_i))`` and the zero
    chain has level ``-inf``.
    """

    basis: tuple[str, ...]
    levels: tuple[Fraction, ...]
    group: ExponentGroup = field(default_factory=ExponentGroup.trivial)

    def __post_init__(self) -> None:
        basis = tuple(self.basis)
        levels = tuple(as_fraction(v) for v in self.levels)
        if len(basis) != len(levels):
            raise ValueError("one level per basis element is required")
        if len(set(basis)) != len(basis):
            raise ValueError(f"basis names must be distinct: {basis}")
        object.__setattr__(self, "basis", basis)
        object.__setattr__(self, "levels", levels)
        object.__setattr__(self, "_index", {name: i for i, name in enumerate(basis)})

    @property
    def dim(self) -> int:
        return len(self.basis)

    def index(self, name: str) -> int:
        return self._index[name]  # type: ignore[attr-defined]

    def __contains__(self, name: object) -> bool:
        return name in self._index  # type: ignore[attr-defined]

    def level_of(self, name: str) -> Fraction:
        return self.levels[self.index(name)]

    def level(self, chain: Mapping[str, NovikovElement]) -> ExtRational:
        best: ExtRational = NEG_INF
        for name, coeff in chain.items():
            if coeff.vanishes():
                continue
            value = self.level_of(name) - coeff.terms[0][0]
            if value > best:
                best = value
        return best

    def with_group(self, group: ExponentGroup) -> FilteredVectorSpace:
        return FilteredVectorSpace(self.basis, self.levels, group)

    def shifted(self, delta: Fraction) -> FilteredVectorSpace:
        return FilteredVectorSpace(self.basis, tuple(v + delta for v in self.levels), self.group)


def level(chain: Mapping[str, NovikovElement], space: FilteredVectorSpace) -> ExtRational:
    """Filtration level of ``chain`` expressed in ``space``'s distinguished basis."""
    return space.level(chain)


# ---------------------------------------------------------------------------
# Linear steps
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class LinearStep:
    """A filtered map between two spaces, stored as sparse columns."""

    source: FilteredVectorSpace
    target: FilteredVectorSpace
    columns: Mapping[str, Chain]

    def __post_init__(self) -> None:
        if self.source.group != self.target.group:
            raise GroupMismatch(f"step between {self.source.group} and {self.target.group}")
        for src, col in self.columns.items():
            if src not in self.source:
                raise ValueError(f"column {src!r} is not a source generator")
            for tgt, coeff in col.items():
                if tgt not in self.target:
                    raise ValueError(f"entry {tgt!r} of column {src!r} is not a target generator")
                if coeff.group != self.group:
                    raise GroupMismatch(f"entry ({tgt}, {src}) over {coeff.group}")

    @property
    def group(self) -> ExponentGroup:
        return self.source.group

    def column(self, name: str) -> Chain:
        return self.columns.get(name, {})

    def entry(self, target: str, source: str) -> NovikovElement:
        return self.column(source).get(target, NovikovElement.zero(self.group))

    def apply(self, chain: Mapping[str, NovikovElement]) -> Chain:
        out: Chain = {}
        for name, coeff in chain.items():
            if coeff.vanishes():
                continue
            out = chain_add(out, chain_scale(self.column(name), coeff))
        return out

    def is_zero(self) -> bool:
        return all(chain_vanishes(c) for c in self.columns.values())


# ---------------------------------------------------------------------------
# Complexes
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class FilteredComplex:
    """An S-graded filtered chain complex over a Novikov field.

    ``differential`` maps each generator of grading k to a chain in grading
    ``predecessor(k)``. Construction checks group membership, that the
    differential does not raise levels, and that it squares to zero.
    """

    grading: GradingSet
    pieces: Mapping[str, FilteredVectorSpace]
    differential: Mapping[str, Chain]

    def __post_init__(self) -> None:
        pieces = {str(k): v for k, v in self.pieces.items()}
        if set(pieces) != set(self.grading.labels):
            raise ValueError("one piece per grading label is required")
        if not pieces:
            raise ValueError("a filtered complex needs at least one grading label")
        groups = {p.group for p in pieces.values()}
        if len(groups) > 1:
            raise GroupMismatch("pieces over different exponent groups")
        group = next(iter(groups))

        owner: dict[str, str] = {}
        for label in self.grading.labels:
            for name in pieces[label].basis:
                if name in owner:
                    raise ValueError(f"generator {name!r} appears in two gradings")
                owner[name] = label
        object.__setattr__(self, "pieces", pieces)
        object.__setattr__(self, "_owner", owner)
        object.__setattr__(self, "_group", group)

        diff: dict[str, Chain] = {}
        for src, col in self.differential.items():
            if src not in owner:
                raise InvariantViolation(f"differential source {src!r} is not a generator", src)
            target_label = self.grading.predecessor(owner[src])
            clean: Chain = {}
            for tgt, coeff in col.items():
                if tgt not in pieces[target_label]:
                    raise InvariantViolation(
                        f"entry ({tgt}, {src}) leaves grading {target_label}", (tgt, src)
                    )
                if coeff.group != group:
                    raise GroupMismatch(f"entry ({tgt}, {src}) over {coeff.group}, complex over {group}")
                if not coeff.vanishes():
                    clean[tgt] = coeff
            if clean:
                diff[src] = clean
        object.__setattr__(self, "differential", diff)
        self._validate()

    def _validate(self) -> None:
        for src, col in self.differential.items():
            src_level = self.level_of(src)
            target = self.space_of(next(iter(col)))
            image_level = target.level(col)
            if image_level > src_level:
                raise InvariantViolation(
                    f"level({src}) = {src_level} but level(d {src}) = {image_level}", src
                )
            twice = self.boundary(col)
            if not chain_vanishes(twice):
                culprit = next(name for name, c in twice.items() if not c.vanishes())
                raise InvariantViolation(
                    f"d(d {src}) has nonzero coefficient on {culprit}", (culprit, src)
                )

    # -- accessors ---------------------------------------------------------

    @property
    def group(self) -> ExponentGroup:
        return self._group  # type: ignore[attr-defined]

    @property
    def generators(self) -> list[str]:
        return [name for label in self.grading.labels for name in self.pieces[label].basis]

    @property
    def dim(self) -> int:
        return sum(p.dim for p in self.pieces.values())

    def grading_of(self, name: str) -> str:
        return self._owner[name]  # type: ignore[attr-defined]

    def space_of(self, name: str) -> FilteredVectorSpace:
        return self.pieces[self.grading_of(name)]

    def level_of(self, name: str) -> Fraction:
        return self.space_of(name).level_of(name)

    def level(self, chain: Mapping[str, NovikovElement]) -> ExtRational:
        """Level of a chain that may spread over several gradings."""
        best: ExtRational = NEG_INF
        for name, coeff in chain.items():
            if coeff.vanishes():
                continue
            best = max(best, self.level_of(name) - coeff.terms[0][0])
        return best

    def boundary(self, chain: Mapping[str, NovikovElement]) -> Chain:
        out: Chain = {}
        for name, coeff in chain.items():
            col = self.differential.get(name)
            if col and not coeff.vanishes():
                out = chain_add(out, chain_scale(col, coeff))
        return out

    def step_into(self, label: str) -> LinearStep:
        """The differential from grading ``successor(label)`` into ``label``."""
        source = self.pieces[self.grading.successor(label)]
        target = self.pieces[label]
        columns = {name: self.differential[name] for name in source.basis if name in self.differential}
        return LinearStep(source, target, columns)

    def step_out_of(self, label: str) -> LinearStep:
        return self.step_into(self.grading.predecessor(label))

    # -- derived complexes -------------------------------------------------

    def forget_grading(self) -> FilteredComplex:
        """The ungraded complex on the same generators."""
        names = self.generators
        levels = tuple(self.level_of(n) for n in names)
        space = FilteredVectorSpace(tuple(names), levels, self.group)
        return FilteredComplex(GradingSet.ungraded(), {"*": space}, dict(self.differential))

    def with_group(self, group: ExponentGroup) -> FilteredComplex:
        if group == self.group:
            return self
        pieces = {k: p.with_group(group) for k, p in self.pieces.items()}
        diff = {k: chain_with_group(c, group) for k, c in self.differential.items()}
        return FilteredComplex(self.grading, pieces, diff)

    def shifted(self, delta: Rational) -> FilteredComplex:
        """All levels raised by ``delta``."""
        delta = as_fraction(delta)
        pieces = {k: p.shifted(delta) for k, p in self.pieces.items()}
        return FilteredComplex(self.grading, pieces, self.differential)

    def identity_map(self) -> FilteredMap:
        return FilteredMap(self, self, {n: basis_chain(n, self.group) for n in self.generators})

    def zero_homotopy(self, other: FilteredComplex | None = None) -> FilteredMap:
        return FilteredMap(self, other or self, {}, degree=1)


# ---------------------------------------------------------------------------
# Filtered maps
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class FilteredMap:
    """A map between complexes that raises levels by at most ``shift``.

    ``degree`` 0 is a chain-map candidate sending grading k to ``grading_map[k]``;
    degree 1 is a homotopy sending grading k to ``successor(grading_map[k])``.
    """

    source: FilteredComplex
    target: FilteredComplex
    entries: Mapping[str, Chain]
    shift: Fraction = Fraction(0)
    degree: int = 0
    grading_map: Mapping[str, str] | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "shift", as_fraction(self.shift))
        if self.degree not in (0, 1):
            raise ValueError(f"degree must be 0 or 1, got {self.degree}")
        if self.source.group != self.target.group:
            raise GroupMismatch("filtered map between complexes over different groups")
        gmap = dict(self.grading_map) if self.grading_map is not None else {
            k: k for k in self.source.grading.labels
        }
        for label in self.source.grading.labels:
            if gmap.get(label) not in self.target.grading:
                raise ValueError(f"grading {label!r} has no image in the target")
        object.__setattr__(self, "grading_map", gmap)
        for src, col in self.entries.items():
            expected = self.target_label(self.source.grading_of(src))
            for tgt in col:
                if self.target.grading_of(tgt) != expected:
                    raise InvariantViolation(
                        f"entry ({tgt}, {src}) must land in grading {expected}", (tgt, src)
                    )
        object.__setattr__(
            self, "entries", {k: dict(v) for k, v in self.entries.items() if not chain_vanishes(v)}
        )

    def target_label(self, label: str) -> str:
        image = self.grading_map[label]  # type: ignore[index]
        return self.target.grading.successor(image) if self.degree == 1 else image

    def apply(self, chain: Mapping[str, NovikovElement]) -> Chain:
        out: Chain = {}
        for name, coeff in chain.items():
            col = self.entries.get(name)
            if col and not coeff.vanishes():
                out = chain_add(out, chain_scale(col, coeff))
        return out

    def compose(self, after: FilteredMap) -> FilteredMap:
        """``after`` applied to the output of this map (chain-map degree only)."""
        if self.degree or after.degree:
            raise ValueError("compose is defined for degree-0 maps")
        gmap = {k: after.grading_map[v] for k, v in self.grading_map.items()}  # type: ignore[index]
        entries = {n: after.apply(self.apply(basis_chain(n, self.source.group)))
                   for n in self.source.generators}
        return FilteredMap(self.source, after.target, entries, self.shift + after.shift,
                           self.degree + after.degree, gmap)

    def check_filtered(self, bound: Rational | None = None) -> None:
        """Raise ShiftExceeded naming the first generator whose level rises too far.

        The allowed rise is ``bound`` when given, otherwise the map's own ``shift``.
        """
        allowed = self.shift if bound is None else as_fraction(bound)
        for name in self.source.generators:
            image = self.entries.get(name)
            if not image:
                continue
            limit = self.source.level_of(name) + allowed
            if self.target.level(image) > limit:
                raise ShiftExceeded(
                    f"level of image of {name} is {self.target.level(image)}, bound {limit}", name
                )

    def is_chain_map(self) -> bool:
        if self.degree != 0:
            return False
        for name in self.source.generators:
            x = basis_chain(name, self.source.group)
            if not chains_equal(self.apply(self.source.boundary(x)),
                                self.target.boundary(self.apply(x))):
                return False
        return True

    def step(self, label: str) -> LinearStep:
        """This map restricted to source grading ``label``."""
        source = self.source.pieces[label]
        target = self.target.pieces[self.target_label(label)]
        return LinearStep(source, target, {n: self.entries[n] for n in source.basis
                                           if n in self.entries})


__all__ = [
    "Chain",
    "FilteredComplex",
    "FilteredMap",
    "FilteredVectorSpace",
    "GradingSet",
    "LinearStep",
    "basis_chain",
    "chain_add",
    "chain_neg",
    "chain_scale",
    "chain_strip",
    "chain_sub",
    "chain_text",
    "chain_vanishes",
    "chains_equal",
    "level",
]
