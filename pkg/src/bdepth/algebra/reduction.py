"""Boundary depth: reduction of filtered maps to paired orthogonal bases.

A step ``A: V -> W`` is first standardized: every generator is rescaled by a
power of ``T`` to level 0, which needs the exponent group extended by all
level differences. Over the valuation ring the rescaled matrix is then
diagonalized by ``smith_reduce``; the diagonal valuations are the gaps.
When the exponent group is trivial the coefficients are plain rationals and
the column-reduction used for persistence barcodes gives the same pairing
exactly, without any truncation.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from bdepth.algebra.filtered import (
    Chain,
    FilteredComplex,
    FilteredVectorSpace,
    LinearStep,
    basis_chain,
    chain_strip,
    chain_text,
    chain_vanishes,
    chain_with_group,
)
from bdepth.algebra.smith import (
    Matrix,
    SmithForm,
    left_dependency,
    novikov_rank,
    rational_rank,
    smith_reduce,
)
from bdepth.core.config import DepthConfig
from bdepth.core.errors import (
    NotIndependent,
    NotOrthogonal,
    TruncationUnstable,
    ZeroMap,
)
from bdepth.core.novikov import (
    INF,
    NEG_INF,
    ExponentGroup,
    ExtRational,
    NovikovElement,
    format_ext,
)

logger = logging.getLogger(__name__)


@dataclass
class DepthPair:
    """A primitive ``y`` and its image ``x = A y`` with ``gap = level(y) - level(x)``."""

    primitive: Chain
    boundary: Chain
    gap: Fraction


@dataclass
class ReductionCertificate:
    """Orthogonal bases adapted to one step.

    ``pairs`` (sorted by gap, largest first) together with ``kernel`` form an
    orthogonal basis of the source; the pair boundaries together with
    ``complement`` form one of the target. Chains are written in the
    distinguished bases over ``group``, which contains the step's own group.
    """

    pairs: list[DepthPair]
    kernel: list[Chain]
    complement: list[Chain]
    group: ExponentGroup
    cutoff: ExtRational
    method: str

    @property
    def unpaired_cycles(self) -> list[Chain]:
        return self.kernel + self.complement

    @property
    def rank(self) -> int:
        return len(self.pairs)

    @property
    def max_gap(self) -> Fraction:
        return self.pairs[0].gap if self.pairs else Fraction(0)

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "group": str(self.group),
            "cutoff": format_ext(self.cutoff),
            "pairs": [
                {"primitive": chain_text(p.primitive), "boundary": chain_text(p.boundary),
                 "gap": str(p.gap)}
                for p in self.pairs
            ],
            "kernel": [chain_text(c) for c in self.kernel],
            "complement": [chain_text(c) for c in self.complement],
        }


@dataclass
class DepthWitness:
    """``boundary = A primitive`` with coefficients in the step's own group."""

    boundary: Chain
    primitive: Chain
    gap: Fraction


# ---------------------------------------------------------------------------
# Standardization
# ---------------------------------------------------------------------------


@dataclass
class _Standardized:
    step: LinearStep
    extended: LinearStep
    group: ExponentGroup
    base: Fraction
    matrix: Matrix

    def source_chain(self, vector: Sequence[NovikovElement]) -> Chain:
        out: Chain = {}
        for name, lvl, coeff in zip(self.step.source.basis, self.step.source.levels, vector):
            if not coeff.vanishes():
                out[name] = coeff.shift(lvl - self.base)
        return out

    def target_coords(self, chain: Mapping[str, NovikovElement]) -> list[NovikovElement]:
        zero = NovikovElement.zero(self.group)
        coords = []
        for name, lvl in zip(self.step.target.basis, self.step.target.levels):
            coeff = chain.get(name)
            coords.append(coeff.shift(self.base - lvl) if coeff is not None else zero)
        return coords


def _standardize(step: LinearStep, group: ExponentGroup | None = None) -> _Standardized:
    levels = list(step.source.levels) + list(step.target.levels)
    base = min(levels) if levels else Fraction(0)
    gamma = (group or step.group).join(*(lvl - base for lvl in levels))
    extended = LinearStep(
        step.source.with_group(gamma),
        step.target.with_group(gamma),
        {k: chain_with_group(c, gamma) for k, c in step.columns.items()},
    )
    zero = NovikovElement.zero(gamma)
    matrix: Matrix = []
    for tgt, t_lvl in zip(step.target.basis, step.target.levels):
        row = []
        for src, s_lvl in zip(step.source.basis, step.source.levels):
            entry = extended.column(src).get(tgt)
            row.append(entry.shift(s_lvl - t_lvl) if entry is not None else zero)
        matrix.append(row)
    return _Standardized(step, extended, gamma, base, matrix)


def standardized_matrix(step: LinearStep) -> tuple[Matrix, ExponentGroup]:
    """The step rescaled to level 0 everywhere, with the exponent group that needs."""
    std = _standardize(step)
    return std.matrix, std.group


def policy_cutoff(step: LinearStep) -> Fraction:
    """Level spread plus the distinct absolute exponents of the standardized entries, plus one."""
    levels = list(step.source.levels) + list(step.target.levels)
    spread = max(levels) - min(levels) if levels else Fraction(0)
    exponents: set[Fraction] = set()
    for src, s_lvl in zip(step.source.basis, step.source.levels):
        for tgt, coeff in step.column(src).items():
            t_lvl = step.target.level_of(tgt)
            exponents.update(abs(e + s_lvl - t_lvl) for e, _ in coeff.terms)
    return spread + sum(exponents, Fraction(0)) + 1


def _stable_smith(std: _Standardized, config: DepthConfig) -> SmithForm:
    cutoff: Fraction = config.cutoff if config.cutoff is not None else policy_cutoff(std.step)
    form = smith_reduce(std.matrix, std.group, cutoff)
    if not config.verify_cutoff or config.max_cutoff_doublings == 0:
        return form
    for _ in range(config.max_cutoff_doublings):
        doubled = 2 * cutoff if cutoff > 0 else cutoff + 1
        check = smith_reduce(std.matrix, std.group, doubled)
        if check.rank == form.rank and check.gaps() == form.gaps():
            return check
        logger.info("Gaps changed between cutoff %s and %s; doubling again", cutoff, doubled)
        form, cutoff = check, doubled
    raise TruncationUnstable(
        f"gaps still changing at cutoff {cutoff} after {config.max_cutoff_doublings} doublings"
    )


# ---------------------------------------------------------------------------
# Single-step reduction
# ---------------------------------------------------------------------------


def reduce(
    step: LinearStep,
    config: DepthConfig | None = None,
    group: ExponentGroup | None = None,
    method: str = "auto",
) -> ReductionCertificate:
    """Reduce one step to a paired orthogonal basis.

    Args:
        step: The map between two filtered spaces.
        config: Cutoff policy settings (defaults to ``DepthConfig()``).
        group: Coefficient group the certificate chains should live over.
        method: ``"auto"``, ``"smith"`` or ``"field"`` (trivial groups only).
    """
    config = config or DepthConfig()
    if method not in ("auto", "smith", "field"):
        raise ValueError(f"unknown reduction method {method!r}")
    trivial = step.group.is_trivial and (group is None or group.is_trivial)
    if method == "field" and not trivial:
        raise ValueError("the field method needs a trivial exponent group")
    if method == "field" or (method == "auto" and trivial):
        return _reduce_over_field(step)
    return _reduce_smith(step, config, group)[0]


def _reduce_smith(
    step: LinearStep, config: DepthConfig, group: ExponentGroup | None = None
) -> tuple[ReductionCertificate, _Standardized, SmithForm]:
    std = _standardize(step, group)
    form = _stable_smith(std, config)
    n_src = step.source.dim

    pairs: list[DepthPair] = []
    for t, d in enumerate(form.diagonal):
        vector = [form.col_transform[j][t] for j in range(n_src)]
        y = chain_strip(std.source_chain(vector))
        x = std.extended.apply(y)
        gap = step.source.level(y) - step.target.level(x)
        if gap != d.terms[0][0]:
            raise TruncationUnstable(
                f"pair {t}: level gap {gap} disagrees with diagonal valuation {d.terms[0][0]}; "
                "raise the cutoff"
            )
        pairs.append(DepthPair(y, x, gap))
    kernel = [
        std.source_chain([form.col_transform[j][t] for j in range(n_src)])
        for t in range(form.rank, n_src)
    ]
    order = sorted(range(len(pairs)), key=lambda i: -pairs[i].gap)
    pairs = [pairs[i] for i in order]
    complement = _greedy_extend([p.boundary for p in pairs], step.target)[len(pairs):]
    cert = ReductionCertificate(pairs, kernel, complement, std.group, form.cutoff, "smith")
    logger.debug("smith reduction: rank %d, max gap %s", cert.rank, cert.max_gap)
    return cert, std, form


def _reduce_over_field(step: LinearStep) -> ReductionCertificate:
    """Column reduction with rational coefficients, columns and rows in filtration order."""
    group = step.group
    src_order = sorted(range(step.source.dim), key=lambda j: (step.source.levels[j], j))
    tgt_rank = {
        i: r for r, i in enumerate(
            sorted(range(step.target.dim), key=lambda i: (step.target.levels[i], i)))
    }
    tgt_by_rank = {r: i for i, r in tgt_rank.items()}

    reduced: dict[int, dict[int, Fraction]] = {}
    combos: dict[int, dict[int, Fraction]] = {}
    owner: dict[int, int] = {}
    for j in src_order:
        name = step.source.basis[j]
        col = {
            tgt_rank[step.target.index(t)]: c.coefficient(0)
            for t, c in step.column(name).items() if c.coefficient(0) != 0
        }
        combo = {j: Fraction(1)}
        while col:
            low = max(col)
            k = owner.get(low)
            if k is None:
                owner[low] = j
                break
            f = col[low] / reduced[k][low]
            for r, v in reduced[k].items():
                col[r] = col.get(r, Fraction(0)) - f * v
            for s, v in combos[k].items():
                combo[s] = combo.get(s, Fraction(0)) - f * v
            col = {r: v for r, v in col.items() if v != 0}
            combo = {s: v for s, v in combo.items() if v != 0}
        reduced[j] = col
        combos[j] = combo

    def to_chain(coeffs: Mapping[int, Fraction], space: FilteredVectorSpace,
                 index: Mapping[int, int] | None = None) -> Chain:
        return {
            space.basis[index[k] if index else k]: NovikovElement.constant(v, group)
            for k, v in coeffs.items()
        }

    pairs: list[DepthPair] = []
    kernel: list[Chain] = []
    for j in src_order:
        y = to_chain(combos[j], step.source)
        if reduced[j]:
            x = to_chain(reduced[j], step.target, tgt_by_rank)
            pairs.append(DepthPair(y, x, step.source.level(y) - step.target.level(x)))
        else:
            kernel.append(y)
    pairs.sort(key=lambda p: -p.gap)
    complement = [
        basis_chain(step.target.basis[tgt_by_rank[r]], group)
        for r in range(step.target.dim) if r not in owner
    ]
    return ReductionCertificate(pairs, kernel, complement, group, INF, "field")


# ---------------------------------------------------------------------------
# Depth
# ---------------------------------------------------------------------------


def step_depth(step: LinearStep, config: DepthConfig | None = None) -> Fraction:
    """Largest gap of a step, 0 when it has no pairs."""
    return reduce(step, config).max_gap


def boundary_depth_graded(
    complex_: FilteredComplex, label: str, config: DepthConfig | None = None
) -> ExtRational:
    """Depth in grading ``label``: largest gap of the step from ``successor(label)`` into it."""
    return step_depth(complex_.step_into(label), config)


def depth_profile(
    complex_: FilteredComplex, config: DepthConfig | None = None
) -> dict[str, ExtRational]:
    return {k: boundary_depth_graded(complex_, k, config) for k in complex_.grading.labels}


def boundary_depth(complex_: FilteredComplex, config: DepthConfig | None = None) -> ExtRational:
    """Maximum of the graded depths."""
    profile = depth_profile(complex_, config)
    return max(profile.values(), default=Fraction(0))


# ---------------------------------------------------------------------------
# Witness
# ---------------------------------------------------------------------------


def depth_witness(step: LinearStep, config: DepthConfig | None = None) -> DepthWitness:
    """A boundary attaining the depth together with a cheapest primitive.

    The primitive has coefficients in the step's own exponent group, even when
    standardization needed a larger one.
    """
    config = config or DepthConfig()
    if step.is_zero():
        raise ZeroMap("the map is zero; there is no boundary to witness")

    if step.group.is_trivial:
        cert = _reduce_over_field(step)
        best = cert.pairs[0]
        return DepthWitness(best.boundary, best.primitive, best.gap)

    cert, std, form = _reduce_smith(step, config)
    best = cert.pairs[0]
    gamma = step.group
    if std.group == gamma:
        return DepthWitness(best.boundary, best.primitive, best.gap)

    keys = sorted({gamma.coset_key(e) for c in best.boundary.values() for e, _ in c.terms})
    chosen: tuple[ExtRational, Fraction, Chain] | None = None
    for key in keys:
        part = _coset_part(best.boundary, gamma, key)
        primitive = _cheapest_primitive(part, std, form)
        score = step.source.level(primitive) - step.target.level(part)
        if chosen is None or score > chosen[0]:
            chosen = (score, key, primitive)
    assert chosen is not None
    _, key, primitive = chosen
    y0 = _coset_shift(chain_strip(primitive), gamma, key)
    x0 = step.apply(y0)
    gap = step.source.level(y0) - step.target.level(x0)
    if gap != best.gap:
        raise TruncationUnstable(f"projected witness gap {gap} differs from depth {best.gap}")
    return DepthWitness(x0, y0, gap)


def _coset_part(chain: Mapping[str, NovikovElement], gamma: ExponentGroup, key: Fraction) -> Chain:
    out: Chain = {}
    for name, coeff in chain.items():
        terms = [(e, c) for e, c in coeff.terms if gamma.coset_key(e) == key]
        if terms:
            out[name] = NovikovElement.from_terms(terms, coeff.group, coeff.cutoff)
    return out


def _coset_shift(chain: Mapping[str, NovikovElement], gamma: ExponentGroup, key: Fraction) -> Chain:
    """Coset ``key`` part of ``chain`` multiplied by ``T^-key``, over ``gamma``."""
    out: Chain = {}
    for name, coeff in chain.items():
        terms = [(e - key, c) for e, c in coeff.terms if gamma.coset_key(e) == key]
        if terms:
            out[name] = NovikovElement.from_terms(terms, gamma)
    return out


def _cheapest_primitive(boundary: Chain, std: _Standardized, form: SmithForm) -> Chain:
    """Primitive of ``boundary`` spanned by the paired source vectors."""
    coords = std.target_coords(boundary)
    n_src = std.step.source.dim
    zero = NovikovElement.zero(std.group)
    vector = [zero] * n_src
    for t, d in enumerate(form.diagonal):
        c = zero
        for r, k in zip(form.row_transform[t], coords):
            c = c + r * k
        if c.vanishes():
            continue
        a = (c * d.invert(cutoff=form.cutoff - d.terms[0][0])).truncate(form.cutoff)
        for j in range(n_src):
            vector[j] = (vector[j] + a * form.col_transform[j][t]).truncate(form.cutoff)
    return std.source_chain(vector)


# ---------------------------------------------------------------------------
# Orthogonality
# ---------------------------------------------------------------------------


def residue_vector(chain: Mapping[str, NovikovElement], space: FilteredVectorSpace) -> list[Fraction]:
    """Leading rational coefficients of ``chain`` after rescaling it to level 0."""
    top = space.level(chain)
    if top == NEG_INF:
        return [Fraction(0)] * space.dim
    out = []
    for name, lvl in zip(space.basis, space.levels):
        coeff = chain.get(name)
        out.append(coeff.coefficient(lvl - top) if coeff is not None else Fraction(0))
    return out


def is_orthogonal(chains: Sequence[Mapping[str, NovikovElement]], space: FilteredVectorSpace) -> bool:
    """Exact orthogonality test: residues of nonzero chains must be independent."""
    if any(chain_vanishes(c) for c in chains):
        return False
    return rational_rank([residue_vector(c, space) for c in chains]) == len(chains)


def check_orthogonal(chains: Sequence[Mapping[str, NovikovElement]], space: FilteredVectorSpace) -> None:
    """Raise NotOrthogonal with the residue dependency when the family is not orthogonal."""
    for i, c in enumerate(chains):
        if chain_vanishes(c):
            raise NotOrthogonal(f"chain {i} is zero", {"zero_chain": i})
    dependency = left_dependency([residue_vector(c, space) for c in chains])
    if dependency is not None:
        certificate = {str(i): str(a) for i, a in enumerate(dependency) if a != 0}
        raise NotOrthogonal(
            f"leading terms of chains {sorted(certificate)} cancel; level drops", certificate
        )


def check_independent(chains: Sequence[Mapping[str, NovikovElement]], space: FilteredVectorSpace) -> None:
    zero = NovikovElement.zero(space.group)
    rows = [[c.get(name, zero) for name in space.basis] for c in chains]
    if rows and novikov_rank(rows) < len(rows):
        raise NotIndependent(f"{len(rows)} chains span a space of smaller dimension")


def _greedy_extend(chains: Sequence[Chain], space: FilteredVectorSpace,
                   candidates: Sequence[Chain] | None = None) -> list[Chain]:
    """Append candidates (default: the distinguished basis) that keep the family orthogonal."""
    family = list(chains)
    residues = [residue_vector(c, space) for c in family]
    rank = rational_rank(residues) if residues else 0
    pool = candidates if candidates is not None else [
        basis_chain(n, space.group) for n in space.basis
    ]
    for cand in pool:
        if rank == space.dim:
            break
        trial = residues + [residue_vector(cand, space)]
        new_rank = rational_rank(trial)
        if new_rank > rank:
            family.append(cand)
            residues, rank = trial, new_rank
    return family


def extend_orthogonal_basis(
    chains: Sequence[Mapping[str, NovikovElement]], space: FilteredVectorSpace
) -> list[Chain]:
    """Extend an orthogonal family to an orthogonal basis of ``space``.

    Raises:
        NotIndependent: the family is linearly dependent.
        NotOrthogonal: the family is independent but not orthogonal.
    """
    chains = [dict(c) for c in chains]
    check_independent(chains, space)
    check_orthogonal(chains, space)
    return _greedy_extend(chains, space)


# ---------------------------------------------------------------------------
# Whole-complex reduction
# ---------------------------------------------------------------------------


@dataclass
class GradedBasis:
    """Orthogonal basis of one piece: primitives, boundaries and homology cycles."""

    primitives: list[Chain] = field(default_factory=list)
    boundaries: list[Chain] = field(default_factory=list)
    homology: list[Chain] = field(default_factory=list)

    @property
    def chains(self) -> list[Chain]:
        return self.primitives + self.boundaries + self.homology


@dataclass
class ComplexReduction:
    """Simultaneous orthogonal bases of every piece of a complex."""

    complex: FilteredComplex
    pieces: dict[str, GradedBasis]
    steps: dict[str, ReductionCertificate]

    def homology_rank(self, label: str) -> int:
        return len(self.pieces[label].homology)

    def depth(self, label: str) -> Fraction:
        return self.steps[label].max_gap

    @property
    def pairs(self) -> list[tuple[str, DepthPair]]:
        return [(k, p) for k in self.complex.grading.labels for p in self.steps[k].pairs]


def _complex_group(complex_: FilteredComplex) -> ExponentGroup | None:
    if complex_.group.is_trivial:
        return None
    levels = [complex_.level_of(n) for n in complex_.generators]
    base = min(levels, default=Fraction(0))
    return complex_.group.join(*(lvl - base for lvl in levels))


def reduce_complex(complex_: FilteredComplex, config: DepthConfig | None = None) -> ComplexReduction:
    """Orthogonal bases of every piece adapted to the differential.

    In each grading the primitives come from reducing the outgoing step, the
    boundaries from the incoming step, and homology cycles are kernel vectors
    of the outgoing step completing the boundaries to a basis of the cycles.
    """
    config = config or DepthConfig()
    group = _complex_group(complex_)
    steps = {
        k: reduce(complex_.step_into(k), config, group=group)
        for k in complex_.grading.labels
    }
    pieces: dict[str, GradedBasis] = {}
    for label in complex_.grading.labels:
        outgoing = steps[complex_.grading.predecessor(label)]
        incoming = steps[label]
        space = complex_.pieces[label]
        boundaries = [p.boundary for p in incoming.pairs]
        cycles = _greedy_extend(boundaries, space, candidates=outgoing.kernel)
        pieces[label] = GradedBasis(
            primitives=[p.primitive for p in outgoing.pairs],
            boundaries=boundaries,
            homology=cycles[len(boundaries):],
        )
    return ComplexReduction(complex_, pieces, steps)


def homology_rank(complex_: FilteredComplex, label: str, config: DepthConfig | None = None) -> int:
    """Dimension of homology in grading ``label`` over the Novikov field."""
    incoming = reduce(complex_.step_into(label), config).rank
    outgoing = reduce(complex_.step_out_of(label), config).rank
    return complex_.pieces[label].dim - incoming - outgoing
