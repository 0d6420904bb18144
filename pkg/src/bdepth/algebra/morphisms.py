"""Maps between filtered complexes that control boundary depth."""

from __future__ import annotations

import logging
from fractions import Fraction
from typing import Mapping

from bdepth.algebra.filtered import (
    Chain,
    FilteredComplex,
    FilteredMap,
    FilteredVectorSpace,
    GradingSet,
    basis_chain,
    chain_add,
    chain_scale,
    chain_sub,
    chain_text,
    chains_equal,
)
from bdepth.algebra.reduction import boundary_depth, is_orthogonal
from bdepth.audit.report import InvariantReport
from bdepth.core.config import DepthConfig
from bdepth.core.errors import (
    HomotopyIdentityFails,
    InvariantViolation,
    NotASupergroup,
    NotEquivariant,
    NotFiltrationIso,
    NotIndependent,
)
from bdepth.core.novikov import INF, ExponentGroup, NovikovElement, Rational, as_fraction

logger = logging.getLogger(__name__)


def extend_coefficients(complex_: FilteredComplex, group: ExponentGroup) -> FilteredComplex:
    """Reinterpret ``complex_`` over a larger exponent group; depth is unchanged."""
    if not complex_.group.is_subgroup_of(group):
        raise NotASupergroup(f"{complex_.group} is not contained in {group}")
    return complex_.with_group(group)


# ---------------------------------------------------------------------------
# Shift isomorphisms
# ---------------------------------------------------------------------------


def apply_shift_isomorphism(
    complex_: FilteredComplex,
    matrices: Mapping[str, Chain],
    grading_map: Mapping[str, str],
    shifts: Mapping[str, Rational],
    target_grading: GradingSet | None = None,
) -> FilteredComplex:
    """Transport ``complex_`` along a shift isomorphism.

    ``matrices[x]`` is the image of generator ``x``, a chain in the same
    piece (generators absent from ``matrices`` map to themselves). Grading
    ``k`` of the result is ``grading_map[k]`` with every level raised by
    ``shifts[k]``, and the result's differential is ``Phi d Phi^-1``.

    Raises:
        NotEquivariant: ``grading_map`` or ``shifts`` do not commute with the successor.
        NotFiltrationIso: some piece's images do not form an orthogonal basis
            with the original levels.
    """
    grading = complex_.grading
    labels = grading.labels
    phi = {k: str(grading_map[k]) for k in labels}
    if len(set(phi.values())) != len(labels):
        raise NotEquivariant("grading map is not injective")
    sigma = {k: as_fraction(shifts[k]) for k in labels}
    if target_grading is None:
        target_grading = GradingSet(tuple(phi[k] for k in labels),
                                    {phi[k]: phi[grading.successor(k)] for k in labels})
    for k in labels:
        if target_grading.successor(phi[k]) != phi[grading.successor(k)]:
            raise NotEquivariant(
                f"grading map sends successor of {k!r} to {phi[grading.successor(k)]!r}, "
                f"expected {target_grading.successor(phi[k])!r}"
            )
        if sigma[grading.successor(k)] != sigma[k]:
            raise NotEquivariant(f"shift differs between {k!r} and its successor")

    group = complex_.group
    images = {n: dict(matrices.get(n, basis_chain(n, group))) for n in complex_.generators}
    inverse: dict[str, Chain] = {}
    for k in labels:
        space = complex_.pieces[k]
        cols = [images[n] for n in space.basis]
        for n, col in zip(space.basis, cols):
            stray = [t for t in col if t not in space]
            if stray:
                raise NotFiltrationIso(f"image of {n} leaves grading {k!r}: {stray}")
        if not is_orthogonal(cols, space) or any(
            space.level(col) != space.level_of(n) for n, col in zip(space.basis, cols)
        ):
            raise NotFiltrationIso(f"images in grading {k!r} are not a level-preserving orthogonal basis")
        inverse.update(_invert_piece(space, cols))

    differential: dict[str, Chain] = {}
    for name in complex_.generators:
        pulled = inverse[name]
        image: Chain = {}
        for src, coeff in pulled.items():
            image = chain_add(image, chain_scale(_image_of_boundary(complex_, images, src), coeff))
        if image:
            differential[name] = image
    pieces = {
        phi[k]: FilteredVectorSpace(
            complex_.pieces[k].basis,
            tuple(lvl + sigma[k] for lvl in complex_.pieces[k].levels),
            group,
        )
        for k in labels
    }
    logger.debug("shift isomorphism applied over %d gradings", len(labels))
    return FilteredComplex(target_grading, pieces, differential)


def _image_of_boundary(complex_: FilteredComplex, images: Mapping[str, Chain], name: str) -> Chain:
    """Phi applied to the boundary of generator ``name``."""
    out: Chain = {}
    for tgt, coeff in complex_.differential.get(name, {}).items():
        out = chain_add(out, chain_scale(images[tgt], coeff))
    return out


def _invert_piece(space: FilteredVectorSpace, cols: list[Chain]) -> dict[str, Chain]:
    """Columns of the inverse matrix by Gauss-Jordan elimination.

    Pivots prefer monomials, which invert exactly; unipotent and monomial
    matrices therefore invert without truncation.
    """
    group = space.group
    n = space.dim
    zero = NovikovElement.zero(group)
    a = [[cols[j].get(space.basis[i], zero) for j in range(n)] for i in range(n)]
    inv = [[NovikovElement.one(group) if i == j else zero for j in range(n)] for i in range(n)]
    for c in range(n):
        candidates = [r for r in range(c, n) if not a[r][c].vanishes()]
        if not candidates:
            raise NotIndependent(f"matrix of grading piece is singular at column {c}")
        r = min(candidates, key=lambda r: (len(a[r][c].terms), a[r][c].terms[0][0], r))
        a[c], a[r] = a[r], a[c]
        inv[c], inv[r] = inv[r], inv[c]
        p = a[c][c]
        pinv = p.invert() if len(p.terms) == 1 and p.cutoff == INF else p.invert(
            cutoff=_inverse_cutoff(a))
        a[c] = [v * pinv for v in a[c]]
        inv[c] = [v * pinv for v in inv[c]]
        for s in range(n):
            if s == c or a[s][c].vanishes():
                continue
            f = a[s][c]
            a[s] = [x - f * y for x, y in zip(a[s], a[c])]
            inv[s] = [x - f * y for x, y in zip(inv[s], inv[c])]
    return {
        space.basis[j]: {space.basis[i]: inv[i][j] for i in range(n) if not inv[i][j].vanishes()}
        for j in range(n)
    }


def _inverse_cutoff(matrix: list[list[NovikovElement]]) -> Fraction:
    exps = [abs(e) for row in matrix for v in row for e, _ in v.terms]
    return sum(set(exps), Fraction(0)) + 1


# ---------------------------------------------------------------------------
# Quasiequivalence
# ---------------------------------------------------------------------------


def identity_between(source: FilteredComplex, target: FilteredComplex, shift: Rational = 0) -> FilteredMap:
    """The map sending each generator to the same-named generator of ``target``."""
    group = source.group
    return FilteredMap(source, target, {n: basis_chain(n, group) for n in source.generators},
                       as_fraction(shift))


def _check_homotopy(
    first: FilteredMap, second: FilteredMap, homotopy: FilteredMap, label: str
) -> None:
    """``second(first(x)) - x == d K x + K d x`` for every generator ``x``."""
    cx = first.source
    for name in cx.generators:
        x = basis_chain(name, cx.group)
        lhs = chain_sub(second.apply(first.apply(x)), x)
        rhs = chain_add(cx.boundary(homotopy.apply(x)), homotopy.apply(cx.boundary(x)))
        if not chains_equal(lhs, rhs):
            raise HomotopyIdentityFails(
                f"{label} fails on {name}: difference {chain_text(chain_sub(lhs, rhs))}"
            )


def quasiequivalence_audit(
    phi: FilteredMap,
    psi: FilteredMap,
    k1: FilteredMap,
    k2: FilteredMap,
    c1: Rational,
    c2: Rational,
    c: Rational,
    config: DepthConfig | None = None,
) -> InvariantReport:
    """Verify a c-quasiequivalence and compare the boundary depths of its ends.

    ``phi: C -> D`` and ``psi: D -> C`` are chain maps raising levels by at
    most ``c1`` and ``c2``; ``k1`` on C and ``k2`` on D are homotopies raising
    levels by at most ``c`` with ``psi phi - 1 = dK1 + K1d`` and
    ``phi psi - 1 = dK2 + K2d``.
    """
    c1, c2, c = as_fraction(c1), as_fraction(c2), as_fraction(c)
    if c1 + c2 > c:
        raise ValueError(f"c1 + c2 = {c1 + c2} exceeds c = {c}")
    report = InvariantReport(check="quasiequivalence")

    for fmap, name in ((phi, "phi"), (psi, "psi")):
        if not fmap.is_chain_map():
            raise HomotopyIdentityFails(f"{name} does not commute with the differentials")
    phi.check_filtered(c1)
    psi.check_filtered(c2)
    k1.check_filtered(c)
    k2.check_filtered(c)
    report.record("shifts", {"c1": c1, "c2": c2, "c": c})
    _check_homotopy(phi, psi, k1, "psi phi - 1 = dK1 + K1d")
    _check_homotopy(psi, phi, k2, "phi psi - 1 = dK2 + K2d")
    report.record("homotopy identities", "hold")

    b_c = boundary_depth(phi.source, config)
    b_d = boundary_depth(phi.target, config)
    delta = abs(b_c - b_d)
    report.record("b(C)", b_c)
    report.record("b(D)", b_d)
    report.record("|b(C) - b(D)|", delta, threshold=c, passed=delta <= c)
    if delta > c:
        raise InvariantViolation(f"|b(C) - b(D)| = {delta} exceeds c = {c}", {"b_C": b_c, "b_D": b_d})
    return report
