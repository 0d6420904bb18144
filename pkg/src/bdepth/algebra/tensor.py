"""Filtered tensor products with the graded sign rule.

Product generators are named ``x⊗y`` and listed with the left factor's index
major. The product of two complexes is ungraded (grading ``"*"``); the parity
of ``x⊗y`` is the sum of the parities of its factors.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from bdepth.algebra.filtered import (
    Chain,
    FilteredComplex,
    FilteredVectorSpace,
    GradingSet,
    basis_chain,
    chain_add,
    chain_vanishes,
    chain_with_group,
)
from bdepth.algebra.reduction import (
    ComplexReduction,
    boundary_depth,
    check_independent,
    check_orthogonal,
    reduce_complex,
)
from bdepth.audit.report import InvariantReport
from bdepth.core.config import DepthConfig
from bdepth.core.errors import (
    GroupMismatch,
    InvariantViolation,
    NotOrthogonal,
    SignRuleUnavailable,
)
from bdepth.core.novikov import ExponentGroup, NovikovElement

logger = logging.getLogger(__name__)

TENSOR = "⊗"


def product_name(left: str, right: str) -> str:
    return f"{left}{TENSOR}{right}"


@dataclass(frozen=True, eq=False)
class SignedComplex:
    """A complex together with the Z2-grading its tensor products need.

    ``parity`` assigns 0 or 1 to every generator and the differential must
    flip it. ``characteristic_two`` asks for the unsigned product rule
    instead; see ``tensor_complex`` for when that is available.
    """

    complex: FilteredComplex
    parity: Mapping[str, int] | None = None
    characteristic_two: bool = False

    def __post_init__(self) -> None:
        if self.parity is None:
            return
        parity = {str(k): int(v) % 2 for k, v in self.parity.items()}
        missing = [n for n in self.complex.generators if n not in parity]
        if missing:
            raise ValueError(f"no parity for generators {missing}")
        for src, col in self.complex.differential.items():
            for tgt in col:
                if parity[tgt] == parity[src]:
                    raise InvariantViolation(
                        f"differential keeps parity on ({tgt}, {src})", (tgt, src)
                    )
        object.__setattr__(self, "parity", parity)

    @classmethod
    def from_integer_grading(cls, complex_: FilteredComplex) -> SignedComplex:
        """Parity from integer grading labels (``label mod 2``)."""
        parity = {n: int(complex_.grading_of(n)) % 2 for n in complex_.generators}
        return cls(complex_, parity)

    @property
    def group(self) -> ExponentGroup:
        return self.complex.group


# ---------------------------------------------------------------------------
# Spaces and chains
# ---------------------------------------------------------------------------


def tensor_levels(left: FilteredVectorSpace, right: FilteredVectorSpace) -> FilteredVectorSpace:
    """The product space with basis ``x⊗y`` at level ``level(x) + level(y)``."""
    if left.group != right.group:
        raise GroupMismatch(f"tensor of spaces over {left.group} and {right.group}")
    names, levels = [], []
    for x, lx in zip(left.basis, left.levels):
        for y, ly in zip(right.basis, right.levels):
            names.append(product_name(x, y))
            levels.append(lx + ly)
    return FilteredVectorSpace(tuple(names), tuple(levels), left.group)


def tensor_chain(a: Mapping[str, NovikovElement], b: Mapping[str, NovikovElement]) -> Chain:
    """``a ⊗ b`` expanded in the product basis."""
    out: Chain = {}
    for x, ca in a.items():
        for y, cb in b.items():
            coeff = ca * cb
            if not coeff.vanishes():
                out[product_name(x, y)] = coeff
    return out


def _space_of_complex(complex_: FilteredComplex) -> FilteredVectorSpace:
    names = complex_.generators
    return FilteredVectorSpace(tuple(names), tuple(complex_.level_of(n) for n in names),
                               complex_.group)


def _random_coefficient(rng: np.random.Generator, group: ExponentGroup,
                        spread: int = 3) -> NovikovElement:
    value = int(rng.integers(1, 6)) * (1 if rng.random() < 0.5 else -1)
    exponent = 0 if group.is_trivial else int(rng.integers(-spread, spread + 1)) * group.generator
    return NovikovElement.monomial(exponent, value, group)


def _check_basis(chains: Sequence[Chain], space: FilteredVectorSpace) -> None:
    if len(chains) != space.dim:
        raise NotOrthogonal(f"{len(chains)} chains cannot be a basis of a {space.dim}-dimensional space")
    check_independent(chains, space)
    check_orthogonal(chains, space)


def check_basis_independence(
    left: FilteredVectorSpace,
    right: FilteredVectorSpace,
    alt_left: Sequence[Chain] | None = None,
    alt_right: Sequence[Chain] | None = None,
    config: DepthConfig | None = None,
) -> InvariantReport:
    """Compare product levels computed in two orthogonal-basis presentations.

    Random combinations of ``u⊗v`` over the alternative bases get their level
    from the alternative levels termwise, and again by expanding into the
    distinguished product basis. Both must agree exactly on every probe.

    Raises:
        NotOrthogonal: an alternative family is not an orthogonal basis.
    """
    config = config or DepthConfig()
    group = left.group
    alt_left = [dict(c) for c in alt_left] if alt_left is not None else [
        basis_chain(n, group) for n in left.basis]
    alt_right = [dict(c) for c in alt_right] if alt_right is not None else [
        basis_chain(n, group) for n in right.basis]
    _check_basis(alt_left, left)
    _check_basis(alt_right, right)
    product = tensor_levels(left, right)
    left_levels = [left.level(c) for c in alt_left]
    right_levels = [right.level(c) for c in alt_right]

    rng = np.random.default_rng(config.seed)
    mismatches = 0
    for probe in range(config.probes):
        termwise = None
        expanded: Chain = {}
        for i, u in enumerate(alt_left):
            for j, v in enumerate(alt_right):
                if rng.random() < 0.5:
                    continue
                coeff = _random_coefficient(rng, group)
                value = left_levels[i] + right_levels[j] - coeff.terms[0][0]
                termwise = value if termwise is None else max(termwise, value)
                expanded = chain_add(expanded, {k: c * coeff for k, c in tensor_chain(u, v).items()})
        if termwise is None:
            continue
        if product.level(expanded) != termwise:
            mismatches += 1
            logger.warning("probe %d: level %s in the distinguished basis, %s termwise",
                           probe, product.level(expanded), termwise)
    report = InvariantReport(check="tensor basis independence")
    report.record("probes", config.probes)
    report.record("level mismatches", mismatches, threshold=0, passed=mismatches == 0)
    return report


# ---------------------------------------------------------------------------
# Product complex
# ---------------------------------------------------------------------------


def tensor_complex(left: SignedComplex, right: SignedComplex) -> SignedComplex:
    """``d(x⊗y) = dx⊗y + (-1)^|x| x⊗dy`` on the ungraded product.

    Characteristic-two mode (both factors flagged) uses the unsigned rule,
    which squares to zero over the rationals only when a factor has zero
    differential; otherwise SignRuleUnavailable is raised.

    Raises:
        SignRuleUnavailable: neither a Z2-grading nor characteristic-two mode applies.
        GroupMismatch: the factors are over different exponent groups.
    """
    cx, dx = left.complex, right.complex
    if cx.group != dx.group:
        raise GroupMismatch(f"tensor of complexes over {cx.group} and {dx.group}")
    unsigned = left.characteristic_two and right.characteristic_two
    if unsigned:
        if cx.differential and dx.differential:
            raise SignRuleUnavailable(
                "characteristic-two products of two nonzero differentials need GF(2) "
                "coefficients; supply a Z2 grading instead"
            )
    elif left.parity is None:
        raise SignRuleUnavailable("the left factor has no Z2 grading and is not in characteristic two")

    space = tensor_levels(_space_of_complex(cx), _space_of_complex(dx))
    differential: dict[str, Chain] = {}
    for x in cx.generators:
        sign = 1 if unsigned or left.parity[x] == 0 else -1  # type: ignore[index]
        for y in dx.generators:
            image = chain_add(
                tensor_chain(cx.differential.get(x, {}), basis_chain(y, cx.group)),
                {k: c * sign for k, c in
                 tensor_chain(basis_chain(x, cx.group), dx.differential.get(y, {})).items()},
            )
            if image:
                differential[product_name(x, y)] = image
    product = FilteredComplex(GradingSet.ungraded(), {"*": space}, differential)
    parity = None
    if not unsigned and right.parity is not None:
        parity = {product_name(x, y): (left.parity[x] + right.parity[y]) % 2  # type: ignore[index]
                  for x in cx.generators for y in dx.generators}
    logger.debug("tensor product with %d generators", product.dim)
    return SignedComplex(product, parity, characteristic_two=unsigned)


# ---------------------------------------------------------------------------
# Depth bounds
# ---------------------------------------------------------------------------

ORTHOGONAL_BLOCKS = ("F⊗F", "F⊗H", "H⊗F")


def _factor_parts(complex_: FilteredComplex, group: ExponentGroup,
                  config: DepthConfig) -> tuple[list[Chain], list[Chain]]:
    """Primitives (F) and homology cycles (H) of an orthogonal basis adapted to ``d``."""
    reduction = reduce_complex(complex_, config)
    primitives: list[Chain] = []
    homology: list[Chain] = []
    for basis in reduction.pieces.values():
        primitives.extend(chain_with_group(c, group) for c in basis.primitives)
        homology.extend(chain_with_group(c, group) for c in basis.homology)
    return primitives, homology


def additivity_failures(
    space: FilteredVectorSpace,
    first: Sequence[Chain],
    second: Sequence[Chain],
    rng: np.random.Generator,
    samples: int,
) -> int:
    """Count sampled ``a + b`` with ``a`` from span(first), ``b`` from span(second)
    whose level is not ``max(level a, level b)``."""
    if not first or not second:
        return 0
    failures = 0
    for _ in range(samples):
        a = _random_sum(rng, list(first), space.group)
        b = _random_sum(rng, list(second), space.group)
        if chain_vanishes(a) or chain_vanishes(b):
            continue
        if space.level(chain_add(a, b)) != max(space.level(a), space.level(b)):
            failures += 1
    return failures


def product_orthogonality(
    left: SignedComplex,
    right: SignedComplex,
    config: DepthConfig | None = None,
    samples: int | None = None,
    product: ComplexReduction | None = None,
) -> dict[str, int]:
    """Additivity failures between ker of the product differential and each of
    F⊗F, F⊗H and H⊗F.

    ``F`` and ``H`` are the primitives and homology cycles of each factor's
    reduction; the kernel is sampled from the boundaries and homology cycles
    of the product's own reduction. All four subspaces are mutually
    orthogonal, so every count should be zero.
    """
    config = config or DepthConfig()
    samples = config.probes if samples is None else samples
    cx, dx = left.complex, right.complex
    levels = [cx.level_of(n) for n in cx.generators] + [dx.level_of(n) for n in dx.generators]
    base = min(levels, default=Fraction(0))
    group = cx.group.join(*(lvl - base for lvl in levels))
    space = tensor_levels(_space_of_complex(cx).with_group(group),
                          _space_of_complex(dx).with_group(group))
    if product is None:
        product = reduce_complex(tensor_complex(left, right).complex, config)
    kernel = [
        chain_with_group(c, group)
        for basis in product.pieces.values()
        for c in basis.boundaries + basis.homology
    ]
    lf, lh = _factor_parts(cx, group, config)
    rf, rh = _factor_parts(dx, group, config)
    blocks = {
        "F⊗F": [tensor_chain(a, b) for a in lf for b in rf],
        "F⊗H": [tensor_chain(a, b) for a in lf for b in rh],
        "H⊗F": [tensor_chain(a, b) for a in lh for b in rf],
    }
    rng = np.random.default_rng(config.seed)
    failures = {name: additivity_failures(space, kernel, blocks[name], rng, samples)
                for name in ORTHOGONAL_BLOCKS}
    logger.debug("kernel of dimension %d against blocks %s: %s", len(kernel),
                 {k: len(v) for k, v in blocks.items()}, failures)
    return failures


def _random_sum(rng: np.random.Generator, chains: list[Chain], group: ExponentGroup) -> Chain:
    out: Chain = {}
    picks = rng.choice(len(chains), size=min(len(chains), 3), replace=False)
    for p in picks:
        coeff = _random_coefficient(rng, group)
        out = chain_add(out, {k: c * coeff for k, c in chains[int(p)].items()})
    return out


def _total_homology(reduction: ComplexReduction) -> int:
    return sum(reduction.homology_rank(k) for k in reduction.complex.grading.labels)


def verify_product_bounds(
    left: SignedComplex, right: SignedComplex, config: DepthConfig | None = None
) -> InvariantReport:
    """Depths of both factors and of their product, against the product bounds.

    Raises:
        InvariantViolation: a bound fails; the report is attached as the entry.
    """
    config = config or DepthConfig()
    product = tensor_complex(left, right).complex
    product_reduction = reduce_complex(product, config)
    b_c = boundary_depth(left.complex, config)
    b_d = boundary_depth(right.complex, config)
    b_cd = boundary_depth(product, config)
    h_c = _total_homology(reduce_complex(left.complex, config))
    h_d = _total_homology(reduce_complex(right.complex, config))
    h_cd = _total_homology(product_reduction)

    report = InvariantReport(check="tensor product bounds")
    report.record("b(C)", b_c)
    report.record("b(D)", b_d)
    report.record("b(C⊗D)", b_cd)
    report.record("dim H(C)", h_c)
    report.record("dim H(D)", h_d)
    lower = min(b_c, b_d)
    report.record("b(C⊗D) >= min", b_cd, threshold=lower, passed=b_cd >= lower)
    if h_d:
        report.record("b(C⊗D) >= b(C)", b_cd, threshold=b_c, passed=b_cd >= b_c)
    if h_c:
        report.record("b(C⊗D) >= b(D)", b_cd, threshold=b_d, passed=b_cd >= b_d)
    report.record("dim H(C⊗D)", h_cd, threshold=h_c * h_d, passed=h_cd == h_c * h_d)
    failures = product_orthogonality(left, right, config, product=product_reduction)
    for name in ORTHOGONAL_BLOCKS:
        report.record(f"ker ⊥ {name} failures", failures[name], threshold=0,
                      passed=failures[name] == 0)
    if not report.passed:
        raise InvariantViolation("tensor product bound failed: " + "; ".join(report.errors),
                                 report.to_dict())
    return report
