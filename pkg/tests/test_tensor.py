"""Tests for filtered tensor products and the product depth bounds."""

from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest

from bdepth.algebra.filtered import FilteredComplex, FilteredVectorSpace, GradingSet
from bdepth.algebra.reduction import boundary_depth
from bdepth.algebra.tensor import (
    SignedComplex,
    additivity_failures,
    check_basis_independence,
    product_name,
    product_orthogonality,
    tensor_complex,
    tensor_levels,
    verify_product_bounds,
)
from bdepth.core.errors import InvariantViolation, NotOrthogonal, SignRuleUnavailable
from bdepth.core.novikov import ExponentGroup, NovikovElement

Z = ExponentGroup.integers(1)
TRIVIAL = ExponentGroup.trivial()


# ---------------------------------------------------------------------------
# Fixtures & helpers
# ---------------------------------------------------------------------------


def _space(levels: dict[str, int], group: ExponentGroup = TRIVIAL) -> FilteredVectorSpace:
    return FilteredVectorSpace(tuple(levels), tuple(Fraction(v) for v in levels.values()), group)


def _pair(top: str, bottom: str, gap: int) -> FilteredComplex:
    """A single pair ``d top = bottom`` with the given level gap, rational coefficients."""
    one = NovikovElement.one(TRIVIAL)
    return FilteredComplex(
        GradingSet.cyclic(("0", "1")),
        {"0": _space({bottom: 0}), "1": _space({top: gap})},
        {top: {bottom: one}},
    )


def _cycle(name: str) -> FilteredComplex:
    return FilteredComplex(
        GradingSet.cyclic(("0", "1")),
        {"0": _space({name: 0}), "1": _space({})},
        {},
    )


# ---------------------------------------------------------------------------
# Spaces
# ---------------------------------------------------------------------------


class TestTensorLevels:
    def test_levels_add(self) -> None:
        product = tensor_levels(_space({"x": 3}), _space({"y1": 0, "y2": 1}))
        assert product.basis == (product_name("x", "y1"), product_name("x", "y2"))
        assert product.levels == (Fraction(3), Fraction(4))

    def test_level_of_scaled_generator(self) -> None:
        product = tensor_levels(_space({"x1": 0}, Z), _space({"y1": 0}, Z))
        chain = {product_name("x1", "y1"): NovikovElement.parse("1*T^2", Z)}
        assert product.level(chain) == -2

    def test_basis_independence(self) -> None:
        left = _space({"x1": 0, "x2": 0}, Z)
        right = _space({"y1": 0}, Z)
        alt = [
            {"x1": NovikovElement.parse("1*T^0", Z), "x2": NovikovElement.parse("1*T^1", Z)},
            {"x2": NovikovElement.one(Z)},
        ]
        report = check_basis_independence(left, right, alt_left=alt)
        assert report.passed
        assert report.value("level mismatches") == 0

    def test_non_orthogonal_alternative(self) -> None:
        left = _space({"x1": 0, "x2": 0}, Z)
        right = _space({"y1": 0}, Z)
        alt = [
            {"x1": NovikovElement.one(Z)},
            {"x1": NovikovElement.parse("1*T^0", Z), "x2": NovikovElement.parse("1*T^1", Z)},
        ]
        with pytest.raises(NotOrthogonal):
            check_basis_independence(left, right, alt_left=alt)


# ---------------------------------------------------------------------------
# Product complex
# ---------------------------------------------------------------------------


class TestTensorComplex:
    def test_sign_rule(self) -> None:
        left = SignedComplex.from_integer_grading(_pair("w", "x", 2))
        right = SignedComplex.from_integer_grading(_pair("v", "z", 3))
        product = tensor_complex(left, right)
        d = product.complex.differential[product_name("w", "v")]
        assert d[product_name("x", "v")].reduction() == 1
        assert d[product_name("w", "z")].reduction() == -1
        assert product.parity[product_name("w", "v")] == 0
        assert product.parity[product_name("x", "v")] == 1

    def test_product_ordering_is_left_major(self) -> None:
        left = SignedComplex.from_integer_grading(_pair("w", "x", 2))
        right = SignedComplex.from_integer_grading(_pair("v", "z", 3))
        names = tensor_complex(left, right).complex.generators
        assert names == [product_name(a, b) for a in ("x", "w") for b in ("z", "v")]

    def test_needs_parity(self) -> None:
        with pytest.raises(SignRuleUnavailable):
            tensor_complex(SignedComplex(_pair("w", "x", 2)), SignedComplex(_pair("v", "z", 3)))

    def test_characteristic_two_with_zero_factor(self) -> None:
        left = SignedComplex(_pair("w", "x", 2), characteristic_two=True)
        right = SignedComplex(_cycle("h"), characteristic_two=True)
        product = tensor_complex(left, right)
        assert product.characteristic_two
        assert boundary_depth(product.complex) == 2

    def test_characteristic_two_unavailable(self) -> None:
        left = SignedComplex(_pair("w", "x", 2), characteristic_two=True)
        right = SignedComplex(_pair("v", "z", 3), characteristic_two=True)
        with pytest.raises(SignRuleUnavailable):
            tensor_complex(left, right)

    def test_parity_must_flip(self) -> None:
        with pytest.raises(InvariantViolation):
            SignedComplex(_pair("w", "x", 2), {"w": 0, "x": 0})


# ---------------------------------------------------------------------------
# Depth bounds
# ---------------------------------------------------------------------------


class TestProductBounds:
    def test_two_pairs_take_the_smaller_gap(self) -> None:
        left = SignedComplex.from_integer_grading(_pair("w", "x", 2))
        right = SignedComplex.from_integer_grading(_pair("v", "z", 3))
        report = verify_product_bounds(left, right)
        assert report.passed
        assert report.value("b(C⊗D)") == 2
        assert report.value("dim H(C⊗D)") == 0

    def test_pair_times_cycle(self) -> None:
        left = SignedComplex.from_integer_grading(_pair("w", "x", 5))
        right = SignedComplex.from_integer_grading(_cycle("h"))
        report = verify_product_bounds(left, right)
        assert report.value("b(C⊗D)") == 5
        assert report.value("b(C⊗D) >= b(C)") == 5

    def test_zero_differentials(self) -> None:
        left = SignedComplex.from_integer_grading(_cycle("a"))
        right = SignedComplex.from_integer_grading(_cycle("b"))
        report = verify_product_bounds(left, right)
        assert report.value("b(C⊗D)") == 0
        assert report.value("dim H(C⊗D)") == 1

    def test_kernel_is_orthogonal_to_blocks(self) -> None:
        pair = SignedComplex.from_integer_grading(_pair("w", "x", 2))
        mixed = SignedComplex.from_integer_grading(FilteredComplex(
            GradingSet.cyclic(("0", "1")),
            {"0": _space({"z": 0, "h": 1}), "1": _space({"v": 3})},
            {"v": {"z": NovikovElement.one(TRIVIAL)}},
        ))
        failures = product_orthogonality(pair, mixed, samples=20)
        assert failures == {"F⊗F": 0, "F⊗H": 0, "H⊗F": 0}

    def test_bounds_report_each_block(self) -> None:
        left = SignedComplex.from_integer_grading(_pair("w", "x", 2))
        right = SignedComplex.from_integer_grading(_cycle("h"))
        report = verify_product_bounds(left, right)
        assert report.value("ker ⊥ F⊗H failures") == 0
        assert report.value("ker ⊥ F⊗F failures") == 0

    def test_non_orthogonal_pairing_is_detected(self) -> None:
        space = _space({"x": 0, "y": -1})
        one = NovikovElement.one(TRIVIAL)
        rng = np.random.default_rng(0)
        assert additivity_failures(space, [{"x": one}], [{"x": one, "y": one}], rng, 200) > 0
        assert additivity_failures(space, [{"x": one}], [{"y": one}], rng, 200) == 0
