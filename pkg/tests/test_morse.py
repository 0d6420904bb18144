"""Tests for circle Morse functions, sampled functions and the bump embedding."""

from __future__ import annotations

from fractions import Fraction

import pytest

from bdepth.algebra.filtered import chains_equal
from bdepth.core.novikov import ExponentGroup, NovikovElement
from bdepth.morse.circle import (
    CircleMorseData,
    SampledCircleFunction,
    beta_chain,
    beta_combinatorial,
    beta_continuous,
    critical_quadruple,
    explicit_primitive,
    morse_complex,
    quadruple_max,
    quadruple_max_fast,
)
from bdepth.morse.sampled import (
    BumpProfile,
    SampledLineFunction,
    embedding_bounds,
    mm,
    sequence_osc,
    stacked_bumps,
    sup_norm,
)

# ---------------------------------------------------------------------------
# Fixtures & helpers
# ---------------------------------------------------------------------------

FOUR_MAXIMA = (9, 1, 7, 4, 8, 2, 6, 3)


@pytest.fixture
def two_maxima() -> CircleMorseData:
    return CircleMorseData((10, 0, 6, 2))


# ---------------------------------------------------------------------------
# CircleMorseData
# ---------------------------------------------------------------------------


class TestCircleMorseData:
    def test_rejects_odd_count(self) -> None:
        with pytest.raises(ValueError):
            CircleMorseData((3, 0, 2))

    def test_rejects_non_alternating_values(self) -> None:
        with pytest.raises(ValueError):
            CircleMorseData((5, 0, 3, 4))

    def test_first_maximum_must_be_global(self) -> None:
        with pytest.raises(ValueError):
            CircleMorseData((6, 2, 10, 0))

    def test_normalized_rotates_by_pairs(self) -> None:
        data = CircleMorseData.normalized((6, 2, 10, 0))
        assert data.values == (10, 0, 6, 2)
        assert data.maxima == (10, 6)
        assert data.minima == (0, 2)
        assert data.osc == 10

    def test_periodic(self) -> None:
        data = CircleMorseData.periodic((3, 0), 3)
        assert data.m == 3
        assert data.values == tuple(Fraction(v) for v in (3, 0) * 3)


# ---------------------------------------------------------------------------
# Depth of circle functions
# ---------------------------------------------------------------------------


class TestCircleDepth:
    def test_morse_complex_differential(self, two_maxima: CircleMorseData) -> None:
        cx = morse_complex(two_maxima)
        one = NovikovElement.one(ExponentGroup.trivial())
        assert chains_equal(cx.differential["p1"], {"q1": one, "q2": -one})
        assert cx.level_of("p2") == 6

    def test_two_maxima(self, two_maxima: CircleMorseData) -> None:
        assert beta_chain(two_maxima) == 4
        assert beta_combinatorial(two_maxima) == 4
        assert critical_quadruple(two_maxima) == (1, 1, 2, 2)

    def test_single_maximum_has_depth_zero(self) -> None:
        data = CircleMorseData((5, 0))
        assert beta_chain(data) == 0
        assert beta_combinatorial(data) == 0
        assert critical_quadruple(data) is None

    def test_chain_and_combinatorial_agree(self) -> None:
        data = CircleMorseData(FOUR_MAXIMA)
        assert beta_combinatorial(data) == 6
        assert beta_chain(data) == 6
        assert quadruple_max_fast(data.maxima, data.minima) == 6
        assert critical_quadruple(data) == (1, 1, 3, 3)

    def test_fast_and_exhaustive_agree_on_ties(self) -> None:
        maxima, minima = (5, 5, 5), (1, 1, 1)
        assert quadruple_max(maxima, minima) == quadruple_max_fast(maxima, minima) == 4

    def test_periodic_depth_equals_oscillation(self) -> None:
        data = CircleMorseData.periodic((3, 0), 3)
        assert beta_chain(data) == data.osc == 3


class TestExplicitPrimitive:
    def test_primitive_bounds_the_cycle(self, two_maxima: CircleMorseData) -> None:
        one = NovikovElement.one(ExponentGroup.trivial())
        primitive = explicit_primitive(two_maxima, [1, -1])
        assert set(primitive) == {"p2"}
        assert chains_equal(morse_complex(two_maxima).boundary(primitive), {"q1": one, "q2": -one})

    def test_rejects_non_boundary(self, two_maxima: CircleMorseData) -> None:
        with pytest.raises(ValueError):
            explicit_primitive(two_maxima, [1, 1])
        with pytest.raises(ValueError):
            explicit_primitive(two_maxima, [1, -1, 0])


# ---------------------------------------------------------------------------
# Sampled circle functions
# ---------------------------------------------------------------------------


class TestSampledCircle:
    def test_needs_four_samples(self) -> None:
        with pytest.raises(ValueError):
            SampledCircleFunction((1, 0, 1))

    def test_extrema_and_depth(self) -> None:
        f = SampledCircleFunction((10, 5, 0, 3, 6, 4, 2, 8))
        assert f.extrema() == ([10, 6], [0, 2])
        assert beta_continuous(f) == 4
        assert mm(f) == 6

    def test_single_bump_clamps_to_zero(self) -> None:
        assert beta_continuous(SampledCircleFunction((0, 1, 2, 1))) == 0

    def test_float_samples(self) -> None:
        f = SampledCircleFunction((1.0, 0.0, 0.5, 0.25))
        assert beta_continuous(f) == pytest.approx(0.25)


# ---------------------------------------------------------------------------
# Functions on the line
# ---------------------------------------------------------------------------


class TestBumpProfile:
    def test_tent(self) -> None:
        tent = BumpProfile.tent(4)
        assert tent.positions == (Fraction(1, 4), Fraction(1, 2), Fraction(3, 4))
        assert tent.values == (0, 1, 0)

    def test_tent_resolution(self) -> None:
        with pytest.raises(ValueError):
            BumpProfile.tent(6)

    def test_rejects_wrong_height(self) -> None:
        with pytest.raises(ValueError):
            BumpProfile((Fraction(1, 4), Fraction(1, 2), Fraction(3, 4)), (0, 2, 0))

    def test_rejects_interior_minimum(self) -> None:
        positions = tuple(Fraction(k, 6) for k in range(1, 6))
        with pytest.raises(ValueError):
            BumpProfile(positions, (0, 1, Fraction(1, 2), 1, 0))


class TestStackedBumps:
    def test_blocks_are_scaled_profiles(self) -> None:
        f = stacked_bumps([2, -1], BumpProfile.tent(4))
        assert f.positions == (
            Fraction(1, 8), Fraction(1, 4), Fraction(3, 8),
            Fraction(9, 16), Fraction(5, 8), Fraction(11, 16),
        )
        assert f.values == (0, 2, 0, 0, -1, 0)
        assert (f.min(), f.max(), f.osc) == (-1, 2, 3)
        assert f.local_maxima() == [1, 3, 5]
        assert mm(f) == 0

    def test_too_many_entries(self) -> None:
        with pytest.raises(ValueError):
            stacked_bumps([1, 2, 3], BumpProfile.tent(4), blocks=2)

    def test_grids_must_match(self) -> None:
        f = stacked_bumps([1], BumpProfile.tent(4))
        g = stacked_bumps([1], BumpProfile.tent(8))
        with pytest.raises(ValueError):
            f + g

    def test_zero_function(self) -> None:
        z = SampledLineFunction.zero((Fraction(1, 2),))
        assert z.osc == 0
        assert mm(z) == 0


class TestEmbeddingBounds:
    def test_sequence_norms(self) -> None:
        assert sup_norm([1, -3, 2]) == 3
        assert sequence_osc([1, 2]) == 2
        assert sequence_osc([-1, -2]) == 2
        assert sup_norm([]) == 0

    def test_sandwich_holds(self) -> None:
        report = embedding_bounds([2, -1], [0, 1], BumpProfile.tent(8))
        assert report.passed
        assert report.value("||v - w||_inf") == 2
        assert report.value("osc(v - w)") == 4
        assert report.value("osc f_(v-w)") == 4

    def test_unequal_lengths_are_padded(self) -> None:
        report = embedding_bounds([1, 2, 3], [1], BumpProfile.tent(4))
        assert report.passed
        assert report.value("||v - w||_inf") == 3
