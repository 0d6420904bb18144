"""Tests for filtered complexes, step reduction, depth witnesses and the oracles."""

from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest

from bdepth.algebra.filtered import (
    FilteredComplex,
    FilteredVectorSpace,
    GradingSet,
    LinearStep,
    chains_equal,
)
from bdepth.algebra.oracle import determinantal_depth, exact_kernel, lattice_depth
from bdepth.algebra.reduction import (
    boundary_depth,
    check_orthogonal,
    depth_profile,
    depth_witness,
    extend_orthogonal_basis,
    homology_rank,
    is_orthogonal,
    reduce,
    reduce_complex,
    step_depth,
)
from bdepth.algebra.smith import novikov_rank, smith_reduce
from bdepth.core.config import DepthConfig
from bdepth.core.errors import InvariantViolation, NotIndependent, NotOrthogonal, ZeroMap
from bdepth.core.novikov import ExponentGroup, NovikovElement
from bdepth.suite.generators import random_lattice_step

Z = ExponentGroup.integers(1)
TRIVIAL = ExponentGroup.trivial()


# ---------------------------------------------------------------------------
# Fixtures & helpers
# ---------------------------------------------------------------------------


def _e(text: str, group: ExponentGroup = Z) -> NovikovElement:
    return NovikovElement.parse(text, group)


def _space(levels: dict[str, int], group: ExponentGroup = Z) -> FilteredVectorSpace:
    return FilteredVectorSpace(tuple(levels), tuple(Fraction(v) for v in levels.values()), group)


def _two_term(
    sources: dict[str, int],
    targets: dict[str, int],
    columns: dict[str, dict[str, str]],
    group: ExponentGroup = Z,
) -> FilteredComplex:
    """Sources in grading "1", targets in grading "0"."""
    diff = {y: {x: _e(c, group) for x, c in col.items()} for y, col in columns.items()}
    return FilteredComplex(
        GradingSet.cyclic(("0", "1")),
        {"0": _space(targets, group), "1": _space(sources, group)},
        diff,
    )


def _maps_to_nonzero(step: LinearStep, chain: dict) -> bool:
    return any(not c.vanishes() for c in step.apply(chain).values())


@pytest.fixture
def hidden_gap() -> FilteredComplex:
    """Column gaps are 0, but T^3 x2 = d(y2 - y1) has depth 3."""
    return _two_term(
        {"y1": 0, "y2": 0},
        {"x1": 0, "x2": 0},
        {"y1": {"x1": "1*T^0"}, "y2": {"x1": "1*T^0", "x2": "1*T^3"}},
    )


@pytest.fixture
def morse_pair() -> FilteredComplex:
    """Rational coefficients: one boundary three levels below its primitive."""
    return _two_term({"y": 3}, {"x": 0}, {"y": {"x": "1*T^0"}}, group=TRIVIAL)


# ---------------------------------------------------------------------------
# FilteredComplex construction
# ---------------------------------------------------------------------------


class TestFilteredComplex:
    def test_rejects_level_raising_differential(self) -> None:
        with pytest.raises(InvariantViolation):
            _two_term({"y": 0}, {"x": 1}, {"y": {"x": "1*T^0"}})

    def test_rejects_nonzero_square(self) -> None:
        grading = GradingSet.cyclic(("0", "1", "2"))
        pieces = {"0": _space({"x": 0}), "1": _space({"y": 0}), "2": _space({"z": 0})}
        diff = {"z": {"y": _e("1*T^0")}, "y": {"x": _e("1*T^0")}}
        with pytest.raises(InvariantViolation) as excinfo:
            FilteredComplex(grading, pieces, diff)
        assert excinfo.value.entry == ("x", "z")

    def test_rejects_entry_in_wrong_grading(self) -> None:
        grading = GradingSet.cyclic(("0", "1", "2"))
        pieces = {"0": _space({"x": 0}), "1": _space({"y": 0}), "2": _space({"z": 0})}
        with pytest.raises(InvariantViolation):
            FilteredComplex(grading, pieces, {"z": {"x": _e("1*T^0")}})

    def test_grading_set_requires_bijection(self) -> None:
        with pytest.raises(ValueError):
            GradingSet(("a", "b"), {"a": "b", "b": "b"})
        g = GradingSet.cyclic(("a", "b", "c"))
        assert g.successor("c") == "a"
        assert g.predecessor("a") == "c"

    def test_rejects_empty_grading(self) -> None:
        with pytest.raises(ValueError, match="at least one grading label"):
            FilteredComplex(GradingSet((), {}), {}, {})

    def test_step_into(self, hidden_gap: FilteredComplex) -> None:
        step = hidden_gap.step_into("0")
        assert step.source.basis == ("y1", "y2")
        assert step.target.basis == ("x1", "x2")
        assert hidden_gap.step_into("1").is_zero()

    def test_forget_grading(self, hidden_gap: FilteredComplex) -> None:
        flat = hidden_gap.forget_grading()
        assert flat.grading.labels == ("*",)
        assert flat.dim == hidden_gap.dim == 4
        assert boundary_depth(flat) == boundary_depth(hidden_gap)

    def test_shifted_keeps_depth(self, hidden_gap: FilteredComplex) -> None:
        assert boundary_depth(hidden_gap.shifted(Fraction(5, 2))) == 3


# ---------------------------------------------------------------------------
# Reduction and depth
# ---------------------------------------------------------------------------


class TestReduce:
    def test_rational_pair(self, morse_pair: FilteredComplex) -> None:
        cert = reduce(morse_pair.step_into("0"))
        assert cert.method == "field"
        assert cert.rank == 1
        assert cert.max_gap == 3
        assert boundary_depth(morse_pair) == 3

    def test_hidden_gap(self, hidden_gap: FilteredComplex) -> None:
        cert = reduce(hidden_gap.step_into("0"))
        assert [p.gap for p in cert.pairs] == [Fraction(3), Fraction(0)]
        assert cert.kernel == []
        assert depth_profile(hidden_gap) == {"0": Fraction(3), "1": Fraction(0)}

    def test_two_rational_pairs_sorted(self) -> None:
        cx = _two_term(
            {"y1": 5, "y2": 1},
            {"x1": 0, "x2": 0},
            {"y1": {"x1": "1*T^0"}, "y2": {"x1": "1*T^0", "x2": "1*T^0"}},
            group=TRIVIAL,
        )
        cert = reduce(cx.step_into("0"))
        assert [p.gap for p in cert.pairs] == [Fraction(5), Fraction(1)]
        assert is_orthogonal([p.boundary for p in cert.pairs], cx.pieces["0"])

    def test_pairs_map_primitives_to_boundaries(self, hidden_gap: FilteredComplex) -> None:
        step = hidden_gap.step_into("0")
        for pair in reduce(step).pairs:
            assert chains_equal(step.apply(pair.primitive), pair.boundary)
            assert step.source.level(pair.primitive) - step.target.level(pair.boundary) == pair.gap

    def test_kernel_of_rank_one_step(self) -> None:
        cx = _two_term(
            {"y1": 0, "y2": 1},
            {"x": 0},
            {"y1": {"x": "1*T^0"}, "y2": {"x": "1*T^0"}},
        )
        cert = reduce(cx.step_into("0"))
        assert cert.rank == 1
        assert len(cert.kernel) == 1
        kernel = cert.kernel[0]
        assert not _maps_to_nonzero(cx.step_into("0"), kernel)

    def test_fixed_cutoff_is_doubled_until_stable(self, hidden_gap: FilteredComplex) -> None:
        config = DepthConfig(cutoff=Fraction(2))
        assert step_depth(hidden_gap.step_into("0"), config) == 3

    def test_field_method_needs_trivial_group(self, hidden_gap: FilteredComplex) -> None:
        with pytest.raises(ValueError):
            reduce(hidden_gap.step_into("0"), method="field")
        with pytest.raises(ValueError):
            reduce(hidden_gap.step_into("0"), method="bogus")

    def test_certificate_to_dict(self, hidden_gap: FilteredComplex) -> None:
        data = reduce(hidden_gap.step_into("0")).to_dict()
        assert data["method"] == "smith"
        assert data["group"] == "Z*1"
        assert [p["gap"] for p in data["pairs"]] == ["3", "0"]

    def test_zero_complex_has_depth_zero(self) -> None:
        cx = _two_term({"y": 2}, {"x": 0}, {})
        assert boundary_depth(cx) == 0
        assert homology_rank(cx, "0") == 1
        assert homology_rank(cx, "1") == 1


class TestWitness:
    def test_witness_attains_depth(self, hidden_gap: FilteredComplex) -> None:
        step = hidden_gap.step_into("0")
        w = depth_witness(step)
        assert w.gap == 3
        assert chains_equal(step.apply(w.primitive), w.boundary)
        assert step.source.level(w.primitive) - step.target.level(w.boundary) == 3

    def test_rational_witness(self, morse_pair: FilteredComplex) -> None:
        w = depth_witness(morse_pair.step_into("0"))
        assert w.gap == 3
        assert set(w.boundary) == {"x"}

    def test_zero_map(self) -> None:
        cx = _two_term({"y": 0}, {"x": 0}, {})
        with pytest.raises(ZeroMap):
            depth_witness(cx.step_into("0"))


# ---------------------------------------------------------------------------
# Orthogonality and whole-complex reduction
# ---------------------------------------------------------------------------


class TestOrthogonality:
    def test_leading_terms_cancel(self) -> None:
        space = _space({"x1": 0, "x2": 0})
        a = {"x1": _e("1*T^0")}
        b = {"x1": _e("1*T^0"), "x2": _e("1*T^1")}
        assert not is_orthogonal([a, b], space)
        with pytest.raises(NotOrthogonal) as excinfo:
            check_orthogonal([a, b], space)
        assert set(excinfo.value.certificate) == {"0", "1"}

    def test_extend_to_basis(self) -> None:
        space = _space({"x1": 0, "x2": 0})
        family = [{"x1": _e("1*T^0"), "x2": _e("1*T^0")}]
        basis = extend_orthogonal_basis(family, space)
        assert len(basis) == 2
        assert is_orthogonal(basis, space)

    def test_extend_rejects_dependent_family(self) -> None:
        space = _space({"x1": 0, "x2": 0})
        a = {"x1": _e("1*T^0")}
        with pytest.raises(NotIndependent):
            extend_orthogonal_basis([a, {"x1": _e("2*T^0")}], space)

    def test_reduce_complex(self) -> None:
        cx = _two_term(
            {"y1": 0, "y2": 0},
            {"x1": 0, "x2": 0, "x3": 0},
            {"y1": {"x1": "1*T^0"}, "y2": {"x1": "1*T^0", "x2": "1*T^3"}},
        )
        result = reduce_complex(cx)
        target = result.pieces["0"]
        assert len(target.boundaries) == 2
        assert result.homology_rank("0") == 1
        assert result.homology_rank("1") == 0
        assert is_orthogonal(target.chains, cx.pieces["0"])
        assert len(result.pieces["1"].primitives) == 2
        assert result.depth("0") == 3
        assert homology_rank(cx, "0") == 1


# ---------------------------------------------------------------------------
# Smith form and oracles
# ---------------------------------------------------------------------------


class TestSmith:
    def test_gaps(self) -> None:
        matrix = [[_e("1*T^0"), _e("1*T^0")], [_e("0"), _e("1*T^3")]]
        form = smith_reduce(matrix, Z, Fraction(10))
        assert form.rank == 2
        assert form.gaps() == [Fraction(0), Fraction(3)]

    def test_novikov_rank(self) -> None:
        matrix = [[_e("1*T^0"), _e("1*T^1")], [_e("1*T^1"), _e("1*T^2")]]
        assert novikov_rank(matrix) == 1


class TestOracles:
    def test_determinantal_agrees(self, hidden_gap: FilteredComplex) -> None:
        assert determinantal_depth(hidden_gap.step_into("0")) == 3

    def test_determinantal_zero_step(self) -> None:
        cx = _two_term({"y": 0}, {"x": 0}, {})
        assert determinantal_depth(cx.step_into("0")) == 0

    def test_lattice_rank_one(self) -> None:
        cx = _two_term({"y": 0}, {"x": 0}, {"y": {"x": "1*T^2"}})
        step = cx.step_into("0")
        assert lattice_depth(step) == step_depth(step) == 2

    def test_lattice_attains_hidden_gap(self, hidden_gap: FilteredComplex) -> None:
        step = hidden_gap.step_into("0")
        assert lattice_depth(step) == step_depth(step) == 3

    def test_exact_kernel_of_rank_one_step(self) -> None:
        cx = _two_term({"y1": 0, "y2": 0}, {"x": 0},
                       {"y1": {"x": "1*T^1"}, "y2": {"x": "2*T^1"}})
        step = cx.step_into("0")
        kernel = exact_kernel(step)
        assert len(kernel) == 1
        assert set(kernel[0]) == {"y1", "y2"}
        assert chains_equal(step.apply(kernel[0]), {})
        assert lattice_depth(step) == step_depth(step) == 1

    def test_exact_kernel_of_zero_column(self) -> None:
        cx = _two_term({"y1": 0, "y2": 1}, {"x": 0}, {"y1": {"x": "1*T^0; 1*T^2"}})
        kernel = exact_kernel(cx.step_into("0"))
        assert len(kernel) == 1 and set(kernel[0]) == {"y2"}
        assert kernel[0]["y2"].terms == ((0, 1),)

    @pytest.mark.parametrize("seed", range(8))
    def test_lattice_matches_depth_on_constructed_steps(self, seed: int) -> None:
        step, built = random_lattice_step(np.random.default_rng(seed))
        assert step.source.dim <= 3 and step.target.dim <= 4
        assert lattice_depth(step) == step_depth(step) == built
