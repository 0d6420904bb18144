"""Boundary depth of Morse functions on the circle.

Critical values are listed in cyclic order ``p1, q1, p2, q2, ...`` with
maxima ``p`` and minima ``q`` alternating. The depth equals the best
"linking" score ``min(p_i, p_j) - max(q_k, q_l)`` over cyclically ordered
quadruples (max, min, max, min); it is also read off the Morse complex
``d p_i = q_i - q_(i-1)`` by the general reduction.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence, TypeVar

from bdepth.algebra.filtered import Chain, FilteredComplex, FilteredVectorSpace, GradingSet
from bdepth.algebra.reduction import boundary_depth
from bdepth.core.config import DepthConfig
from bdepth.core.novikov import ExponentGroup, NovikovElement, Rational, as_fraction

logger = logging.getLogger(__name__)

Number = TypeVar("Number", Fraction, float)


@dataclass(frozen=True)
class CircleMorseData:
    """Alternating critical values, rotated so that ``p1`` is a global maximum."""

    values: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        values = tuple(as_fraction(v) for v in self.values)
        if len(values) < 2 or len(values) % 2:
            raise ValueError(f"need an even, positive number of critical values, got {len(values)}")
        maxima, minima = values[0::2], values[1::2]
        m = len(maxima)
        for i in range(m):
            if not maxima[i] > minima[i] or not maxima[(i + 1) % m] > minima[i]:
                raise ValueError(f"minimum q{i + 1} = {minima[i]} is not below its neighbouring maxima")
        if maxima[0] != max(maxima):
            raise ValueError("p1 must be a global maximum; use CircleMorseData.normalized")
        object.__setattr__(self, "values", values)

    @classmethod
    def normalized(cls, values: Sequence[Rational]) -> CircleMorseData:
        """Rotate by whole (max, min) pairs so the first occurrence of the largest maximum leads."""
        values = [as_fraction(v) for v in values]
        maxima = values[0::2]
        start = 2 * maxima.index(max(maxima)) if maxima else 0
        return cls(tuple(values[start:] + values[:start]))

    @classmethod
    def periodic(cls, pattern: Sequence[Rational], copies: int) -> CircleMorseData:
        """``pattern`` (one max and one min, or more) repeated ``copies`` times."""
        return cls.normalized(list(pattern) * copies)

    @property
    def m(self) -> int:
        return len(self.values) // 2

    @property
    def maxima(self) -> tuple[Fraction, ...]:
        return self.values[0::2]

    @property
    def minima(self) -> tuple[Fraction, ...]:
        return self.values[1::2]

    @property
    def osc(self) -> Fraction:
        return max(self.values) - min(self.values)


def morse_complex(data: CircleMorseData) -> FilteredComplex:
    """Morse complex over the rationals: gradings ``"1"`` (maxima) and ``"0"`` (minima)."""
    group = ExponentGroup.trivial()
    m = data.m
    p_names = tuple(f"p{i + 1}" for i in range(m))
    q_names = tuple(f"q{i + 1}" for i in range(m))
    pieces = {
        "1": FilteredVectorSpace(p_names, data.maxima, group),
        "0": FilteredVectorSpace(q_names, data.minima, group),
    }
    one = NovikovElement.one(group)
    differential: dict[str, Chain] = {}
    for i in range(m):
        if m == 1:
            break
        differential[p_names[i]] = {q_names[i]: one, q_names[i - 1]: -one}
    return FilteredComplex(GradingSet.cyclic(("0", "1")), pieces, differential)


# ---------------------------------------------------------------------------
# Combinatorial formula
# ---------------------------------------------------------------------------


def _quadruples(m: int) -> Iterator[tuple[int, int, int, int]]:
    """Index quadruples (i, k, j, l), i < j, with q_k between p_i and p_j and q_l outside."""
    for i in range(m):
        for j in range(i + 1, m):
            for k in range(i, j):
                for l in list(range(j, m)) + list(range(i)):
                    yield i, k, j, l


def _score(maxima: Sequence[Number], minima: Sequence[Number], quad: tuple[int, int, int, int]) -> Number:
    i, k, j, l = quad
    return min(maxima[i], maxima[j]) - max(minima[k], minima[l])


def quadruple_max(maxima: Sequence[Number], minima: Sequence[Number]) -> Number | None:
    """Exhaustive best score over all cyclically ordered quadruples, None when m < 2."""
    best = None
    for quad in _quadruples(len(maxima)):
        score = _score(maxima, minima, quad)
        if best is None or score > best:
            best = score
    return best


def quadruple_max_fast(maxima: Sequence[Number], minima: Sequence[Number]) -> Number | None:
    """Same value in O(m^2): for each pair of maxima take the lowest minimum on each side."""
    m = len(maxima)
    if m < 2:
        return None
    prefix = [minima[0]]
    for q in minima[1:]:
        prefix.append(min(prefix[-1], q))
    suffix = [minima[-1]]
    for q in reversed(minima[:-1]):
        suffix.append(min(suffix[-1], q))
    suffix.reverse()
    best = None
    for i in range(m):
        inside = None
        for j in range(i + 1, m):
            inside = minima[j - 1] if inside is None else min(inside, minima[j - 1])
            outside = suffix[j] if i == 0 else min(suffix[j], prefix[i - 1])
            score = min(maxima[i], maxima[j]) - max(inside, outside)
            if best is None or score > best:
                best = score
    return best


def beta_combinatorial(data: CircleMorseData) -> Fraction:
    """Best quadruple score; 0 when there is a single maximum."""
    if data.m == 1:
        return Fraction(0)
    return quadruple_max(data.maxima, data.minima)


def critical_quadruple(data: CircleMorseData) -> tuple[int, int, int, int] | None:
    """1-based indices ``(i, k, j, l)`` of a maximising quadruple ``(p_i, q_k, p_j, q_l)``."""
    best = None
    for quad in _quadruples(data.m):
        score = _score(data.maxima, data.minima, quad)
        if best is None or score > best[0]:
            best = (score, quad)
    if best is None:
        return None
    return tuple(x + 1 for x in best[1])  # type: ignore[return-value]


def beta_chain(data: CircleMorseData, config: DepthConfig | None = None) -> Fraction:
    """Boundary depth of the Morse complex."""
    return boundary_depth(morse_complex(data), config)


def explicit_primitive(data: CircleMorseData, coefficients: Sequence[Rational]) -> Chain:
    """The primitive ``-sum_j (sum_{i<j} n_i) p_j`` of ``sum_j n_j q_j``.

    Raises:
        ValueError: the coefficients do not sum to zero (not a boundary).
    """
    n = [as_fraction(c) for c in coefficients]
    if len(n) != data.m:
        raise ValueError(f"expected {data.m} coefficients, got {len(n)}")
    if sum(n) != 0:
        raise ValueError("coefficients of a boundary sum to zero")
    group = ExponentGroup.trivial()
    chain: Chain = {}
    running = Fraction(0)
    for j in range(data.m):
        if running:
            chain[f"p{j + 1}"] = NovikovElement.constant(-running, group)
        running += n[j]
    return chain


# ---------------------------------------------------------------------------
# Sampled functions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SampledCircleFunction:
    """Values of a function at ``N`` equally spaced points of the circle."""

    samples: tuple

    def __post_init__(self) -> None:
        samples = tuple(self.samples)
        if len(samples) < 4:
            raise ValueError(f"need at least 4 samples, got {len(samples)}")
        object.__setattr__(self, "samples", samples)

    def __len__(self) -> int:
        return len(self.samples)

    def local_maxima(self) -> list[int]:
        """Indices of non-strict local maxima (plateaus included)."""
        s, n = self.samples, len(self.samples)
        return [i for i in range(n) if s[i] >= s[i - 1] and s[i] >= s[(i + 1) % n]]

    def extrema(self) -> tuple[list, list]:
        """Alternating (maxima, minima) values after collapsing plateaus, starting at a maximum."""
        runs = []
        for v in self.samples:
            if not runs or v != runs[-1]:
                runs.append(v)
        while len(runs) > 1 and runs[0] == runs[-1]:
            runs.pop()
        n = len(runs)
        if n < 2:
            return [], []
        kinds = []
        for i, v in enumerate(runs):
            left, right = runs[i - 1], runs[(i + 1) % n]
            if v > left and v > right:
                kinds.append((i, "max"))
            elif v < left and v < right:
                kinds.append((i, "min"))
        start = next(idx for idx, (_, kind) in enumerate(kinds) if kind == "max")
        kinds = kinds[start:] + kinds[:start]
        maxima = [runs[i] for i, kind in kinds if kind == "max"]
        minima = [runs[i] for i, kind in kinds if kind == "min"]
        return maxima, minima


def beta_continuous(f: SampledCircleFunction) -> Fraction | float:
    """Best quadruple score over sample points in cyclic order, clamped below at 0."""
    maxima, minima = f.extrema()
    best = quadruple_max_fast(maxima, minima)
    zero = f.samples[0] * 0
    if best is None or best < zero:
        return zero
    return best
