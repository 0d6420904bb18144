"""Compactly supported sampled functions on the line and stacked bump constructions.

A sequence ``v`` is turned into ``f_v``: block ``i`` (1-based) is the bump
profile squeezed onto ``[1 - 2^(1-i), 1 - 2^(-i)]`` and scaled by ``v_i``.
Everything is exact when the profile and ``v`` are rational.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from bdepth.audit.report import InvariantReport
from bdepth.morse.circle import SampledCircleFunction

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SampledLineFunction:
    """Samples at strictly increasing positions; the function is 0 outside them."""

    positions: tuple
    values: tuple

    def __post_init__(self) -> None:
        positions, values = tuple(self.positions), tuple(self.values)
        if len(positions) != len(values):
            raise ValueError("one value per position is required")
        if any(b <= a for a, b in zip(positions, positions[1:])):
            raise ValueError("positions must be strictly increasing")
        object.__setattr__(self, "positions", positions)
        object.__setattr__(self, "values", values)

    @classmethod
    def zero(cls, positions: Sequence) -> SampledLineFunction:
        return cls(tuple(positions), tuple(Fraction(0) for _ in positions))

    def _same_grid(self, other: SampledLineFunction) -> None:
        if self.positions != other.positions:
            raise ValueError("sampled functions live on different grids")

    def __add__(self, other: SampledLineFunction) -> SampledLineFunction:
        self._same_grid(other)
        return SampledLineFunction(self.positions, tuple(a + b for a, b in zip(self.values, other.values)))

    def __neg__(self) -> SampledLineFunction:
        return SampledLineFunction(self.positions, tuple(-a for a in self.values))

    def __sub__(self, other: SampledLineFunction) -> SampledLineFunction:
        return self + (-other)

    def min(self):
        """Minimum including the zero region outside the samples."""
        return min((*self.values, 0))

    def max(self):
        return max((*self.values, 0))

    @property
    def osc(self):
        return self.max() - self.min()

    def local_maxima(self) -> list[int]:
        """Indices of non-strict local maxima among the samples (0 beyond both ends)."""
        vals = (0, *self.values, 0)
        return [i - 1 for i in range(1, len(vals) - 1)
                if vals[i] >= vals[i - 1] and vals[i] >= vals[i + 1]]


@dataclass(frozen=True)
class BumpProfile:
    """A sampled profile on (0, 1): maximum 1, zero at both ends, local minima only at 0."""

    positions: tuple
    values: tuple

    def __post_init__(self) -> None:
        line = SampledLineFunction(self.positions, self.values)
        if not line.positions or line.positions[0] <= 0 or line.positions[-1] >= 1:
            raise ValueError("profile positions must lie inside (0, 1)")
        if line.values[0] != 0 or line.values[-1] != 0:
            raise ValueError("profile must vanish at its first and last sample")
        if max(line.values) != 1:
            raise ValueError(f"profile maximum must be 1, got {max(line.values)}")
        vals = line.values
        for i in range(1, len(vals) - 1):
            if vals[i] <= vals[i - 1] and vals[i] <= vals[i + 1] and vals[i] != 0:
                raise ValueError(f"profile has a local minimum {vals[i]} away from 0")
        object.__setattr__(self, "positions", line.positions)
        object.__setattr__(self, "values", line.values)

    @classmethod
    def tent(cls, resolution: int = 16) -> BumpProfile:
        """Exact tent of height 1 at 1/2 supported on [1/4, 3/4]; ``resolution`` divisible by 4."""
        if resolution < 4 or resolution % 4:
            raise ValueError("resolution must be a positive multiple of 4")
        positions = tuple(Fraction(k, resolution) for k in range(1, resolution))
        values = tuple(max(Fraction(0), 1 - 4 * abs(x - Fraction(1, 2))) for x in positions)
        return cls(positions, values)


def stacked_bumps(v: Sequence, profile: BumpProfile, blocks: int | None = None) -> SampledLineFunction:
    """``f_v`` sampled on the union of the rescaled profile grids.

    ``blocks`` fixes the number of blocks (at least ``len(v)``) so functions
    built from different sequences share one grid.
    """
    blocks = len(v) if blocks is None else blocks
    if blocks < len(v):
        raise ValueError(f"{len(v)} entries do not fit in {blocks} blocks")
    positions, values = [], []
    for i in range(1, blocks + 1):
        start = 1 - Fraction(1, 2 ** (i - 1))
        width = Fraction(1, 2**i)
        scale = v[i - 1] if i <= len(v) else 0
        for x, g in zip(profile.positions, profile.values):
            positions.append(start + width * x)
            values.append(scale * g)
    return SampledLineFunction(tuple(positions), tuple(values))


def mm(f: SampledLineFunction | SampledCircleFunction):
    """Infimum of ``f`` over its non-strict local maxima.

    On the line the zero region outside the samples consists of local maxima,
    so the result never exceeds 0.
    """
    if isinstance(f, SampledCircleFunction):
        return min(f.samples[i] for i in f.local_maxima())
    return min((*(f.values[i] for i in f.local_maxima()), 0))


def sup_norm(v: Sequence):
    return max((abs(x) for x in v), default=0)


def sequence_osc(v: Sequence):
    """Oscillation of a finitely supported sequence (its zero tail included)."""
    return max((*v, 0)) - min((*v, 0))


def _difference(v: Sequence, w: Sequence) -> list:
    n = max(len(v), len(w))
    v = list(v) + [0] * (n - len(v))
    w = list(w) + [0] * (n - len(w))
    return [a - b for a, b in zip(v, w)]


def embedding_bounds(v: Sequence, w: Sequence, profile: BumpProfile) -> InvariantReport:
    """Function-level arithmetic behind the sup-norm/oscillation sandwich for ``f_v`` and ``f_w``."""
    d = _difference(v, w)
    blocks = len(d)
    f = stacked_bumps(d, profile, blocks)
    f_neg = stacked_bumps([-x for x in d], profile, blocks)
    norm, osc = sup_norm(d), sequence_osc(d)

    report = InvariantReport(check="embedding bounds")
    report.record("||v - w||_inf", norm)
    report.record("osc(v - w)", osc)
    report.record("-min f_(v-w)", -f.min())
    report.record("-min f_(w-v)", -f_neg.min())
    report.record("mm f_(v-w)", mm(f))
    report.record("mm f_(v-w) - min f_(v-w)", mm(f) - f.min())
    lower = max(-f.min(), -f_neg.min())
    report.record("max of -min values", lower, threshold=norm, passed=lower == norm)
    report.record("osc f_(v-w)", f.osc, threshold=osc, passed=f.osc == osc)
    additive = stacked_bumps(v, profile, blocks) - stacked_bumps(w, profile, blocks)
    report.record("additivity", additive == f, passed=additive == f)
    logger.debug("embedding bounds for %d blocks: norm %s, osc %s", blocks, norm, osc)
    return report
