"""Independent depth oracles that never truncate.

``determinantal_depth`` reads the largest gap off minimal minor valuations:
after standardization the gaps are the elementary divisor valuations, and
the least valuation of the j x j minors is the sum of the j smallest. Minors
are sampled through random rational projections (Cauchy-Binet), so every
determinant is an exact finite Laurent polynomial.

``lattice_depth`` evaluates the sup-inf definition of depth directly over a
finite lattice of coefficients, with the kernel computed independently by
exact Cramer elimination. It is exponential in the dimension and only
meant for tiny inputs.
"""

from __future__ import annotations

import itertools
import logging
from fractions import Fraction
from typing import Sequence

import numpy as np

from bdepth.algebra.filtered import (
    Chain,
    LinearStep,
    chain_add,
    chain_vanishes,
    chain_with_group,
)
from bdepth.algebra.reduction import standardized_matrix
from bdepth.algebra.smith import Matrix, novikov_rank
from bdepth.core.config import DepthConfig
from bdepth.core.novikov import INF, ExponentGroup, ExtRational, NovikovElement, Rational, as_fraction

logger = logging.getLogger(__name__)


def determinant(matrix: Matrix, group: ExponentGroup) -> NovikovElement:
    """Exact determinant by dynamic programming over column subsets."""
    n = len(matrix)
    if n == 0:
        return NovikovElement.one(group)
    # partial[mask]: signed sum over ways to fill the first popcount(mask) rows with columns in mask
    partial: dict[int, NovikovElement] = {0: NovikovElement.one(group)}
    for row in range(n):
        nxt: dict[int, NovikovElement] = {}
        for mask, value in partial.items():
            if value.is_zero():
                continue
            for col in range(n):
                if mask >> col & 1 or matrix[row][col].is_zero():
                    continue
                # sign of placing col after the columns already used that lie to its right
                inversions = bin(mask >> (col + 1)).count("1")
                term = value * matrix[row][col]
                if inversions % 2:
                    term = -term
                key = mask | (1 << col)
                nxt[key] = nxt[key] + term if key in nxt else term
        partial = nxt
    return partial.get((1 << n) - 1, NovikovElement.zero(group))


def _project(matrix: Matrix, size: int, rng: np.random.Generator,
             group: ExponentGroup) -> Matrix:
    """``P M Q`` for random integer ``P`` (size x rows) and ``Q`` (cols x size)."""
    rows, cols = len(matrix), len(matrix[0])
    p = rng.integers(-9, 10, size=(size, rows))
    q = rng.integers(-9, 10, size=(cols, size))
    zero = NovikovElement.zero(group)
    left = []
    for a in range(size):
        row = []
        for j in range(cols):
            acc = zero
            for i in range(rows):
                if p[a, i] and not matrix[i][j].is_zero():
                    acc = acc + matrix[i][j] * int(p[a, i])
            row.append(acc)
        left.append(row)
    out = []
    for a in range(size):
        row = []
        for b in range(size):
            acc = zero
            for j in range(cols):
                if q[j, b] and not left[a][j].is_zero():
                    acc = acc + left[a][j] * int(q[j, b])
            row.append(acc)
        out.append(row)
    return out


def minor_valuation(matrix: Matrix, size: int, group: ExponentGroup,
                    rng: np.random.Generator, trials: int = 3) -> ExtRational:
    """Least valuation of the ``size x size`` minors, from random projections.

    Each projected determinant has valuation at least the true minimum and
    attains it unless the leading coefficients cancel, which random integer
    projections make unlikely; the least value over the trials is returned.
    """
    if size == 0:
        return Fraction(0)
    best: ExtRational = INF
    for _ in range(trials):
        det = determinant(_project(matrix, size, rng, group), group)
        if not det.is_zero():
            best = min(best, det.terms[0][0])
    return best


def determinantal_depth(step: LinearStep, config: DepthConfig | None = None,
                        trials: int = 3) -> Fraction:
    """Largest gap of ``step`` as the difference of the top two minor valuations."""
    config = config or DepthConfig()
    matrix, group = standardized_matrix(step)
    if not matrix or not matrix[0]:
        return Fraction(0)
    rank = novikov_rank(matrix)
    if rank == 0:
        return Fraction(0)
    rng = np.random.default_rng(config.seed)
    top = minor_valuation(matrix, rank, group, rng, trials)
    below = minor_valuation(matrix, rank - 1, group, rng, trials)
    logger.debug("rank %d minors: valuations %s and %s", rank, top, below)
    return top - below


def _nonsingular_minor(matrix: Matrix, group: ExponentGroup) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Rows and columns of a largest minor with nonzero determinant (exact search)."""
    rows, cols = len(matrix), len(matrix[0]) if matrix else 0
    for size in range(min(rows, cols), 0, -1):
        for r in itertools.combinations(range(rows), size):
            for c in itertools.combinations(range(cols), size):
                if not determinant([[matrix[i][j] for j in c] for i in r], group).is_zero():
                    return r, c
    return (), ()


def exact_kernel(step: LinearStep) -> list[Chain]:
    """A basis of ``ker step`` with finite Laurent-polynomial coordinates.

    Uses Cramer's rule on a largest nonsingular minor: for a free column
    ``f`` the vector has ``det M_RP`` at ``f`` and minus the determinants with
    each pivot column replaced by column ``f`` at the pivots. No entry is
    ever inverted, so nothing is truncated.
    """
    group = step.group
    src, tgt = step.source.basis, step.target.basis
    zero = NovikovElement.zero(group)
    matrix = [[step.columns.get(y, {}).get(x, zero) for y in src] for x in tgt]
    if not tgt:
        return [{y: NovikovElement.one(group)} for y in src]
    rows, pivots = _nonsingular_minor(matrix, group)

    def minor(columns: Sequence[int]) -> NovikovElement:
        return determinant([[matrix[i][j] for j in columns] for i in rows], group)

    full = minor(pivots)
    kernel: list[Chain] = []
    for f in range(len(src)):
        if f in pivots:
            continue
        vector: Chain = {src[f]: full}
        for slot, p in enumerate(pivots):
            replaced = list(pivots)
            replaced[slot] = f
            value = -minor(replaced)
            if not value.is_zero():
                vector[src[p]] = value
        if len(vector) == 1:
            vector = {src[f]: NovikovElement.one(group)}
        kernel.append(vector)
    return kernel


def lattice_depth(
    step: LinearStep,
    coefficients: Sequence[int] = (-2, -1, 1, 2),
    exponents: Sequence[Rational] | None = None,
) -> Fraction:
    """Sup over lattice boundaries of the cheapest lattice primitive's gap.

    Source vectors and kernel corrections range over combinations whose
    coefficients are ``a * T^e`` with ``a`` in ``coefficients`` and ``e`` in
    ``exponents`` (or zero); ``exponents`` defaults to ``0, g, ..., 5g`` for
    the step's group generator ``g``. Source vectors are normalized so their
    first nonzero coefficient is ``T^0``, as the gap is scale invariant. The
    kernel comes from ``exact_kernel``.

    The result never exceeds the depth of an injective step, and equals it
    whenever a depth-attaining primitive lies on the lattice.
    """
    g = step.group.generator
    if exponents is None:
        exponents = sorted({k * g for k in range(6)})
    group = step.group.join(*(as_fraction(e) for e in exponents))
    kernel = [chain_with_group(k, group) for k in exact_kernel(step)]
    extended = LinearStep(step.source.with_group(group), step.target.with_group(group),
                          {k: chain_with_group(c, group) for k, c in step.columns.items()})
    one = NovikovElement.one(group)
    values = [NovikovElement.zero(group)] + [
        NovikovElement.monomial(e, a, group) for a in coefficients for e in exponents
    ]

    def combine(vectors: Sequence[Chain], picks: Sequence[NovikovElement]) -> Chain:
        out: Chain = {}
        for vec, c in zip(vectors, picks):
            if not c.is_zero():
                out = chain_add(out, {k: v * c for k, v in vec.items()})
        return out

    def leading_is_one(picks: Sequence[NovikovElement]) -> bool:
        first = next((c for c in picks if not c.is_zero()), None)
        return first is not None and first == one

    basis = [{name: one} for name in step.source.basis]
    corrections = [combine(kernel, picks)
                   for picks in itertools.product(values, repeat=len(kernel))]
    best = Fraction(0)
    for picks in itertools.product(values, repeat=len(basis)):
        if not leading_is_one(picks):
            continue
        y = combine(basis, picks)
        x = extended.apply(y)
        if chain_vanishes(x):
            continue
        cheapest = min(step.source.level(chain_add(y, k)) for k in corrections)
        best = max(best, cheapest - step.target.level(x))
    return best
