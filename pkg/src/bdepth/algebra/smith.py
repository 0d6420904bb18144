"""Matrix reductions over the rationals and over the Novikov valuation ring.

``smith_reduce`` brings a matrix to diagonal form with row and column
operations whose multipliers have non-negative valuation, so the tracked
transforms are invertible over the valuation ring and carry orthonormal
bases to orthonormal bases. Work is done modulo ``T^cutoff``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction

from bdepth.core.novikov import ExponentGroup, ExtRational, NovikovElement

logger = logging.getLogger(__name__)

Matrix = list[list[NovikovElement]]


# ---------------------------------------------------------------------------
# Rational row echelon
# ---------------------------------------------------------------------------


def row_echelon(rows: list[list[Fraction]]) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form of a copy of ``rows``; returns (form, pivot columns)."""
    m = [list(r) for r in rows]
    if not m:
        return m, []
    n_rows, n_cols = len(m), len(m[0])
    pivots: list[int] = []
    piv_r = 0
    for piv_c in range(n_cols):
        for i_row in range(piv_r, n_rows):
            if m[i_row][piv_c] != 0:
                break
        else:
            continue
        if i_row != piv_r:
            m[piv_r], m[i_row] = m[i_row], m[piv_r]
        fp = m[piv_r][piv_c]
        m[piv_r] = [v / fp for v in m[piv_r]]
        for r in range(n_rows):
            if r == piv_r or m[r][piv_c] == 0:
                continue
            fr = m[r][piv_c]
            m[r] = [a - fr * b for a, b in zip(m[r], m[piv_r])]
        pivots.append(piv_c)
        piv_r += 1
        if piv_r == n_rows:
            break
    return m, pivots


def rational_rank(rows: list[list[Fraction]]) -> int:
    return len(row_echelon(rows)[1])


def left_dependency(rows: list[list[Fraction]]) -> list[Fraction] | None:
    """Coefficients ``a`` with ``sum a_i rows[i] = 0`` and some ``a_i != 0``, or None."""
    if not rows:
        return None
    width = len(rows[0])
    augmented = [list(r) + [Fraction(int(i == j)) for j in range(len(rows))]
                 for i, r in enumerate(rows)]
    # Gaussian elimination on [rows | I]; a zero left block exposes a dependency
    m = augmented
    piv_r = 0
    for piv_c in range(width):
        for i_row in range(piv_r, len(m)):
            if m[i_row][piv_c] != 0:
                break
        else:
            continue
        m[piv_r], m[i_row] = m[i_row], m[piv_r]
        fp = m[piv_r][piv_c]
        for r in range(piv_r + 1, len(m)):
            fr = m[r][piv_c]
            if fr != 0:
                m[r] = [a - b * fr / fp for a, b in zip(m[r], m[piv_r])]
        piv_r += 1
    for r in range(piv_r, len(m)):
        if all(v == 0 for v in m[r][:width]):
            return m[r][width:]
    return None


# ---------------------------------------------------------------------------
# Exact Novikov rank
# ---------------------------------------------------------------------------


def novikov_rank(matrix: Matrix) -> int:
    """Exact rank over the Novikov field by fraction-free elimination.

    Rows are rescaled by nonzero pivots instead of divided, so exact inputs
    stay finite sums and no truncation is involved.
    """
    m = [list(r) for r in matrix]
    if not m:
        return 0
    n_rows, n_cols = len(m), len(m[0])
    rank = 0
    for c in range(n_cols):
        pivot_row = next((r for r in range(rank, n_rows) if not m[r][c].vanishes()), None)
        if pivot_row is None:
            continue
        m[rank], m[pivot_row] = m[pivot_row], m[rank]
        p = m[rank][c]
        for r in range(rank + 1, n_rows):
            f = m[r][c]
            if f.vanishes():
                continue
            m[r] = [p * a - f * b for a, b in zip(m[r], m[rank])]
        rank += 1
        if rank == n_rows:
            break
    return rank


# ---------------------------------------------------------------------------
# Smith reduction modulo T^cutoff
# ---------------------------------------------------------------------------


@dataclass
class SmithForm:
    """``diagonal = row_transform * N * col_transform`` restricted to the first ``rank`` slots.

    ``col_transform`` columns are the adapted source basis in normalized
    coordinates; ``row_transform`` rows give adapted target coordinates.
    """

    diagonal: list[NovikovElement]
    col_transform: Matrix
    row_transform: Matrix
    cutoff: ExtRational

    @property
    def rank(self) -> int:
        return len(self.diagonal)

    def gaps(self) -> list[Fraction]:
        """Valuations of the diagonal entries."""
        return [d.terms[0][0] for d in self.diagonal]


def identity_matrix(n: int, group: ExponentGroup) -> Matrix:
    one, zero = NovikovElement.one(group), NovikovElement.zero(group)
    return [[one if i == j else zero for j in range(n)] for i in range(n)]


def smith_reduce(matrix: Matrix, group: ExponentGroup, cutoff: ExtRational) -> SmithForm:
    """Diagonalize ``matrix`` (rows x cols) with minimal-valuation pivots.

    Pivot choice: least valuation among remaining entries with terms below
    the cutoff, ties broken by smallest column then smallest row. Entries
    with no terms below the cutoff count as zero.
    """
    n_rows = len(matrix)
    n_cols = len(matrix[0]) if matrix else 0
    work = [[e.truncate(cutoff) for e in row] for row in matrix]
    cols = identity_matrix(n_cols, group)
    rows = identity_matrix(n_rows, group)
    zero = NovikovElement.zero(group)
    diagonal: list[NovikovElement] = []

    for t in range(min(n_rows, n_cols)):
        best: tuple[Fraction, int, int] | None = None
        for j in range(t, n_cols):
            for i in range(t, n_rows):
                e = work[i][j]
                if e.vanishes():
                    continue
                key = (e.terms[0][0], j, i)
                if best is None or key < best:
                    best = key
        if best is None:
            break
        v, j, i = best
        if i != t:
            work[t], work[i] = work[i], work[t]
            rows[t], rows[i] = rows[i], rows[t]
        if j != t:
            for r in work:
                r[t], r[j] = r[j], r[t]
            for r in cols:
                r[t], r[j] = r[j], r[t]

        pivot = work[t][t]
        inverse = pivot.invert(cutoff=cutoff - v)
        for s in range(t + 1, n_rows):
            if work[s][t].vanishes():
                continue
            q = (work[s][t] * inverse).truncate(cutoff)
            for c in range(t, n_cols):
                work[s][c] = (work[s][c] - q * work[t][c]).truncate(cutoff)
            rows[s] = [(a - q * b).truncate(cutoff) for a, b in zip(rows[s], rows[t])]
            work[s][t] = zero
        for c in range(t + 1, n_cols):
            if work[t][c].vanishes():
                continue
            q = (work[t][c] * inverse).truncate(cutoff)
            for r in cols:
                r[c] = (r[c] - q * r[t]).truncate(cutoff)
            work[t][c] = zero
        diagonal.append(pivot)
        logger.debug("pivot %d at valuation %s", t, v)

    return SmithForm(diagonal, cols, rows, cutoff)
