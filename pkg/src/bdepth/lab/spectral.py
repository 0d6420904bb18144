"""Signatures and spectral projections of ``E + mu B`` for block operators.

``E`` is ``diag(-I, I)`` on ``V + V`` and ``B = [[B1, B2], [B2, B1]]`` for
symmetric ``B1, B2``. For ``|mu| (|B1| + |B2|) < 1`` no eigenvalue of
``E + mu B`` crosses zero, so the positive and negative spectral
projections each have rank ``dim V``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from bdepth.audit.report import InvariantReport
from bdepth.core.config import DepthConfig
from bdepth.core.errors import NotSymmetric, OutOfRange

logger = logging.getLogger(__name__)


def split_matrix(n: int) -> np.ndarray:
    """``E = diag(-I_n, I_n)``."""
    return np.diag(np.concatenate([-np.ones(n), np.ones(n)]))


def block_operator(b1: np.ndarray, b2: np.ndarray) -> np.ndarray:
    return np.block([[b1, b2], [b2, b1]])


def check_symmetric(matrix: np.ndarray, tolerance: float = 1e-12, name: str = "matrix") -> np.ndarray:
    matrix = np.asarray(matrix, dtype=float)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise NotSymmetric(f"{name} is not square: shape {matrix.shape}")
    scale = max(1.0, float(np.max(np.abs(matrix), initial=0.0)))
    if np.max(np.abs(matrix - matrix.T), initial=0.0) > tolerance * scale:
        raise NotSymmetric(f"{name} is not symmetric")
    return matrix


def symmetric_norm(matrix: np.ndarray) -> float:
    """Operator norm of a symmetric matrix: its largest absolute eigenvalue."""
    if matrix.size == 0:
        return 0.0
    return float(np.max(np.abs(scipy.linalg.eigvalsh(matrix))))


def admissible_radius(b1: np.ndarray, b2: np.ndarray) -> float:
    """``1 / (|B1| + |B2|)``, infinite when both vanish."""
    total = symmetric_norm(b1) + symmetric_norm(b2)
    return np.inf if total == 0 else 1.0 / total


def _check_admissible(b1: np.ndarray, b2: np.ndarray, mu: float) -> None:
    radius = admissible_radius(b1, b2)
    if not abs(mu) < radius:
        raise OutOfRange(f"|mu| = {abs(mu)} is not below 1/(|B1| + |B2|) = {radius}")


@dataclass
class SplitOperator:
    """A symmetric operator with its positive and negative spectral projections."""

    matrix: np.ndarray
    parameter: float
    eigenvalues: np.ndarray
    plus: np.ndarray
    minus: np.ndarray

    @property
    def rank_plus(self) -> int:
        return int(np.sum(self.eigenvalues > 0))

    @property
    def rank_minus(self) -> int:
        return int(np.sum(self.eigenvalues < 0))

    def basis(self, sign: int) -> np.ndarray:
        """Orthonormal columns spanning the positive (``sign > 0``) or negative eigenspace."""
        _, vectors = scipy.linalg.eigh(self.matrix)
        mask = self.eigenvalues > 0 if sign > 0 else self.eigenvalues < 0
        return vectors[:, mask]


def split_operator(matrix: np.ndarray, parameter: float = 0.0) -> SplitOperator:
    """Spectral projections of any symmetric matrix from its eigendecomposition."""
    matrix = check_symmetric(matrix)
    values, vectors = scipy.linalg.eigh(matrix)
    pos, neg = vectors[:, values > 0], vectors[:, values < 0]
    return SplitOperator(matrix, parameter, values, pos @ pos.T, neg @ neg.T)


def signature_count(b1: np.ndarray, b2: np.ndarray, mu: float) -> tuple[int, int]:
    """Numbers of positive and negative eigenvalues of ``E + mu B``.

    Raises:
        OutOfRange: ``mu`` is outside the admissible interval.
    """
    b1, b2 = check_symmetric(b1, name="B1"), check_symmetric(b2, name="B2")
    _check_admissible(b1, b2, mu)
    values = scipy.linalg.eigvalsh(split_matrix(len(b1)) + mu * block_operator(b1, b2))
    return int(np.sum(values > 0)), int(np.sum(values < 0))


def spectral_projections(b1: np.ndarray, b2: np.ndarray, mu: float) -> SplitOperator:
    """``Pi+`` and ``Pi-`` of ``E + mu B`` for admissible ``mu``."""
    b1, b2 = check_symmetric(b1, name="B1"), check_symmetric(b2, name="B2")
    _check_admissible(b1, b2, mu)
    return split_operator(split_matrix(len(b1)) + mu * block_operator(b1, b2), mu)


def _mu_grid(radius: float, points: int) -> np.ndarray:
    edge = 0.99 * radius if np.isfinite(radius) else 1.0
    return np.linspace(-edge, edge, points)


def projection_audit(
    b1: np.ndarray, b2: np.ndarray, config: DepthConfig | None = None, points: int | None = None
) -> InvariantReport:
    """Signature, eigenvalue floor, projection identities and grid continuity over admissible mu.

    The Lipschitz constant is estimated on a coarse grid and then checked,
    with ``config.lipschitz_slack`` headroom, on a grid twice as fine.
    """
    config = config or DepthConfig()
    points = points or config.suite.signature_grid
    b1, b2 = check_symmetric(b1, name="B1"), check_symmetric(b2, name="B2")
    n = len(b1)
    norms = symmetric_norm(b1) + symmetric_norm(b2)
    radius = admissible_radius(b1, b2)
    identity = np.eye(2 * n)

    report = InvariantReport(check="spectral projections")
    bad_signature = 0
    floor_gap = np.inf
    idempotency = completeness = 0.0
    ranks: set[tuple[int, int]] = set()
    coarse = _mu_grid(radius, points)
    ops = [spectral_projections(b1, b2, float(mu)) for mu in coarse]
    for mu, op in zip(coarse, ops):
        if (op.rank_plus, op.rank_minus) != (n, n):
            bad_signature += 1
        ranks.add((op.rank_plus, op.rank_minus))
        floor = 1.0 - abs(mu) * norms
        floor_gap = min(floor_gap, float(np.min(np.abs(op.eigenvalues))) - floor)
        for proj in (op.plus, op.minus):
            idempotency = max(idempotency, float(np.linalg.norm(proj @ proj - proj, 2)))
        completeness = max(completeness, float(np.linalg.norm(op.plus + op.minus - identity, 2)))

    report.record("signature failures", bad_signature, threshold=0, passed=bad_signature == 0)
    report.record("eigenvalue floor margin", floor_gap, threshold=-config.tolerance,
                  passed=floor_gap >= -config.tolerance)
    report.record("idempotency", idempotency, threshold=1e-10, passed=idempotency <= 1e-10)
    report.record("completeness", completeness, threshold=1e-12 * max(1, n),
                  passed=completeness <= 1e-12 * max(1, n))
    report.record("rank constancy", len(ranks), threshold=1, passed=len(ranks) == 1)

    step = coarse[1] - coarse[0] if len(coarse) > 1 else 1.0
    lipschitz = max(
        (float(np.linalg.norm(b.plus - a.plus, 2)) / step for a, b in zip(ops, ops[1:])),
        default=0.0,
    )
    fine = _mu_grid(radius, 2 * points - 1)
    fine_step = fine[1] - fine[0] if len(fine) > 1 else 1.0
    worst = 0.0
    previous = None
    for mu in fine:
        op = spectral_projections(b1, b2, float(mu))
        if previous is not None:
            worst = max(worst, float(np.linalg.norm(op.plus - previous.plus, 2)) / fine_step)
        previous = op
    bound = config.lipschitz_slack * lipschitz + config.tolerance
    report.record("lipschitz (coarse)", lipschitz)
    report.record("lipschitz (fine)", worst, threshold=bound, passed=worst <= bound)
    logger.debug("projection audit n=%d: lipschitz %.3g coarse, %.3g fine", n, lipschitz, worst)
    return report
