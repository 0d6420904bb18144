"""Block operator families and fundamental solutions of ``dv/ds + (eta E + B(s)) v = 0``.

A family stores symmetric samples of ``B1`` and ``B2`` on ``[-T, T]``,
interpolates them with a clamped cubic spline and holds the end samples
exactly for ``|s| >= T``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.integrate
from scipy.interpolate import CubicSpline

from bdepth.audit.report import InvariantReport
from bdepth.core.config import DepthConfig
from bdepth.core.errors import StepTooLarge
from bdepth.lab.spectral import check_symmetric, split_matrix, symmetric_norm

logger = logging.getLogger(__name__)

# Operator-norm agreement required between the integrator and the Picard series.
FLOW_AGREEMENT = 1e-8


@dataclass
class BlockOperatorFamily:
    """``B(s) = [[B1(s), B2(s)], [B2(s), B1(s)]]``, constant beyond ``+-T``."""

    positions: np.ndarray
    b1: np.ndarray
    b2: np.ndarray
    T: float
    _splines: tuple = field(init=False, repr=False)

    def __post_init__(self) -> None:
        self.positions = np.asarray(self.positions, dtype=float)
        self.b1 = np.asarray(self.b1, dtype=float)
        self.b2 = np.asarray(self.b2, dtype=float)
        self.T = float(self.T)
        if self.T <= 0:
            raise ValueError(f"plateau time must be positive, got {self.T}")
        if self.positions.ndim != 1 or len(self.positions) < 2:
            raise ValueError("need at least two sample positions")
        if np.any(np.diff(self.positions) <= 0):
            raise ValueError("sample positions must be strictly increasing")
        if not (math.isclose(self.positions[0], -self.T, abs_tol=1e-12)
                and math.isclose(self.positions[-1], self.T, abs_tol=1e-12)):
            raise ValueError(f"samples must start at -T and end at T (T = {self.T})")
        shape = (len(self.positions), self.dim, self.dim)
        if self.b1.shape != shape or self.b2.shape != shape:
            raise ValueError(f"B1 and B2 samples must have shape {shape}")
        for i, s in enumerate(self.positions):
            check_symmetric(self.b1[i], name=f"B1 at s={s}")
            check_symmetric(self.b2[i], name=f"B2 at s={s}")
        self._splines = (
            CubicSpline(self.positions, self.b1, axis=0, bc_type="clamped"),
            CubicSpline(self.positions, self.b2, axis=0, bc_type="clamped"),
        )

    @property
    def dim(self) -> int:
        return self.b1.shape[-1] if self.b1.ndim == 3 else 0

    @classmethod
    def constant(cls, b1: np.ndarray, b2: np.ndarray, T: float = 1.0) -> BlockOperatorFamily:
        b1, b2 = np.asarray(b1, dtype=float), np.asarray(b2, dtype=float)
        return cls(np.array([-T, T]), np.stack([b1, b1]), np.stack([b2, b2]), T)

    def _evaluate(self, which: int, s: np.ndarray) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        samples = self.b1 if which == 0 else self.b2
        if s.ndim == 0:
            if s <= -self.T:
                return samples[0].copy()
            if s >= self.T:
                return samples[-1].copy()
        out = self._splines[which](np.clip(s, -self.T, self.T))
        out = 0.5 * (out + np.swapaxes(out, -1, -2))
        out[s <= -self.T] = samples[0]
        out[s >= self.T] = samples[-1]
        return out

    def B1(self, s: float | np.ndarray) -> np.ndarray:
        return self._evaluate(0, s)

    def B2(self, s: float | np.ndarray) -> np.ndarray:
        return self._evaluate(1, s)

    def block(self, s: float | np.ndarray) -> np.ndarray:
        """``B(s)`` for a scalar or an array of positions (stacked on the first axis)."""
        b1, b2 = self.B1(s), self.B2(s)
        return np.concatenate(
            [np.concatenate([b1, b2], axis=-1), np.concatenate([b2, b1], axis=-1)], axis=-2
        )

    @property
    def ends(self) -> tuple[tuple[np.ndarray, np.ndarray], tuple[np.ndarray, np.ndarray]]:
        """``((B1-, B2-), (B1+, B2+))``."""
        return (self.b1[0], self.b2[0]), (self.b1[-1], self.b2[-1])

    def end_norm(self) -> float:
        """``max(|B1-| + |B2-|, |B1+| + |B2+|)``; scans need ``eta`` strictly above it."""
        return max(symmetric_norm(a) + symmetric_norm(b) for a, b in self.ends)

    def sup_norm(self, points: int = 1025) -> float:
        """``sup |B1| + sup |B2|`` over the samples and a uniform grid."""
        grid = np.union1d(self.positions, np.linspace(-self.T, self.T, points))
        b1, b2 = self.B1(grid), self.B2(grid)
        sup1 = max(symmetric_norm(m) for m in b1)
        sup2 = max(symmetric_norm(m) for m in b2)
        return sup1 + sup2


# ---------------------------------------------------------------------------
# Integration
# ---------------------------------------------------------------------------


def _rk4(blocks: np.ndarray, shift: np.ndarray, h: float, stride: int) -> np.ndarray:
    """Classical RK4 over a grid of ``B`` samples; ``stride`` is the half-step in samples."""
    size = blocks.shape[-1]
    phi = np.broadcast_to(np.eye(size), shift.shape).copy()
    for k in range(0, len(blocks) - 1, 2 * stride):
        a0 = shift + blocks[k]
        am = shift + blocks[k + stride]
        a1 = shift + blocks[k + 2 * stride]
        k1 = -a0 @ phi
        k2 = -am @ (phi + 0.5 * h * k1)
        k3 = -am @ (phi + 0.5 * h * k2)
        k4 = -a1 @ (phi + h * k3)
        phi = phi + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    return phi


def fundamental_solutions(
    fam: BlockOperatorFamily,
    etas: np.ndarray,
    config: DepthConfig | None = None,
    audit: bool = True,
) -> np.ndarray:
    """``Phi_eta(T)`` for every ``eta`` at once, shape ``(len(etas), 2n, 2n)``.

    Integrates with ``config.steps`` RK4 steps and, when ``audit`` is set,
    repeats at half the step; the finer result is returned.

    Raises:
        StepTooLarge: the two step sizes disagree by more than the tolerance
            relative to the size of the solution.
    """
    config = config or DepthConfig()
    etas = np.atleast_1d(np.asarray(etas, dtype=float))
    if np.any(etas <= 0):
        raise ValueError("spectral parameters must be positive")
    steps = config.steps
    fine_steps = 2 * steps if audit else steps
    grid = np.linspace(-fam.T, fam.T, 2 * fine_steps + 1)
    blocks = fam.block(grid)
    shift = etas[:, None, None] * split_matrix(fam.dim)
    h = 2 * fam.T / fine_steps
    fine = _rk4(blocks, shift, h, 1)
    if not audit:
        return fine
    coarse = _rk4(blocks, shift, 2 * h, 2)
    scale = np.maximum(1.0, np.linalg.norm(fine, 2, axis=(1, 2)))
    disagreement = np.linalg.norm(fine - coarse, 2, axis=(1, 2)) / scale
    worst = int(np.argmax(disagreement))
    logger.debug("Richardson check over %d parameters: worst %.3g at eta=%s",
                 len(etas), disagreement[worst], etas[worst])
    if disagreement[worst] > config.tolerance:
        raise StepTooLarge(
            f"step halving changes Phi by {disagreement[worst]:.3g} at eta={etas[worst]:.6g} "
            f"(tolerance {config.tolerance:g}); increase steps"
        )
    return fine


def fundamental_solution(
    fam: BlockOperatorFamily, eta: float, config: DepthConfig | None = None, audit: bool = True
) -> np.ndarray:
    """``Phi_eta(T)`` with ``Phi_eta(-T) = I``."""
    return fundamental_solutions(fam, np.array([eta]), config, audit)[0]


@dataclass
class PicardResult:
    """Partial sums of the Picard iteration evaluated at ``s = T``."""

    partial_sums: list[np.ndarray]
    remainder_bound: float
    operator_bound: float

    @property
    def value(self) -> np.ndarray:
        return self.partial_sums[-1]


def picard_remainder(operator_bound: float, length: float, terms: int) -> float:
    """Tail ``e^(aL) (aL)^(k+1) / (k+1)!`` of the exponential series, ``a`` the operator bound."""
    x = operator_bound * length
    if x == 0:
        return 0.0
    return math.exp(x + (terms + 1) * math.log(x) - math.lgamma(terms + 2))


def picard_series(
    fam: BlockOperatorFamily, eta: float, terms: int | None = None,
    config: DepthConfig | None = None,
) -> PicardResult:
    """Successive approximations ``Phi_(k+1)(s) = I - int_(-T)^s A(u) Phi_k(u) du``.

    Integrals are cumulative Simpson sums on the integrator's half-step
    grid; the ``k``-th iterate is the ``k``-th partial sum of the series.
    """
    config = config or DepthConfig()
    terms = config.picard_terms if terms is None else terms
    grid = np.linspace(-fam.T, fam.T, 2 * config.steps + 1)
    a = eta * split_matrix(fam.dim) + fam.block(grid)
    identity = np.eye(a.shape[-1])
    phi = np.broadcast_to(identity, a.shape).copy()
    partial = [phi[-1].copy()]
    for _ in range(terms):
        integral = scipy.integrate.cumulative_simpson(a @ phi, x=grid, axis=0, initial=0)
        phi = identity - integral
        partial.append(phi[-1].copy())
    bound = max(symmetric_norm(m) for m in a)
    remainder = picard_remainder(bound, 2 * fam.T, terms)
    logger.debug("Picard at eta=%s: %d terms, remainder bound %.3g", eta, terms, remainder)
    return PicardResult(partial, remainder, bound)


def picard_terms_needed(operator_bound: float, length: float, target: float, start: int = 1) -> int:
    """Fewest terms, at least ``start``, whose remainder bound is below ``target``."""
    terms = max(start, 1)
    while picard_remainder(operator_bound, length, terms) >= target:
        terms += 1
    return terms


def flow_audit(fam: BlockOperatorFamily, eta: float, config: DepthConfig | None = None) -> InvariantReport:
    """Integrator against the Picard series at one spectral parameter.

    The two must agree to ``FLOW_AGREEMENT`` in operator norm. The series is
    extended past ``config.picard_terms`` until its remainder bound, taken with
    ``eta + sup|B1| + sup|B2|`` for the operator norm, is a tenth of that.
    """
    config = config or DepthConfig()
    report = InvariantReport(check="fundamental solution")
    phi = fundamental_solution(fam, eta, config)
    terms = picard_terms_needed(eta + fam.sup_norm(), 2 * fam.T, FLOW_AGREEMENT / 10, config.picard_terms)
    picard = picard_series(fam, eta, terms=terms, config=config)
    gap = float(np.linalg.norm(phi - picard.value, 2))
    report.record("|Phi|", float(np.linalg.norm(phi, 2)))
    report.record("Picard terms", terms)
    report.record("Picard remainder bound", picard.remainder_bound)
    report.record("integrator vs Picard", gap, threshold=FLOW_AGREEMENT, passed=gap <= FLOW_AGREEMENT)
    return report


def zero_flow(n: int, eta: float, T: float) -> np.ndarray:
    """Closed form for ``B = 0``: ``diag(e^(2 eta T) I, e^(-2 eta T) I)``."""
    return np.diag(np.concatenate([np.full(n, math.exp(2 * eta * T)), np.full(n, math.exp(-2 * eta * T))]))

