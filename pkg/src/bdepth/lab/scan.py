"""Exceptional-set scans over the spectral parameter.

At ``eta`` the block ODE has a square-integrable kernel element exactly when
``Pi-(B+) Phi_eta(T)`` kills a nonzero vector of ``Im Pi-(B-)``. The scan
measures this by the smallest singular value of ``U+^T Q`` where ``U+`` is an
orthonormal basis of ``Im Pi-(B+)`` and ``Q`` one of ``Phi_eta(T) Im Pi-(B-)``.
Both factors have unit norm, so the value lies in ``[0, 1]`` and is compared
with ``config.rank_threshold`` directly.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.integrate
import scipy.optimize

from bdepth.core.config import DepthConfig
from bdepth.core.errors import OutOfRange
from bdepth.lab.flow import BlockOperatorFamily, fundamental_solution, fundamental_solutions
from bdepth.lab.spectral import spectral_projections

logger = logging.getLogger(__name__)


@dataclass
class ScanPoint:
    eta: float
    singular_value: float
    candidate: bool = False


@dataclass
class ScanResult:
    """Grid values, refined candidates and the enclosing interval ``[eta0, eta1]``."""

    points: list[ScanPoint]
    candidates: list[float]
    eta0: float
    eta1: float
    threshold: float
    refined_values: list[float] = field(default_factory=list)

    def rows(self) -> list[tuple[float, float, bool]]:
        return [(p.eta, p.singular_value, p.candidate) for p in self.points]

    @property
    def min_singular_value(self) -> float:
        return min((p.singular_value for p in self.points), default=math.inf)


def _negative_basis(b1: np.ndarray, b2: np.ndarray, eta: float) -> np.ndarray:
    return spectral_projections(b1, b2, 1.0 / eta).basis(-1)


def deficiency(fam: BlockOperatorFamily, eta: float, phi: np.ndarray) -> float:
    """n-th singular value of the projected fundamental solution, normalised to ``[0, 1]``."""
    (b1_minus, b2_minus), (b1_plus, b2_plus) = fam.ends
    start = _negative_basis(b1_minus, b2_minus, eta)
    end = _negative_basis(b1_plus, b2_plus, eta)
    q, _ = np.linalg.qr(phi @ start)
    values = np.linalg.svd(end.T @ q, compute_uv=False)
    return float(values[-1]) if len(values) else 1.0


def _refine(fam: BlockOperatorFamily, bracket: tuple[float, float, float],
            config: DepthConfig) -> tuple[float, float]:
    def objective(eta: float) -> float:
        return deficiency(fam, eta, fundamental_solution(fam, eta, config, audit=False))

    try:
        result = scipy.optimize.minimize_scalar(objective, bracket=bracket, method="golden",
                                                options={"xtol": 1e-12})
    except ValueError:
        # unaudited re-evaluation can flatten a shallow grid minimum out of its bracket
        result = scipy.optimize.minimize_scalar(objective, bounds=(bracket[0], bracket[2]),
                                                method="bounded", options={"xatol": 1e-12})
    return float(result.x), float(result.fun)


def exceptional_set_scan(
    fam: BlockOperatorFamily,
    eta_range: tuple[float, float],
    resolution: int | None = None,
    config: DepthConfig | None = None,
) -> ScanResult:
    """Candidate ``eta`` where the projected fundamental solution loses rank.

    Every interior grid minimum is refined by golden-section search; the
    refined point is reported when its value falls below the threshold and
    it lies in ``[eta0, eta1]``. Refined points outside that interval are
    dropped with a warning.

    Raises:
        OutOfRange: the range starts at or below ``eta0``.
    """
    config = config or DepthConfig()
    resolution = resolution or config.resolution
    lo, hi = float(eta_range[0]), float(eta_range[1])
    eta0 = fam.end_norm()
    if lo <= eta0 or hi <= lo:
        raise OutOfRange(f"scan range [{lo}, {hi}] must lie above eta0 = {eta0}")
    eta1 = fam.sup_norm()
    etas = np.linspace(lo, hi, resolution)
    phis = fundamental_solutions(fam, etas, config)
    values = np.array([deficiency(fam, float(e), phi) for e, phi in zip(etas, phis)])
    points = [ScanPoint(float(e), float(v)) for e, v in zip(etas, values)]
    logger.info("Scanned %d values of eta in [%.4g, %.4g]; smallest singular value %.3g",
                resolution, lo, hi, float(values.min()))

    candidates: list[float] = []
    refined: list[float] = []
    spacing = etas[1] - etas[0]
    for i in range(1, resolution - 1):
        if not (values[i] < values[i - 1] and values[i] < values[i + 1]):
            continue
        eta, value = _refine(fam, (etas[i - 1], etas[i], etas[i + 1]), config)
        if value >= config.rank_threshold or not lo <= eta <= hi:
            continue
        if candidates and abs(eta - candidates[-1]) < spacing:
            continue
        if not eta0 <= eta <= eta1:
            logger.warning("dropping candidate eta=%.6g outside [%.6g, %.6g]", eta, eta0, eta1)
            continue
        candidates.append(eta)
        refined.append(value)
        points[int(round((eta - lo) / spacing))].candidate = True
        logger.debug("candidate eta=%.10g (singular value %.3g)", eta, value)
    return ScanResult(points, candidates, eta0, eta1, config.rank_threshold, refined)


# ---------------------------------------------------------------------------
# Constructed crossings
# ---------------------------------------------------------------------------


def _profiles(positions: np.ndarray, T: float, beta0: float, early: float,
              late: float) -> tuple[np.ndarray, np.ndarray]:
    bump = np.sin(np.pi * (positions + T) / (2 * T)) ** 2
    weight = 0.5 * (1 + np.sin(np.pi * positions / (2 * T)))
    return beta0 * bump, bump * (late * weight - early * (1 - weight))


def _crossing_family(positions: np.ndarray, T: float, beta0: float, early: float,
                     late: float) -> BlockOperatorFamily:
    beta, gamma = _profiles(positions, T, beta0, early, late)
    b1 = np.zeros((len(positions), 2, 2))
    b2 = np.zeros((len(positions), 2, 2))
    b1[:, 0, 0], b1[:, 1, 1] = beta, -beta
    b2[:, 0, 1] = b2[:, 1, 0] = gamma
    return BlockOperatorFamily(positions, b1, b2, T)


def _end_angle(fam: BlockOperatorFamily, eta: float) -> float:
    """Angle at ``T`` of the ``(x1, y2)`` component of the solution starting at ``x1 = 1``.

    On that plane the system reads ``a' = (eta - beta) a - gamma c`` and
    ``c' = -(eta - beta) c - gamma a`` whose angle obeys
    ``theta' = -(eta - beta) sin 2theta - gamma cos 2theta``.
    """

    def rhs(s: float, theta: np.ndarray) -> list[float]:
        beta = fam.B1(s)[0, 0]
        gamma = fam.B2(s)[0, 1]
        return [-(eta - beta) * math.sin(2 * theta[0]) - gamma * math.cos(2 * theta[0])]

    sol = scipy.integrate.solve_ivp(rhs, (-fam.T, fam.T), [0.0], method="DOP853",
                                    rtol=1e-12, atol=1e-12)
    return float(sol.y[0, -1])


def engineered_crossing_family(eta_star: float, T: float = 1.0, samples: int = 65) -> BlockOperatorFamily:
    """A family on ``V = R^2`` whose block ODE has a decaying solution at ``eta_star``.

    ``B`` vanishes at both ends, so the solution must rotate from the
    ``x1`` axis to the ``y2`` axis. ``B1 = diag(beta, -beta)`` reverses the
    drift in the middle and ``B2`` couples ``x1`` with ``y2``; the late
    coupling strength is tuned with Brent's method until the rotation ends
    exactly on the ``y2`` axis.
    """
    if eta_star <= 0:
        raise ValueError("eta_star must be positive")
    positions = np.linspace(-T, T, samples)
    beta0, early = eta_star + 3.0, 3.0

    def miss(late: float) -> float:
        return _end_angle(_crossing_family(positions, T, beta0, early, late), eta_star) - math.pi / 2

    low, high = 0.0, 0.5
    if miss(low) >= 0:
        raise ValueError(f"cannot build a crossing at eta={eta_star}: the rotation already overshoots")
    while miss(high) < 0:
        low, high = high, 2 * high
        if high > 1e3:
            raise ValueError(f"cannot build a crossing at eta={eta_star} with T={T}")
    late = scipy.optimize.brentq(miss, low, high, xtol=1e-14)
    logger.debug("crossing at eta=%s: late coupling %.12g", eta_star, late)
    return _crossing_family(positions, T, beta0, early, late)
