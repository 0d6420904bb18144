"""Fourier-mode block systems from Hessian samples along a trajectory.

The ``k``-th Fourier mode of a linearised operator with Hessian ``H(s)`` on
``R^2n`` becomes the block ODE with ``B1 = H^(1,0)`` (complex-linear part)
and ``B2 = H^(0,1)`` (complex-antilinear part) at spectral parameter
``eta = 2 pi k / lambda``.
"""

from __future__ import annotations

import logging
import math

import numpy as np

from bdepth.core.config import DepthConfig
from bdepth.core.errors import OutOfRange
from bdepth.lab.flow import BlockOperatorFamily
from bdepth.lab.scan import ScanResult, exceptional_set_scan
from bdepth.lab.spectral import check_symmetric

logger = logging.getLogger(__name__)


def standard_complex_structure(n: int) -> np.ndarray:
    """``J0 = [[0, -I], [I, 0]]`` on ``R^2n``."""
    zero, one = np.zeros((n, n)), np.eye(n)
    return np.block([[zero, -one], [one, zero]])


def _check_complex_structure(j: np.ndarray) -> np.ndarray:
    j = np.asarray(j, dtype=float)
    size = j.shape[0]
    if j.shape != (size, size) or size % 2:
        raise ValueError(f"complex structure must be square of even size, got {j.shape}")
    identity = np.eye(size)
    if not np.allclose(j @ j, -identity, atol=1e-12) or not np.allclose(j.T @ j, identity, atol=1e-12):
        raise ValueError("J must be orthogonal with J^2 = -I")
    return j


def split_hessian(h: np.ndarray, j: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """``(H^(1,0), H^(0,1)) = ((H - JHJ) / 2, (H + JHJ) / 2)``."""
    jhj = j @ h @ j
    return 0.5 * (h - jhj), 0.5 * (h + jhj)


def spectral_parameter(k: int, lam: float) -> float:
    if k < 1:
        raise ValueError(f"Fourier index must be a positive integer, got {k}")
    if not 0 < lam <= 1:
        raise OutOfRange(f"lambda must lie in (0, 1], got {lam}")
    return 2 * math.pi * k / lam


def fourier_block_system(
    positions: np.ndarray,
    hessians: np.ndarray,
    T: float,
    k: int,
    lam: float,
    j: np.ndarray | None = None,
) -> tuple[BlockOperatorFamily, float]:
    """Block family of the ``k``-th mode and its spectral parameter ``2 pi k / lambda``.

    Raises:
        NotSymmetric: a Hessian sample is not symmetric.
        OutOfRange: ``lambda`` is outside ``(0, 1]``.
    """
    eta = spectral_parameter(k, lam)
    return _block_family(positions, hessians, T, j), eta


def _block_family(positions: np.ndarray, hessians: np.ndarray, T: float,
                  j: np.ndarray | None) -> BlockOperatorFamily:
    hessians = np.asarray(hessians, dtype=float)
    size = hessians.shape[-1]
    j = standard_complex_structure(size // 2) if j is None else _check_complex_structure(j)
    if j.shape[0] != size:
        raise ValueError(f"complex structure of size {j.shape[0]} for Hessians of size {size}")
    linear, antilinear = [], []
    for s, h in zip(positions, hessians):
        h10, h01 = split_hessian(check_symmetric(h, name=f"Hessian at s={s}"), j)
        linear.append(h10)
        antilinear.append(h01)
    return BlockOperatorFamily(positions, np.stack(linear), np.stack(antilinear), T)


def lambda_candidates(
    positions: np.ndarray,
    hessians: np.ndarray,
    T: float,
    k: int,
    lambda_range: tuple[float, float] = (0.5, 1.0),
    config: DepthConfig | None = None,
    j: np.ndarray | None = None,
) -> tuple[list[float], ScanResult]:
    """Values of ``lambda`` in the range where the ``k``-th mode has a kernel element.

    The family does not depend on ``lambda``, so one eta scan over
    ``[2 pi k / lambda_max, 2 pi k / lambda_min]`` covers the range.
    """
    lam_lo, lam_hi = lambda_range
    eta_lo, eta_hi = spectral_parameter(k, lam_hi), spectral_parameter(k, lam_lo)
    fam = _block_family(positions, hessians, T, j)
    result = exceptional_set_scan(fam, (eta_lo, eta_hi), config=config)
    lambdas = sorted(2 * math.pi * k / eta for eta in result.candidates)
    logger.info("mode k=%d: %d lambda candidates in [%s, %s]", k, len(lambdas), lam_lo, lam_hi)
    return lambdas, result
