"""Numerical lab for the asymptotic operator: flows, scans and Fourier modes."""

from bdepth.lab.flow import BlockOperatorFamily, flow_audit
from bdepth.lab.fourier import fourier_block_system, lambda_candidates
from bdepth.lab.scan import ScanResult, exceptional_set_scan
from bdepth.lab.spectral import projection_audit

__all__ = [
    "BlockOperatorFamily",
    "ScanResult",
    "exceptional_set_scan",
    "flow_audit",
    "fourier_block_system",
    "lambda_candidates",
    "projection_audit",
]
