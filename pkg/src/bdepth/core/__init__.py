"""Core types for bdepth: Novikov coefficients, configuration and errors."""

from bdepth.core.config import DepthConfig, SuiteSizes
from bdepth.core.errors import BdepthError, InvariantViolation, ParseError
from bdepth.core.novikov import INF, ExponentGroup, NovikovElement, as_fraction, format_ext, parse_ext

__all__ = [
    "BdepthError",
    "DepthConfig",
    "ExponentGroup",
    "INF",
    "InvariantViolation",
    "NovikovElement",
    "ParseError",
    "SuiteSizes",
    "as_fraction",
    "format_ext",
    "parse_ext",
]
