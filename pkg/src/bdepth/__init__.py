"""bdepth - Exact boundary depth of filtered chain complexes over Novikov fields."""

__version__ = "0.3.0"

from bdepth.core.config import DepthConfig
from bdepth.core.errors import BdepthError
from bdepth.core.novikov import ExponentGroup, NovikovElement

__all__ = [
    "BdepthError",
    "DepthConfig",
    "ExponentGroup",
    "NovikovElement",
]
