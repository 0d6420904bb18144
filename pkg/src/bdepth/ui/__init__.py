"""Rich terminal UI components for bdepth."""

from bdepth.ui.console import DepthConsole

__all__ = ["DepthConsole"]
