"""Minimal console interface for bdepth."""

from __future__ import annotations

from pathlib import Path

from rich.console import Console
from rich.table import Table
from rich.text import Text

from bdepth import __version__
from bdepth.audit.report import InvariantReport
from bdepth.ui.theme import ALTERNATIVE_LABELS, DEPTH_THEME, STATUS_ICONS


class DepthConsole:
    """Minimal terminal interface for bdepth commands."""

    def __init__(self, verbose: bool = False, quiet: bool = False, console: Console | None = None):
        self.console = console or Console(theme=DEPTH_THEME)
        self.verbose = verbose
        self.quiet = quiet

    def print_header(self, command: str) -> None:
        if self.quiet:
            return
        self.console.print()
        self.console.print(f"[dim]bdepth v{__version__}[/dim] [header]{command}[/header]")
        self.console.print()

    def print_value(self, name: str, value: object) -> None:
        """Print one named result."""
        if self.quiet:
            return
        self.console.print(f"    {name}: [highlight]{value}[/highlight]")

    def print_metric(self, name: str, value: object, status: str = "info") -> None:
        """Print an audit metric result."""
        if self.quiet:
            return
        icon = STATUS_ICONS.get(status, ".")
        line = Text("    ")
        line.append(f"[{icon}] ", style=status)
        line.append(f"{name}: ")
        line.append(str(value), style=status)
        self.console.print(line)

    def print_report(self, report: InvariantReport) -> None:
        """Every metric of a report, failing ones marked."""
        if self.quiet:
            return
        self.console.print(f"  [header]{report.check}[/header]")
        for m in report.metrics:
            if m.passed:
                status = "success" if m.threshold is not None else "info"
            else:
                status = "error" if m.severity == "error" else "warning"
            self.print_metric(m.name, m.value, status)

    def print_alternative(self, label: str, alternative: str) -> None:
        if self.quiet:
            return
        name = ALTERNATIVE_LABELS.get(alternative, alternative)
        self.console.print(f"    grading {label}: [alt.{alternative}]({alternative}) {name}[/alt.{alternative}]")

    def print_table(self, table: Table) -> None:
        if not self.quiet:
            self.console.print(table)

    def print_output(self, path: Path) -> None:
        if self.quiet:
            return
        self.console.print()
        self.console.print(f"[dim]->[/dim] {path}")
        self.console.print()

    def print_error(self, message: str) -> None:
        """Print an error message (even when quiet)."""
        self.console.print(f"[error][x] {message}[/error]")

    def print_warning(self, message: str) -> None:
        if not self.quiet:
            self.console.print(f"[warning][!] {message}[/warning]")

    def print_info(self, message: str) -> None:
        if self.verbose and not self.quiet:
            self.console.print(f"[dim]    {message}[/dim]")

    def rule(self) -> None:
        """Print a subtle divider."""
        if not self.quiet:
            self.console.print("[dim]---[/dim]")
