"""Rich console output for the mopf commands."""

import math
from typing import Any

from rich.console import Console
from rich.progress import Progress, SpinnerColumn, TextColumn
from rich.table import Table
from rich.text import Text

from ..grid.case import NetworkCase
from ..methods.base import MethodResult
from ..parametric.penalty import BigMReport
from .themes import Theme, default_theme


def _number(value: Any, digits: int = 6) -> str:
    if value is None:
        return "-"
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float) and math.isnan(value):
        return "nan"
    return f"{value:.{digits}g}"


class CLIInterface:
    """Rich-based output for the experiment commands."""

    def __init__(self, theme: Theme | None = None, console: Console | None = None) -> None:
        """
        Initialize the CLI interface.

        Args:
            theme: Color theme to use
            console: Console to print to, stdout by default
        """
        self.console = console or Console()
        self.theme = theme or default_theme

    def print_message(self, kind: str, content: str) -> None:
        """
        Print a status line.

        Args:
            kind: info, success or warning
            content: Message text
        """
        color = {
            "info": self.theme.info_color,
            "success": self.theme.success_color,
            "warning": self.theme.warning_color,
        }.get(kind, self.theme.muted_color)
        self.console.print(Text(content, style=color))

    def print_error(self, message: str) -> None:
        """Print an error message."""
        self.console.print(Text(f"Error: {message}", style=self.theme.error_color))

    def print_case(self, case: NetworkCase) -> None:
        ties = sum(1 for branch in case.branches if branch.tie)
        self.console.print(
            Text(f"{case.name}: ", style=f"bold {self.theme.info_color}"),
            Text(
                f"{len(case.buses)} buses, {len(case.areas)} areas, "
                f"{len(case.branches)} branches ({ties} ties), "
                f"{len(case.generators)} generators",
                style=self.theme.muted_color,
            ),
        )

    def print_method_result(self, result: MethodResult) -> None:
        """One line per finished method."""
        if result.certified:
            style, icon = self.theme.success_color, "✓"
        else:
            style, icon = self.theme.warning_color, "!"
        self.console.print(
            Text(f"  {icon} {result.method}: ", style=f"bold {style}"),
            Text(
                f"objective {_number(result.objective, 10)}, "
                f"{result.trace.iterations} iterations, {result.message}",
                style=self.theme.muted_color,
            ),
        )

    def print_summary(self, summary: dict[str, dict[str, Any]], title: str = "Summary") -> None:
        """Table of the run summary, one row per method."""
        table = Table(title=title, title_style=self.theme.header_color)
        table.add_column("Method", style=self.theme.method_color)
        table.add_column("Objective", justify="right", style=self.theme.number_color)
        table.add_column("Rel. gap", justify="right", style=self.theme.number_color)
        table.add_column("Iter. to gap", justify="right", style=self.theme.number_color)
        table.add_column("Iterations", justify="right", style=self.theme.number_color)
        table.add_column("Rotations", justify="right", style=self.theme.number_color)
        table.add_column("First feasible", justify="right", style=self.theme.number_color)
        table.add_column("Certified")
        table.add_column("Termination", style=self.theme.muted_color)

        for method, entry in summary.items():
            to_gap = next(
                (value for key, value in entry.items() if key.startswith("iterations_to_")), None
            )
            certified = entry.get("certified")
            table.add_row(
                method,
                _number(entry.get("final_obj"), 10),
                _number(entry.get("rel_gap_vs_centralized"), 3),
                _number(to_gap),
                _number(entry.get("iterations")),
                _number(entry.get("rotations")),
                _number(entry.get("first_feasible_iteration")),
                Text(
                    _number(certified),
                    style=self.theme.success_color if certified else self.theme.error_color,
                ),
                str(entry.get("termination", "")),
            )
        self.console.print(table)

    def print_regions(self, report: dict[str, Any]) -> None:
        table = Table(
            title=f"{report['count']} critical regions of {report['case']}",
            title_style=self.theme.header_color,
        )
        table.add_column("#", justify="right")
        table.add_column("Center")
        table.add_column("Radius", justify="right", style=self.theme.number_color)
        table.add_column("Value at center", justify="right", style=self.theme.number_color)
        table.add_column("Degenerate")
        for k, region in enumerate(report["regions"]):
            table.add_row(
                str(k),
                ", ".join(f"{value:.4g}" for value in region["center"]),
                _number(region["radius"], 4),
                _number(region["center_value"], 8),
                _number(region["degenerate"]),
            )
        self.console.print(table)

    def print_penalty_reports(self, reports: list[BigMReport]) -> None:
        table = Table(title="Big-M equivalence", title_style=self.theme.header_color)
        table.add_column("Area", justify="right")
        table.add_column("M", justify="right", style=self.theme.number_color)
        table.add_column("Feasible θ")
        table.add_column("Equivalent")
        table.add_column("Max slack", justify="right", style=self.theme.number_color)
        table.add_column("Objective gap", justify="right", style=self.theme.number_color)
        table.add_column("Max multiplier", justify="right", style=self.theme.number_color)
        table.add_column("Note", style=self.theme.muted_color)
        for area, report in enumerate(reports):
            equivalent = Text(
                _number(report.equivalent),
                style=self.theme.success_color if report.equivalent else self.theme.error_color,
            )
            table.add_row(
                str(area),
                _number(report.big_m, 4),
                _number(report.feasible_theta),
                equivalent,
                _number(report.max_slack, 3),
                _number(report.objective_gap, 3),
                _number(report.max_multiplier, 4),
                "M too small" if report.m_too_small else report.message,
            )
        self.console.print(table)

    def create_spinner(self, message: str = "Running...") -> Progress:
        """
        Create a spinner for long operations.

        Args:
            message: Message to display with spinner

        Returns:
            Progress context manager
        """
        return Progress(
            SpinnerColumn(self.theme.spinner_style),
            TextColumn(f"[{self.theme.muted_color}]{message}"),
            console=self.console,
            transient=True,
        )
