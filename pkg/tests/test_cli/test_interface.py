"""Tests for the rich output layer."""

import io

from rich.console import Console

from src.cli.interface import CLIInterface
from src.cli.themes import Theme


def render(theme: Theme) -> tuple[CLIInterface, io.StringIO]:
    buffer = io.StringIO()
    console = Console(file=buffer, force_terminal=True, color_system="truecolor", width=200)
    return CLIInterface(theme=theme, console=console), buffer


class TestSummaryTable:
    """Theme colors in the summary table."""

    def test_numbers_use_the_number_color(self):
        cli, buffer = render(Theme(number_color="#123456"))
        cli.print_summary({"centralized": {"final_obj": 1600.0, "iterations": 0}})
        assert "38;2;18;52;86" in buffer.getvalue()

    def test_plain_rendering_keeps_the_values(self):
        buffer = io.StringIO()
        cli = CLIInterface(console=Console(file=buffer, width=200))
        cli.print_summary({"admm": {"final_obj": 2.5, "iterations": 7, "certified": True}})
        text = buffer.getvalue()
        assert "admm" in text
        assert "2.5" in text
        assert "7" in text
