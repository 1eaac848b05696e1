"""Color themes and styling for the CLI output."""

from dataclasses import dataclass


@dataclass
class Theme:
    """Color theme for the CLI output."""

    # Message colors
    info_color: str = "cyan"
    success_color: str = "green"
    warning_color: str = "yellow"
    error_color: str = "red"

    # Tables
    method_color: str = "magenta"
    number_color: str = "white"
    header_color: str = "bold blue"
    muted_color: str = "dim"

    # Spinner
    spinner_style: str = "dots"


# Default theme
default_theme = Theme()

# Plain output for terminals without color
minimal_theme = Theme(
    info_color="white",
    success_color="white",
    warning_color="bold white",
    error_color="red",
    method_color="white",
    header_color="bold white",
)
