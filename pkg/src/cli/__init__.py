"""CLI interface modules."""

from .commands import CommandHandler, CommandType, ExitCode, build_parser
from .experiment import ExperimentConfig, load_experiment, load_stitch_spec
from .interface import CLIInterface
from .store import TraceStore, summary_from_traces
from .themes import Theme, default_theme, minimal_theme

__all__ = [
    "CLIInterface",
    "CommandHandler",
    "CommandType",
    "ExitCode",
    "build_parser",
    "ExperimentConfig",
    "load_experiment",
    "load_stitch_spec",
    "TraceStore",
    "summary_from_traces",
    "Theme",
    "default_theme",
    "minimal_theme",
]
