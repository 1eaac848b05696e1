"""Configuration management for mopf."""

import logging
import os
from dataclasses import dataclass, field
from pathlib import Path

from dotenv import load_dotenv

LOG_LEVELS = {
    "debug": logging.DEBUG,
    "info": logging.INFO,
    "warning": logging.WARNING,
    "error": logging.ERROR,
}


@dataclass(frozen=True)
class Tolerances:
    """Numerical tolerances shared by every solve."""

    feasibility: float = 1e-8
    stationarity: float = 1e-8
    activity: float = 1e-8
    psd: float = 1e-9


@dataclass
class Config:
    """Application configuration loaded from environment variables."""

    log_level: int = logging.WARNING
    threads: int = 1
    output_dir: Path = field(default_factory=lambda: Path("runs"))
    tolerances: Tolerances = field(default_factory=Tolerances)

    def __post_init__(self) -> None:
        """Load configuration from environment variables."""
        load_dotenv(override=False)

        level = os.getenv("MOPF_LOG")
        if level:
            self.log_level = LOG_LEVELS.get(level.strip().lower(), self.log_level)

        threads = os.getenv("MOPF_THREADS")
        if threads:
            self.threads = max(1, int(threads))

        output_dir = os.getenv("MOPF_OUTPUT_DIR")
        if output_dir:
            self.output_dir = Path(output_dir)

        self.tolerances = Tolerances(
            feasibility=float(os.getenv("MOPF_FEAS_TOL", self.tolerances.feasibility)),
            stationarity=float(os.getenv("MOPF_STAT_TOL", self.tolerances.stationarity)),
            activity=float(os.getenv("MOPF_ACT_TOL", self.tolerances.activity)),
            psd=self.tolerances.psd,
        )

    def ensure_output_dir(self) -> Path:
        """Create the output directory if it doesn't exist."""
        self.output_dir.mkdir(parents=True, exist_ok=True)
        return self.output_dir


# Global configuration instance
config = Config()
