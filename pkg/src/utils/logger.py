"""Logging configuration for mopf."""

import logging
import sys
from typing import TextIO

from .config import config


def get_logger(
    name: str,
    level: int | None = None,
    stream: TextIO = sys.stderr,
) -> logging.Logger:
    """
    Get a configured logger instance.

    Args:
        name: Logger name (typically __name__)
        level: Logging level, defaults to the MOPF_LOG setting
        stream: Output stream for logs

    Returns:
        Configured logger instance
    """
    logger = logging.getLogger(name)

    if not logger.handlers:
        level = config.log_level if level is None else level
        logger.setLevel(level)

        handler = logging.StreamHandler(stream)
        handler.setLevel(logging.DEBUG)

        formatter = logging.Formatter(
            fmt="%(asctime)s | %(levelname)-8s | %(name)s | %(message)s",
            datefmt="%Y-%m-%d %H:%M:%S",
        )
        handler.setFormatter(formatter)

        logger.addHandler(handler)

    return logger


def _set_package_level(level: int) -> None:
    for name, logger in logging.root.manager.loggerDict.items():
        if name.startswith("src.") and isinstance(logger, logging.Logger):
            logger.setLevel(level)
    logging.getLogger("src").setLevel(level)


def configure_debug_logging() -> None:
    """Enable debug logging for all mopf modules."""
    _set_package_level(logging.DEBUG)


def configure_quiet_logging() -> None:
    """Disable most logging output."""
    _set_package_level(logging.ERROR)
