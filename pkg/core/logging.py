"""Centralized logging configuration for the solver and its scripts."""

import logging
import sys
from logging.handlers import RotatingFileHandler, TimedRotatingFileHandler
from pathlib import Path
from typing import Optional, Union

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'


def _resolve_level(level: Union[int, str]) -> int:
    if isinstance(level, int):
        return level
    resolved = logging.getLevelName(str(level).upper())
    if not isinstance(resolved, int):
        raise ValueError(f"Unknown log level: {level}")
    return resolved


def setup_logging(
    log_file: Optional[str] = 'logs/nodalrect.log',
    level: Union[int, str] = logging.INFO,
    max_bytes: int = 10 * 1024 * 1024,  # 10 MB default
    backup_count: int = 5,
    use_timed_rotation: bool = False,
    when: str = 'midnight',  # For timed rotation: 'D', 'W0', 'H', 'midnight'
    interval: int = 1,
    console: bool = True,
) -> logging.Logger:
    """
    Configure application-wide logging with automatic log rotation.

    Worker processes of a sweep call this again with ``console=False`` so that
    only the parent writes progress to the terminal.

    Args:
        log_file: Path to the log file, or None to skip the file handler
        level: Logging level, as int or name
        max_bytes: Maximum size in bytes before rotation. Ignored if use_timed_rotation=True
        backup_count: Number of backup files to keep
        use_timed_rotation: If True, use time-based rotation instead of size-based
        when: Rotation unit for timed rotation
        interval: Interval between rotations for timed rotation
        console: Attach a stderr handler

    Returns:
        Logger for this module
    """
    root_logger = logging.getLogger()
    root_logger.handlers.clear()
    formatter = logging.Formatter(LOG_FORMAT)

    if log_file:
        log_path = Path(log_file)
        log_path.parent.mkdir(parents=True, exist_ok=True)
        if use_timed_rotation:
            file_handler = TimedRotatingFileHandler(
                log_path,
                when=when,
                interval=interval,
                backupCount=backup_count,
                encoding='utf-8',
            )
            file_handler.suffix = '%Y-%m-%d' if when in ('midnight', 'D') else '%Y-%m-%d_%H-%M-%S'
        else:
            file_handler = RotatingFileHandler(
                log_path,
                maxBytes=max_bytes,
                backupCount=backup_count,
                encoding='utf-8',
            )
        file_handler.setFormatter(formatter)
        root_logger.addHandler(file_handler)

    if console:
        # stdout is reserved for machine-readable output of the CLI
        console_handler = logging.StreamHandler(sys.stderr)
        console_handler.setFormatter(formatter)
        root_logger.addHandler(console_handler)

    root_logger.setLevel(_resolve_level(level))
    return logging.getLogger(__name__)


def setup_from_config(console: bool = True) -> logging.Logger:
    """Configure logging from the environment settings in core.config."""
    from core import config

    return setup_logging(
        log_file=config.LOG_FILE,
        level=config.LOG_LEVEL,
        max_bytes=config.LOG_MAX_BYTES,
        backup_count=config.LOG_BACKUP_COUNT,
        use_timed_rotation=config.LOG_ROTATION_MODE.lower() == 'time',
        when=config.LOG_ROTATION_WHEN,
        interval=config.LOG_ROTATION_INTERVAL,
        console=console,
    )
