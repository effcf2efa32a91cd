"""Structured logging for Sweepcore components."""

import logging
import os
import sys
from datetime import datetime, timezone

try:
    from pythonjsonlogger.json import JsonFormatter
except ImportError:  # python-json-logger < 3
    from pythonjsonlogger.jsonlogger import JsonFormatter

LEVELS = {
    "off": logging.CRITICAL + 1,
    "info": logging.INFO,
    "debug": logging.DEBUG,
}

# Extra record attributes copied into JSON output when present
EXTRA_KEYS = ("step", "n", "h", "iterations", "residual", "duration_ms", "violations")


class SweepJSONFormatter(JsonFormatter):
    """Format log records as flat JSON documents."""

    def add_fields(self, log_record, record, message_dict):
        super().add_fields(log_record, record, message_dict)
        log_record["timestamp"] = datetime.now(timezone.utc).isoformat()
        log_record["level"] = record.levelname
        log_record["component"] = getattr(record, "component", record.name)
        for key in EXTRA_KEYS:
            if hasattr(record, key):
                log_record[key] = getattr(record, key)


def level_from_env(default: str = "info") -> int:
    """Resolve the SWEEP_LOG verbosity (off|info|debug)."""
    name = os.environ.get("SWEEP_LOG", default).strip().lower()
    return LEVELS.get(name, LEVELS[default])


def setup_logging(component: str, level: int | None = None, json_output: bool | None = None) -> logging.Logger:
    """Set up logging for a component.

    Args:
        component: Name of the component (e.g., "stepper", "polyproj")
        level: Logging level. Defaults to SWEEP_LOG, WARNING when unset.
        json_output: If True, use JSON format. Defaults to SWEEP_LOG_JSON=1.

    Returns:
        Configured logger
    """
    logger = logging.getLogger(f"sweepcore.{component}")
    if level is None:
        level = level_from_env() if "SWEEP_LOG" in os.environ else logging.WARNING
    if json_output is None:
        json_output = os.environ.get("SWEEP_LOG_JSON", "0") == "1"
    logger.setLevel(level)

    if not logger.handlers:
        handler = logging.StreamHandler(sys.stderr)
        handler.setLevel(logging.DEBUG)

        if json_output:
            handler.setFormatter(SweepJSONFormatter("%(message)s"))
        else:
            handler.setFormatter(logging.Formatter(
                f"%(asctime)s [{component}] %(levelname)s - %(message)s",
                datefmt="%Y-%m-%d %H:%M:%S"
            ))

        logger.addHandler(handler)
        logger.propagate = False

    return logger


def set_level(level: int) -> None:
    """Apply a level to every sweepcore logger created so far."""
    for name, logger in logging.Logger.manager.loggerDict.items():
        if name.startswith("sweepcore.") and isinstance(logger, logging.Logger):
            logger.setLevel(level)
