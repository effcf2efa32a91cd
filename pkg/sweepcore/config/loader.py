"""
Configuration loader with TOML file parsing and environment variable overrides.
"""
import dataclasses
import logging
import os
from pathlib import Path
from typing import Any, Dict, Optional

# Try Python 3.11+ tomllib first, fallback to tomli for older versions
try:
    import tomllib
except ModuleNotFoundError:
    try:
        import tomli as tomllib
    except ImportError:
        raise ImportError(
            "Neither tomllib (Python 3.11+) nor tomli package found. "
            "Install tomli: pip install tomli"
        )

from .models import SweepConfig

logger = logging.getLogger(__name__)

_config: Optional[SweepConfig] = None

CONFIG_PATHS = [
    Path("config") / "sweep.toml",
    Path.home() / ".config" / "sweepcore" / "sweep.toml",
]

_BOOL_TRUE = {"1", "true", "yes", "on"}


def _load_toml(path: Path) -> Dict[str, Any]:
    """Load TOML file and return parsed dict."""
    with open(path, "rb") as f:
        return tomllib.load(f)


def _coerce(current: Any, raw: str) -> Any:
    """Convert an env string to the type of the field it overrides."""
    if isinstance(current, bool):
        return raw.strip().lower() in _BOOL_TRUE
    if isinstance(current, int):
        return int(raw)
    if isinstance(current, float):
        return float(raw)
    if isinstance(current, list):
        return [float(v) for v in raw.split(",") if v.strip()]
    return raw


def _apply_env_overrides(config: SweepConfig) -> SweepConfig:
    """
    Override config with environment variables.
    Format: SWEEP_SECTION_KEY
    Example: SWEEP_TOLERANCE_PROJ_TOL overrides config.tolerance.proj_tol
    """
    for section in dataclasses.fields(config):
        section_obj = getattr(config, section.name)
        for item in dataclasses.fields(section_obj):
            env_var = f"SWEEP_{section.name}_{item.name}".upper()
            value = os.environ.get(env_var)
            if value is None:
                continue
            try:
                setattr(section_obj, item.name, _coerce(getattr(section_obj, item.name), value))
                logger.debug(f"Config override from env: {env_var}")
            except (ValueError, TypeError) as e:
                logger.warning(f"Failed to apply env override {env_var}={value}: {e}")

    return config


def _toml_to_config(data: Dict[str, Any]) -> SweepConfig:
    """Convert TOML dict to SweepConfig dataclass."""
    config = SweepConfig()

    for section in dataclasses.fields(config):
        if section.name not in data:
            continue
        section_obj = getattr(config, section.name)
        for k, v in data[section.name].items():
            if hasattr(section_obj, k):
                setattr(section_obj, k, v)
            else:
                logger.warning(f"Ignoring unknown setting [{section.name}] {k}")

    return config


def load_config(config_path: Optional[Path] = None) -> SweepConfig:
    """
    Load configuration from TOML file with environment variable overrides.

    Args:
        config_path: Optional explicit path to config file. If None, uses $SWEEP_CONFIG
            and then searches default paths.

    Returns:
        SweepConfig instance with loaded configuration.
    """
    global _config

    if config_path:
        paths = [Path(config_path)]
    elif os.environ.get("SWEEP_CONFIG"):
        paths = [Path(os.environ["SWEEP_CONFIG"])]
    else:
        paths = CONFIG_PATHS

    data = {}
    for path in paths:
        if path.exists():
            try:
                data = _load_toml(path)
                logger.info(f"Loaded settings from {path}")
                break
            except Exception as e:
                logger.error(f"Failed to load settings from {path}: {e}")
                continue
    else:
        logger.debug("No settings file found, using defaults")

    config = _toml_to_config(data)
    config = _apply_env_overrides(config)
    _config = config
    return config


def get_config() -> SweepConfig:
    """
    Get cached config or load if not yet loaded.

    Returns:
        SweepConfig instance.
    """
    global _config
    if _config is None:
        _config = load_config()
    return _config


def reset_config() -> None:
    """Drop the cached config so the next get_config() reloads it."""
    global _config
    _config = None
