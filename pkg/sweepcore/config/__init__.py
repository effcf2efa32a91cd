"""
Sweepcore numerical settings.

Provides centralized settings loading from TOML files with environment variable overrides.

Usage:
    from sweepcore.config import get_config

    config = get_config()
    proj_tol = config.tolerance.proj_tol
    h_min = config.convergence.h_min
"""
from .loader import load_config, get_config, reset_config
from .models import SweepConfig

__all__ = ["load_config", "get_config", "reset_config", "SweepConfig"]
