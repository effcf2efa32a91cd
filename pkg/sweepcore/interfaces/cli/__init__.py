"""Command-line front end: run configs, solves, convergence studies and checks."""

from .app import cmd_check, cmd_convergence, cmd_solve, main, resolve_problem
from .builtins import BUILTINS, Builtin
from .config import CrowdSpec, ParamsSpec, RunConfig, load_run_config, parse_run_config
from .convergence import ConvergenceReport, fit_slope, run_convergence, step_count

__all__ = [
    "main",
    "cmd_solve",
    "cmd_convergence",
    "cmd_check",
    "resolve_problem",
    "BUILTINS",
    "Builtin",
    "RunConfig",
    "CrowdSpec",
    "ParamsSpec",
    "load_run_config",
    "parse_run_config",
    "ConvergenceReport",
    "fit_slope",
    "run_convergence",
    "step_count",
]
