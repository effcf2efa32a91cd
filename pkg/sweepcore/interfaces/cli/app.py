#!/usr/bin/env python3
"""
Sweepcore command-line interface.

Subcommands:
- solve: run the scheme for every step count, write trajectory CSVs and a run summary
- convergence: reference run at h_min, error e_h for every h, log-log slope fit
- check: sampled verification of the assumption constants, written as JSON

Exit codes: 0 success, 2 configuration error, 3 solver error.
"""

import argparse
import sys
from dataclasses import asdict
from pathlib import Path
from typing import List, Optional, Tuple

from colorama import Fore, Style, init

from sweepcore import __version__
from sweepcore.common.exceptions import ConfigError, InvalidProblem, StepFailure, SweepError
from sweepcore.common.logging import level_from_env, set_level, setup_logging
from sweepcore.config import get_config, load_config
from sweepcore.core.model import SweepingProblem
from sweepcore.crowd import CrowdScenario, build, prune_radius, scenario_params
from sweepcore.diagnostics import default_params, run_diagnostics
from sweepcore.stepper import exact_error, solve, trajectory_summary
from .builtins import BUILTINS
from .config import RunConfig, load_run_config
from .convergence import run_convergence
from .output import TrajectoryWriter, trajectory_filename, write_convergence_csv, write_json

logger = setup_logging("cli")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3

DEFAULT_CROWD_HORIZON = 4.0


def resolve_problem(run: RunConfig) -> Tuple[SweepingProblem, Optional[CrowdScenario]]:
    """Build the sweeping problem named by the run config."""
    name = run.builtin_name
    if name is not None:
        return BUILTINS[name].build(run.horizon), None
    scenario = run.scenario.to_scenario(run.seed)
    horizon = DEFAULT_CROWD_HORIZON if run.horizon is None else run.horizon
    return build(scenario, horizon), scenario


def _pruning(scenario: Optional[CrowdScenario]):
    if scenario is None or not get_config().crowd.prune_pairs:
        return None
    return lambda h: prune_radius(scenario, h)


def cmd_solve(run: RunConfig, out_dir: Path) -> List[dict]:
    """Solve for every configured step count; returns the run summaries."""
    problem, scenario = resolve_problem(run)
    prune = _pruning(scenario)
    exact = BUILTINS[run.builtin_name].exact if run.builtin_name else None
    steps = run.step_list
    summaries = []
    for n in steps:
        path = out_dir / trajectory_filename(n, len(steps) > 1)
        with TrajectoryWriter(path, problem.dimension) as writer:
            traj = solve(problem, n, prune_radius=None if prune is None else prune(problem.horizon / n),
                         on_step=writer)
        summary = trajectory_summary(traj)
        summary.update(scenario=problem.name, constraints=problem.size, seed=run.seed, trajectory=path.name)
        if exact is not None:
            summary["exact_error"] = exact_error(traj, exact)
        write_json(out_dir / trajectory_filename(n, len(steps) > 1, "json", stem="summary"), summary)
        summaries.append(summary)
        print(f"{Fore.GREEN}solved{Style.RESET_ALL} n={n} -> {path} "
              f"(margin {summary['feasibility_margin']:.3e}, K {summary['velocity_bound']:.4g})")
    return summaries


def cmd_convergence(run: RunConfig, out_dir: Path, threads: int = 1):
    """Convergence study over h_list against the h_min reference."""
    cfg = get_config().convergence
    problem, scenario = resolve_problem(run)
    h_min = cfg.h_min if run.h_min is None else run.h_min
    h_values = list(cfg.h_list if run.h_list is None else run.h_list)
    report = run_convergence(problem, h_values, h_min, threads=threads, prune=_pruning(scenario),
                             progress=sys.stderr.isatty())

    write_convergence_csv(out_dir / "convergence.csv", report.h_values, report.errors, report.included)
    document = report.to_dict()
    document.update(scenario=problem.name, horizon=problem.horizon, seed=run.seed)
    write_json(out_dir / "convergence.json", document)

    slope = report.slope if isinstance(report.slope, str) or report.slope is None else f"{report.slope:.4f}"
    print(f"{Fore.GREEN}convergence{Style.RESET_ALL} slope {slope} over {report.included_count} points "
          f"-> {out_dir / 'convergence.csv'}")
    return report


def cmd_check(run: RunConfig, out_dir: Path) -> dict:
    """Sampled verification of the assumption constants."""
    problem, scenario = resolve_problem(run)
    radius = None
    if run.params is not None:
        params, source = run.params.to_params(), "config"
    elif scenario is not None:
        params, source = scenario_params(scenario, problem), "scenario"
        radius = 0.5 * scenario.radius
    else:
        params, source = default_params(problem), "default"

    report = run_diagnostics(problem, params, seed=run.seed, radius=radius)
    document = report.to_dict()
    document.update({f"param_{k}": v for k, v in asdict(params).items()})
    document.update(params_source=source, scenario=problem.name)
    write_json(out_dir / "diagnostics.json", document)

    violations = report.quadratic_bound_violations + report.qualification_violations
    color = Fore.GREEN if violations == 0 and not report.degenerate_gradients else Fore.YELLOW
    print(f"{color}check{Style.RESET_ALL} eta={report.eta:.4g} theta={report.theta:.4g} r={report.r_qual:.4g} "
          f"violations={violations} -> {out_dir / 'diagnostics.json'}")
    return document


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sweepcore",
        description="Prediction-correction solver for perturbed sweeping processes",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("solve", "Run the scheme and write trajectory CSVs"),
        ("convergence", "Estimate the convergence order against a fine reference"),
        ("check", "Verify the assumption constants by sampling"),
    ):
        sub = commands.add_parser(name, help=help_text)
        sub.add_argument("--config", type=Path, required=True, help="JSON run configuration")
        sub.add_argument("--out", type=Path, default=None, help="Output directory (overrides output_dir)")
        sub.add_argument("--seed", type=int, default=None, help="Seed (overrides the config seed)")
        sub.add_argument("--threads", type=int, default=1, help="Worker threads for convergence studies")
        sub.add_argument("--settings", type=Path, default=None, help="TOML numerical settings")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    init(autoreset=True)
    args = build_parser().parse_args(argv)
    set_level(level_from_env("info"))

    try:
        if args.settings is not None:
            load_config(args.settings)
        run = load_run_config(args.config)
        if args.seed is not None:
            run = run.model_copy(update={"seed": args.seed})
        if args.threads < 1:
            raise ConfigError(f"--threads must be >= 1, got {args.threads}")
        out_dir = args.out if args.out is not None else Path(run.output_dir)
        out_dir.mkdir(parents=True, exist_ok=True)

        if args.command == "solve":
            cmd_solve(run, out_dir)
        elif args.command == "convergence":
            cmd_convergence(run, out_dir, threads=args.threads)
        else:
            cmd_check(run, out_dir)
    except (ConfigError, InvalidProblem) as e:
        print(f"{Fore.RED}config error:{Style.RESET_ALL} {e}", file=sys.stderr)
        return EXIT_CONFIG
    except StepFailure as e:
        print(f"{Fore.RED}solver error at step {e.step_index}:{Style.RESET_ALL} {e.cause}", file=sys.stderr)
        return EXIT_SOLVER
    except SweepError as e:
        print(f"{Fore.RED}solver error:{Style.RESET_ALL} {e}", file=sys.stderr)
        return EXIT_SOLVER
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
