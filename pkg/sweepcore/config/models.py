"""
Configuration dataclass models for Sweepcore numerical settings.
"""
from dataclasses import dataclass, field
from typing import List


@dataclass
class ToleranceConfig:
    """Absolute tolerances shared by every component."""
    feas_tol: float = 1e-9
    proj_tol: float = 1e-10
    comp_tol: float = 1e-10
    grad_floor: float = 1e-12


@dataclass
class ProjectionConfig:
    """Dual ascent projection settings."""
    max_iterations: int = 100000
    power_iterations: int = 50
    blowup_factor: float = 1e8
    accelerate: bool = True
    polish_every: int = 10
    stall_checks: int = 20  # polish rounds without halving before the best point is accepted
    warm_start: bool = True


@dataclass
class StepperConfig:
    """Time-stepping settings."""
    f_sampling: str = "left"  # "left" or "averaged"
    quadrature_points: int = 5
    check_feasibility: bool = True


@dataclass
class DiagnosticsConfig:
    """Sampled assumption checks."""
    samples: int = 1000
    gamma_trials: int = 200
    gamma_grid: int = 60
    fd_step: float = 1e-5
    rejection_max_dim: int = 8


@dataclass
class CrowdConfig:
    """Crowd scenario settings."""
    placement_margin_ratio: float = 0.01
    max_rejections: int = 1_000_000
    prune_pairs: bool = False
    prune_safety: float = 0.1


@dataclass
class ConvergenceConfig:
    """Convergence study settings."""
    h_min: float = 0.01
    h_list: List[float] = field(
        default_factory=lambda: [0.02, 0.025, 0.04, 0.05, 0.0625, 0.08, 0.1, 0.2, 0.5]
    )
    exclusion_factor: float = 4.0
    exact_tol: float = 1e-12  # e_h at or below this counts as exact
    error_samples: int = 10


@dataclass
class SweepConfig:
    """Root configuration object containing all component settings."""
    tolerance: ToleranceConfig = field(default_factory=ToleranceConfig)
    projection: ProjectionConfig = field(default_factory=ProjectionConfig)
    stepper: StepperConfig = field(default_factory=StepperConfig)
    diagnostics: DiagnosticsConfig = field(default_factory=DiagnosticsConfig)
    crowd: CrowdConfig = field(default_factory=CrowdConfig)
    convergence: ConvergenceConfig = field(default_factory=ConvergenceConfig)
