"""
Run configuration: a single JSON document describing what to run.

Top-level keys: scenario, horizon, steps, h_list, h_min, params, output_dir, seed.
Unknown keys are errors.
"""

import json
from pathlib import Path
from typing import List, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from sweepcore.common.exceptions import ConfigError
from sweepcore.core.model import AssumptionParams
from sweepcore.crowd.scenario import CrowdScenario
from .builtins import BUILTINS

BUILTIN_PREFIX = "builtin:"


class CrowdSpec(BaseModel):
    """Crowd scenario fields; seed falls back to the run seed."""
    model_config = ConfigDict(extra="forbid")

    kind: str = Field("crowd", pattern="^crowd$")
    count: int = Field(ge=1)
    radius: float = Field(0.2, gt=0)
    room: Tuple[float, float] = (10.0, 10.0)
    exit_center: Tuple[float, float] = (10.0, 5.0)
    door_width: float = Field(1.2, gt=0)
    jamb_radius: float = Field(0.2, ge=0)
    desired_speed: float = Field(1.0, gt=0)
    seed: Optional[int] = None

    def to_scenario(self, run_seed: int) -> CrowdScenario:
        return CrowdScenario(
            count=self.count,
            radius=self.radius,
            room=self.room,
            exit_center=self.exit_center,
            door_width=self.door_width,
            jamb_radius=self.jamb_radius,
            desired_speed=self.desired_speed,
            seed=run_seed if self.seed is None else self.seed,
        )


class ParamsSpec(BaseModel):
    """User-supplied assumption constants."""
    model_config = ConfigDict(extra="forbid")

    alpha: float = Field(gt=0)
    beta: float = Field(gt=0)
    m_bound: float = Field(gt=0)
    rho: float = Field(gt=0)
    gamma: float = Field(1.0, ge=1)
    c_margin: float = Field(1.0, gt=0)
    k_lip: float = Field(1.0, gt=0)

    def to_params(self) -> AssumptionParams:
        return AssumptionParams(**self.model_dump())


class RunConfig(BaseModel):
    """What to run: one scenario source, a horizon and step counts."""
    model_config = ConfigDict(extra="forbid")

    scenario: Union[CrowdSpec, str]
    horizon: Optional[float] = Field(None, gt=0)
    steps: Union[int, List[int]] = 100
    h_list: Optional[List[float]] = None
    h_min: Optional[float] = Field(None, gt=0)
    params: Optional[ParamsSpec] = None
    output_dir: str = "out"
    seed: int = 0

    @field_validator("scenario")
    @classmethod
    def _known_builtin(cls, value):
        if isinstance(value, str):
            if not value.startswith(BUILTIN_PREFIX):
                raise ValueError(f"scenario string must look like '{BUILTIN_PREFIX}<name>'")
            name = value[len(BUILTIN_PREFIX):]
            if name not in BUILTINS:
                raise ValueError(f"unknown builtin {name!r}; expected one of {sorted(BUILTINS)}")
        return value

    @field_validator("steps")
    @classmethod
    def _positive_steps(cls, value):
        counts = [value] if isinstance(value, int) else value
        if not counts or any(n < 1 for n in counts):
            raise ValueError("steps must be >= 1")
        return value

    @field_validator("h_list")
    @classmethod
    def _positive_h(cls, value):
        if value is not None and (not value or any(h <= 0 for h in value)):
            raise ValueError("h_list must hold positive step sizes")
        return value

    @property
    def step_list(self) -> List[int]:
        return [self.steps] if isinstance(self.steps, int) else list(self.steps)

    @property
    def builtin_name(self) -> Optional[str]:
        if isinstance(self.scenario, str):
            return self.scenario[len(BUILTIN_PREFIX):]
        return None


def parse_run_config(data: dict) -> RunConfig:
    """Validate a parsed JSON document."""
    try:
        return RunConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigError(f"invalid run config:\n{e}") from e


def load_run_config(path: Path) -> RunConfig:
    """Read and validate a JSON run config.

    Raises:
        ConfigError: unreadable file, malformed JSON or invalid fields
    """
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"config {path} is not valid JSON: {e}") from e
    if not isinstance(data, dict):
        raise ConfigError(f"config {path} must be a JSON object")
    return parse_run_config(data)
