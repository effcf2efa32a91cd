"""Shared fixtures: settings isolation and small sweeping problems."""

import logging

import numpy as np
import pytest

from sweepcore.config import reset_config
from sweepcore.core.model import SweepingProblem
from tests.helpers import halfspace_constraint

# Suppress logging during tests
logging.disable(logging.CRITICAL)


@pytest.fixture(autouse=True)
def fresh_settings(monkeypatch):
    """Every test starts from default settings without environment overrides"""
    monkeypatch.delenv("SWEEP_CONFIG", raising=False)
    monkeypatch.delenv("SWEEP_LOG", raising=False)
    reset_config()
    yield
    reset_config()


@pytest.fixture
def free_problem():
    """No constraints, constant drift (1, -2)"""
    return SweepingProblem([], lambda t, q: np.array([1.0, -2.0]), [0.0, 0.0], 1.0, name="free")


@pytest.fixture
def box_problem():
    """Unit box [0, 1]^2 with a drift pushing towards the upper right corner"""
    constraints = [
        halfspace_constraint([1.0, 0.0], 0.0),
        halfspace_constraint([-1.0, 0.0], -1.0),
        halfspace_constraint([0.0, 1.0], 0.0),
        halfspace_constraint([0.0, -1.0], -1.0),
    ]
    return SweepingProblem(constraints, lambda t, q: np.array([1.0, 0.5]), [0.5, 0.5], 2.0, name="box")
