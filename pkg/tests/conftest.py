"""Shared fixtures: the 532/1596 nm design point and a coarse JSA configuration."""

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from scipy.constants import c

from pairgen.jsa import ExperimentConfig, GridSpec, PulseSpec
from pairgen.modes import HE11, HE12, FiberSpec

settings.register_profile(
    "default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

# Phasematched diameter for a 532 nm pump and 1596 nm seed (regression value).
DESIGN_DIAMETER = 0.79037e-6
LAMBDA_P = 532e-9
LAMBDA_S = 1596e-9
OMEGA_P = 2 * np.pi * c / LAMBDA_P
OMEGA_S = 2 * np.pi * c / LAMBDA_S


@pytest.fixture(scope="session")
def fiber():
    return FiberSpec(DESIGN_DIAMETER)


@pytest.fixture(scope="session")
def seed_mode():
    return HE11


@pytest.fixture(scope="session")
def pump_mode():
    return HE12


def coarse_config(fiber, **changes):
    """1 ps pump so a 256-point grid resolves the sum-frequency direction."""
    cfg = ExperimentConfig(
        fiber,
        PulseSpec("pump", LAMBDA_P, 1e-12, 1e4),
        PulseSpec("seed", LAMBDA_S, 1e-9, 1.0),
        0.01,
        grid=GridSpec(points=256, area_grid_points=128, area_subgrid=4, dispersion_nodes=64),
    )
    return cfg.replace(**changes) if changes else cfg


@pytest.fixture(scope="session")
def coarse_cfg(fiber):
    return coarse_config(fiber)


@pytest.fixture(scope="session")
def coarse_result(coarse_cfg):
    from pairgen.jsa import compute_jsa

    return compute_jsa(coarse_cfg)


# ---------------------------------------------------------------- acceptance report

_CRITERIA: dict[int, str] = {}


def record_criterion(number: int, title: str, ok: bool, detail: str) -> None:
    """Store (and print) one PASS/FAIL line for the acceptance summary."""
    line = f"criterion {number:2d} {'PASS' if ok else 'FAIL'}  {title}: {detail}"
    _CRITERIA[number] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        terminalreporter.write_line(_CRITERIA[number])
