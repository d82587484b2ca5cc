import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from fdbayes.aeroelastic import FlowCondition, StructuralParams
from fdbayes.config import bridge_simulation_doc, parse_config

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.register_profile("thorough", max_examples=500, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture(scope="session")
def bridge():
    """Bridge section of the synthetic study."""
    return StructuralParams.from_hz(27935.0, 2595580.0, 0.1, 0.25, 0.005, 0.005, 36.0)


@pytest.fixture(scope="session")
def flow30():
    return FlowCondition(30.0)


@pytest.fixture(scope="session")
def thin_plate():
    return StructuralParams.from_hz(6.0, 0.7, 1.9, 3.05, 0.004, 0.003, 0.45)


@pytest.fixture(scope="session")
def bridge_cfg():
    return parse_config(bridge_simulation_doc())


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def report():
    """Record a PASS/FAIL line; all lines are repeated in the terminal summary."""

    def emit(label, ok, detail=""):
        line = f"{'PASS' if ok else 'FAIL'}  {label}" + (f"  [{detail}]" if detail else "")
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return emit


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
