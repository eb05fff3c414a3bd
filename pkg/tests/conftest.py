from __future__ import annotations

import os

import pytest
from hypothesis import HealthCheck, settings

from gf2rank.omega import OmegaStore

settings.register_profile(
    "default",
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
    derandomize=True,
)
settings.register_profile("ci", deadline=None, max_examples=50)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture(scope="session")
def store() -> OmegaStore:
    return OmegaStore()


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        status, detail = mod.RESULTS[n]
        terminalreporter.write_line(f"criterion {n:2d}: {status}  {detail}")
