import os
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

from odorigid.config import parse_config

ROOT = Path(__file__).resolve().parents[1]
FIXTURES = ROOT / "fixtures"

settings.register_profile(
    "repo",
    deadline=None,
    derandomize=True,
    max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "repo"))


@pytest.fixture(scope="session")
def small_configs():
    return {s.name: s for s in parse_config(FIXTURES / "configs" / "small_chains.json")}


@pytest.fixture(scope="session")
def fixture_chains(small_configs):
    return {name: cfg.chain() for name, cfg in small_configs.items()}


def pytest_terminal_summary(terminalreporter):
    import sys

    module = sys.modules.get("test_acceptance")
    results = getattr(module, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for number in sorted(results):
            terminalreporter.write_line(results[number])
