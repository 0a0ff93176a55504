import os
import sys
from functools import lru_cache

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, os.path.dirname(__file__))

from cayleylift import ball, make_group  # noqa: E402

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

ROSTER = ("dinf-grr", "f2-grr", "heis-c2", "gamma", "delta", "lamplighter-DL",
          "lamplighter-ext", "c2*c3")
EXTRA = ("free:m=2", "cyclic:5", "fp:[c2,c3,f1]", "dp:(cyclic:4)x(free:m=1)")


@lru_cache(maxsize=None)
def group(name: str):
    return make_group(name if ":" in name else f"preset:{name}")


@lru_cache(maxsize=None)
def cball(name: str, n: int):
    return ball(group(name), n)


@pytest.fixture(scope="session")
def G():
    return group


# acceptance results, echoed once more at the end of the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
