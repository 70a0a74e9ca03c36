import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from lskum.bench import apply_bump, freestream_init  # noqa: E402
from lskum.cloud import generate_rect_cloud  # noqa: E402


@pytest.fixture
def bump_cloud():
    """Small jittered cloud with a density/pressure bump, ready to solve."""
    def make(n=16, layout="soa", mach=0.63, aoa=2.0):
        c = generate_rect_cloud(n, n, jitter=0.1, seed=0, layout=layout)
        freestream_init(c, mach, aoa, 1.4)
        apply_bump(c, 0.05, radius=0.2)
        return c
    return make


def pytest_terminal_summary(terminalreporter):
    """Repeat the acceptance PASS/FAIL lines after the run."""
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for n in sorted(results):
            terminalreporter.write_line(results[n])
