import math
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

from convexmetrics import measures as M

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

GOLDEN = Path(__file__).parent / "golden"


@pytest.fixture(scope="session")
def gauss():
    return M.make_distribution("std-gaussian", n=1)


@pytest.fixture(scope="session")
def cauchy3():
    return M.make_distribution("cauchy-type", n=1, beta=3)


@pytest.fixture(scope="session")
def unif_iso():
    return M.isotropize(M.make_distribution("uniform-interval", a=0.0, b=1.0))


@pytest.fixture(scope="session")
def expo():
    return M.make_distribution("exponential-centered")


def normal(mean=0.0, var=1.0):
    return M.make_distribution("gaussian", mean=mean, covariance=var)


def cauchy_iso(s):
    return M.isotropize(M.make_distribution("cauchy-type", n=1, beta=1.0 / abs(s)))


SQRT3 = math.sqrt(3.0)


@pytest.fixture(scope="session")
def default_run():
    """One run of the bundled suite shared by the golden, coverage and acceptance tests."""
    import time

    from convexmetrics.harness.config import load_default_config
    from convexmetrics.harness.runner import run_suite

    t0 = time.perf_counter()
    rows = run_suite(load_default_config())
    return rows, time.perf_counter() - t0


# criterion number -> (passed, detail); filled in by test_acceptance
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def record(criterion: int, passed: bool, detail: str) -> bool:
    ACCEPTANCE[criterion] = (bool(passed), detail)
    print(f"criterion {criterion:2d}: {'PASS' if passed else 'FAIL'}  {detail}")
    return passed


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
