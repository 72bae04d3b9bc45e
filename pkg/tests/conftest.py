import os

import mpmath
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "lfunc",
    max_examples=int(os.environ.get("LFUNC_EXAMPLES", "25")),
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("lfunc")

DESCRIPTORS = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "descriptors")


@pytest.fixture(autouse=True)
def _restore_dps():
    dps = mpmath.mp.dps
    yield
    mpmath.mp.dps = dps


@pytest.fixture
def descriptor_dir():
    return DESCRIPTORS


ACCEPTANCE_LINES: list[str] = []


def record_acceptance(number: int, title: str, passed: bool, detail: str, seconds: float) -> str:
    line = f"criterion {number}: {'PASS' if passed else 'FAIL'}  {title}  [{detail}; {seconds:.2f} s]"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return line


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
