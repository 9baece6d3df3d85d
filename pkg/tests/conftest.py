import mpmath
import pytest

# Filled by the acceptance tests; echoed after the run so the per-criterion
# verdict lines survive pytest's output capture.
acceptance_lines: list = []


@pytest.fixture(autouse=True)
def _reset_mpmath_precision():
    """Keep the global mpmath context at its default between tests."""
    saved = mpmath.mp.prec
    yield
    mpmath.mp.prec = saved


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in acceptance_lines:
            terminalreporter.line(line)
