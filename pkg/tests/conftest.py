import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("qftk", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("qftk")

_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def acceptance_log():
    return _ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES, key=lambda s: (not s.startswith("criterion"), s)):
            terminalreporter.write_line(line)
