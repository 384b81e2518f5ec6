import pytest

from hotspot_cdma import TABLE1, estimate_mean_stats

_ACCEPTANCE = []


@pytest.fixture(scope="session")
def table1():
    return TABLE1


@pytest.fixture(scope="session")
def stats():
    """Mean statistics at the default parameters, shared across modules."""
    return estimate_mean_stats(TABLE1, samples=100_000, seed=0)


@pytest.fixture
def acceptance():
    """Record ``(criterion, ok, detail)`` lines for the terminal summary."""

    def record(name, ok, detail=""):
        _ACCEPTANCE.append((name, bool(ok), detail))
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in _ACCEPTANCE:
        status = "PASS" if ok else "FAIL"
        if name.startswith("info"):
            status = "INFO"
        terminalreporter.write_line(f"{status}  {name}  {detail}")
