import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=25,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one PASS/FAIL line per acceptance criterion ------------------------------------------

_CRITERIA: dict[int, list[str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion the test belongs to")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        status = "xfail" if hasattr(rep, "wasxfail") else rep.outcome
        _CRITERIA.setdefault(mark.args[0], []).append(status)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        statuses = _CRITERIA[n]
        if all(s == "passed" for s in statuses):
            line = "PASS"
        elif "failed" in statuses:
            line = "FAIL"
        else:
            known = statuses.count("xfail")
            line = f"FAIL (known: {known} strict-xfail sub-check{'s' * (known > 1)})"
        terminalreporter.write_line(f"criterion {n}: {line} [{len(statuses)} checks]")
