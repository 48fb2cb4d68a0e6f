import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default",
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.function_scoped_fixture],
)
settings.load_profile("default")


# --- acceptance summary -------------------------------------------------------
# Tests marked ``@pytest.mark.acceptance("AC1", "title")`` are grouped per criterion;
# a criterion passes only if every test carrying its id ran and passed.

_acceptance: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(id, title): acceptance criterion check")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    report = outcome.get_result()
    ident, title = marker.args[:2]
    entry = _acceptance.setdefault(ident, {"title": title, "ran": 0, "failed": 0})
    if report.when == "call":
        entry["ran"] += 1
    if report.failed or (report.when == "call" and report.skipped):
        entry["failed"] += 1


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for ident in sorted(_acceptance):
        entry = _acceptance[ident]
        status = "PASS" if entry["ran"] and not entry["failed"] else "FAIL"
        terminalreporter.write_line(f"{status} {ident}: {entry['title']} ({entry['ran']} checks)")
