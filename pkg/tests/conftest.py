import os

import pytest

from legsym.primes import PrimeIndexer

# One report per acceptance criterion, keyed by test name, printed as a
# summary table at the end of the run.
_criterion_reports = {}


def pytest_collection_modifyitems(config, items):
    if os.environ.get("LEGSYM_EXTENDED") == "1":
        return
    skip = pytest.mark.skip(reason="extended tier; set LEGSYM_EXTENDED=1 to run")
    for item in items:
        if "extended" in item.keywords:
            item.add_marker(skip)


@pytest.fixture(scope="session")
def indexer():
    """Shared prime indexer; its checkpoint table grows monotonically."""
    return PrimeIndexer()


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if not item.name.startswith("test_criterion_"):
        return
    if rep.when == "call" or (rep.when == "setup" and rep.skipped):
        _criterion_reports[item.name] = rep


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _criterion_reports:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for name in sorted(_criterion_reports):
        rep = _criterion_reports[name]
        label = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}.get(
            rep.outcome, rep.outcome.upper()
        )
        detail = dict(rep.user_properties).get("detail", "")
        line = f"{label}  {name}"
        if detail:
            line += f"  ({detail})"
        terminalreporter.write_line(line)
