"""Shared test plumbing: the acceptance report printed at the end of a run."""

import pytest

_REPORT: dict = {}


class AcceptanceReport:
    """Collects one verdict line per acceptance criterion."""

    def record(self, key: str, title: str, passed: bool, detail: str) -> bool:
        _REPORT[key] = (title, bool(passed), detail)
        line = f"{key} {'PASS' if passed else 'FAIL'}  {title}: {detail}"
        print(line)
        return bool(passed)


@pytest.fixture(scope="session")
def acceptance():
    return AcceptanceReport()


def _order(key):
    head = key.split(".")[0].lstrip("C")
    return (int(head) if head.isdigit() else 99, key)


def pytest_terminal_summary(terminalreporter):
    if not _REPORT:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_REPORT, key=_order):
        title, passed, detail = _REPORT[key]
        terminalreporter.write_line(f"{key:<6} {'PASS' if passed else 'FAIL'}  {title}: {detail}")
