"""Shared pytest plumbing: acceptance-criterion report collection.

The acceptance tests record one PASS/FAIL line per criterion check; the
lines are replayed in a dedicated section of the terminal summary so they
survive pytest's output capture.
"""

_criterion_reports = []


def record_criterion(line):
    _criterion_reports.append(line)


def pytest_terminal_summary(terminalreporter):
    if _criterion_reports:
        terminalreporter.section("acceptance criteria")
        for line in _criterion_reports:
            terminalreporter.write_line(line)
