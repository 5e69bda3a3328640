"""Shared pytest configuration.

The acceptance module's results are echoed as one PASS/FAIL line per
criterion in the terminal summary, keyed off the test names.
"""

import re

_ACCEPTANCE_RESULTS = {}

_CRITERION = re.compile(r"test_criterion_(\d+)_(\w+)")


def pytest_runtest_logreport(report):
    if report.when != "call":
        return
    m = _CRITERION.search(report.nodeid)
    if m:
        num = int(m.group(1))
        label = m.group(2).replace("_", " ")
        _ACCEPTANCE_RESULTS[num] = (label, report.outcome)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE_RESULTS:
        return
    tw = terminalreporter
    tw.write_sep("-", "acceptance criteria")
    for num in sorted(_ACCEPTANCE_RESULTS):
        label, outcome = _ACCEPTANCE_RESULTS[num]
        status = "PASS" if outcome == "passed" else "FAIL"
        tw.write_line(f"criterion {num:2d} [{status}] {label}")
