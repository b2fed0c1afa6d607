"""Shared pytest plumbing.

The acceptance suite registers one line per criterion through the
``acceptance_log`` fixture; this hook echoes them after the run so a plain
``pytest`` invocation always shows the per-criterion verdicts.
"""

import pytest


def pytest_configure(config):
    config._acceptance_lines = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_acceptance_lines", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def acceptance_log(request):
    def record(number, title, ok, detail):
        verdict = "PASS" if ok else "FAIL"
        line = f"{verdict}  criterion {number:2d} ({title}): {detail}"
        request.config._acceptance_lines.append(line)
        assert ok, line

    return record
