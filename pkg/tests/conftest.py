"""Shared pytest hooks.

The acceptance gate records one PASS/FAIL line per criterion; printing
during a test is swallowed by capture, so the lines are replayed in the
terminal summary where they survive any capture mode.
"""

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
