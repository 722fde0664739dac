"""Shared pytest wiring: the acceptance summary block.

The acceptance tests record one verdict line per criterion; the hook below
replays them after the run so they are visible even with output capture on.
"""

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.line(line)
