CRITERIA_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in CRITERIA_LINES:
        terminalreporter.write_line(line)
