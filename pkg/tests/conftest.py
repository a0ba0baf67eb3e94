import acceptance_log


def pytest_terminal_summary(terminalreporter):
    if acceptance_log.LINES:
        terminalreporter.section("acceptance")
        for line in acceptance_log.LINES:
            terminalreporter.write_line(line)
