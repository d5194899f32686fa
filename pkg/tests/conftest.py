import _support


def pytest_terminal_summary(terminalreporter):
    if not _support.ACCEPTANCE_LOG:
        return
    terminalreporter.section("acceptance criteria")
    for number, verdict, detail in sorted(_support.ACCEPTANCE_LOG, key=lambda r: r[0]):
        terminalreporter.write_line(f"criterion {number:>2}: {verdict}  {detail}")
