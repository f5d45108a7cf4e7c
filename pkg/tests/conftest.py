import _shared


def pytest_terminal_summary(terminalreporter):
    if not _shared.ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(_shared.ACCEPTANCE, key=lambda s: int(s.split()[1].rstrip(":"))):
        terminalreporter.write_line(line)
