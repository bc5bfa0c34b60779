import sys


def pytest_terminal_summary(terminalreporter):
    for mod in list(sys.modules.values()):
        lines = getattr(mod, "ACCEPTANCE_RESULTS", None)
        if isinstance(lines, dict) and lines:
            terminalreporter.section("acceptance criteria")
            for n in sorted(lines):
                terminalreporter.write_line(lines[n])
            return
