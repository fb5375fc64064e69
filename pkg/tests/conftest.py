import sys


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    # acceptance tests record one result line per criterion; echo them past
    # output capture so piped logs always show the margins
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULT_LINES", None) if mod else None
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
