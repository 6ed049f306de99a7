import os
import sys

sys.path.insert(0, os.path.dirname(__file__))

from acceptance_state import RESULTS, TITLES  # noqa: E402


def pytest_terminal_summary(terminalreporter):
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(TITLES):
        if n in RESULTS:
            passed, detail = RESULTS[n]
            status = "PASS" if passed else "FAIL"
        else:
            status, detail = "NOT RUN", ""
        terminalreporter.write_line(f"{n:2d} {status:7s} {TITLES[n]}  {detail}".rstrip())
