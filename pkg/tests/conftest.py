import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

_CRITERIA: dict[int, bool] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is not None and rep.when == "call":
        _CRITERIA[mark.args[0]] = _CRITERIA.get(mark.args[0], True) and rep.passed
    elif mark is not None and rep.failed:
        _CRITERIA[mark.args[0]] = False


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_CRITERIA):
        terminalreporter.write_line(f"criterion {k}: {'PASS' if _CRITERIA[k] else 'FAIL'}")
