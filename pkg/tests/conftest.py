import re

_ACCEPTANCE = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    m = re.search(r"test_criterion_(\d+)_(\w+)", report.nodeid)
    if not m:
        return
    key = int(m.group(1))
    failed = report.failed
    if report.when == "call" or (failed and key not in _ACCEPTANCE):
        detail = dict(report.user_properties).get("detail", "")
        _ACCEPTANCE[key] = (m.group(2).replace("_", " "), "FAIL" if failed else "PASS", detail)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_ACCEPTANCE):
        name, status, detail = _ACCEPTANCE[key]
        line = f"criterion {key:2d} {status}  {name}"
        terminalreporter.write_line(f"{line}  ({detail})" if detail else line)
