"""Collects one outcome line per acceptance criterion and prints them at the
end of the run."""

import re

_OUTCOMES: dict[str, tuple[str, str]] = {}


def pytest_runtest_logreport(report):
    m = re.search(r"test_acceptance\.py::test_criterion_(\d+)_(\w+)", report.nodeid)
    if not m:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        if hasattr(report, "wasxfail"):
            status = "XFAIL" if report.skipped else "XPASS"
        else:
            status = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}[report.outcome]
        detail = dict(report.user_properties).get("detail", "")
        if report.skipped and not detail and isinstance(report.longrepr, tuple):
            detail = report.longrepr[2]
        _OUTCOMES[f"{int(m.group(1))}:{m.group(2)}"] = (status, detail)


def pytest_terminal_summary(terminalreporter):
    if not _OUTCOMES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_OUTCOMES, key=lambda k: (int(k.split(":")[0]), k)):
        num, name = key.split(":", 1)
        status, detail = _OUTCOMES[key]
        terminalreporter.write_line(f"criterion {num} [{name}]: {status}  {detail}".rstrip())
