# Collects one verdict per acceptance criterion and prints them at the end of
# the run (see tests/test_acceptance.py). A parametrized criterion passes only
# if all of its cases pass.

ACCEPTANCE = {}


def pytest_runtest_logreport(report):
    if report.when != "call" and not report.failed:
        return
    marker = "test_acceptance.py::test_criterion_"
    if marker not in report.nodeid:
        return
    tail = report.nodeid.split(marker)[1]
    num = int(tail.split("_")[0])
    name = "test_criterion_" + tail.split("[")[0]
    entry = ACCEPTANCE.setdefault(num, {"name": name, "passed": 0, "failed": []})
    if report.passed:
        entry["passed"] += 1
    else:
        entry["failed"].append(tail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE):
        e = ACCEPTANCE[num]
        total = e["passed"] + len(e["failed"])
        verdict = "FAIL" if e["failed"] else "PASS"
        line = f"criterion {num:2d}: {verdict}  {e['name']} ({e['passed']}/{total} cases)"
        terminalreporter.write_line(line)
