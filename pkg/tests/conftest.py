from hypothesis import settings

# exact arithmetic timings vary with load; examples must not be timed out
settings.register_profile("exact", deadline=None, max_examples=60)
settings.load_profile("exact")

_criteria = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid or report.when != "call":
        return
    name = report.nodeid.split("::")[-1]
    _criteria[name] = (report.outcome, report.duration)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    from test_acceptance import CRITERIA

    terminalreporter.section("acceptance criteria")
    for number, (test_name, title, budget) in sorted(CRITERIA.items()):
        outcome, duration = _criteria.get(test_name, ("not run", 0.0))
        verdict = {"passed": "PASS", "failed": "FAIL"}.get(outcome, outcome.upper())
        terminalreporter.write_line(
            f"criterion {number:2d} {verdict:7s} {title} ({duration:.1f}s, target < {budget}s)")
