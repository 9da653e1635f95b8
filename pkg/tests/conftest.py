import sys


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for res in results:
        terminalreporter.write_line(res.line())
    n = sum(r.passed for r in results)
    terminalreporter.write_line(f"{n}/{len(results)} criteria passed")
