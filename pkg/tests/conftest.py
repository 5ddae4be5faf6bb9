import re
from collections import defaultdict

CRITERION = re.compile(r"test_criterion_(\d+)")


def pytest_terminal_summary(terminalreporter):
    outcomes = defaultdict(list)
    for kind in ("passed", "failed", "error"):
        for report in terminalreporter.stats.get(kind, []):
            if report.when != "call" and kind == "passed":
                continue
            match = CRITERION.search(getattr(report, "nodeid", ""))
            if match:
                outcomes[int(match.group(1))].append(kind == "passed")
    if not outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(outcomes):
        ok = all(outcomes[n])
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'} "
                                    f"({sum(outcomes[n])}/{len(outcomes[n])} tests)")
