import re

import pytest

from mgsim import build_scenario_set


@pytest.fixture(scope="session")
def pymgrid25():
    return build_scenario_set("pymgrid25", seed=0)


def pytest_terminal_summary(terminalreporter):
    """One PASS/FAIL line per acceptance criterion."""
    lines = []
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            if getattr(rep, "when", "call") != "call" and outcome != "error":
                continue
            m = re.search(r"test_acceptance\.py::test_(\w+)", rep.nodeid)
            if m:
                lines.append((rep.nodeid, m.group(1), "PASS" if outcome == "passed" else "FAIL"))
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, name, verdict in sorted(lines):
            terminalreporter.write_line(f"{verdict}  {name}")
