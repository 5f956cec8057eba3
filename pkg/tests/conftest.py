import math

import pytest

from seplab.core import PhaseState, SystemParams


@pytest.fixture
def separatrix_ic():
    return PhaseState(0.0, 0.0, 1.0)


@pytest.fixture
def fig_params():
    return SystemParams(0.002, 1.0, math.pi)


def pytest_terminal_summary(terminalreporter):
    # one line per acceptance criterion, in criterion order
    lines = []
    for key in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(key, []):
            if getattr(rep, "when", "call") != "call" and key != "error":
                continue
            nodeid = getattr(rep, "nodeid", "")
            if "test_acceptance.py::test_ac" not in nodeid:
                continue
            name = nodeid.split("::")[-1]
            num = int(name[len("test_ac"):].split("_")[0])
            lines.append((num, "PASS" if key == "passed" else "FAIL", name))
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for num, status, name in sorted(lines):
        terminalreporter.write_line(f"AC{num:<3d} {status}  {name}")
