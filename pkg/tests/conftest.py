from __future__ import annotations

import json
from pathlib import Path

import pytest

SCENARIOS = Path(__file__).resolve().parent.parent / "src" / "indivisible" / "scenarios"


def scenario(name: str) -> dict:
    return json.loads((SCENARIOS / name).read_text())


@pytest.fixture(scope="session")
def scenario_path():
    return lambda name: SCENARIOS / name


# One line per acceptance criterion, printed at the end of the session
# whether or not output capture is on.
ACCEPTANCE_RESULTS: list[tuple[int, str, bool, float, float]] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number, name, ok, elapsed, limit in sorted(ACCEPTANCE_RESULTS):
        status = "PASS" if ok else "FAIL"
        budget = f" (limit {limit:g}s)" if limit else ""
        terminalreporter.write_line(f"[{status}] {number}. {name}: {elapsed:.2f}s{budget}")
