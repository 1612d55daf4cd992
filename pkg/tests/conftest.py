from __future__ import annotations

from pathlib import Path

import pytest

from pdekit.dsl import parse_system

CORPUS = Path(__file__).resolve().parent.parent / "corpus"

# criterion number -> (title, passed)
CRITERIA: dict[int, tuple[str, bool]] = {}


def load(name: str):
    return parse_system((CORPUS / f"{name}.pde").read_text(encoding="utf-8"))


@pytest.fixture
def corpus_system():
    return load


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("criterion")
    if marker is None or call.when != "call":
        return
    num, title = marker.args
    CRITERIA[num] = (title, call.excinfo is None)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(num, title): acceptance criterion")


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(CRITERIA):
        title, ok = CRITERIA[num]
        terminalreporter.write_line(f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}  {title}")

