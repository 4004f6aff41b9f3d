import functools

import pytest

from hypbergman.cli import DEFAULT_GRID, parse_points
from hypbergman.groups import ElementSet, bolza_group, enumerate_elements
from hypbergman.hyperbolic import HPoint

CUTOFF = 10.0
GRID = parse_points(DEFAULT_GRID)
SAMPLES = [HPoint(0.0, 1.0), HPoint(0.1, 0.9), HPoint(-0.3, 1.2), HPoint(0.45, 0.7), HPoint(-0.2, 1.6)]

_ACCEPTANCE = {}


@functools.lru_cache(maxsize=None)
def bolza():
    return bolza_group()


@functools.lru_cache(maxsize=None)
def ball(p: HPoint, L: int = 12) -> ElementSet:
    """Bolza elements within word length L, pruned around p."""
    return enumerate_elements(bolza(), L, prune=(p, CUTOFF))


def ball10(p):
    return ball(p, 12).restrict(10)


@pytest.fixture
def record():
    def _record(n, title, ok, detail=""):
        _ACCEPTANCE[n] = (title, bool(ok), detail)
        print(f"criterion {n:2d} {'PASS' if ok else 'FAIL'}  {title}  {detail}")
        return ok
    return _record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_ACCEPTANCE):
        title, ok, detail = _ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:2d} {'PASS' if ok else 'FAIL'}  {title}  {detail}")
