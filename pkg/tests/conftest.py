import math
from pathlib import Path

import pytest

from strokejoin.geometry import Polyline, Vec2
from strokejoin.raster import render_scene
from strokejoin.tessellation import StrokeStyle

FIXTURES = Path(__file__).parent / "fixtures"
GOLDEN = Path(__file__).parent / "golden"

_acceptance_lines = []


def record_criterion(number, title, passed, detail=""):
    line = f"[{'PASS' if passed else 'FAIL'}] criterion {number}: {title}"
    if detail:
        line += f" ({detail})"
    _acceptance_lines.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in _acceptance_lines:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    # compile or load the cached numba kernels once, outside any timed region
    line = Polyline([(2.2, 2.1), (20.3, 2.4), (20.7, 20.6)])
    render_scene([line], StrokeStyle(width=4), (24, 24))
    from strokejoin.bench import oracle_render

    oracle_render([line], StrokeStyle(width=4), (24, 24), 4)


@pytest.fixture
def l_polyline():
    return Polyline([(-10.0, 0.0), (0.0, 0.0), (0.0, 10.0)])


def join_line(turn_deg, pivot=Vec2(64.3, 64.7), arm=50.0, heading=0.0):
    t = math.radians(turn_deg)
    d_in = Vec2(math.cos(heading), math.sin(heading))
    d_out = Vec2(math.cos(heading + t), math.sin(heading + t))
    return Polyline([pivot - d_in * arm, pivot, pivot + d_out * arm])
