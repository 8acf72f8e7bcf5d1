import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from strokejoin.geometry import GeometryError, Polyline, Vec2, make_join
from strokejoin.tessellation import (
    Label,
    StrokeStyle,
    auto_threshold,
    count_joins,
    fan_triangle_count,
    subdivision_count,
    tessellate_join_fan,
    tessellate_join_proposed,
    tessellate_polyline,
    tessellate_segment,
)

from conftest import join_line


def rows(a):
    return {tuple(np.round(r, 12)) for r in a}


def test_segment_quad():
    b = tessellate_segment(Vec2(0, 0), Vec2(10, 0), StrokeStyle(width=2))
    assert b.label is Label.SEGMENT_BODY and b.n_triangles == 2
    corners = {(0, 1): (0, 1), (0, -1): (0, -1), (10, -1): (0, -1), (10, 1): (0, 1)}
    for p, a in zip(b.positions, b.attrs):
        assert corners[tuple(p)] == tuple(a)
    assert rows(b.positions) == {(0, 1), (0, -1), (10, -1), (10, 1)}


def test_style_validation():
    with pytest.raises(GeometryError):
        StrokeStyle(width=0)
    with pytest.raises(GeometryError):
        StrokeStyle(aa_threshold=1.0)
    with pytest.raises(GeometryError):
        StrokeStyle(join="round")
    assert StrokeStyle(width=8).threshold == pytest.approx(0.75)
    assert auto_threshold(1.0) == 0.0


def test_right_angle_join_attrs():
    j = make_join(Vec2(-10, 0), Vec2(0, 0), Vec2(0, 10), 2.0)
    b = tessellate_join_proposed(j, StrokeStyle(width=2))
    assert b.label is Label.JOIN_PROPOSED and b.n_triangles == 2
    expected = {
        (0.0, 0.0): (0.0, 0.0),
        (0.0, -1.0): (0.0, 1.0),
        (1.0, -1.0): (1.0, 1.0),
        (1.0, 0.0): (0.0, 1.0),
    }
    for p, a in zip(b.positions, b.attrs):
        key = tuple(float(v) for v in np.round(p, 12) + 0.0)
        assert expected[key] == pytest.approx(tuple(a), abs=1e-12)


def test_thirty_degree_tip_attr():
    line = join_line(30.0, pivot=Vec2(0, 0))
    j = make_join(*line.vertices, 6.0)
    b = tessellate_join_proposed(j, StrokeStyle(width=6))
    tips = [a for a in b.attrs if a[0] != 0.0]
    assert len(tips) == 2
    for a in tips:
        assert a[0] == pytest.approx(math.tan(math.radians(15)), abs=1e-12)


@pytest.mark.parametrize("turn, k", [(30, 1), (120, 1), (2 * math.degrees(math.atan(2)) - 1e-6, 1), (127, 2), (170, 2)])
def test_subdivision_count(turn, k):
    t = math.radians(turn)
    assert subdivision_count(t, 2.0) == k
    # k is the smallest count satisfying the limit
    assert math.tan(t / (2 * k)) <= 2.0
    if k > 1:
        assert math.tan(t / (2 * (k - 1))) > 2.0


def test_170_degree_join_splits():
    line = join_line(170.0, pivot=Vec2(0, 0))
    j = make_join(*line.vertices, 4.0)
    b = tessellate_join_proposed(j, StrokeStyle(width=4))
    assert b.n_triangles == 4
    # every sub-wedge tip sits within the miter limit
    for p in b.positions:
        assert (Vec2(*p) - j.pivot).norm() <= 2.0 * math.hypot(1, 2.0) + 1e-9


@pytest.mark.parametrize("turn, step, n", [(90, 10, 9), (5, 10, 1), (120, 30, 4), (179.9, 30, 6)])
def test_fan_counts(turn, step, n):
    assert fan_triangle_count(math.radians(turn), math.radians(step)) == n
    line = join_line(turn, pivot=Vec2(0, 0))
    j = make_join(*line.vertices, 4.0, allow_reversal=True)
    b = tessellate_join_fan(j, StrokeStyle(width=4), math.radians(step))
    assert b.label is Label.JOIN_FAN and b.n_triangles == n
    for p, a in zip(b.positions, b.attrs):
        if tuple(a) == (0.0, 1.0):
            assert (Vec2(*p) - j.pivot).norm() == pytest.approx(2.0, rel=1e-12)


def test_fan_step_validation():
    j = make_join(Vec2(-10, 0), Vec2(0, 0), Vec2(0, 10), 2.0)
    with pytest.raises(GeometryError):
        tessellate_join_fan(j, StrokeStyle(width=2), 0.0)


def test_polyline_l_shape(l_polyline):
    batches = tessellate_polyline(l_polyline, StrokeStyle(width=2))
    assert [b.label for b in batches] == [Label.SEGMENT_BODY, Label.JOIN_PROPOSED, Label.SEGMENT_BODY]
    # trimmed bodies carry the pivot as an extra ring vertex
    assert [b.n_triangles for b in batches] == [3, 2, 3]
    assert sum(b.n_triangles for b in batches) == 8


def test_polyline_no_joins():
    line = Polyline([(0, 0), (5, 0), (10, 0)])
    batches = tessellate_polyline(line, StrokeStyle(width=2))
    assert [b.label for b in batches] == [Label.SEGMENT_BODY] * 2
    assert count_joins(line) == 0


def test_polyline_fan_labels(l_polyline):
    batches = tessellate_polyline(l_polyline, StrokeStyle(width=2, join="fan"))
    assert batches[1].label is Label.JOIN_FAN and batches[1].n_triangles == 9


def _area(batches):
    total = 0.0
    for b in batches:
        for p, _ in b.triangles():
            total += 0.5 * abs((p[1, 0] - p[0, 0]) * (p[2, 1] - p[0, 1]) - (p[1, 1] - p[0, 1]) * (p[2, 0] - p[0, 0]))
    return total


@pytest.mark.parametrize("turn", [10, 45, 90, 135, 170])
def test_tessellation_tiles_without_overlap(turn):
    # exact stroke area: two rectangles minus nothing plus the outer wedge
    # (inner kite is shared, outer wedge adds the miter kite of each sub-wedge)
    w, arm = 4.0, 50.0
    line = join_line(turn, pivot=Vec2(0, 0), arm=arm)
    style = StrokeStyle(width=w)
    t = math.radians(turn)
    k = subdivision_count(t, 2.0)
    hw = w / 2
    kite_out = k * hw * hw * math.tan(t / (2 * k))
    kite_in = hw * hw * math.tan(t / 2)
    expected = 2 * arm * w + kite_out - kite_in
    assert _area(tessellate_polyline(line, style)) == pytest.approx(expected, rel=1e-9)


def _affine_fit(p, a):
    m = np.column_stack([p, np.ones(3)])
    return np.linalg.solve(m, a)


@settings(max_examples=150, deadline=None)
@given(
    st.floats(3, 177),
    st.floats(0, 2 * math.pi),
    st.floats(-50, 50),
    st.floats(-50, 50),
    st.floats(0.5, 40),
)
def test_join_attribute_map_is_scaled_isometry(turn, heading, px, py, width):
    line = join_line(turn, pivot=Vec2(px, py), heading=heading)
    j = make_join(*line.vertices, width)
    b = tessellate_join_proposed(j, StrokeStyle(width=width))
    hw = width / 2
    for p, a in b.triangles():
        coef = _affine_fit(p, a)
        lin = coef[:2].T * hw
        # linear part is orthogonal, offset maps the pivot to zero
        assert np.allclose(lin @ lin.T, np.eye(2), atol=1e-7)
        origin = np.array([px, py]) @ coef[:2] + coef[2]
        assert np.allclose(origin, 0.0, atol=1e-7)
