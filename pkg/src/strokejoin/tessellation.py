"""Polyline stroking into anti-aliased triangle batches.

Every vertex carries a 2-D anti-aliasing attribute whose Euclidean norm is
the normalized distance to the stroke skeleton: ``|attr| * (W/2)`` is the
distance in pixels. Segment bodies use ``(0, +-1)`` across the stroke; the
proposed join uses a per-triangle isometric frame centred on the pivot, so
the same norm becomes the radial distance and the wedge renders as a true
arc. The fan join is the chorded baseline.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .geometry import (
    COLLINEAR_EPS,
    REVERSAL_EPS,
    GeometryError,
    JoinGeometry,
    Polyline,
    Side,
    Vec2,
    make_join,
    perp,
    rotate,
    signed_turn_angle,
    unit,
)

MIN_TRIANGLE_AREA = 1e-12
DEFAULT_FAN_STEP = math.radians(10.0)
DEFAULT_MITER_LIMIT = 2.0
JOIN_METHODS = ("proposed", "fan")


class Label(enum.Enum):
    SEGMENT_BODY = "segment_body"
    JOIN_PROPOSED = "join_proposed"
    JOIN_FAN = "join_fan"

    @property
    def is_join(self) -> bool:
        return self is not Label.SEGMENT_BODY


@dataclass(frozen=True)
class AAVertex:
    position: Vec2
    attr: Vec2


@dataclass(frozen=True)
class StrokeStyle:
    """Stroke parameters.

    ``aa_threshold`` of None means auto: a constant one-pixel feather,
    ``N = max(0, 1 - 1/(W/2))``.
    """

    width: float = 8.0
    color: tuple[float, float, float, float] = (0.0, 0.0, 0.0, 1.0)
    aa_threshold: float | None = None
    join: str = "proposed"
    fan_step: float = DEFAULT_FAN_STEP
    miter_limit: float = DEFAULT_MITER_LIMIT

    def __post_init__(self) -> None:
        if not (math.isfinite(self.width) and self.width > 0):
            raise GeometryError(f"stroke width must be positive, got {self.width}")
        if len(self.color) != 4 or not all(0.0 <= c <= 1.0 for c in self.color):
            raise GeometryError(f"color must be 4 channels in [0, 1], got {self.color}")
        if self.aa_threshold is not None and not 0.0 <= self.aa_threshold < 1.0:
            raise GeometryError(f"aa threshold must lie in [0, 1), got {self.aa_threshold}")
        if self.join not in JOIN_METHODS:
            raise GeometryError(f"unknown join method {self.join!r}")
        if not 0.0 < self.fan_step <= 0.5 * math.pi:
            raise GeometryError(f"fan step must lie in (0, pi/2], got {self.fan_step}")
        if not self.miter_limit > 1.0:
            raise GeometryError(f"miter limit must exceed 1, got {self.miter_limit}")

    @property
    def half_width(self) -> float:
        return 0.5 * self.width

    @property
    def threshold(self) -> float:
        if self.aa_threshold is None:
            return auto_threshold(self.width)
        return self.aa_threshold


def auto_threshold(width: float) -> float:
    return max(0.0, 1.0 - 1.0 / (0.5 * width))


@dataclass(frozen=True, eq=False)
class TriangleBatch:
    """Triangles as flat vertex arrays; rows ``3i..3i+2`` form triangle i."""

    positions: np.ndarray
    attrs: np.ndarray
    label: Label
    style_key: int = 0
    # join batches remember their pivot so callers can check radial exactness
    pivot: Vec2 | None = field(default=None)

    def __post_init__(self) -> None:
        if self.positions.shape != self.attrs.shape or self.positions.shape[0] % 3:
            raise GeometryError("batch arrays must be (3k, 2) and match")

    @property
    def n_triangles(self) -> int:
        return self.positions.shape[0] // 3

    @property
    def vertices(self) -> list[AAVertex]:
        return [
            AAVertex(Vec2(*map(float, p)), Vec2(*map(float, a)))
            for p, a in zip(self.positions, self.attrs)
        ]

    def triangles(self):
        for i in range(self.n_triangles):
            yield self.positions[3 * i : 3 * i + 3], self.attrs[3 * i : 3 * i + 3]

    def __len__(self) -> int:
        return self.positions.shape[0]


class _Builder:
    def __init__(self):
        self.pos: list[tuple[float, float]] = []
        self.attr: list[tuple[float, float]] = []

    def tri(self, p0, a0, p1, a1, p2, a2) -> None:
        area = 0.5 * abs((p1.x - p0.x) * (p2.y - p0.y) - (p1.y - p0.y) * (p2.x - p0.x))
        if area <= MIN_TRIANGLE_AREA:
            return
        self.pos += [(p0.x, p0.y), (p1.x, p1.y), (p2.x, p2.y)]
        self.attr += [tuple(a0), tuple(a1), tuple(a2)]

    def fan(self, ring: Sequence[tuple[Vec2, tuple[float, float]]]) -> None:
        p0, a0 = ring[0]
        for (p1, a1), (p2, a2) in zip(ring[1:], ring[2:]):
            self.tri(p0, a0, p1, a1, p2, a2)

    def build(self, label: Label, pivot: Vec2 | None = None) -> TriangleBatch:
        pos = np.array(self.pos, dtype=np.float64).reshape(-1, 2)
        attr = np.array(self.attr, dtype=np.float64).reshape(-1, 2)
        return TriangleBatch(pos, attr, label, pivot=pivot)


_LEFT_ATTR = (0.0, 1.0)
_RIGHT_ATTR = (0.0, -1.0)
_CENTER_ATTR = (0.0, 0.0)


def tessellate_segment(p0: Vec2, p1: Vec2, style: StrokeStyle) -> TriangleBatch:
    """Rectangle of width W centred on p0p1, split into two triangles."""
    d = unit(p1 - p0)
    n = perp(d, Side.LEFT) * style.half_width
    b = _Builder()
    b.fan([
        (p0 + n, _LEFT_ATTR),
        (p0 - n, _RIGHT_ATTR),
        (p1 - n, _RIGHT_ATTR),
        (p1 + n, _LEFT_ATTR),
    ])
    return b.build(Label.SEGMENT_BODY)


def subdivision_count(turn_angle: float, miter_limit: float) -> int:
    """Smallest k with tan(turn / 2k) <= miter_limit."""
    k = 1
    while math.tan(0.5 * turn_angle / k) > miter_limit:
        k += 1
    return k


def fan_triangle_count(turn_angle: float, step: float) -> int:
    # the epsilon keeps exact multiples such as 90/10 from rounding up
    return max(1, math.ceil(turn_angle / step - 1e-9))


def _rim(join: JoinGeometry, k: int) -> list[Vec2]:
    """k+1 points on the half-width circle from b_in to b_out."""
    sign = 1.0 if join.side is Side.RIGHT else -1.0
    n_in = unit(join.b_in - join.pivot)
    pts = [join.b_in]
    for j in range(1, k):
        pts.append(join.pivot + rotate(n_in, sign * join.turn_angle * j / k) * join.half_width)
    pts.append(join.b_out)
    return pts


def tessellate_join_proposed(join: JoinGeometry, style: StrokeStyle) -> TriangleBatch:
    """Two triangles per sub-wedge; one sub-wedge unless the miter limit trips.

    Attributes: pivot (0, 0), rim point (0, 1), sub-wedge miter tip (t, 1)
    with ``t = tan(half sub-wedge)``. Each triangle's attribute map is an
    isometry scaled by 1/(W/2), so |attr| tracks radial distance exactly.
    """
    k = subdivision_count(join.turn_angle, style.miter_limit)
    phi = 0.5 * join.turn_angle / k
    t = math.tan(phi)
    rim = _rim(join, k)
    sign = 1.0 if join.side is Side.RIGHT else -1.0
    n_in = unit(join.b_in - join.pivot)
    reach = join.half_width / math.cos(phi)
    b = _Builder()
    for j in range(k):
        if k == 1 and join.miter_tip is not None:
            tip = join.miter_tip
        else:
            tip = join.pivot + rotate(n_in, sign * (2 * j + 1) * phi) * reach
        b.tri(join.pivot, _CENTER_ATTR, rim[j], (0.0, 1.0), tip, (t, 1.0))
        b.tri(join.pivot, _CENTER_ATTR, tip, (t, 1.0), rim[j + 1], (0.0, 1.0))
    return b.build(Label.JOIN_PROPOSED, pivot=join.pivot)


def tessellate_join_fan(join: JoinGeometry, style: StrokeStyle, step_angle: float | None = None) -> TriangleBatch:
    """Baseline: ceil(turn/step) chorded triangles fanned around the pivot."""
    step = style.fan_step if step_angle is None else step_angle
    if not 0.0 < step <= 0.5 * math.pi:
        raise GeometryError(f"fan step must lie in (0, pi/2], got {step}")
    rim = _rim(join, fan_triangle_count(join.turn_angle, step))
    b = _Builder()
    for r0, r1 in zip(rim, rim[1:]):
        b.tri(join.pivot, _CENTER_ATTR, r0, (0.0, 1.0), r1, (0.0, 1.0))
    return b.build(Label.JOIN_FAN, pivot=join.pivot)


def tessellate_join(join: JoinGeometry, style: StrokeStyle) -> TriangleBatch:
    if style.join == "fan":
        return tessellate_join_fan(join, style)
    return tessellate_join_proposed(join, style)


@dataclass
class _Corner:
    """Cross-section where two bodies meet at an interior vertex."""

    join: JoinGeometry | None
    # (left, right) end points of the incoming body and start of the outgoing one
    end_in: tuple[Vec2, Vec2]
    start_out: tuple[Vec2, Vec2]
    # pivot sits between left and right when the inner side is trimmed
    trimmed: bool


def _corners(line: Polyline, style: StrokeStyle) -> list[_Corner]:
    verts = line.vertices
    hw = style.half_width
    n = len(verts)
    lengths = [(b - a).norm() for a, b in line.segments()]

    # inner cut length along each segment if the join were trimmed at the bisector
    joins: list[JoinGeometry | None] = [None] * n
    cuts = [0.0] * n
    for i in range(1, n - 1):
        jg = make_join(verts[i - 1], verts[i], verts[i + 1], style.width, allow_reversal=True)
        joins[i] = jg
        if jg is not None and jg.turn_angle < math.pi - REVERSAL_EPS:
            cuts[i] = hw * math.tan(0.5 * jg.turn_angle)

    corners = []
    for i in range(1, n - 1):
        pivot = verts[i]
        jg = joins[i]
        if jg is None:
            d_in = unit(pivot - verts[i - 1])
            d_out = unit(verts[i + 1] - pivot)
            nrm = unit(perp(d_in, Side.LEFT) + perp(d_out, Side.LEFT)) * hw
            ends = (pivot + nrm, pivot - nrm)
            corners.append(_Corner(None, ends, ends, False))
            continue
        fits = (
            cuts[i] > 0.0
            and cuts[i] + cuts[i - 1] <= lengths[i - 1]
            and cuts[i] + cuts[i + 1] <= lengths[i]
        )
        n_in = jg.b_in - pivot
        n_out = jg.b_out - pivot
        if fits:
            inner = pivot - unit(n_in + n_out) * (hw / math.cos(0.5 * jg.turn_angle))
            inner_in = inner_out = inner
        else:
            inner_in = pivot - n_in
            inner_out = pivot - n_out
        if jg.side is Side.LEFT:
            end_in, start_out = (jg.b_in, inner_in), (jg.b_out, inner_out)
        else:
            end_in, start_out = (inner_in, jg.b_in), (inner_out, jg.b_out)
        corners.append(_Corner(jg, end_in, start_out, fits))
    return corners


def _body(p0: Vec2, p1: Vec2, start: _Corner | None, end: _Corner | None, style: StrokeStyle) -> TriangleBatch:
    if start is None and end is None:
        return tessellate_segment(p0, p1, style)
    n = perp(unit(p1 - p0), Side.LEFT) * style.half_width
    ls, rs = start.start_out if start else (p0 + n, p0 - n)
    re_, le = (end.end_in[1], end.end_in[0]) if end else (p1 - n, p1 + n)
    ring = [(ls, _LEFT_ATTR)]
    if start is not None and start.trimmed:
        ring.append((p0, _CENTER_ATTR))
    ring += [(rs, _RIGHT_ATTR), (re_, _RIGHT_ATTR)]
    if end is not None and end.trimmed:
        ring.append((p1, _CENTER_ATTR))
    ring.append((le, _LEFT_ATTR))
    b = _Builder()
    b.fan(ring)
    return b.build(Label.SEGMENT_BODY)


def tessellate_polyline(line: Polyline, style: StrokeStyle) -> list[TriangleBatch]:
    """Body and join batches in path order: body, join, body, ...

    Bodies end at the perpendicular through the pivot on the outer side of
    a turn and at the corner bisector on the inner side, so bodies and
    join wedges tile the stroke with disjoint interiors.
    """
    verts = line.vertices
    corners = _corners(line, style)
    out = []
    for i in range(len(verts) - 1):
        start = corners[i - 1] if i > 0 else None
        end = corners[i] if i < len(verts) - 2 else None
        out.append(_body(verts[i], verts[i + 1], start, end, style))
        if end is not None and end.join is not None:
            out.append(tessellate_join(end.join, style))
    return out


def turn_angles(line: Polyline) -> list[float]:
    """Unsigned turn angle at each interior vertex."""
    verts = line.vertices
    out = []
    for a, p, b in zip(verts, verts[1:], verts[2:]):
        out.append(abs(signed_turn_angle(unit(p - a), unit(b - p))))
    return out


def count_joins(line: Polyline) -> int:
    return sum(1 for t in turn_angles(line) if t >= COLLINEAR_EPS)
