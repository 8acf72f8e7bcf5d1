"""2-D vector math and line-join construction.

Joins are built on the outer side of a turn only: two offset points at
half-width from the pivot plus the miter tip where the extended outer
offset edges meet.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

COLLINEAR_EPS = 1e-6
REVERSAL_EPS = 1e-6
DEGENERATE_NORM = 1e-12
VERTEX_EPS = 1e-9


class GeometryError(ValueError):
    pass


class DegenerateVectorError(GeometryError):
    pass


class NearReversalError(GeometryError):
    """The turn is so close to 180 degrees that the miter tip diverges."""


class Side(enum.Enum):
    LEFT = "left"
    RIGHT = "right"

    @property
    def opposite(self) -> Side:
        return Side.RIGHT if self is Side.LEFT else Side.LEFT


@dataclass(frozen=True, slots=True)
class Vec2:
    x: float
    y: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise GeometryError(f"non-finite vector ({self.x}, {self.y})")

    def __add__(self, o: Vec2) -> Vec2:
        return Vec2(self.x + o.x, self.y + o.y)

    def __sub__(self, o: Vec2) -> Vec2:
        return Vec2(self.x - o.x, self.y - o.y)

    def __mul__(self, k: float) -> Vec2:
        return Vec2(self.x * k, self.y * k)

    __rmul__ = __mul__

    def __neg__(self) -> Vec2:
        return Vec2(-self.x, -self.y)

    def __iter__(self):
        yield self.x
        yield self.y

    def dot(self, o: Vec2) -> float:
        return self.x * o.x + self.y * o.y

    def cross(self, o: Vec2) -> float:
        return self.x * o.y - self.y * o.x

    def norm(self) -> float:
        return math.hypot(self.x, self.y)


def vec(p: Vec2 | Sequence[float]) -> Vec2:
    if isinstance(p, Vec2):
        return p
    x, y = p
    return Vec2(float(x), float(y))


def unit(v: Vec2) -> Vec2:
    n = v.norm()
    if n <= DEGENERATE_NORM:
        raise DegenerateVectorError(f"cannot normalize vector of length {n:g}")
    return Vec2(v.x / n, v.y / n)


def perp(v: Vec2, side: Side) -> Vec2:
    """Rotate by 90 degrees: LEFT is counterclockwise, RIGHT clockwise."""
    if side is Side.LEFT:
        return Vec2(-v.y, v.x)
    return Vec2(v.y, -v.x)


def signed_turn_angle(dir_in: Vec2, dir_out: Vec2) -> float:
    """Exterior turn angle in (-pi, pi]; positive for a left turn."""
    return math.atan2(dir_in.cross(dir_out), dir_in.dot(dir_out))


def rotate(v: Vec2, angle: float) -> Vec2:
    c, s = math.cos(angle), math.sin(angle)
    return Vec2(c * v.x - s * v.y, s * v.x + c * v.y)


@dataclass(frozen=True)
class Polyline:
    vertices: tuple[Vec2, ...]

    def __init__(self, vertices: Iterable[Vec2 | Sequence[float]]):
        verts = tuple(vec(p) for p in vertices)
        if len(verts) < 2:
            raise GeometryError(f"polyline needs at least 2 vertices, got {len(verts)}")
        for i, (a, b) in enumerate(zip(verts, verts[1:])):
            if (b - a).norm() <= VERTEX_EPS:
                raise GeometryError(f"consecutive vertices {i} and {i + 1} coincide")
        object.__setattr__(self, "vertices", verts)

    def __len__(self) -> int:
        return len(self.vertices)

    def __iter__(self):
        return iter(self.vertices)

    def segments(self):
        return zip(self.vertices, self.vertices[1:])

    def transformed(self, fn) -> Polyline:
        return Polyline(fn(v) for v in self.vertices)


@dataclass(frozen=True)
class JoinGeometry:
    """Outer-side wedge of a join.

    ``miter_tip`` is None only for near-reversal wedges, which carry no
    finite miter and must be subdivided before use.
    """

    pivot: Vec2
    b_in: Vec2
    b_out: Vec2
    miter_tip: Vec2 | None
    turn_angle: float
    side: Side
    half_width: float

    @property
    def width(self) -> float:
        return 2.0 * self.half_width


def make_join(
    prev: Vec2,
    pivot: Vec2,
    next: Vec2,
    width: float,
    *,
    allow_reversal: bool = False,
) -> JoinGeometry | None:
    """Build the outer join wedge at ``pivot``; None for collinear joins.

    Raises NearReversalError when the turn is within REVERSAL_EPS of a
    half-turn, unless ``allow_reversal`` is set, in which case the wedge
    is returned without a miter tip.
    """
    if not width > 0:
        raise GeometryError(f"width must be positive, got {width}")
    d_in = unit(pivot - prev)
    d_out = unit(next - pivot)
    theta = signed_turn_angle(d_in, d_out)
    turn = abs(theta)
    if turn < COLLINEAR_EPS:
        return None
    # a left turn opens its wedge on the right
    side = Side.RIGHT if theta > 0 else Side.LEFT
    hw = 0.5 * width
    n_in = perp(d_in, side)
    n_out = perp(d_out, side)
    b_in = pivot + n_in * hw
    b_out = pivot + n_out * hw
    if turn > math.pi - REVERSAL_EPS:
        if not allow_reversal:
            raise NearReversalError(
                f"turn of {math.degrees(turn):.6f} deg is too close to a reversal"
            )
        tip = None
    else:
        tip = pivot + unit(n_in + n_out) * (hw / math.cos(0.5 * turn))
    return JoinGeometry(pivot, b_in, b_out, tip, turn, side, hw)


def line_intersection(p: Vec2, d: Vec2, q: Vec2, e: Vec2) -> Vec2:
    """Intersect the lines p + s*d and q + u*e."""
    den = d.cross(e)
    if abs(den) <= DEGENERATE_NORM:
        raise DegenerateVectorError("parallel lines do not intersect")
    s = (q - p).cross(e) / den
    return p + d * s


def point_line_distance(p: Vec2, a: Vec2, direction: Vec2) -> float:
    return abs(unit(direction).cross(p - a))


def point_segment_distance(p: Vec2, a: Vec2, b: Vec2) -> float:
    ab = b - a
    t = (p - a).dot(ab) / ab.dot(ab)
    t = min(1.0, max(0.0, t))
    return (p - (a + ab * t)).norm()
