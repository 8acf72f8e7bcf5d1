"""Polyline loading (plain path text and a GeoJSON line subset) and viewport fitting."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Sequence

from .geometry import GeometryError, Polyline, Vec2


class IngestError(ValueError):
    pass


class ParseError(IngestError):
    def __init__(self, message: str, *, line: int | None = None, offset: int | None = None):
        where = f"line {line}" if line is not None else f"byte {offset}" if offset is not None else None
        super().__init__(f"{where}: {message}" if where else message)
        self.line = line
        self.offset = offset


class ValidationError(IngestError):
    pass


class EmptySceneError(IngestError):
    pass


@dataclass(frozen=True)
class Scene:
    polylines: tuple[Polyline, ...]

    def __post_init__(self):
        object.__setattr__(self, "polylines", tuple(self.polylines))

    @property
    def bounds(self) -> tuple[Vec2, Vec2]:
        if not self.polylines:
            raise EmptySceneError("scene has no polylines")
        xs = [v.x for line in self.polylines for v in line]
        ys = [v.y for line in self.polylines for v in line]
        return Vec2(min(xs), min(ys)), Vec2(max(xs), max(ys))

    @property
    def n_vertices(self) -> int:
        return sum(len(line) for line in self.polylines)


def _decode(data: str | bytes) -> str:
    if isinstance(data, str):
        return data
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ParseError("input is not valid UTF-8", offset=exc.start) from None


def _polyline(points: Sequence[Vec2], where: str) -> Polyline:
    if len(points) < 2:
        raise ValidationError(f"{where}: polyline needs at least 2 points, got {len(points)}")
    try:
        return Polyline(points)
    except GeometryError as exc:
        raise ValidationError(f"{where}: {exc}") from None


def parse_path_text(text: str | bytes) -> Scene:
    """One ``x y`` pair per line, blank lines between polylines, ``#`` comments."""
    text = _decode(text)
    lines: list[Polyline] = []
    current: list[Vec2] = []
    start = 1

    def flush():
        if current:
            lines.append(_polyline(current, f"polyline starting at line {start}"))
            current.clear()

    for no, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].strip()
        if not body:
            # comment-only lines do not break a polyline
            if not raw.strip():
                flush()
            continue
        tokens = body.split()
        if len(tokens) != 2:
            raise ParseError(f"expected 'x y', got {body!r}", line=no)
        try:
            x, y = float(tokens[0]), float(tokens[1])
        except ValueError:
            raise ParseError(f"malformed number in {body!r}", line=no) from None
        if not (math.isfinite(x) and math.isfinite(y)):
            raise ParseError(f"non-finite coordinate in {body!r}", line=no)
        if not current:
            start = no
        current.append(Vec2(x, y))
    flush()
    if not lines:
        raise EmptySceneError("no polylines in input")
    return Scene(tuple(lines))


def format_path_text(scene: Scene) -> str:
    blocks = ["\n".join(f"{v.x!r} {v.y!r}" for v in line) for line in scene.polylines]
    return "\n\n".join(blocks) + "\n"


def _reject_constant(name):
    raise ValueError(f"{name} is not valid JSON")


def _coords(value, where: str) -> list[Vec2]:
    if not isinstance(value, list):
        raise ValidationError(f"{where}: coordinates must be an array")
    pts = []
    for i, pos in enumerate(value):
        if not isinstance(pos, list) or len(pos) < 2:
            raise ValidationError(f"{where}: position {i} needs at least 2 numbers")
        x, y = pos[0], pos[1]
        if isinstance(x, bool) or isinstance(y, bool) or not isinstance(x, (int, float)) or not isinstance(y, (int, float)):
            raise ValidationError(f"{where}: position {i} is not numeric")
        x, y = float(x), float(y)
        if not (math.isfinite(x) and math.isfinite(y)):
            raise ValidationError(f"{where}: position {i} is not finite")
        pts.append(Vec2(x, y))
    return pts


def _collect(node, out: list[Polyline], depth: int = 0) -> None:
    if not isinstance(node, dict) or depth > 64:
        return
    kind = node.get("type")
    if kind == "FeatureCollection":
        feats = node.get("features")
        if isinstance(feats, list):
            for f in feats:
                _collect(f, out, depth + 1)
    elif kind == "Feature":
        _collect(node.get("geometry"), out, depth + 1)
    elif kind == "GeometryCollection":
        geoms = node.get("geometries")
        if isinstance(geoms, list):
            for g in geoms:
                _collect(g, out, depth + 1)
    elif kind == "LineString":
        out.append(_polyline(_coords(node.get("coordinates"), "LineString"), "LineString"))
    elif kind == "MultiLineString":
        parts = node.get("coordinates")
        if not isinstance(parts, list):
            raise ValidationError("MultiLineString: coordinates must be an array")
        for i, part in enumerate(parts):
            out.append(_polyline(_coords(part, f"MultiLineString part {i}"), f"MultiLineString part {i}"))


def parse_geojson_lines(text: str | bytes) -> Scene:
    """LineString and MultiLineString geometries from any GeoJSON object.

    Other geometry types and foreign members are ignored; positions keep
    their first two components.
    """
    text = _decode(text)
    try:
        doc = json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, offset=len(text[: exc.pos].encode("utf-8"))) from None
    except (ValueError, RecursionError) as exc:
        raise ParseError(str(exc) or "malformed JSON", offset=0) from None
    lines: list[Polyline] = []
    _collect(doc, lines)
    if not lines:
        raise EmptySceneError("no LineString or MultiLineString geometry found")
    return Scene(tuple(lines))


def format_geojson(scene: Scene) -> str:
    """FeatureCollection with one LineString feature per polyline."""
    feats = [
        {"type": "Feature", "properties": {}, "geometry": {"type": "LineString", "coordinates": [[v.x, v.y] for v in line]}}
        for line in scene.polylines
    ]
    return json.dumps({"type": "FeatureCollection", "features": feats}, allow_nan=False)


def load_scene(path, fmt: str = "path") -> Scene:
    with open(path, "rb") as fh:
        data = fh.read()
    if fmt == "geojson":
        return parse_geojson_lines(data)
    if fmt == "path":
        return parse_path_text(data)
    raise ValueError(f"unknown input format {fmt!r}")


@dataclass(frozen=True)
class ViewTransform:
    """Uniform scale with a y flip: ``screen = (s*x + tx, -s*y + ty)``."""

    scale: float
    tx: float
    ty: float

    def __call__(self, p: Vec2) -> Vec2:
        return Vec2(self.scale * p.x + self.tx, -self.scale * p.y + self.ty)

    def apply(self, scene: Scene) -> list[Polyline]:
        return [line.transformed(self) for line in scene.polylines]


def fit_viewport(scene: Scene, viewport: tuple[int, int], margin: float = 0.0) -> ViewTransform:
    """Largest uniform fit of the scene bounds inside the viewport minus margin, centred."""
    w, h = viewport
    if not 2 * margin < min(w, h):
        raise ValidationError(f"margin {margin} leaves no room in a {w}x{h} viewport")
    lo, hi = scene.bounds
    ex, ey = hi.x - lo.x, hi.y - lo.y
    if ex <= 0 and ey <= 0:
        raise EmptySceneError("scene bounds are a single point")
    scales = []
    if ex > 0:
        scales.append((w - 2 * margin) / ex)
    if ey > 0:
        scales.append((h - 2 * margin) / ey)
    s = min(scales)
    cx, cy = 0.5 * (lo.x + hi.x), 0.5 * (lo.y + hi.y)
    return ViewTransform(s, 0.5 * w - s * cx, 0.5 * h + s * cy)
