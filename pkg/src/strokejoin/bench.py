"""Synthetic road networks and the measurements that compare join methods.

Scene objects are world-space and get fitted to the viewport; plain lists
of Polyline are taken as already in screen pixels.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np
from scipy.ndimage import map_coordinates

from . import _kernels
from .geometry import Polyline, Side, Vec2, make_join, point_segment_distance, rotate, unit
from .ingest import Scene, fit_viewport
from .raster import (
    AccountingMode,
    Framebuffer,
    RenderStats,
    Tessellator,
    draw_call_cost,
    render_batches,
    render_scene,
)
from .tessellation import (
    StrokeStyle,
    TriangleBatch,
    count_joins,
    tessellate_join_fan,
    tessellate_polyline,
    tessellate_segment,
)

log = logging.getLogger(__name__)

METHODS = ("proposed", "fan")
DEFAULT_MARGIN = 16.0

# Generator parameters, world units. Strokes up to GEN_HALF_WIDTH wide on
# each side tessellate without any self-overlap.
GEN_HALF_WIDTH = 10.0
GEN_CELL = 700.0
GEN_MIN_SEGMENT = 80.0
GEN_MAX_SEGMENT = 180.0
GEN_MIN_TURN = math.radians(5.0)
GEN_MAX_TURN = math.radians(175.0)
GEN_MAX_EXTRA_SEGMENTS = 6
GEN_ATTEMPTS = 500


# ----------------------------------------------------------------------------
# generation

def segments_per_road_bounds(density: float) -> tuple[int, int]:
    """Inclusive range of segment counts per road; vertex counts are one more."""
    return 2, 2 + int(round(GEN_MAX_EXTRA_SEGMENTS * density))


def _clear(verts: list[Vec2], hw: float) -> bool:
    gap = 2.5 * hw
    segs = list(zip(verts, verts[1:]))
    for i, (a, b) in enumerate(segs):
        for j in range(i + 2, len(segs)):
            c, d = segs[j]
            if min(
                point_segment_distance(a, c, d),
                point_segment_distance(b, c, d),
                point_segment_distance(c, a, b),
                point_segment_distance(d, a, b),
            ) < gap:
                return False
            if _segments_cross(a, b, c, d):
                return False
        if i + 1 < len(segs):
            # far ends of adjacent segments must stay clear of the neighbour's stroke
            c, d = segs[i + 1]
            if point_segment_distance(a, c, d) < gap or point_segment_distance(d, a, b) < gap:
                return False
    return True


def _segments_cross(a, b, c, d) -> bool:
    def orient(p, q, r):
        return (q - p).cross(r - p)

    return (orient(a, b, c) > 0) != (orient(a, b, d) > 0) and (orient(c, d, a) > 0) != (orient(c, d, b) > 0)


def _road(rng: np.random.Generator, start: Vec2, n_seg: int, hw: float) -> list[Vec2]:
    for _ in range(GEN_ATTEMPTS):
        heading = rng.uniform(0.0, 2.0 * math.pi)
        turns = rng.uniform(GEN_MIN_TURN, GEN_MAX_TURN, size=n_seg - 1)
        turns *= rng.choice((-1.0, 1.0), size=n_seg - 1)
        cut = np.concatenate(([0.0], hw * np.tan(0.5 * np.abs(turns)), [0.0]))
        lengths = rng.uniform(GEN_MIN_SEGMENT, GEN_MAX_SEGMENT, size=n_seg)
        # room for the inner-side trim at both ends of every segment
        lengths += 1.1 * (cut[:-1] + cut[1:])
        verts = [start]
        d = Vec2(math.cos(heading), math.sin(heading))
        for k in range(n_seg):
            if k:
                d = rotate(d, turns[k - 1])
            verts.append(verts[-1] + d * float(lengths[k]))
        if _clear(verts, hw):
            return verts
    raise RuntimeError("could not place a self-clear road; loosen the generator")


def gen_network(seed: int, n_roads: int, density: float, *, half_width: float = GEN_HALF_WIDTH) -> Scene:
    """Jittered-grid road network, deterministic per seed.

    Each road starts near its own grid cell centre and carries between
    ``segments_per_road_bounds(density)`` segments, with unsigned turn
    angles uniform in (5, 175) degrees. Roads never come within 2.5
    ``half_width`` of themselves away from their own joins.
    """
    if n_roads < 1:
        raise ValueError("n_roads must be at least 1")
    if not 0.0 < density <= 1.0:
        raise ValueError("density must lie in (0, 1]")
    rng = np.random.default_rng(seed)
    cols = math.ceil(math.sqrt(n_roads))
    lo, hi = segments_per_road_bounds(density)
    roads = []
    for r in range(n_roads):
        cx = (r % cols + 0.5 + rng.uniform(-0.25, 0.25)) * GEN_CELL
        cy = (r // cols + 0.5 + rng.uniform(-0.25, 0.25)) * GEN_CELL
        n_seg = int(rng.integers(lo, hi + 1))
        roads.append(Polyline(_road(rng, Vec2(cx, cy), n_seg, half_width)))
    return Scene(tuple(roads))


def benchmark_networks(seeds: Iterable[int] = range(1, 11), n_roads: int = 8) -> list[Scene]:
    """Networks of increasing density: seed i uses density i/10 (capped at 1)."""
    return [gen_network(s, n_roads, min(1.0, max(0.1, s / 10.0))) for s in seeds]


# ----------------------------------------------------------------------------
# accounting

def count_draw_calls(batches: Sequence[TriangleBatch], mode: AccountingMode) -> int:
    total = 0
    key = None
    for batch in batches:
        cost, key = draw_call_cost(batch, mode, key)
        total += cost
    return total


def screen_lines(scene, viewport: tuple[int, int], margin: float = DEFAULT_MARGIN) -> list[Polyline]:
    if isinstance(scene, Scene):
        return fit_viewport(scene, viewport, margin).apply(scene)
    return list(scene)


def legacy_overlap_tessellation(line: Polyline, style: StrokeStyle) -> list[TriangleBatch]:
    """Old-style stroking kept only to reproduce repeated corner drawing.

    Each segment rectangle is pushed past its interior ends by the miter
    extension and a fan is laid over the corner as well, so corners are
    drawn more than once. Not part of the stroking API.
    """
    verts = line.vertices
    hw = style.half_width
    ext = [0.0] * len(verts)
    joins = {}
    for i in range(1, len(verts) - 1):
        jg = make_join(verts[i - 1], verts[i], verts[i + 1], style.width, allow_reversal=True)
        if jg is not None:
            joins[i] = jg
            ext[i] = hw * min(math.tan(0.5 * jg.turn_angle), style.miter_limit)
    out = []
    for i, (a, b) in enumerate(line.segments()):
        d = unit(b - a)
        out.append(tessellate_segment(a - d * ext[i], b + d * ext[i + 1], style))
        if i + 1 in joins:
            out.append(tessellate_join_fan(joins[i + 1], style))
    return out


def measure_overlap(scene, style: StrokeStyle, viewport: tuple[int, int], *, tessellator: Tessellator | None = None) -> int:
    """Pixels written with alpha > 0 at least twice by the same stroke."""
    lines = screen_lines(scene, viewport)
    _, stats = render_scene(lines, style, viewport, tessellator=tessellator)
    return stats.overlap_pixels


# ----------------------------------------------------------------------------
# arc fidelity

def join_fixture(turn_angle: float, viewport: tuple[int, int], *, heading: float = 0.3) -> tuple[Polyline, Vec2]:
    """Two long arms meeting near the viewport centre with the given turn."""
    w, h = viewport
    # off-grid pivot so no symmetry hides sampling error
    pivot = Vec2(0.5 * w + 0.37, 0.5 * h + 0.21)
    arm = float(max(w, h))
    d_in = Vec2(math.cos(heading), math.sin(heading))
    d_out = rotate(d_in, turn_angle)
    return Polyline([pivot - d_in * arm, pivot, pivot + d_out * arm]), pivot


def iso_radius(alpha: np.ndarray, pivot: Vec2, direction: Vec2, level: float, r_max: float) -> float:
    """Distance from pivot along ``direction`` where bilinear alpha first drops to ``level``."""

    def sample(r):
        r = np.atleast_1d(r)
        x = pivot.x + direction.x * r - 0.5
        y = pivot.y + direction.y * r - 0.5
        return map_coordinates(alpha, [y, x], order=1, mode="nearest")

    rs = np.arange(0.0, r_max, 0.02)
    vals = sample(rs)
    below = np.nonzero(vals < level)[0]
    if below.size == 0 or below[0] == 0:
        return float("nan")
    lo, hi = rs[below[0] - 1], rs[below[0]]
    for _ in range(50):
        mid = 0.5 * (lo + hi)
        if sample(mid)[0] >= level:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def arc_profile(style: StrokeStyle, turn_angle: float, viewport: tuple[int, int] = (96, 96)) -> tuple[np.ndarray, np.ndarray, float]:
    """Measured alpha=0.5 radius on 1-degree rays across the wedge.

    Returns (ray angles from the incoming offset direction, radii, ideal
    radius). The ideal radius is where the alpha ramp crosses one half,
    ``(W/2) * (1 + N) / 2``.
    """
    if not 0.0 < turn_angle < math.pi:
        raise ValueError("turn angle must lie in (0, pi)")
    line, pivot = join_fixture(turn_angle, viewport)
    fb, _ = render_scene([line], replace(style, color=(0.0, 0.0, 0.0, 1.0)), viewport)
    jg = make_join(*line.vertices, style.width, allow_reversal=True)
    sign = 1.0 if jg.side is Side.RIGHT else -1.0
    n_in = unit(jg.b_in - jg.pivot)
    m = max(1, math.ceil(math.degrees(turn_angle) - 1e-9))
    angles = np.array([turn_angle * j / m for j in range(m + 1)])
    radii = np.array(
        [iso_radius(fb.alpha, pivot, rotate(n_in, sign * a), 0.5, 2.0 * style.width) for a in angles]
    )
    ideal = style.half_width * (1.0 + style.threshold) / 2.0
    return angles, radii, ideal


def arc_fidelity(style: StrokeStyle, turn_angle: float, viewport: tuple[int, int] = (96, 96)) -> float:
    """Worst radial error of the rendered alpha=0.5 contour across the join, in px."""
    _, radii, ideal = arc_profile(style, turn_angle, viewport)
    return float(np.nanmax(np.abs(radii - ideal)))


# ----------------------------------------------------------------------------
# supersampled oracle

def oracle_render(scene, style: StrokeStyle, viewport: tuple[int, int], supersample: int = 16) -> np.ndarray:
    """Ground-truth alpha from the analytic stroke: round joins, butt ends.

    Every pixel averages ``supersample**2`` point samples of the same
    distance-to-alpha rule, using exact distance to the polyline instead of
    any triangle or attribute. Strokes composite source-over in order.
    """
    if supersample < 4:
        raise ValueError("supersample must be at least 4")
    w, h = viewport
    acc = np.zeros((h, w), dtype=np.float64)
    ca = style.color[3]
    for line in screen_lines(scene, viewport):
        verts = np.array([tuple(v) for v in line], dtype=np.float64)
        a = np.zeros((h, w), dtype=np.float64)
        _kernels.oracle_stroke(verts, style.half_width, float(style.threshold), int(supersample), a, 0, h)
        a *= ca
        acc = a + acc * (1.0 - a)
    return acc


def distance_field(lines: Sequence[Polyline], viewport: tuple[int, int]) -> np.ndarray:
    """Distance from every pixel centre to the nearest centreline."""
    w, h = viewport
    ys, xs = np.mgrid[0:h, 0:w]
    cx = xs + 0.5
    cy = ys + 0.5
    best = np.full((h, w), np.inf)
    for line in lines:
        verts = np.array([tuple(v) for v in line], dtype=np.float64)
        for a, b in zip(verts, verts[1:]):
            best = np.minimum(best, _kernels._seg_d2(cx, cy, a, b, False, False))
    return np.sqrt(best)


def oracle_error(scene, style: StrokeStyle, viewport: tuple[int, int], supersample: int = 16) -> float:
    """Mean |pipeline alpha - oracle alpha| over pixels within W of a centreline."""
    lines = screen_lines(scene, viewport)
    fb, _ = render_scene(lines, style, viewport)
    truth = oracle_render(lines, style, viewport, supersample)
    near = distance_field(lines, viewport) <= style.width
    if not near.any():
        return 0.0
    return float(np.abs(fb.alpha - truth)[near].mean())


# ----------------------------------------------------------------------------
# method comparison

@dataclass
class ComparisonRow:
    network: str
    joins: int
    vertices: int
    # method -> accounting mode value -> stats
    stats: dict[str, dict[str, RenderStats]]

    def record(self) -> dict:
        return {
            "network": self.network,
            "joins": self.joins,
            "vertices": self.vertices,
            "methods": {
                m: {mode: s.as_dict() for mode, s in by_mode.items()}
                for m, by_mode in self.stats.items()
            },
        }


_COLUMNS = ("draw_calls", "triangles", "fragments_shaded", "overlap_pixels")


@dataclass
class ComparisonReport:
    rows: list[ComparisonRow]
    fan_step: float
    diff_images: dict[str, np.ndarray] = field(default_factory=dict, repr=False)

    def average(self, method: str, mode: AccountingMode | str, column: str) -> float:
        mode = AccountingMode(mode).value
        return float(np.mean([getattr(r.stats[method][mode], column) for r in self.rows]))

    def averages(self) -> dict:
        return {
            m: {mode.value: {c: self.average(m, mode, c) for c in _COLUMNS} for mode in AccountingMode}
            for m in METHODS
        }

    def draw_call_ratio(self, mode: AccountingMode | str = AccountingMode.PER_FEATURE) -> float:
        """Mean over networks of fan / proposed draw calls."""
        mode = AccountingMode(mode).value
        return float(np.mean([
            r.stats["fan"][mode].draw_calls / r.stats["proposed"][mode].draw_calls for r in self.rows
        ]))

    def header(self) -> list[str]:
        cols = ["network", "joins", "vertices"]
        for m in METHODS:
            cols += [
                f"{m}_draw_calls_per_feature",
                f"{m}_draw_calls_batched",
                f"{m}_triangles",
                f"{m}_fragments",
                f"{m}_overlap",
            ]
        return cols

    def _cells(self, get) -> list[str]:
        out = []
        for m in METHODS:
            out += [
                get(m, AccountingMode.PER_FEATURE, "draw_calls"),
                get(m, AccountingMode.BATCHED, "draw_calls"),
                get(m, AccountingMode.PER_FEATURE, "triangles"),
                get(m, AccountingMode.PER_FEATURE, "fragments_shaded"),
                get(m, AccountingMode.PER_FEATURE, "overlap_pixels"),
            ]
        return out

    def to_tsv(self) -> str:
        lines = ["\t".join(self.header())]
        for r in self.rows:
            cells = self._cells(lambda m, mode, c: str(getattr(r.stats[m][mode.value], c)))
            lines.append("\t".join([r.network, str(r.joins), str(r.vertices)] + cells))
        if self.rows:
            joins = np.mean([r.joins for r in self.rows])
            verts = np.mean([r.vertices for r in self.rows])
            cells = self._cells(lambda m, mode, c: f"{self.average(m, mode, c):.4g}")
            lines.append("\t".join(["average", f"{joins:.4g}", f"{verts:.4g}"] + cells))
        return "\n".join(lines) + "\n"

    def to_jsonl(self) -> str:
        recs = [r.record() for r in self.rows]
        recs.append({"network": "average", "methods": self.averages()})
        return "".join(json.dumps(rec, sort_keys=True) + "\n" for rec in recs)


def _tessellate(lines, style):
    return [tessellate_polyline(line, style) for line in lines]


def compare_methods(
    networks: Sequence,
    style: StrokeStyle,
    viewport: tuple[int, int],
    *,
    fan_step: float | None = None,
    ids: Sequence[str] | None = None,
    keep_diff: bool = False,
    workers: int = 1,
) -> ComparisonReport:
    """Render every network with both join methods and collect statistics."""
    if not networks:
        raise ValueError("need at least one network")
    step = style.fan_step if fan_step is None else fan_step
    styles = {
        "proposed": replace(style, join="proposed"),
        "fan": replace(style, join="fan", fan_step=step),
    }
    ids = list(ids) if ids is not None else [str(i + 1) for i in range(len(networks))]
    rows = []
    diffs = {}
    for nid, net in zip(ids, networks):
        lines = screen_lines(net, viewport)
        _check_generator_scale(net, viewport, style)
        per_method = {}
        alphas = {}
        for m, st in styles.items():
            strokes = _tessellate(lines, st)
            flat = [b for s in strokes for b in s]
            fb, stats = render_batches(Framebuffer(*viewport), strokes, st, workers=workers)
            batched = replace(stats, draw_calls=count_draw_calls(flat, AccountingMode.BATCHED))
            per_method[m] = {AccountingMode.PER_FEATURE.value: stats, AccountingMode.BATCHED.value: batched}
            alphas[m] = fb.alpha.copy()
        joins = sum(count_joins(line) for line in lines)
        rows.append(ComparisonRow(nid, joins, sum(len(line) for line in lines), per_method))
        if keep_diff:
            diffs[nid] = np.abs(alphas["proposed"] - alphas["fan"])
    return ComparisonReport(rows, step, diffs)


def _check_generator_scale(net, viewport, style: StrokeStyle) -> None:
    if not isinstance(net, Scene):
        return
    limit = GEN_HALF_WIDTH * fit_viewport(net, viewport, DEFAULT_MARGIN).scale
    if style.half_width > limit:
        log.warning(
            "stroke half-width %.3g px exceeds the generator clearance of %.3g px at this scale",
            style.half_width,
            limit,
        )
