"""CPU reference pipeline: rasterize, shade with the distance alpha rule, blend.

Pixel (i, j) covers [i, i+1) x [j, j+1) in screen space with y pointing
down; it is sampled once at its centre. Blending is straight-alpha
source-over with no gamma handling.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from . import _kernels
from .geometry import Polyline, Vec2
from .tessellation import Label, StrokeStyle, TriangleBatch, tessellate_polyline

Tessellator = Callable[[Polyline, StrokeStyle], list[TriangleBatch]]


class AccountingMode(enum.Enum):
    PER_FEATURE = "per-feature"
    BATCHED = "batched"


@dataclass(frozen=True)
class Fragment:
    px: tuple[int, int]
    attr: Vec2


@dataclass
class RenderStats:
    draw_calls: int = 0
    triangles: int = 0
    fragments_shaded: int = 0
    overlap_pixels: int = 0
    _run_key: object = field(default=None, repr=False, compare=False)

    def as_dict(self) -> dict:
        return {
            "draw_calls": self.draw_calls,
            "triangles": self.triangles,
            "fragments_shaded": self.fragments_shaded,
            "overlap_pixels": self.overlap_pixels,
        }


def draw_call_cost(batch: TriangleBatch, mode: AccountingMode, run_key=None) -> tuple[int, object]:
    """Submissions needed for ``batch`` and the run key it leaves behind.

    Fan joins pay one submission per triangle in either mode: each chorded
    wedge piece is its own primitive in the baseline and never merges with
    neighbours. Other batches cost one call, or nothing under BATCHED when
    they continue a run of the same label and style.
    """
    if batch.n_triangles == 0:
        return 0, run_key
    if batch.label is Label.JOIN_FAN:
        return batch.n_triangles, None
    key = (batch.label, batch.style_key)
    if mode is AccountingMode.BATCHED and key == run_key:
        return 0, key
    return 1, key


class Framebuffer:
    """RGBA float image plus per-stroke write counters."""

    def __init__(self, width: int, height: int, background=(0.0, 0.0, 0.0, 0.0)):
        if width < 1 or height < 1:
            raise ValueError(f"viewport must be at least 1x1, got {width}x{height}")
        self.width = int(width)
        self.height = int(height)
        self.rgba = np.empty((self.height, self.width, 4), dtype=np.float64)
        self.rgba[...] = np.asarray(background, dtype=np.float64)
        self._count = np.zeros((self.height, self.width), dtype=np.int32)
        self._tag = np.full((self.height, self.width), -1, dtype=np.int64)
        self._stroke = 0

    def begin_stroke(self) -> int:
        """Open a new write-count scope and return its id."""
        self._stroke += 1
        return self._stroke

    @property
    def current_stroke(self) -> int:
        return self._stroke

    @property
    def write_count(self) -> np.ndarray:
        """Writes per pixel within the current stroke."""
        return np.where(self._tag == self._stroke, self._count, 0)

    @property
    def alpha(self) -> np.ndarray:
        return self.rgba[..., 3]

    def to_bytes_rgb(self) -> np.ndarray:
        c = np.clip(self.rgba[..., :3], 0.0, 1.0)
        return np.floor(c * 255.0 + 0.5).astype(np.uint8)

    def to_ppm(self) -> bytes:
        header = f"P6\n{self.width} {self.height}\n255\n".encode("ascii")
        return header + self.to_bytes_rgb().tobytes()

    def write_ppm(self, path) -> None:
        Path(path).write_bytes(self.to_ppm())


def encode_ppm(gray_or_rgb: np.ndarray) -> bytes:
    """P6 bytes for an (H, W) or (H, W, 3) array of values in [0, 1]."""
    a = np.clip(np.asarray(gray_or_rgb, dtype=np.float64), 0.0, 1.0)
    if a.ndim == 2:
        a = np.repeat(a[..., None], 3, axis=2)
    h, w = a.shape[:2]
    body = np.floor(a * 255.0 + 0.5).astype(np.uint8).tobytes()
    return f"P6\n{w} {h}\n255\n".encode("ascii") + body


def read_ppm(data: bytes) -> np.ndarray:
    parts = data.split(maxsplit=4)
    if len(parts) < 5 or parts[0] != b"P6" or parts[3] != b"255":
        raise ValueError("not an 8-bit binary PPM")
    w, h = int(parts[1]), int(parts[2])
    return np.frombuffer(parts[4][: w * h * 3], dtype=np.uint8).reshape(h, w, 3)


def fragment_alpha(attr, aa_threshold: float) -> float:
    """Opaque up to N, linear ramp to zero at 1, transparent beyond."""
    if not 0.0 <= aa_threshold < 1.0:
        raise ValueError(f"aa threshold must lie in [0, 1), got {aa_threshold}")
    d = math.hypot(*attr)
    if d <= aa_threshold:
        return 1.0
    if d >= 1.0:
        return 0.0
    return (1.0 - d) / (1.0 - aa_threshold)


def blend_source_over(dst, src_color, alpha: float) -> tuple[float, float, float, float]:
    a = src_color[3] * alpha
    k = 1.0 - a
    return (
        src_color[0] * a + dst[0] * k,
        src_color[1] * a + dst[1] * k,
        src_color[2] * a + dst[2] * k,
        a + dst[3] * k,
    )


def _triangle_arrays(positions: np.ndarray, attrs: np.ndarray):
    pos = np.ascontiguousarray(positions, dtype=np.float64).reshape(-1, 2)
    return pos, _kernels.snap(pos), np.ascontiguousarray(attrs, dtype=np.float64).reshape(-1, 2)


def rasterize_triangle(v0, v1, v2, viewport: tuple[int, int]) -> list[Fragment]:
    """Fragments of one triangle; vertices are AAVertex or (position, attr) pairs."""
    verts = [v if isinstance(v, tuple) else (v.position, v.attr) for v in (v0, v1, v2)]
    pos, fix, attr = _triangle_arrays(
        np.array([tuple(p) for p, _ in verts], dtype=np.float64),
        np.array([tuple(a) for _, a in verts], dtype=np.float64),
    )
    w, h = viewport
    cov = _kernels.triangle_coverage(pos, fix, attr, 0, w, 0, h)
    if cov is None:
        return []
    ys, xs, ax, ay = cov
    return [
        Fragment((int(x), int(y)), Vec2(float(u), float(v)))
        for y, x, u, v in zip(ys, xs, ax, ay)
    ]


def batch_fragments(batch: TriangleBatch, viewport: tuple[int, int]):
    """Per-triangle fragment arrays ``(ys, xs, attr_x, attr_y)`` of a batch."""
    pos, fix, attr = _triangle_arrays(batch.positions, batch.attrs)
    w, h = viewport
    for t in range(batch.n_triangles):
        cov = _kernels.triangle_coverage(pos, fix, attr, 3 * t, w, 0, h)
        if cov is not None:
            yield cov


def _bands(height: int, workers: int) -> list[tuple[int, int]]:
    n = max(1, min(int(workers), height))
    edges = np.linspace(0, height, n + 1).round().astype(int)
    return [(int(a), int(b)) for a, b in zip(edges, edges[1:]) if b > a]


def _rasterize(fb: Framebuffer, pos, attr, tri_stroke, style: StrokeStyle, workers: int) -> tuple[int, int]:
    if tri_stroke.size == 0:
        return 0, 0
    pos, fix, attr = _triangle_arrays(pos, attr)
    color = np.asarray(style.color, dtype=np.float64)
    args = (pos, fix, attr, tri_stroke, color, float(style.threshold), fb.rgba, fb._count, fb._tag)
    bands = _bands(fb.height, workers)
    if len(bands) == 1:
        return _kernels.draw_triangles(*args, 0, fb.height)
    # bands own disjoint rows, so results do not depend on scheduling
    with ThreadPoolExecutor(max_workers=len(bands)) as pool:
        results = list(pool.map(lambda b: _kernels.draw_triangles(*args, b[0], b[1]), bands))
    return sum(r[0] for r in results), sum(r[1] for r in results)


def draw_batch(
    fb: Framebuffer,
    batch: TriangleBatch,
    style: StrokeStyle,
    stats: RenderStats,
    accounting: AccountingMode = AccountingMode.PER_FEATURE,
    workers: int = 1,
) -> tuple[Framebuffer, RenderStats]:
    """Rasterize, shade and blend one batch into the current stroke scope."""
    cost, stats._run_key = draw_call_cost(batch, accounting, stats._run_key)
    stats.draw_calls += cost
    stats.triangles += batch.n_triangles
    tri_stroke = np.full(batch.n_triangles, fb.current_stroke, dtype=np.int64)
    frags, overlap = _rasterize(fb, batch.positions, batch.attrs, tri_stroke, style, workers)
    stats.fragments_shaded += frags
    stats.overlap_pixels += overlap
    return fb, stats


def render_batches(
    fb: Framebuffer,
    strokes: Sequence[Sequence[TriangleBatch]],
    style: StrokeStyle,
    stats: RenderStats | None = None,
    accounting: AccountingMode = AccountingMode.PER_FEATURE,
    workers: int = 1,
) -> tuple[Framebuffer, RenderStats]:
    """Draw pre-tessellated strokes, each in its own write-count scope.

    Equivalent to ``draw_batch`` over every batch in order, but submits the
    whole scene to the kernel at once.
    """
    stats = stats if stats is not None else RenderStats()
    pos, attr, ids = [], [], []
    for batches in strokes:
        sid = fb.begin_stroke()
        for batch in batches:
            cost, stats._run_key = draw_call_cost(batch, accounting, stats._run_key)
            stats.draw_calls += cost
            stats.triangles += batch.n_triangles
            if batch.n_triangles:
                pos.append(batch.positions)
                attr.append(batch.attrs)
                ids.append(np.full(batch.n_triangles, sid, dtype=np.int64))
    if ids:
        frags, overlap = _rasterize(
            fb, np.concatenate(pos), np.concatenate(attr), np.concatenate(ids), style, workers
        )
        stats.fragments_shaded += frags
        stats.overlap_pixels += overlap
    return fb, stats


def render_scene(
    lines: Iterable[Polyline],
    style: StrokeStyle,
    viewport: tuple[int, int],
    *,
    background=(0.0, 0.0, 0.0, 0.0),
    accounting: AccountingMode = AccountingMode.PER_FEATURE,
    workers: int = 1,
    tessellator: Tessellator | None = None,
) -> tuple[Framebuffer, RenderStats]:
    """Tessellate and draw screen-space polylines in list order."""
    w, h = viewport
    fb = Framebuffer(w, h, background)
    tess = tessellator or tessellate_polyline
    strokes = [tess(line, style) for line in lines]
    return render_batches(fb, strokes, style, accounting=accounting, workers=workers)
