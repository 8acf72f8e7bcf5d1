"""Inner loops: triangle coverage, shading and blending, and the oracle.

Each kernel exists twice: an explicit loop compiled with numba and a
vectorized numpy twin. Both follow the same arithmetic so they agree to
rounding; the module-level names pick one according to ``_jit.USE_NUMBA``.

Coverage uses vertices snapped to 1/256 px and exact int64 edge functions
with a top-left rule, so pixels on shared edges are owned by exactly one
triangle. Attributes are interpolated from the unsnapped float vertices.
"""

import math

import numpy as np

from . import _jit
from ._jit import njit

SUBPIXEL_BITS = 8
SUBPIXEL = 1 << SUBPIXEL_BITS
HALF = SUBPIXEL >> 1
# keeps every edge-function product inside int64
COORD_LIMIT = float(1 << 21)


def snap(positions):
    p = np.clip(positions, -COORD_LIMIT, COORD_LIMIT)
    return np.rint(p * SUBPIXEL).astype(np.int64)


# ----------------------------------------------------------------------------
# numba loops

@njit
def _alpha_scalar(d, n):
    if d <= n:
        return 1.0
    if d >= 1.0:
        return 0.0
    return (1.0 - d) / (1.0 - n)


@njit
def _floor_div(a, b):
    return a // b


@njit
def _setup(fix, base):
    """Vertex order with positive edge-function area; -1s when degenerate."""
    x0, y0 = fix[base, 0], fix[base, 1]
    x1, y1 = fix[base + 1, 0], fix[base + 1, 1]
    x2, y2 = fix[base + 2, 0], fix[base + 2, 1]
    area = (x1 - x0) * (y2 - y0) - (y1 - y0) * (x2 - x0)
    if area > 0:
        return base, base + 1, base + 2
    if area < 0:
        return base, base + 2, base + 1
    return -1, -1, -1


@njit
def _draw_loop(pos, fix, attr, tri_stroke, color, aa, rgba, count, tag, row0, row1):
    h, w = count.shape
    frags = 0
    overlap = 0
    cr, cg, cb, ca = color[0], color[1], color[2], color[3]
    for t in range(tri_stroke.shape[0]):
        i0, i1, i2 = _setup(fix, 3 * t)
        if i0 < 0:
            continue
        X0, Y0 = fix[i0, 0], fix[i0, 1]
        X1, Y1 = fix[i1, 0], fix[i1, 1]
        X2, Y2 = fix[i2, 0], fix[i2, 1]
        xmin = min(X0, min(X1, X2))
        xmax = max(X0, max(X1, X2))
        ymin = min(Y0, min(Y1, Y2))
        ymax = max(Y0, max(Y1, Y2))
        px0 = max(0, -_floor_div(-(xmin - HALF), SUBPIXEL))
        px1 = min(w - 1, _floor_div(xmax - HALF, SUBPIXEL))
        py0 = max(row0, -_floor_div(-(ymin - HALF), SUBPIXEL))
        py1 = min(row1 - 1, _floor_div(ymax - HALF, SUBPIXEL))
        if px0 > px1 or py0 > py1:
            continue
        # edge a->b owns its boundary when it is a left edge or a top edge
        b0 = 0 if (Y2 - Y1 < 0 or (Y2 == Y1 and X2 - X1 > 0)) else 1
        b1 = 0 if (Y0 - Y2 < 0 or (Y0 == Y2 and X0 - X2 > 0)) else 1
        b2 = 0 if (Y1 - Y0 < 0 or (Y1 == Y0 and X1 - X0 > 0)) else 1

        x0, y0 = pos[i0, 0], pos[i0, 1]
        ex1, ey1 = pos[i1, 0] - x0, pos[i1, 1] - y0
        ex2, ey2 = pos[i2, 0] - x0, pos[i2, 1] - y0
        den = ex1 * ey2 - ey1 * ex2
        if den == 0.0:
            continue
        a0x, a0y = attr[i0, 0], attr[i0, 1]
        d1x, d1y = attr[i1, 0] - a0x, attr[i1, 1] - a0y
        d2x, d2y = attr[i2, 0] - a0x, attr[i2, 1] - a0y
        stroke = tri_stroke[t]

        for py in range(py0, py1 + 1):
            cy = py * SUBPIXEL + HALF
            fy = py + 0.5 - y0
            for px in range(px0, px1 + 1):
                cx = px * SUBPIXEL + HALF
                e0 = (X2 - X1) * (cy - Y1) - (Y2 - Y1) * (cx - X1)
                if e0 < b0:
                    continue
                e1 = (X0 - X2) * (cy - Y2) - (Y0 - Y2) * (cx - X2)
                if e1 < b1:
                    continue
                e2 = (X1 - X0) * (cy - Y0) - (Y1 - Y0) * (cx - X0)
                if e2 < b2:
                    continue
                fx = px + 0.5 - x0
                l1 = (fx * ey2 - fy * ex2) / den
                l2 = (ex1 * fy - ey1 * fx) / den
                ax = a0x + l1 * d1x + l2 * d2x
                ay = a0y + l1 * d1y + l2 * d2y
                alpha = _alpha_scalar(math.sqrt(ax * ax + ay * ay), aa)
                frags += 1
                if alpha <= 0.0:
                    continue
                a = ca * alpha
                k = 1.0 - a
                rgba[py, px, 0] = cr * a + rgba[py, px, 0] * k
                rgba[py, px, 1] = cg * a + rgba[py, px, 1] * k
                rgba[py, px, 2] = cb * a + rgba[py, px, 2] * k
                rgba[py, px, 3] = a + rgba[py, px, 3] * k
                if tag[py, px] != stroke:
                    tag[py, px] = stroke
                    count[py, px] = 1
                else:
                    count[py, px] += 1
                    if count[py, px] == 2:
                        overlap += 1
    return frags, overlap


@njit
def _oracle_loop(verts, half_width, aa, s, out, row0, row1):
    """Supersampled alpha of one butt-capped, round-joined stroke."""
    h, w = out.shape
    nseg = verts.shape[0] - 1
    reach = half_width + 0.7072
    inv = 1.0 / (s * s)
    xmin = verts[0, 0]
    xmax = verts[0, 0]
    ymin = verts[0, 1]
    ymax = verts[0, 1]
    for i in range(1, verts.shape[0]):
        xmin = min(xmin, verts[i, 0])
        xmax = max(xmax, verts[i, 0])
        ymin = min(ymin, verts[i, 1])
        ymax = max(ymax, verts[i, 1])
    px0 = max(0, int(math.floor(xmin - reach)))
    px1 = min(w - 1, int(math.floor(xmax + reach)))
    py0 = max(row0, int(math.floor(ymin - reach)))
    py1 = min(row1 - 1, int(math.floor(ymax + reach)))
    for py in range(py0, py1 + 1):
        for px in range(px0, px1 + 1):
            # cheap reject on the uncapped distance from the pixel centre
            cx = px + 0.5
            cy = py + 0.5
            near = 1e300
            for k in range(nseg):
                ax, ay = verts[k, 0], verts[k, 1]
                bx, by = verts[k + 1, 0], verts[k + 1, 1]
                dx, dy = bx - ax, by - ay
                t = ((cx - ax) * dx + (cy - ay) * dy) / (dx * dx + dy * dy)
                t = min(1.0, max(0.0, t))
                qx, qy = ax + t * dx - cx, ay + t * dy - cy
                near = min(near, qx * qx + qy * qy)
            if math.sqrt(near) > reach:
                continue
            acc = 0.0
            for j in range(s):
                sy = py + (j + 0.5) / s
                for i in range(s):
                    sx = px + (i + 0.5) / s
                    best = 1e300
                    for k in range(nseg):
                        ax, ay = verts[k, 0], verts[k, 1]
                        bx, by = verts[k + 1, 0], verts[k + 1, 1]
                        dx, dy = bx - ax, by - ay
                        t = ((sx - ax) * dx + (sy - ay) * dy) / (dx * dx + dy * dy)
                        if t < 0.0:
                            if k == 0:
                                continue
                            t = 0.0
                        elif t > 1.0:
                            if k == nseg - 1:
                                continue
                            t = 1.0
                        qx, qy = ax + t * dx - sx, ay + t * dy - sy
                        best = min(best, qx * qx + qy * qy)
                    if best < 1e300:
                        acc += _alpha_scalar(math.sqrt(best) / half_width, aa)
            out[py, px] = acc * inv


# ----------------------------------------------------------------------------
# numpy twins

def alpha_array(d, n):
    d = np.asarray(d, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        ramp = (1.0 - d) / (1.0 - n)
    return np.where(d <= n, 1.0, np.where(d >= 1.0, 0.0, ramp))


def triangle_coverage(pos, fix, attr, base, width, row0, row1):
    """Pixels of one triangle: (ys, xs, attr_x, attr_y), or None."""
    X = fix[base : base + 3, 0]
    Y = fix[base : base + 3, 1]
    area = (X[1] - X[0]) * (Y[2] - Y[0]) - (Y[1] - Y[0]) * (X[2] - X[0])
    if area == 0:
        return None
    order = [0, 1, 2] if area > 0 else [0, 2, 1]
    X = X[order]
    Y = Y[order]
    idx = base + np.array(order)
    px0 = max(0, -((-(int(X.min()) - HALF)) // SUBPIXEL))
    px1 = min(width - 1, (int(X.max()) - HALF) // SUBPIXEL)
    py0 = max(row0, -((-(int(Y.min()) - HALF)) // SUBPIXEL))
    py1 = min(row1 - 1, (int(Y.max()) - HALF) // SUBPIXEL)
    if px0 > px1 or py0 > py1:
        return None
    p = pos[idx]
    ex1, ey1 = p[1] - p[0]
    ex2, ey2 = p[2] - p[0]
    den = ex1 * ey2 - ey1 * ex2
    if den == 0.0:
        return None

    ys, xs = np.mgrid[py0 : py1 + 1, px0 : px1 + 1]
    cy = ys.astype(np.int64) * SUBPIXEL + HALF
    cx = xs.astype(np.int64) * SUBPIXEL + HALF
    inside = np.ones(ys.shape, dtype=bool)
    for a, b in ((1, 2), (2, 0), (0, 1)):
        dx = int(X[b] - X[a])
        dy = int(Y[b] - Y[a])
        bias = 0 if (dy < 0 or (dy == 0 and dx > 0)) else 1
        e = dx * (cy - int(Y[a])) - dy * (cx - int(X[a]))
        inside &= e >= bias
    ys = ys[inside]
    xs = xs[inside]
    if ys.size == 0:
        return None
    fx = xs + 0.5 - p[0, 0]
    fy = ys + 0.5 - p[0, 1]
    l1 = (fx * ey2 - fy * ex2) / den
    l2 = (ex1 * fy - ey1 * fx) / den
    a = attr[idx]
    d1 = a[1] - a[0]
    d2 = a[2] - a[0]
    ax = a[0, 0] + l1 * d1[0] + l2 * d2[0]
    ay = a[0, 1] + l1 * d1[1] + l2 * d2[1]
    return ys, xs, ax, ay


def _draw_numpy(pos, fix, attr, tri_stroke, color, aa, rgba, count, tag, row0, row1):
    h, w = count.shape
    frags = 0
    overlap = 0
    rgb = np.asarray(color[:3], dtype=np.float64)
    for t in range(tri_stroke.shape[0]):
        cov = triangle_coverage(pos, fix, attr, 3 * t, w, row0, row1)
        if cov is None:
            continue
        ys, xs, ax, ay = cov
        alpha = alpha_array(np.sqrt(ax * ax + ay * ay), aa)
        frags += ys.size
        keep = alpha > 0.0
        ys, xs, alpha = ys[keep], xs[keep], alpha[keep]
        if ys.size == 0:
            continue
        a = color[3] * alpha
        k = 1.0 - a
        dst = rgba[ys, xs]
        out = np.empty_like(dst)
        out[:, 0] = rgb[0] * a + dst[:, 0] * k
        out[:, 1] = rgb[1] * a + dst[:, 1] * k
        out[:, 2] = rgb[2] * a + dst[:, 2] * k
        out[:, 3] = a + dst[:, 3] * k
        rgba[ys, xs] = out
        stroke = tri_stroke[t]
        fresh = tag[ys, xs] != stroke
        c = np.where(fresh, 1, count[ys, xs] + 1)
        count[ys, xs] = c
        tag[ys, xs] = stroke
        overlap += int(np.count_nonzero(c == 2))
    return frags, overlap


def _oracle_numpy(verts, half_width, aa, s, out, row0, row1):
    h, w = out.shape
    reach = half_width + 0.7072
    lo = verts.min(axis=0) - reach
    hi = verts.max(axis=0) + reach
    px0 = max(0, int(math.floor(lo[0])))
    px1 = min(w - 1, int(math.floor(hi[0])))
    py0 = max(row0, int(math.floor(lo[1])))
    py1 = min(row1 - 1, int(math.floor(hi[1])))
    if px0 > px1 or py0 > py1:
        return
    offs = (np.arange(s) + 0.5) / s
    nseg = verts.shape[0] - 1
    xs = np.arange(px0, px1 + 1)
    for py in range(py0, py1 + 1):
        cx = xs + 0.5
        cy = py + 0.5
        near = np.full(xs.shape, np.inf)
        for k in range(nseg):
            near = np.minimum(near, _seg_d2(cx, cy, verts[k], verts[k + 1], False, False))
        cols = xs[np.sqrt(near) <= reach]
        if cols.size == 0:
            continue
        sx = (cols[:, None, None] + offs[None, None, :]) + np.zeros((1, s, 1))
        sy = np.broadcast_to((py + offs)[None, :, None], sx.shape)
        best = np.full(sx.shape, np.inf)
        for k in range(nseg):
            d2 = _seg_d2(sx, sy, verts[k], verts[k + 1], k == 0, k == nseg - 1)
            best = np.minimum(best, d2)
        a = np.where(np.isfinite(best), alpha_array(np.sqrt(best) / half_width, aa), 0.0)
        out[py, cols] = a.sum(axis=(1, 2)) * (1.0 / (s * s))


def _seg_d2(x, y, a, b, butt_start, butt_end):
    dx, dy = b[0] - a[0], b[1] - a[1]
    t = ((x - a[0]) * dx + (y - a[1]) * dy) / (dx * dx + dy * dy)
    cut = np.zeros(np.shape(t), dtype=bool)
    if butt_start:
        cut |= t < 0.0
    if butt_end:
        cut |= t > 1.0
    t = np.clip(t, 0.0, 1.0)
    qx = a[0] + t * dx - x
    qy = a[1] + t * dy - y
    return np.where(cut, np.inf, qx * qx + qy * qy)


if _jit.HAVE_NUMBA:
    draw_numba = _draw_loop
    oracle_numba = _oracle_loop
else:  # pragma: no cover
    draw_numba = oracle_numba = None

draw_numpy = _draw_numpy
oracle_numpy = _oracle_numpy


def draw_triangles(*args):
    fn = draw_numba if _jit.USE_NUMBA else draw_numpy
    return fn(*args)


def oracle_stroke(*args):
    fn = oracle_numba if _jit.USE_NUMBA else oracle_numpy
    return fn(*args)
