"""Time the numba kernels against their numpy twins.

    python benchmarks/bench_kernels.py [--viewport 1024] [--repeat 3]

Both backends run on identical inputs; the script also checks that they
produce the same framebuffer.
"""

import argparse
import time

import numpy as np

from strokejoin import _jit, _kernels
from strokejoin.bench import benchmark_networks, screen_lines
from strokejoin.raster import Framebuffer, _triangle_arrays
from strokejoin.tessellation import StrokeStyle, tessellate_polyline


def scene_arrays(viewport, style):
    pos, attr, ids = [], [], []
    for sid, net in enumerate(benchmark_networks(range(1, 4)), start=1):
        for line in screen_lines(net, viewport):
            for b in tessellate_polyline(line, style):
                pos.append(b.positions)
                attr.append(b.attrs)
                ids.append(np.full(b.n_triangles, sid, dtype=np.int64))
    return np.concatenate(pos), np.concatenate(attr), np.concatenate(ids)


def time_draw(fn, viewport, style, arrays, repeat):
    pos, fix, attr = _triangle_arrays(arrays[0], arrays[1])
    best = np.inf
    fb = None
    for _ in range(repeat):
        fb = Framebuffer(*viewport)
        args = (pos, fix, attr, arrays[2], np.asarray(style.color), style.threshold, fb.rgba, fb._count, fb._tag)
        t0 = time.perf_counter()
        fn(*args, 0, viewport[1])
        best = min(best, time.perf_counter() - t0)
    return best, fb.rgba


def time_oracle(fn, viewport, style, repeat, s=16):
    line = screen_lines(benchmark_networks([1])[0], viewport)[0]
    verts = np.array([tuple(v) for v in line])
    best = np.inf
    out = None
    for _ in range(repeat):
        out = np.zeros(viewport[::-1])
        t0 = time.perf_counter()
        fn(verts, style.half_width, style.threshold, s, out, 0, viewport[1])
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--viewport", type=int, default=1024)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    viewport = (args.viewport, args.viewport)
    style = StrokeStyle(width=8)
    arrays = scene_arrays(viewport, style)
    print(f"{arrays[2].size} triangles, viewport {viewport[0]}x{viewport[1]}")

    if not _jit.HAVE_NUMBA:
        print("numba unavailable; numpy only")
    rows = []
    for name, draw, oracle in (
        ("numba", _kernels.draw_numba, _kernels.oracle_numba),
        ("numpy", _kernels.draw_numpy, _kernels.oracle_numpy),
    ):
        if draw is None:
            continue
        # first call compiles (or loads the cache) and is not timed
        time_draw(draw, (64, 64), style, arrays, 1)
        time_oracle(oracle, (64, 64), style, 1, s=4)
        td, img = time_draw(draw, viewport, style, arrays, args.repeat)
        to, ora = time_oracle(oracle, viewport, style, args.repeat)
        rows.append((name, td, to, img, ora))
        print(f"{name:6s} draw {td * 1e3:9.2f} ms   oracle(s=16) {to * 1e3:9.2f} ms")

    if len(rows) == 2:
        same_draw = np.array_equal(rows[0][3], rows[1][3])
        ora_err = np.abs(rows[0][4] - rows[1][4]).max()
        print(f"draw speedup x{rows[1][1] / rows[0][1]:.1f}, oracle speedup x{rows[1][2] / rows[0][2]:.1f}")
        print(f"framebuffers identical: {same_draw}; oracle max diff {ora_err:.2e}")


if __name__ == "__main__":
    main()
