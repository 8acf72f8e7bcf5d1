import math

import numpy as np
import pytest

from strokejoin.bench import (
    GEN_HALF_WIDTH,
    arc_fidelity,
    arc_profile,
    benchmark_networks,
    compare_methods,
    count_draw_calls,
    gen_network,
    legacy_overlap_tessellation,
    measure_overlap,
    oracle_error,
    oracle_render,
    segments_per_road_bounds,
)
from strokejoin.geometry import Polyline, Vec2, point_segment_distance
from strokejoin.raster import AccountingMode
from strokejoin.tessellation import StrokeStyle, tessellate_polyline, turn_angles

from conftest import join_line


def coords(scene):
    return [[tuple(v) for v in line] for line in scene.polylines]


def test_generator_deterministic():
    assert coords(gen_network(3, 8, 0.5)) == coords(gen_network(3, 8, 0.5))
    assert coords(gen_network(3, 8, 0.5)) != coords(gen_network(4, 8, 0.5))


@pytest.mark.parametrize("seed, density", [(1, 0.1), (5, 0.5), (10, 1.0)])
def test_generator_bounds(seed, density):
    scene = gen_network(seed, 8, density)
    lo, hi = segments_per_road_bounds(density)
    assert len(scene.polylines) == 8
    for line in scene.polylines:
        assert lo <= len(line) - 1 <= hi
        for t in turn_angles(line):
            assert math.radians(5) - 1e-9 <= t <= math.radians(175) + 1e-9
        segs = list(line.segments())
        # non-adjacent segments stay apart
        for i, (a, b) in enumerate(segs):
            for c, d in segs[i + 2:]:
                gap = min(point_segment_distance(a, c, d), point_segment_distance(b, c, d),
                          point_segment_distance(c, a, b), point_segment_distance(d, a, b))
                assert gap >= 2.5 * GEN_HALF_WIDTH


def test_generator_rejects_bad_args():
    with pytest.raises(ValueError):
        gen_network(1, 0, 0.5)
    with pytest.raises(ValueError):
        gen_network(1, 4, 0.0)


def test_benchmark_density_increases():
    nets = benchmark_networks()
    assert len(nets) == 10
    verts = [n.n_vertices for n in nets]
    assert verts[-1] > verts[0]


@pytest.mark.parametrize(
    "join, mode, calls",
    [("proposed", "per-feature", 3), ("proposed", "batched", 3), ("fan", "per-feature", 11), ("fan", "batched", 11)],
)
def test_count_draw_calls_single_join(l_polyline, join, mode, calls):
    batches = tessellate_polyline(l_polyline, StrokeStyle(width=2, join=join))
    assert count_draw_calls(batches, AccountingMode(mode)) == calls


def test_count_draw_calls_straight():
    batches = tessellate_polyline(Polyline([(0, 0), (5, 0), (10, 0), (20, 0)]), StrokeStyle())
    assert count_draw_calls(batches, AccountingMode.PER_FEATURE) == 3
    assert count_draw_calls(batches, AccountingMode.BATCHED) == 1


@pytest.mark.parametrize("turn", [10, 60, 90, 135, 170])
def test_no_overlap_proposed(turn):
    line = join_line(turn, pivot=Vec2(64.3, 64.7), arm=50)
    assert measure_overlap([line], StrokeStyle(width=8), (128, 128)) == 0


def test_legacy_overlaps():
    line = join_line(90, pivot=Vec2(64.3, 64.7), arm=50)
    assert measure_overlap([line], StrokeStyle(width=8), (128, 128), tessellator=legacy_overlap_tessellation) > 0


def test_arc_fidelity_proposed_small():
    style = StrokeStyle(width=20)
    for turn in (30, 90, 150):
        assert arc_fidelity(style, math.radians(turn)) <= 0.5


def test_arc_profile_ideal_radius():
    _, radii, ideal = arc_profile(StrokeStyle(width=20), math.radians(90))
    assert ideal == pytest.approx(10 * (1 + 0.9) / 2)
    assert np.all(np.isfinite(radii))


def test_fan_coarse_step_misses_arc():
    # a 30 degree chord sits up to hw * (1 - cos 15) inside the true arc
    style = StrokeStyle(width=20, join="fan", fan_step=math.radians(30))
    sag = 10 * (1 - math.cos(math.radians(15)))
    for turn in (90, 150):
        assert arc_fidelity(style, math.radians(turn)) >= sag


def test_arc_profile_rejects_reversal():
    with pytest.raises(ValueError):
        arc_profile(StrokeStyle(width=20), math.pi)


def test_oracle_straight_segment():
    line = Polyline([(8.0, 16.3), (56.0, 16.3)])
    truth = oracle_render([line], StrokeStyle(width=8, aa_threshold=0.75), (64, 32), 16)
    offsets = np.arange(32) + 0.5 - 16.3
    col = truth[:, 32]
    # box filter of the ramp; centre samples already match the exact profile within 1/s
    expected = np.clip(4.0 - np.abs(offsets), 0.0, 1.0)
    assert np.abs(col - expected).max() < 0.07


def test_oracle_requires_supersampling():
    with pytest.raises(ValueError):
        oracle_render([Polyline([(0, 0), (5, 5)])], StrokeStyle(), (8, 8), 2)


def test_oracle_error_l_fixture(l_polyline):
    scene = [Polyline([(v.x * 4 + 80, v.y * 4 + 40) for v in l_polyline])]
    for w in (4, 8):
        assert oracle_error(scene, StrokeStyle(width=w), (128, 128)) < 0.05


def test_compare_single_join():
    line = join_line(90, pivot=Vec2(64.3, 64.7), arm=50)
    rep = compare_methods([[line]], StrokeStyle(), (128, 128), fan_step=math.radians(10))
    (row,) = rep.rows
    assert row.joins == 1 and row.vertices == 3
    fan = row.stats["fan"]["per-feature"]
    prop = row.stats["proposed"]["per-feature"]
    assert (fan.draw_calls, prop.draw_calls) == (11, 3)
    assert prop.overlap_pixels == 0
    assert rep.draw_call_ratio() == pytest.approx(11 / 3)


def test_compare_zero_joins_equal():
    line = Polyline([(10, 10), (60, 60), (110, 110)])
    rep = compare_methods([[line]], StrokeStyle(), (128, 128), keep_diff=True)
    row = rep.rows[0]
    assert row.stats["fan"]["per-feature"].as_dict() == row.stats["proposed"]["per-feature"].as_dict()
    assert not rep.diff_images["1"].any()


def test_report_formats():
    nets = benchmark_networks(range(1, 3))
    rep = compare_methods(nets, StrokeStyle(), (512, 512))
    tsv = rep.to_tsv().splitlines()
    assert len(tsv) == 4 and tsv[-1].startswith("average")
    assert len({len(r.split("\t")) for r in tsv}) == 1
    jl = rep.to_jsonl().splitlines()
    assert len(jl) == 3 and '"average"' in jl[-1]
    with pytest.raises(ValueError):
        compare_methods([], StrokeStyle(), (64, 64))
