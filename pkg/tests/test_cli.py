import json

import numpy as np
import pytest

from strokejoin.cli import GOLDEN_CASES, main, parse_color, parse_join, parse_seeds, parse_viewport
from strokejoin.raster import read_ppm

from conftest import FIXTURES, GOLDEN


def test_parsers():
    assert parse_viewport("160x120") == (160, 120)
    assert parse_color("ff000080") == pytest.approx((1.0, 0.0, 0.0, 128 / 255))
    assert parse_join("fan:30")[0] == "fan"
    assert parse_seeds("1..3") == (1, 2, 3)
    assert parse_seeds("4,7") == (4, 7)


def test_render_missing_input(tmp_path, capsys):
    assert main(["render", "--input", str(tmp_path / "nope.txt")]) == 1
    assert "strokejoin:" in capsys.readouterr().err


def test_render_zero_width(capsys):
    assert main(["render", "--input", str(FIXTURES / "l_shape.txt"), "--width", "0"]) == 2
    assert capsys.readouterr().err


def test_render_malformed_input(tmp_path):
    bad = tmp_path / "bad.txt"
    bad.write_text("0 0\n1 oops\n")
    assert main(["render", "--input", str(bad)]) == 1


def test_render_stats(tmp_path):
    out, stats = tmp_path / "l.ppm", tmp_path / "l.json"
    code = main(["render", "--input", str(FIXTURES / "l_shape.txt"), "--viewport", "64x64",
                 "--out", str(out), "--stats", str(stats)])
    assert code == 0
    doc = json.loads(stats.read_text())
    assert doc["draw_calls"] == 3 and doc["overlap_pixels"] == 0
    assert read_ppm(out.read_bytes()).shape == (64, 64, 3)


@pytest.mark.parametrize("name", sorted(GOLDEN_CASES))
def test_goldens_byte_identical(name, tmp_path):
    argv = [a.format(fixtures=FIXTURES) for a in GOLDEN_CASES[name]]
    out = tmp_path / f"{name}.ppm"
    assert main(["render", *argv, "--out", str(out)]) == 0
    assert out.read_bytes() == (GOLDEN / f"{name}.ppm").read_bytes()


def test_render_workers_identical(tmp_path):
    base = ["render", "--format", "generated", "--seed", "2", "--viewport", "256x256"]
    a, b = tmp_path / "a.ppm", tmp_path / "b.ppm"
    assert main([*base, "--out", str(a), "--workers", "1"]) == 0
    assert main([*base, "--out", str(b), "--workers", "8"]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_compare_ten_networks(tmp_path, capsys):
    stats = tmp_path / "cmp.jsonl"
    code = main(["compare", "--format", "generated", "--seed", "1..10", "--viewport", "512x512",
                 "--stats", str(stats)])
    assert code == 0
    rows = capsys.readouterr().out.strip().splitlines()
    assert len(rows) == 12 and rows[-1].startswith("average")
    assert len(stats.read_text().splitlines()) == 11


def test_compare_zero_joins_diff(tmp_path):
    src = tmp_path / "straight.txt"
    src.write_text("0 0\n10 0\n20 0\n")
    out = tmp_path / "diff.ppm"
    assert main(["compare", "--input", str(src), "--viewport", "64x64", "--out", str(out)]) == 0
    assert not read_ppm(out.read_bytes()).any()


def test_fidelity(capsys):
    assert main(["fidelity", "--width", "20", "90", "179.9"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0].startswith("#") and len(out) == 4
    vals = [float(x) for x in out[-1].split("\t")]
    assert vals[0] == pytest.approx(179.9) and np.isfinite(vals[1:]).all()


@pytest.mark.parametrize("angles", [[], ["180"], ["0"]])
def test_fidelity_bad_angles(angles):
    assert main(["fidelity", *angles]) == 2


def test_unknown_subcommand():
    with pytest.raises(SystemExit) as exc:
        main(["paint"])
    assert exc.value.code == 2
