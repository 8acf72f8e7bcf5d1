"""Command-line front end: ``strokejoin render|compare|fidelity|goldens``.

Exit codes: 0 success, 1 unreadable or malformed input, 2 invalid
parameters.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, replace
from pathlib import Path

from . import bench
from .geometry import GeometryError
from .ingest import (
    EmptySceneError,
    ParseError,
    Scene,
    ValidationError,
    fit_viewport,
    load_scene,
)
from .raster import AccountingMode, encode_ppm, render_scene
from .tessellation import DEFAULT_FAN_STEP, StrokeStyle

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_USAGE = 2

WHITE = (1.0, 1.0, 1.0, 1.0)
DEFAULT_VIEWPORT = (512, 512)
COMPARE_VIEWPORT = (1024, 1024)


class UsageError(ValueError):
    pass


@dataclass(frozen=True)
class RenderConfig:
    input: str | None
    format: str
    viewport: tuple[int, int] | None
    style: StrokeStyle
    accounting: AccountingMode
    out: str | None
    stats: str | None
    seeds: tuple[int, ...]
    roads: int
    density: float
    workers: int


def parse_viewport(text: str) -> tuple[int, int]:
    try:
        w, h = (int(v) for v in text.lower().split("x"))
    except ValueError:
        raise UsageError(f"viewport must look like WxH, got {text!r}") from None
    if w < 1 or h < 1:
        raise UsageError(f"viewport must be at least 1x1, got {text!r}")
    return w, h


def parse_color(text: str) -> tuple[float, float, float, float]:
    s = text.lstrip("#")
    if len(s) == 6:
        s += "ff"
    if len(s) != 8:
        raise UsageError(f"color must be RRGGBBAA hex, got {text!r}")
    try:
        return tuple(int(s[i : i + 2], 16) / 255.0 for i in range(0, 8, 2))
    except ValueError:
        raise UsageError(f"color must be RRGGBBAA hex, got {text!r}") from None


def parse_join(text: str) -> tuple[str, float | None]:
    if text == "proposed":
        return "proposed", None
    if text == "fan":
        return "fan", None
    if text.startswith("fan:"):
        try:
            step = float(text[4:])
        except ValueError:
            raise UsageError(f"fan step must be degrees, got {text!r}") from None
        return "fan", math.radians(step)
    raise UsageError(f"join must be 'proposed' or 'fan:STEP', got {text!r}")


def parse_seeds(text: str) -> tuple[int, ...]:
    try:
        if ".." in text:
            a, b = (int(v) for v in text.split(".."))
            seeds = tuple(range(a, b + 1))
        else:
            seeds = tuple(int(v) for v in text.split(","))
    except ValueError:
        raise UsageError(f"seed must be N, A..B or a comma list, got {text!r}") from None
    if not seeds:
        raise UsageError("empty seed range")
    return seeds


def build_config(args: argparse.Namespace) -> RenderConfig:
    if not (math.isfinite(args.width) and args.width > 0):
        raise UsageError(f"--width must be positive, got {args.width}")
    aa = None if args.aa == "auto" else _float(args.aa, "--aa")
    if aa is not None and not 0.0 <= aa < 1.0:
        raise UsageError(f"--aa must lie in [0, 1), got {aa}")
    join, step = parse_join(args.join)
    try:
        style = StrokeStyle(
            width=args.width,
            color=parse_color(args.color),
            aa_threshold=aa,
            join=join,
            fan_step=step if step is not None else DEFAULT_FAN_STEP,
        )
    except GeometryError as exc:
        raise UsageError(str(exc)) from None
    fmt = args.format
    if fmt is None:
        if args.input is None:
            fmt = "generated"
        elif args.input.lower().endswith((".geojson", ".json")):
            fmt = "geojson"
        else:
            fmt = "path"
    if fmt != "generated" and args.input is None:
        raise UsageError(f"--input is required for format {fmt!r}")
    if args.roads < 1:
        raise UsageError("--roads must be at least 1")
    if not 0.0 < args.density <= 1.0:
        raise UsageError("--density must lie in (0, 1]")
    if args.workers < 1:
        raise UsageError("--workers must be at least 1")
    return RenderConfig(
        input=args.input,
        format=fmt,
        viewport=parse_viewport(args.viewport) if args.viewport else None,
        style=style,
        accounting=AccountingMode(args.accounting),
        out=args.out,
        stats=args.stats,
        seeds=parse_seeds(args.seed),
        roads=args.roads,
        density=args.density,
        workers=args.workers,
    )


def _float(text: str, flag: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise UsageError(f"{flag} must be a number or 'auto', got {text!r}") from None


def load_scenes(cfg: RenderConfig) -> list[tuple[str, Scene]]:
    if cfg.format == "generated":
        return [(f"seed{s}", bench.gen_network(s, cfg.roads, cfg.density)) for s in cfg.seeds]
    if cfg.format not in ("path", "geojson"):
        raise UsageError(f"unknown format {cfg.format!r}")
    return [(Path(cfg.input).stem, load_scene(cfg.input, cfg.format))]


def _write(path: str, data: bytes | str) -> None:
    p = Path(path)
    if isinstance(data, str):
        p.write_text(data)
    else:
        p.write_bytes(data)


def cmd_render(cfg: RenderConfig) -> int:
    """Render the (first) scene to a PPM and optionally a stats document."""
    viewport = cfg.viewport or DEFAULT_VIEWPORT
    name, scene = load_scenes(cfg)[0]
    lines = fit_viewport(scene, viewport, bench.DEFAULT_MARGIN).apply(scene)
    fb, stats = render_scene(
        lines, cfg.style, viewport, background=WHITE, accounting=cfg.accounting, workers=cfg.workers
    )
    if cfg.out:
        fb.write_ppm(cfg.out)
    doc = {
        "scene": name,
        "join": cfg.style.join,
        "accounting": cfg.accounting.value,
        "viewport": list(viewport),
        "width": cfg.style.width,
        "aa_threshold": cfg.style.threshold,
        **stats.as_dict(),
    }
    if cfg.stats:
        _write(cfg.stats, json.dumps(doc, sort_keys=True, indent=2) + "\n")
    if not cfg.out and not cfg.stats:
        sys.stdout.write(json.dumps(doc, sort_keys=True) + "\n")
    return EXIT_OK


def cmd_compare(cfg: RenderConfig) -> int:
    """Table of both methods per network; difference image(s) of the alpha channel."""
    viewport = cfg.viewport or COMPARE_VIEWPORT
    named = load_scenes(cfg)
    report = bench.compare_methods(
        [s for _, s in named],
        cfg.style,
        viewport,
        fan_step=cfg.style.fan_step,
        ids=[n for n, _ in named],
        keep_diff=bool(cfg.out),
        workers=cfg.workers,
    )
    sys.stdout.write(report.to_tsv())
    if cfg.stats:
        _write(cfg.stats, report.to_jsonl())
    if cfg.out:
        out = Path(cfg.out)
        for nid, diff in report.diff_images.items():
            target = out if len(report.diff_images) == 1 else out.with_name(f"{out.stem}-{nid}{out.suffix}")
            target.write_bytes(encode_ppm(diff))
    return EXIT_OK


def cmd_fidelity(cfg: RenderConfig, angles_deg: list[float]) -> int:
    """Arc error of the alpha=0.5 contour per turn angle, both methods."""
    if not angles_deg:
        raise UsageError("give at least one angle in degrees")
    for a in angles_deg:
        if not 0.0 < a < 180.0:
            raise UsageError(f"angles must lie in (0, 180), got {a}")
    side = int(math.ceil(4 * cfg.style.width)) + 48
    viewport = cfg.viewport or (side, side)
    proposed = replace(cfg.style, join="proposed")
    fan = replace(cfg.style, join="fan")
    rows = ["angle_deg\tproposed_px\tfan_px"]
    records = []
    for a in angles_deg:
        p = bench.arc_fidelity(proposed, math.radians(a), viewport)
        f = bench.arc_fidelity(fan, math.radians(a), viewport)
        rows.append(f"{a:g}\t{p:.4f}\t{f:.4f}")
        records.append({"angle_deg": a, "proposed_px": p, "fan_px": f})
    sys.stdout.write(f"# fan step {math.degrees(fan.fan_step):g} deg, W={cfg.style.width:g}\n")
    sys.stdout.write("\n".join(rows) + "\n")
    if cfg.stats:
        _write(cfg.stats, json.dumps(records, indent=2) + "\n")
    return EXIT_OK


GOLDEN_CASES = {
    "l_fixture_proposed": ["--input", "{fixtures}/l_shape.txt", "--viewport", "96x96", "--width", "8"],
    "l_fixture_fan": ["--input", "{fixtures}/l_shape.txt", "--viewport", "96x96", "--width", "8", "--join", "fan:10"],
    "roads_geojson": ["--input", "{fixtures}/roads.geojson", "--viewport", "160x120", "--width", "5", "--color", "1f4e9cff"],
    "network_seed1": ["--seed", "1", "--roads", "4", "--density", "0.5", "--viewport", "256x256", "--width", "3"],
}


def cmd_goldens(fixtures: str, out_dir: str) -> int:
    """Regenerate the frozen PPM goldens through the same render path."""
    dest = Path(out_dir)
    dest.mkdir(parents=True, exist_ok=True)
    for name, argv in GOLDEN_CASES.items():
        argv = [a.format(fixtures=fixtures) for a in argv]
        code = main(["render", *argv, "--out", str(dest / f"{name}.ppm")])
        if code:
            return code
        print(f"wrote {dest / (name + '.ppm')}")
    return EXIT_OK


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--input", help="scene file")
    p.add_argument("--format", choices=("path", "geojson", "generated"), help="input format (default: from extension)")
    p.add_argument("--viewport", help="WxH in pixels")
    p.add_argument("--width", type=float, default=8.0, help="stroke width in px (default 8)")
    p.add_argument("--color", default="000000ff", help="stroke color RRGGBBAA (default 000000ff)")
    p.add_argument("--aa", default="auto", help="alpha threshold N in [0,1) or 'auto' (1 px feather)")
    p.add_argument("--join", default="proposed", help="proposed | fan:STEP_DEGREES")
    p.add_argument("--accounting", choices=[m.value for m in AccountingMode], default="per-feature")
    p.add_argument("--out", help="output PPM")
    p.add_argument("--stats", help="stats output file")
    p.add_argument("--seed", default="1", help="generator seed: N, A..B or a,b,c")
    p.add_argument("--roads", type=int, default=8, help="roads per generated network")
    p.add_argument("--density", type=float, default=0.5, help="generated density in (0, 1]")
    p.add_argument("--workers", type=int, default=1, help="raster threads (output is identical)")


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="strokejoin", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    _common(sub.add_parser("render", help="render a scene to PPM"))
    _common(sub.add_parser("compare", help="compare proposed and fan joins"))
    fid = sub.add_parser("fidelity", help="arc error of both join methods")
    _common(fid)
    fid.add_argument("angles", nargs="*", type=float, help="turn angles in degrees")
    gold = sub.add_parser("goldens", help="regenerate golden images")
    gold.add_argument("--fixtures", default="tests/fixtures")
    gold.add_argument("--out-dir", default="tests/golden")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = make_parser().parse_args(argv)
    try:
        if args.command == "goldens":
            return cmd_goldens(args.fixtures, args.out_dir)
        cfg = build_config(args)
        if args.command == "render":
            return cmd_render(cfg)
        if args.command == "compare":
            return cmd_compare(cfg)
        return cmd_fidelity(cfg, args.angles)
    except (UsageError, ValidationError, GeometryError) as exc:
        print(f"strokejoin: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, ParseError, EmptySceneError) as exc:
        print(f"strokejoin: {exc}", file=sys.stderr)
        return EXIT_INPUT


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":  # pragma: no cover
    run()
