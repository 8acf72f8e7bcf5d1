"""Anti-aliased line joins from two triangles, with a software reference renderer."""

from ._jit import backend_name
from .geometry import JoinGeometry, Polyline, Side, Vec2, make_join, perp, signed_turn_angle, unit
from .ingest import Scene, fit_viewport, format_geojson, format_path_text, parse_geojson_lines, parse_path_text
from .raster import (
    AccountingMode,
    Framebuffer,
    RenderStats,
    blend_source_over,
    draw_batch,
    fragment_alpha,
    rasterize_triangle,
    render_scene,
)
from .tessellation import (
    AAVertex,
    Label,
    StrokeStyle,
    TriangleBatch,
    tessellate_join_fan,
    tessellate_join_proposed,
    tessellate_polyline,
    tessellate_segment,
)

__version__ = "0.1.0"

__all__ = [
    "AAVertex",
    "AccountingMode",
    "Framebuffer",
    "JoinGeometry",
    "Label",
    "Polyline",
    "RenderStats",
    "Scene",
    "Side",
    "StrokeStyle",
    "TriangleBatch",
    "Vec2",
    "backend_name",
    "blend_source_over",
    "draw_batch",
    "fit_viewport",
    "format_geojson",
    "format_path_text",
    "fragment_alpha",
    "make_join",
    "parse_geojson_lines",
    "parse_path_text",
    "perp",
    "rasterize_triangle",
    "render_scene",
    "signed_turn_angle",
    "tessellate_join_fan",
    "tessellate_join_proposed",
    "tessellate_polyline",
    "tessellate_segment",
    "unit",
]
