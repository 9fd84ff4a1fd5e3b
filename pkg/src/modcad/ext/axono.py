"""Axonometric piping schemes.

Pipes are straight runs between 3D points.  A break plane normal to one
axis shifts everything strictly beyond it along that axis, which shortens
long pipes on the sheet; it is only legal when every pipe crossing the
plane runs along the plane's normal, so no pipe changes direction.
"""

from __future__ import annotations

import math

from ..coords import AxonoProjection, PlaneCS, nature_to_paper, project3
from ..errors import BreakNotAllowed, CommandError, DegeneratePolyline
from ..extension import Command, CommandResult, Extension, parse_numbers, parse_int
from ..geometry import Marker, Segment, Text, text_extent
from ..schema import ListSchema, PPSchema, enum, fixed, flag, ref, text, uint
from ..store import PP, add_object

AXES = ("X", "Y", "Z")
LINE_TYPES = ("solid", "dashed", "dashdot")
DEDUP_TOL = 0.005  # mm, half the coordinate step
TICK_LEN = 2.0  # paper mm
LABEL_GAP = 1.5  # in label heights
MINUS = "−"

SCHEMA = PPSchema(
    name="axono",
    version=1,
    lists=(
        ListSchema("points", (fixed("x", 32), fixed("y", 32), fixed("z", 32))),
        ListSchema("pipes", (
            ref("start", "points"),
            ref("end", "points"),
            uint("diameter_mm", 12),
            enum("line_type", 2, LINE_TYPES),
            flag("show_length"),
        )),
        ListSchema("breaks", (
            enum("axis", 2, AXES),
            fixed("plane_coord", 32),
            fixed("offset", 32),
        )),
        ListSchema("labels", (
            # Pipe-bound labels go with their pipe; free labels have no target.
            ref("target", "pipes", optional=True, on_delete="cascade"),
            fixed("x", 32), fixed("y", 32), fixed("z", 32),
            text("text"),
            fixed("height", 16, 0.1),
        )),
    ),
    general=(
        fixed("anchor_x", 32),
        fixed("anchor_y", 32),
        uint("scale", 16, default=100),
        fixed("alpha", 16, 0.01, default=45.0),
        fixed("k", 16, 0.001, default=1.0),
        uint("default_diameter", 12, default=50, governs=("pipes", "diameter_mm"), mode="default"),
        enum("default_line_type", 2, LINE_TYPES, default=0,
             governs=("pipes", "line_type"), mode="default"),
        flag("draw_dimensions", default=False, governs=("pipes", "show_length"), mode="default"),
        fixed("label_height", 16, 0.1, default=3.5, governs=("labels", "height"), mode="default"),
        flag("draw_elevations", default=False, governs=("points", "show_elevation"), mode="list"),
        uint("pipe_color", 8, default=7, governs=("pipes", "color"), mode="list"),
    ),
)


# -- geometry helpers ---------------------------------------------------------------

def point3(pp: PP, index: int) -> tuple[float, float, float]:
    r = pp.records["points"][index]
    return r["x"], r["y"], r["z"]


def shifted(pp: PP, p3):
    """Apply every break whose far half-space strictly contains `p3`."""
    p = list(p3)
    for b in pp.records["breaks"]:
        a = b["axis"]
        if p3[a] > b["plane_coord"]:
            p[a] += b["offset"]
    return tuple(p)


def view(pp: PP) -> tuple[AxonoProjection, PlaneCS]:
    g = pp.general
    return AxonoProjection(g["alpha"], g["k"]), PlaneCS((0.0, 0.0), g["scale"])


def to_paper(pp: PP, p3, shift: bool = True):
    proj, cs = view(pp)
    return nature_to_paper(cs, project3(proj, shifted(pp, p3) if shift else p3))


def _same(a: float, b: float) -> bool:
    return abs(a - b) <= DEDUP_TOL


def parallel_to(axis: int, p: tuple, q: tuple) -> bool:
    return all(_same(p[i], q[i]) for i in range(3) if i != axis)


def crossing_pipes(pp: PP, axis: int, coord: float) -> list[int]:
    """Pipes whose endpoints lie strictly on opposite sides of the plane."""
    out = []
    for i, pipe in enumerate(pp.records["pipes"]):
        a, b = point3(pp, pipe["start"])[axis], point3(pp, pipe["end"])[axis]
        if min(a, b) < coord < max(a, b):
            out.append(i)
    return out


def break_offenders(pp: PP, axis: int, coord: float) -> list[int]:
    return [
        i for i in crossing_pipes(pp, axis, coord)
        if not parallel_to(axis, point3(pp, pp.records["pipes"][i]["start"]),
                           point3(pp, pp.records["pipes"][i]["end"]))
    ]


def format_elevation(z_mm: float) -> str:
    m = round(z_mm / 1000.0, 3)
    if m == 0:
        return "±0.000"
    return ("+" if m > 0 else MINUS) + f"{abs(m):.3f}"


def _unit_normal(p, q):
    dx, dy = q[0] - p[0], q[1] - p[1]
    L = math.hypot(dx, dy)
    if L == 0:
        return (0.0, 1.0), (1.0, 0.0)
    d = (dx / L, dy / L)
    n = (-d[1], d[0])
    if n[1] < 0 or (n[1] == 0 and n[0] > 0):
        n = (-n[0], -n[1])
    return n, d


def _text_beside(mid, n, content: str, height: float, width: float, sign: float = 1.0) -> Text:
    """Text whose extent sits LABEL_GAP heights from `mid` along ``sign * n``."""
    nx, ny = n[0] * sign, n[1] * sign
    half = abs(nx) * width / 2 + abs(ny) * height / 2
    dist = LABEL_GAP * height + half
    cx, cy = mid[0] + nx * dist, mid[1] + ny * dist
    return Text((cx - width / 2, cy - height / 2), height, 0.0, content)


# -- operations ---------------------------------------------------------------------

def _find_point(pp: PP, p3) -> int | None:
    for i, r in enumerate(pp.records["points"]):
        if _same(r["x"], p3[0]) and _same(r["y"], p3[1]) and _same(r["z"], p3[2]):
            return i
    return None


def add_axis(pp: PP, points3) -> tuple[list[int], list[int]]:
    """Add a pipe polyline; points within DEDUP_TOL of existing ones are reused."""
    fx = SCHEMA.list("points").field("x")
    pts = [tuple(fx.coerce(float(c)) for c in p) for p in points3]
    if len(pts) < 2:
        raise DegeneratePolyline("an axis needs at least two points")
    for a, b in zip(pts, pts[1:]):
        if all(_same(a[i], b[i]) for i in range(3)):
            raise DegeneratePolyline(f"consecutive points coincide at {a}")
    indices = []
    for p in pts:
        i = _find_point(pp, p)
        if i is None:
            i = add_object(pp, "points", {"x": p[0], "y": p[1], "z": p[2]})
        indices.append(i)
    pipes = [add_object(pp, "pipes", {"start": a, "end": b}) for a, b in zip(indices, indices[1:])]
    return indices, pipes


def add_break(pp: PP, axis, plane_coord: float, offset: float) -> int:
    axis = AXES.index(axis) if isinstance(axis, str) else axis
    fld = SCHEMA.list("breaks").field("offset")
    if fld.coerce(float(offset)) == 0:
        raise CommandError("break offset must be non-zero")
    coord = fld.coerce(float(plane_coord))
    bad = break_offenders(pp, axis, coord)
    if bad:
        raise BreakNotAllowed(bad)
    return add_object(pp, "breaks", {"axis": axis, "plane_coord": coord, "offset": float(offset)})


def attach_label(pp: PP, target, content: str, height: float | None = None) -> int:
    """Label a pipe (by index) or a free nature position (x, y, z)."""
    rec = {"text": content}
    if height is not None:
        rec["height"] = height
    if isinstance(target, int):
        rec.update(target=target, x=0.0, y=0.0, z=0.0)
    else:
        x, y, z = target
        rec.update(x=x, y=y, z=z)
    return add_object(pp, "labels", rec)


def check(pp: PP) -> None:
    """Reject states the schema cannot express: zero-length pipes, illegal breaks."""
    for i, pipe in enumerate(pp.records["pipes"]):
        a, b = point3(pp, pipe["start"]), point3(pp, pipe["end"])
        if all(_same(a[k], b[k]) for k in range(3)):
            raise DegeneratePolyline(f"pipe {i} has zero length")
    for b in pp.records["breaks"]:
        bad = break_offenders(pp, b["axis"], b["plane_coord"])
        if bad:
            raise BreakNotAllowed(bad)


# -- generation ----------------------------------------------------------------------

def speed(list_name: str, rec) -> dict:
    if list_name == "labels":
        w, h = text_extent(rec["text"], rec["height"])
        return {"width": w, "height": h}
    return {}


def _neighbors(pp: PP, index: int) -> list[int]:
    out = []
    for pipe in pp.records["pipes"]:
        if pipe["start"] == index:
            out.append(pipe["end"])
        elif pipe["end"] == index:
            out.append(pipe["start"])
    return out


def _gen_pipe(ctx):
    pp, rec = ctx.pp, ctx.record
    a3, b3 = point3(pp, rec["start"]), point3(pp, rec["end"])
    p, q = to_paper(pp, a3), to_paper(pp, b3)
    color = ctx.value("color")
    out = [Segment(p, q, color=color, line_type=rec["line_type"])]
    n, d = _unit_normal(p, q)
    tick = ((d[0] + n[0]) * math.sqrt(0.5) * TICK_LEN / 2,
            (d[1] + n[1]) * math.sqrt(0.5) * TICK_LEN / 2)
    for b in pp.records["breaks"]:
        axis, c = b["axis"], b["plane_coord"]
        lo, hi = sorted((a3[axis], b3[axis]))
        if not lo < c < hi:
            continue
        t = (c - a3[axis]) / (b3[axis] - a3[axis])
        at = tuple(a3[k] + t * (b3[k] - a3[k]) for k in range(3))
        near = to_paper(pp, at)
        beyond = list(shifted(pp, at))
        beyond[axis] += b["offset"]
        proj, cs = view(pp)
        far = nature_to_paper(cs, project3(proj, beyond))
        for m in (near, far):
            out.append(Segment((m[0] - tick[0], m[1] - tick[1]), (m[0] + tick[0], m[1] + tick[1]),
                               color=color))
    if rec["show_length"]:
        length = math.dist(a3, b3)
        h = pp.general["label_height"]
        content = f"{length:.0f}"
        w, _ = text_extent(content, h)
        mid = ((p[0] + q[0]) / 2, (p[1] + q[1]) / 2)
        out.append(_text_beside(mid, n, content, h, w, sign=-1.0))
    return out


def _gen_label(ctx):
    pp, rec, sp = ctx.pp, ctx.record, ctx.speed
    w, h = sp["width"], sp["height"]
    if rec["target"] is None:
        return [Text(to_paper(pp, (rec["x"], rec["y"], rec["z"])), h, 0.0, rec["text"])]
    pipe = pp.records["pipes"][rec["target"]]
    p = to_paper(pp, point3(pp, pipe["start"]))
    q = to_paper(pp, point3(pp, pipe["end"]))
    n, _ = _unit_normal(p, q)
    mid = ((p[0] + q[0]) / 2, (p[1] + q[1]) / 2)
    return [_text_beside(mid, n, rec["text"], h, w)]


def _gen_point(ctx):
    pp = ctx.pp
    if not ctx.value("show_elevation"):
        return None
    z = ctx.record["z"]
    near = _neighbors(pp, ctx.index)
    if not near or any(_same(point3(pp, j)[2], z) for j in near):
        return None
    pos = to_paper(pp, point3(pp, ctx.index))
    h = pp.general["label_height"]
    return [Marker(pos, "elevation"), Text((pos[0] + 1.5, pos[1] + 1.0), h, 0.0, format_elevation(z))]


def generate(ctx):
    if ctx.list_name == "pipes":
        return _gen_pipe(ctx)
    if ctx.list_name == "labels":
        return _gen_label(ctx)
    if ctx.list_name == "points":
        return _gen_point(ctx)
    return None  # breaks show up as ticks on the pipes they cut


# -- commands ------------------------------------------------------------------------

def _cmd_add_axis(ctx, args):
    if len(args) < 2:
        raise CommandError("usage: add-axis x,y,z x,y,z ...")
    pts, pipes = add_axis(ctx.pp, [parse_numbers(a, 3) for a in args])
    return CommandResult(f"points {pts} pipes {pipes}", (pts, pipes))


def _cmd_add_break(ctx, args):
    if len(args) != 3 or args[0].upper() not in AXES:
        raise CommandError("usage: add-break X|Y|Z <coord> <offset>")
    try:
        coord, offset = float(args[1]), float(args[2])
    except ValueError:
        raise CommandError("break coordinate and offset must be numbers") from None
    i = add_break(ctx.pp, args[0].upper(), coord, offset)
    return CommandResult(f"breaks[{i}] added", i)


def _cmd_label(ctx, args):
    if len(args) not in (2, 3):
        raise CommandError("usage: label <pipe>|<x,y,z> <text> [height]")
    target = parse_numbers(args[0], 3) if "," in args[0] else parse_int(args[0], "pipe index")
    height = float(args[2]) if len(args) == 3 else None
    i = attach_label(ctx.pp, target, args[1], height)
    return CommandResult(f"labels[{i}] added", i)


def _properties(pp: PP) -> dict:
    counts = " ".join(f"{name}={len(rows)}" for name, rows in pp.records.items())
    return {
        "Масштаб при создании": float(pp.general["scale"]),
        "Параметры аксонометрич. схемы": counts,
    }


def _init(ds) -> dict:
    return {"label_height": ds.text_height, "pipe_color": ds.color}


EXTENSION = Extension(
    id="axono",
    module_type="Аксонометрическая схема",
    schema=SCHEMA,
    generator=generate,
    speed_fn=speed,
    init_settings=_init,
    commands=(
        Command("add-axis", "add-axis x,y,z x,y,z ...", "add a pipe polyline", _cmd_add_axis),
        Command("add-break", "add-break X|Y|Z <coord> <offset>", "add a break plane", _cmd_add_break),
        Command("label", "label <pipe>|<x,y,z> <text> [height]", "attach a text label", _cmd_label),
    ),
    check=check,
    module_properties=_properties,
    title="axonometric piping scheme",
)
