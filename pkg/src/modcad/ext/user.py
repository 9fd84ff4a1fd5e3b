"""General-purpose user modules: free lines, circles and texts in paper mm."""

from __future__ import annotations

from ..errors import CommandError
from ..extension import Command, CommandResult, Extension, parse_numbers
from ..geometry import Circle, Segment, Text, text_extent
from ..schema import ListSchema, PPSchema, enum, fixed, ref, text, uint
from ..store import PP, add_object

SCHEMA = PPSchema(
    name="user",
    version=1,
    lists=(
        ListSchema("points", (fixed("x", 32), fixed("y", 32))),
        ListSchema("segments", (
            ref("a", "points"),
            ref("b", "points"),
            uint("color", 8),
            enum("line_type", 2, ("solid", "dashed", "dashdot")),
        )),
        ListSchema("circles", (ref("center", "points"), fixed("r", 24), uint("color", 8))),
        ListSchema("texts", (
            fixed("x", 32), fixed("y", 32),
            text("text"),
            fixed("height", 16, 0.1),
            fixed("angle", 16, 0.1),
            uint("color", 8),
        )),
    ),
    general=(
        fixed("anchor_x", 32),
        fixed("anchor_y", 32),
        uint("line_color", 8, default=7, governs=("segments", "color"), mode="default"),
        enum("default_line_type", 2, ("solid", "dashed", "dashdot"), default=0,
             governs=("segments", "line_type"), mode="default"),
        uint("circle_color", 8, default=7, governs=("circles", "color"), mode="default"),
        uint("text_color", 8, default=7, governs=("texts", "color"), mode="default"),
        fixed("text_height", 16, 0.1, default=3.5, governs=("texts", "height"), mode="default"),
    ),
)


def _xy(pp: PP, i: int):
    r = pp.records["points"][i]
    return r["x"], r["y"]


def speed(list_name: str, rec) -> dict:
    if list_name == "texts":
        w, h = text_extent(rec["text"], rec["height"])
        return {"width": w, "height": h}
    return {}


def generate(ctx):
    pp, rec = ctx.pp, ctx.record
    if ctx.list_name == "segments":
        return [Segment(_xy(pp, rec["a"]), _xy(pp, rec["b"]),
                        color=rec["color"], line_type=rec["line_type"])]
    if ctx.list_name == "circles":
        if rec["r"] <= 0:
            return []
        return [Circle(_xy(pp, rec["center"]), rec["r"], color=rec["color"])]
    if ctx.list_name == "texts":
        if rec["height"] <= 0:
            return []
        return [Text((rec["x"], rec["y"]), rec["height"], rec["angle"], rec["text"],
                     color=rec["color"])]
    return None


def add_line(pp: PP, points) -> list[int]:
    idx = [add_object(pp, "points", {"x": x, "y": y}) for x, y in points]
    return [add_object(pp, "segments", {"a": a, "b": b}) for a, b in zip(idx, idx[1:])]


def _cmd_add_line(ctx, args):
    if len(args) < 2:
        raise CommandError("usage: add-line x,y x,y ...")
    segs = add_line(ctx.pp, [parse_numbers(a, 2) for a in args])
    return CommandResult(f"segments {segs} added", segs)


def _cmd_add_circle(ctx, args):
    if len(args) != 2:
        raise CommandError("usage: add-circle x,y <r>")
    x, y = parse_numbers(args[0], 2)
    try:
        r = float(args[1])
    except ValueError:
        raise CommandError(f"radius must be a number, got {args[1]!r}") from None
    if r <= 0:
        raise CommandError("radius must be positive")
    c = add_object(ctx.pp, "points", {"x": x, "y": y})
    i = add_object(ctx.pp, "circles", {"center": c, "r": r})
    return CommandResult(f"circles[{i}] added", i)


def _cmd_add_text(ctx, args):
    if len(args) != 2:
        raise CommandError("usage: add-text x,y <text>")
    x, y = parse_numbers(args[0], 2)
    i = add_object(ctx.pp, "texts", {"x": x, "y": y, "text": args[1], "angle": 0.0})
    return CommandResult(f"texts[{i}] added", i)


def _init(ds) -> dict:
    return {"line_color": ds.color, "circle_color": ds.color, "text_color": ds.color,
            "default_line_type": ds.line_type, "text_height": ds.text_height}


EXTENSION = Extension(
    id="user",
    module_type="Пользовательский",
    schema=SCHEMA,
    generator=generate,
    speed_fn=speed,
    init_settings=_init,
    commands=(
        Command("add-line", "add-line x,y x,y ...", "add a chain of segments", _cmd_add_line),
        Command("add-circle", "add-circle x,y <r>", "add a circle", _cmd_add_circle),
        Command("add-text", "add-text x,y <text>", "add a text", _cmd_add_text),
    ),
    title="user drawing module",
)
