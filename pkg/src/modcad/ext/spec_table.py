"""Tabular document modules and specification building.

A table PP holds columns, rows and cells; the grid is drawn downward from
the PP origin (top-left corner).  :func:`build_specification` fills such a
table from the specifying properties of modules found in the current
drawing and in other drawing files, which are only ever read.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from ..errors import (
    CodecError,
    CommandError,
    DrawingFormatError,
    FieldMismatch,
    InconsistentMass,
    UnreadableSource,
)
from ..extension import Command, CommandResult, Extension, parse_int
from ..geometry import Segment, Text
from ..model import Drawing, Module
from ..schema import ListSchema, PPSchema, fixed, flag, ref, text, uint
from ..store import PP, add_object, edit_object, new_pp

HEADER_COLOR = 5
INSET = 1.0  # mm, left inset of cell text

DESIGNATION = "Обозначение"
NAME = "Наименование"
MASS = "Масса"
NOTE = "Примечание"

ESKD_COLUMNS = (
    ("Обозначение", 50.0),
    ("Наименование", 60.0),
    ("Кол.", 10.0),
    ("Масса ед.", 15.0),
    ("Примечание", 25.0),
)

SCHEMA = PPSchema(
    name="table",
    version=1,
    lists=(
        ListSchema("columns", (text("title"), fixed("width_mm", 16, 0.1))),
        ListSchema("rows", (flag("bold"),)),
        ListSchema("cells", (ref("row", "rows"), ref("col", "columns"), text("text"))),
    ),
    general=(
        fixed("anchor_x", 32),
        fixed("anchor_y", 32),
        fixed("row_height", 16, 0.1, default=8.0),
        flag("header", default=True),
        fixed("text_height", 16, 0.1, default=2.5),
        uint("text_color", 8, default=7, governs=("cells", "color"), mode="list"),
    ),
)


@dataclass(frozen=True)
class SpecRow:
    designation: str
    name: str
    quantity: int
    unit_mass: float | None
    note: str


# -- table editing --------------------------------------------------------------------

def add_column(pp: PP, title: str, width_mm: float) -> int:
    return add_object(pp, "columns", {"title": title, "width_mm": width_mm})


def add_row(pp: PP, bold: bool = False) -> int:
    return add_object(pp, "rows", {"bold": bold})


def find_cell(pp: PP, row: int, col: int) -> int | None:
    for i, c in enumerate(pp.records["cells"]):
        if c["row"] == row and c["col"] == col:
            return i
    return None


def set_cell(pp: PP, row: int, col: int, content: str) -> int:
    """Insert or overwrite the single cell at (row, col); returns its index."""
    i = find_cell(pp, row, col)
    if i is None:
        return add_object(pp, "cells", {"row": row, "col": col, "text": content})
    edit_object(pp, "cells", i, {"text": content})
    return i


def check(pp: PP) -> None:
    seen = set()
    for c in pp.records["cells"]:
        key = (c["row"], c["col"])
        if key in seen:
            raise FieldMismatch(f"more than one cell at row {key[0]}, column {key[1]}")
        seen.add(key)
    for i, col in enumerate(pp.records["columns"]):
        if not col["width_mm"] > 0:
            raise FieldMismatch(f"column {i} width must be positive")


# -- generation -------------------------------------------------------------------

def layout(pp: PP) -> tuple[list[float], float, int]:
    """Cumulative column edges, row height and number of header rows."""
    edges = [0.0]
    for col in pp.records["columns"]:
        edges.append(edges[-1] + col["width_mm"])
    return edges, pp.general["row_height"], 1 if pp.general["header"] else 0


def speed(list_name: str, rec) -> dict:
    if list_name == "cells":
        return {"chars": len(rec["text"])}
    if list_name == "columns":
        return {"chars": len(rec["title"])}
    return {}


def _cell_text(pp: PP, x: float, band: int, content: str, color: int) -> Text:
    h = pp.general["row_height"]
    th = pp.general["text_height"]
    y = -(band + 1) * h + (h - th) / 2
    return Text((x + INSET, y), th, 0.0, content, color=color)


def generate(ctx):
    pp, i = ctx.pp, ctx.index
    edges, h, head = layout(pp)
    total = (head + len(pp.records["rows"])) * h
    if ctx.list_name == "columns":
        x0, x1 = edges[i], edges[i + 1]
        out = [Segment((x0, 0.0), (x1, 0.0))]
        if head:
            out.append(Segment((x0, -h), (x1, -h)))
            out.append(_cell_text(pp, x0, 0, ctx.record["title"], HEADER_COLOR))
        if total > 0:
            if i == 0:
                out.append(Segment((x0, 0.0), (x0, -total)))
            out.append(Segment((x1, 0.0), (x1, -total)))
        return out
    if ctx.list_name == "rows":
        y = -(head + i + 1) * h
        return [Segment((0.0, y), (edges[-1], y))]
    if ctx.list_name == "cells":
        row, col = ctx.record["row"], ctx.record["col"]
        color = HEADER_COLOR if pp.records["rows"][row]["bold"] else ctx.value("color")
        return [_cell_text(pp, edges[col], head + row, ctx.record["text"], color)]
    return None


# -- specification ------------------------------------------------------------------

def qualifies(module: Module) -> bool:
    return DESIGNATION in module.properties and NAME in module.properties


def collect_rows(modules: Iterable[Module]) -> list[SpecRow]:
    """Group qualifying modules by (designation, name); one module is one unit.

    Unit mass must agree within a group (modules without a mass are
    ignored for that check); the note comes from the first module.
    """
    groups: dict[tuple[str, str], list] = {}
    for m in modules:
        if not qualifies(m):
            continue
        p = m.properties
        key = (str(p[DESIGNATION]), str(p[NAME]))
        mass = p.get(MASS)
        g = groups.get(key)
        if g is None:
            groups[key] = [1, mass, str(p.get(NOTE, ""))]
            continue
        g[0] += 1
        if mass is not None:
            if g[1] is None:
                g[1] = mass
            elif float(g[1]) != float(mass):
                raise InconsistentMass(key[0])
    return [
        SpecRow(d, n, q, None if m is None else float(m), note)
        for (d, n), (q, m, note) in sorted(groups.items())
    ]


def format_mass(m: float | None) -> str:
    if m is None:
        return ""
    s = f"{m:.3f}".rstrip("0").rstrip(".")
    return "0" if s in ("", "-0") else s


def table_from_rows(rows: Sequence[SpecRow], columns=ESKD_COLUMNS, **general) -> PP:
    pp = new_pp(SCHEMA, general, speed)
    for title, width in columns:
        add_column(pp, title, width)
    for r in rows:
        i = add_row(pp)
        for col, value in enumerate((r.designation, r.name, str(r.quantity),
                                     format_mass(r.unit_mass), r.note)):
            if value and col < len(columns):
                set_cell(pp, i, col, value)
    return pp


def read_source_modules(path) -> list[Module]:
    from ..fileio import load_drawing

    try:
        return load_drawing(path).modules()
    except (OSError, DrawingFormatError, CodecError, ValueError) as exc:
        raise UnreadableSource(str(path), str(exc)) from exc


def build_specification(drawing: Drawing, external_paths: Sequence = (), **general) -> PP:
    """Specification table for `drawing` plus external drawings (read only)."""
    modules = list(drawing.modules())
    for path in external_paths:
        modules.extend(read_source_modules(Path(path)))
    return table_from_rows(collect_rows(modules), **general)


def table_size(pp: PP) -> tuple[float, float]:
    edges, h, head = layout(pp)
    return edges[-1], (head + len(pp.records["rows"])) * h


# -- commands --------------------------------------------------------------------------

def _cmd_add_column(ctx, args):
    if len(args) != 2:
        raise CommandError("usage: add-column <title> <width>")
    try:
        width = float(args[1])
    except ValueError:
        raise CommandError(f"width must be a number, got {args[1]!r}") from None
    i = add_column(ctx.pp, args[0], width)
    return CommandResult(f"columns[{i}] added", i)


def _cmd_add_row(ctx, args):
    i = add_row(ctx.pp, bold=bool(args and args[0] == "bold"))
    return CommandResult(f"rows[{i}] added", i)


def _cmd_set_cell(ctx, args):
    if len(args) != 3:
        raise CommandError("usage: set-cell <row> <col> <text>")
    i = set_cell(ctx.pp, parse_int(args[0], "row"), parse_int(args[1], "column"), args[2])
    return CommandResult(f"cells[{i}] set", i)


def _properties(pp: PP) -> dict:
    return {"Описание таблицы": f"{len(pp.records['columns'])} columns, {len(pp.records['rows'])} rows"}


def _init(ds) -> dict:
    return {"text_color": ds.color}


EXTENSION = Extension(
    id="table",
    module_type="Табличный",
    schema=SCHEMA,
    generator=generate,
    speed_fn=speed,
    init_settings=_init,
    commands=(
        Command("add-column", "add-column <title> <width>", "append a column", _cmd_add_column),
        Command("add-row", "add-row [bold]", "append a row", _cmd_add_row),
        Command("set-cell", "set-cell <row> <col> <text>", "write one cell", _cmd_set_cell),
    ),
    check=check,
    module_properties=_properties,
    title="tabular document",
)
