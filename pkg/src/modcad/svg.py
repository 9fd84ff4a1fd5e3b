"""Deterministic SVG 1.1 output for drawings and working-module previews."""

from __future__ import annotations

from typing import Iterable, Sequence
from xml.sax.saxutils import escape, quoteattr

from .geometry import Arc, Circle, Marker, MARKER_HALF, Polyline, Primitive, Segment, Text
from .model import Drawing, Module, Shape, WorkingModule
from .regen import bounds

STROKE_WIDTH = 0.25
PREVIEW_MARGIN = 5.0
DASHES = {1: "3,1.5", 2: "6,1.5,0.5,1.5"}
PALETTE = {
    1: "#ff0000", 2: "#c0a000", 3: "#00a000", 4: "#00a0a0",
    5: "#0000ff", 6: "#c000c0", 7: "#000000",
}


def num(v: float) -> str:
    s = f"{v:.3f}"
    return "0.000" if s == "-0.000" else s


def _color(p: Primitive) -> str:
    return PALETTE.get(p.color, "#808080")


class _Canvas:
    def __init__(self, x0: float, top: float):
        self.x0 = x0
        self.top = top  # y value mapped to the top edge of the viewport

    def pt(self, p) -> tuple[str, str]:
        return num(p[0] - self.x0), num(self.top - p[1])

    def stroke(self, p: Primitive) -> str:
        s = f'stroke="{_color(p)}" stroke-width="{STROKE_WIDTH}" fill="none"'
        if p.line_type in DASHES:
            s += f' stroke-dasharray="{DASHES[p.line_type]}"'
        return s

    def render(self, p: Primitive) -> str:
        if isinstance(p, Segment):
            (x1, y1), (x2, y2) = self.pt(p.p1), self.pt(p.p2)
            return f'<line x1="{x1}" y1="{y1}" x2="{x2}" y2="{y2}" {self.stroke(p)}/>'
        if isinstance(p, Polyline):
            pts = " ".join(",".join(self.pt(q)) for q in p.points)
            tag = "polygon" if p.closed else "polyline"
            return f'<{tag} points="{pts}" {self.stroke(p)}/>'
        if isinstance(p, Circle):
            cx, cy = self.pt(p.center)
            return f'<circle cx="{cx}" cy="{cy}" r="{num(p.r)}" {self.stroke(p)}/>'
        if isinstance(p, Arc):
            if abs(p.sweep) >= 360:
                cx, cy = self.pt(p.center)
                return f'<circle cx="{cx}" cy="{cy}" r="{num(p.r)}" {self.stroke(p)}/>'
            (sx, sy), (ex, ey) = (self.pt(e) for e in p.endpoints)
            large = 1 if abs(p.sweep) > 180 else 0
            # y is flipped, so a counter-clockwise sweep becomes sweep-flag 0.
            sweep = 0 if p.sweep > 0 else 1
            r = num(p.r)
            return (f'<path d="M {sx} {sy} A {r} {r} 0 {large} {sweep} {ex} {ey}" '
                    f'{self.stroke(p)}/>')
        if isinstance(p, Text):
            x, y = self.pt(p.pos)
            rot = f' transform="rotate({num(-p.angle)} {x} {y})"' if p.angle else ""
            return (f'<text x="{x}" y="{y}" font-size="{num(p.height)}" '
                    f'font-family="monospace" fill="{_color(p)}"{rot}>{escape(p.content)}</text>')
        if isinstance(p, Marker):
            return self._marker(p)
        raise TypeError(f"cannot render {type(p).__name__}")

    def _marker(self, p: Marker) -> str:
        x, y = p.pos
        h = MARKER_HALF
        if p.mark == "dot":
            cx, cy = self.pt(p.pos)
            return f'<circle cx="{cx}" cy="{cy}" r="{num(h / 2)}" fill="{_color(p)}" stroke="none"/>'
        if p.mark == "cross":
            a = self.pt((x - h, y - h)) + self.pt((x + h, y + h))
            b = self.pt((x - h, y + h)) + self.pt((x + h, y - h))
            return (f'<path d="M {a[0]} {a[1]} L {a[2]} {a[3]} M {b[0]} {b[1]} L {b[2]} {b[3]}" '
                    f'{self.stroke(p)}/>')
        # Elevation mark: triangle with its apex on the point.
        pts = [(x, y), (x - h, y + h), (x + h, y + h)]
        s = " ".join(",".join(self.pt(q)) for q in pts)
        return f'<polygon points="{s}" {self.stroke(p)}/>'


def _group(canvas: _Canvas, attrs: str, prims: Iterable[Primitive]) -> list[str]:
    body = [canvas.render(p) for p in prims]
    return [f"<g {attrs}>", *("  " + b for b in body), "</g>"]


def render_svg(target: Drawing | Sequence[WorkingModule]) -> str:
    """Render a drawing (sheet frame included) or a bare working-module preview."""
    if isinstance(target, Drawing):
        w, h = target.sheet_size
        canvas = _Canvas(0.0, h)
        lines = _header(w, h)
        lines.append(f'<rect x="0.000" y="0.000" width="{num(w)}" height="{num(h)}" '
                     f'stroke="#000000" stroke-width="0.5" fill="none"/>')
        for e in target.elements:
            if isinstance(e, Module):
                attrs = f'class="module" id="m{e.id}" data-type={quoteattr(e.type_name)}'
                lines += _group(canvas, attrs, e.world())
            elif isinstance(e, WorkingModule):
                tag = f"{e.owner}:{e.tag.list_name}:{e.tag.index}:{e.tag.extra}"
                lines += _group(canvas, f'class="working" id="w{e.id}" data-tag="{tag}"', e.world())
            elif isinstance(e, Shape):
                lines.append(canvas.render(e.primitive))
    else:
        wms = list(target)
        box = bounds(wms) or (0.0, 0.0, 0.0, 0.0)
        m = PREVIEW_MARGIN
        w = box[2] - box[0] + 2 * m
        h = box[3] - box[1] + 2 * m
        canvas = _Canvas(box[0] - m, box[3] + m)
        lines = _header(w, h)
        for wm in wms:
            tag = f"{wm.owner}:{wm.tag.list_name}:{wm.tag.index}:{wm.tag.extra}"
            lines += _group(canvas, f'class="working" data-tag="{tag}"', wm.world())
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def _header(w: float, h: float) -> list[str]:
    w, h = max(w, 0.0), max(h, 0.0)
    return [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{num(w)}mm" height="{num(h)}mm" viewBox="0 0 {num(w)} {num(h)}">',
    ]


def write_svg(target, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(render_svg(target))

