"""Drawing primitives: the only geometry vocabulary generators may emit.

All coordinates are paper millimetres.  Each primitive knows its bounding
box, its distance to a point (for picking) and how to move itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace
from typing import ClassVar

Point = tuple[float, float]

LINE_TYPES = ("solid", "dashed", "dashdot")
MARKER_KINDS = ("dot", "cross", "elevation")
MARKER_HALF = 1.0
TEXT_WIDTH_FACTOR = 0.6


def text_extent(content: str, height: float) -> tuple[float, float]:
    """Width and height of a text string; no font metrics, fixed pitch."""
    return len(content) * height * TEXT_WIDTH_FACTOR, height


def _seg_dist(p: Point, a: Point, b: Point) -> float:
    ax, ay = a
    dx, dy = b[0] - ax, b[1] - ay
    L2 = dx * dx + dy * dy
    if L2 == 0:
        return math.hypot(p[0] - ax, p[1] - ay)
    t = max(0.0, min(1.0, ((p[0] - ax) * dx + (p[1] - ay) * dy) / L2))
    return math.hypot(p[0] - (ax + t * dx), p[1] - (ay + t * dy))


def _angle_in_sweep(theta: float, start: float, sweep: float) -> bool:
    if sweep < 0:
        start, sweep = start + sweep, -sweep
    if sweep >= 360:
        return True
    return (theta - start) % 360.0 <= sweep


@dataclass(frozen=True)
class Primitive:
    kind: ClassVar[str] = ""
    color: int = field(default=7, kw_only=True)
    line_type: int = field(default=0, kw_only=True)

    def to_dict(self) -> dict:
        d = {"kind": self.kind}
        for f in fields(self):
            v = getattr(self, f.name)
            d[f.name] = [list(p) for p in v] if f.name == "points" else (
                list(v) if isinstance(v, tuple) else v)
        return d

    def canonical(self) -> str:
        """Stable text form: fixed 6-decimal floats, fields in declaration order."""
        parts = [self.kind]
        for f in fields(self):
            parts.append(f"{f.name}={_fmt(getattr(self, f.name))}")
        return " ".join(parts)


def _fmt(v) -> str:
    if isinstance(v, float):
        s = f"{v:.6f}"
        return "0.000000" if s == "-0.000000" else s
    if isinstance(v, tuple):
        return "(" + ",".join(_fmt(x) for x in v) + ")"
    return repr(v)


@dataclass(frozen=True)
class Segment(Primitive):
    kind: ClassVar[str] = "segment"
    p1: Point
    p2: Point

    def bbox(self):
        (x1, y1), (x2, y2) = self.p1, self.p2
        return min(x1, x2), min(y1, y2), max(x1, x2), max(y1, y2)

    def distance(self, p: Point) -> float:
        return _seg_dist(p, self.p1, self.p2)

    def translate(self, dx, dy):
        return replace(self, p1=(self.p1[0] + dx, self.p1[1] + dy),
                       p2=(self.p2[0] + dx, self.p2[1] + dy))


@dataclass(frozen=True)
class Polyline(Primitive):
    kind: ClassVar[str] = "polyline"
    points: tuple[Point, ...]
    closed: bool = False

    def __post_init__(self):
        if len(self.points) < 2:
            raise ValueError("polyline needs at least 2 points")

    def bbox(self):
        xs = [p[0] for p in self.points]
        ys = [p[1] for p in self.points]
        return min(xs), min(ys), max(xs), max(ys)

    def _edges(self):
        pts = self.points
        yield from zip(pts, pts[1:])
        if self.closed:
            yield pts[-1], pts[0]

    def distance(self, p: Point) -> float:
        return min(_seg_dist(p, a, b) for a, b in self._edges())

    def translate(self, dx, dy):
        return replace(self, points=tuple((x + dx, y + dy) for x, y in self.points))


@dataclass(frozen=True)
class Circle(Primitive):
    kind: ClassVar[str] = "circle"
    center: Point
    r: float

    def __post_init__(self):
        if not self.r > 0:
            raise ValueError("circle radius must be positive")

    def bbox(self):
        cx, cy = self.center
        return cx - self.r, cy - self.r, cx + self.r, cy + self.r

    def distance(self, p: Point) -> float:
        return abs(math.hypot(p[0] - self.center[0], p[1] - self.center[1]) - self.r)

    def translate(self, dx, dy):
        return replace(self, center=(self.center[0] + dx, self.center[1] + dy))


@dataclass(frozen=True)
class Arc(Primitive):
    kind: ClassVar[str] = "arc"
    center: Point
    r: float
    start: float  # degrees, counter-clockwise from +x
    sweep: float  # degrees, negative sweeps clockwise

    def __post_init__(self):
        if not self.r > 0:
            raise ValueError("arc radius must be positive")

    def point_at(self, deg: float) -> Point:
        a = math.radians(deg)
        return self.center[0] + self.r * math.cos(a), self.center[1] + self.r * math.sin(a)

    @property
    def endpoints(self) -> tuple[Point, Point]:
        return self.point_at(self.start), self.point_at(self.start + self.sweep)

    def bbox(self):
        pts = list(self.endpoints)
        for quad in (0.0, 90.0, 180.0, 270.0):
            if _angle_in_sweep(quad, self.start, self.sweep):
                pts.append(self.point_at(quad))
        xs = [p[0] for p in pts]
        ys = [p[1] for p in pts]
        return min(xs), min(ys), max(xs), max(ys)

    def distance(self, p: Point) -> float:
        theta = math.degrees(math.atan2(p[1] - self.center[1], p[0] - self.center[0]))
        if _angle_in_sweep(theta, self.start, self.sweep):
            return abs(math.hypot(p[0] - self.center[0], p[1] - self.center[1]) - self.r)
        return min(math.hypot(p[0] - e[0], p[1] - e[1]) for e in self.endpoints)

    def translate(self, dx, dy):
        return replace(self, center=(self.center[0] + dx, self.center[1] + dy))


@dataclass(frozen=True)
class Text(Primitive):
    """Left-aligned text; `pos` is the bottom-left corner of its extent."""

    kind: ClassVar[str] = "text"
    pos: Point
    height: float
    angle: float
    content: str

    def __post_init__(self):
        if not self.height > 0:
            raise ValueError("text height must be positive")

    def corners(self) -> list[Point]:
        w, h = text_extent(self.content, self.height)
        a = math.radians(self.angle)
        c, s = math.cos(a), math.sin(a)
        x0, y0 = self.pos
        return [(x0 + u * c - v * s, y0 + u * s + v * c) for u, v in ((0, 0), (w, 0), (w, h), (0, h))]

    def bbox(self):
        pts = self.corners()
        xs = [p[0] for p in pts]
        ys = [p[1] for p in pts]
        return min(xs), min(ys), max(xs), max(ys)

    def distance(self, p: Point) -> float:
        # Distance to the extent rectangle, measured in the text's own frame.
        w, h = text_extent(self.content, self.height)
        a = math.radians(self.angle)
        dx, dy = p[0] - self.pos[0], p[1] - self.pos[1]
        u = dx * math.cos(a) + dy * math.sin(a)
        v = -dx * math.sin(a) + dy * math.cos(a)
        du = max(0.0, -u, u - w)
        dv = max(0.0, -v, v - h)
        return math.hypot(du, dv)

    def translate(self, dx, dy):
        return replace(self, pos=(self.pos[0] + dx, self.pos[1] + dy))


@dataclass(frozen=True)
class Marker(Primitive):
    kind: ClassVar[str] = "marker"
    pos: Point
    mark: str = "dot"

    def __post_init__(self):
        if self.mark not in MARKER_KINDS:
            raise ValueError(f"unknown marker kind {self.mark!r}")

    def bbox(self):
        x, y = self.pos
        return x - MARKER_HALF, y - MARKER_HALF, x + MARKER_HALF, y + MARKER_HALF

    def distance(self, p: Point) -> float:
        return math.hypot(p[0] - self.pos[0], p[1] - self.pos[1])

    def translate(self, dx, dy):
        return replace(self, pos=(self.pos[0] + dx, self.pos[1] + dy))


PRIMITIVES = {cls.kind: cls for cls in (Segment, Polyline, Circle, Arc, Text, Marker)}


def primitive_from_dict(d: dict) -> Primitive:
    d = dict(d)
    cls = PRIMITIVES[d.pop("kind")]
    for k, v in d.items():
        if k == "points":
            d[k] = tuple(tuple(p) for p in v)
        elif isinstance(v, list):
            d[k] = tuple(v)
    return cls(**d)


Rect = tuple[float, float, float, float]


def union(a: Rect | None, b: Rect | None) -> Rect | None:
    if a is None:
        return b
    if b is None:
        return a
    return min(a[0], b[0]), min(a[1], b[1]), max(a[2], b[2]), max(a[3], b[3])
