"""Nature / Paper coordinate systems and the axonometric projection.

Nature coordinates are real-world millimetres; paper coordinates are
sheet millimetres.  A :class:`PlaneCS` relates the two for one view.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

Point2 = tuple[float, float]
Point3 = tuple[float, float, float]


@dataclass(frozen=True)
class PlaneCS:
    origin: Point2 = (0.0, 0.0)
    scale: float = 1.0  # nature mm per paper mm; 100 for 1:100

    def __post_init__(self):
        if not self.scale > 0:
            raise ValueError(f"scale must be positive, got {self.scale}")


def nature_to_paper(cs: PlaneCS, p: Point2) -> Point2:
    return (cs.origin[0] + p[0] / cs.scale, cs.origin[1] + p[1] / cs.scale)


def paper_to_nature(cs: PlaneCS, q: Point2) -> Point2:
    return ((q[0] - cs.origin[0]) * cs.scale, (q[1] - cs.origin[1]) * cs.scale)


@dataclass(frozen=True)
class AxonoProjection:
    """Frontal oblique axonometry.

    x stays horizontal, z vertical, and depth y recedes at `alpha_deg`
    with factor `k`.
    """

    alpha_deg: float = 45.0
    k: float = 1.0

    def __post_init__(self):
        if not 0 < self.alpha_deg < 90:
            raise ValueError(f"depth angle must be in (0, 90), got {self.alpha_deg}")
        if not self.k > 0:
            raise ValueError(f"depth factor must be positive, got {self.k}")

    @property
    def depth_axis(self) -> Point2:
        a = math.radians(self.alpha_deg)
        return (self.k * math.cos(a), self.k * math.sin(a))


def project3(proj: AxonoProjection, p: Point3) -> Point2:
    dx, dy = proj.depth_axis
    x, y, z = p
    return (x + y * dx, z + y * dy)


@dataclass
class ViewSet:
    """Named views of one design, each with its own paper placement and scale."""

    views: dict[str, PlaneCS] = field(default_factory=dict)

    def add(self, name: str, cs: PlaneCS) -> None:
        self.views[name] = cs

    def to_paper(self, view: str, p: Point2) -> Point2:
        return nature_to_paper(self.views[view], p)

    def to_nature(self, view: str, q: Point2) -> Point2:
        return paper_to_nature(self.views[view], q)

    def convert(self, q: Point2, src: str, dst: str) -> Point2:
        """Paper point in view `src` to the paper point of the same nature point in `dst`."""
        return self.to_paper(dst, self.to_nature(src, q))
