"""Working-module generation, regeneration, picking and bounds."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import TYPE_CHECKING, Any, Iterable, Sequence

from .errors import ExtensionMismatch, SpeedVarsMissing
from .geometry import Rect, union
from .model import Drawing, Tag, WorkingModule
from .store import PP

if TYPE_CHECKING:
    from .extension import Extension


@dataclass(frozen=True)
class RecordContext:
    """What a generator sees for one record."""

    pp: PP
    list_name: str
    index: int
    record: dict[str, Any]
    speed: dict | None

    def value(self, field_name: str):
        return self.pp.value(self.list_name, self.index, field_name)


def pp_origin(pp: PP) -> tuple[float, float]:
    g = pp.general
    return float(g.get("anchor_x", 0.0)), float(g.get("anchor_y", 0.0))


def _generate_one(pp: PP, ext: "Extension", list_name: str, index: int) -> WorkingModule | None:
    speed = pp.speed[list_name][index]
    if speed is None:
        raise SpeedVarsMissing(f"{list_name}[{index}]: speed variables not computed")
    ctx = RecordContext(pp, list_name, index, pp.records[list_name][index], speed)
    prims = ext.generator(ctx)
    if prims is None:
        return None
    return WorkingModule(ext.id, Tag(list_name, index), tuple(prims), pp_origin(pp))


def _check_ext(pp: PP, ext: "Extension") -> None:
    if pp.live().schema.hash != ext.schema.hash:
        raise ExtensionMismatch(
            f"PP schema {pp.schema.name!r} does not belong to extension {ext.id!r}")


def generate_all(pp: PP, ext: "Extension") -> list[WorkingModule]:
    """One working module per visible record, in list then index order.

    Uses cached speed variables only; raises SpeedVarsMissing if they were
    never computed.
    """
    _check_ext(pp, ext)
    out = []
    for list_name in pp.schema.list_names:
        for i in range(len(pp.records[list_name])):
            wm = _generate_one(pp, ext, list_name, i)
            if wm is not None:
                out.append(wm)
    return out


def visible_tags(pp: PP, ext: "Extension") -> set[Tag]:
    return {wm.tag for wm in generate_all(pp, ext)}


def regenerate(drawing: Drawing, pp: PP, ext: "Extension",
               subset: Iterable[Tag] | None = None) -> None:
    """Replace the extension's working modules in `drawing`.

    Without `subset` every working module is rebuilt.  With it, only the
    listed tags are touched: live visible records are regenerated in
    place, stale or invisible ones are removed.
    """
    _check_ext(pp, ext)
    if subset is None:
        drawing.remove(wm.id for wm in drawing.working_modules(ext.id))
        for wm in generate_all(pp, ext):
            drawing.add(wm)
        return
    current = {wm.tag: wm for wm in drawing.working_modules(ext.id)}
    for tag in sorted(set(subset)):
        old = current.get(tag)
        live = (tag.list_name in pp.records
                and 0 <= tag.index < len(pp.records[tag.list_name]))
        fresh = _generate_one(pp, ext, tag.list_name, tag.index) if live else None
        if fresh is None:
            if old is not None:
                drawing.remove([old.id])
            continue
        if old is None:
            drawing.add(fresh)
        else:
            fresh.id = old.id
            drawing.elements[drawing.elements.index(old)] = fresh


def pick(drawing: Drawing, point: tuple[float, float], radius: float,
         allowed_lists: Sequence[str] | None = None, owner: str | None = None) -> list[Tag]:
    """Tags of working modules passing within `radius` of `point`.

    Ordered by distance, then by position of the list in `allowed_lists`
    (alphabetical when not given), then by index.
    """
    if radius < 0:
        raise ValueError("pick radius must be non-negative")
    order = {name: i for i, name in enumerate(allowed_lists or ())}
    hits = []
    for wm in drawing.working_modules(owner):
        if allowed_lists is not None and wm.tag.list_name not in order:
            continue
        prims = wm.world()
        if not prims:
            continue
        d = min(p.distance(point) for p in prims)
        if d <= radius:
            rank = order.get(wm.tag.list_name, wm.tag.list_name)
            hits.append((d, rank, wm.tag.index, wm.tag))
    hits.sort(key=lambda h: h[:3])
    return [h[3] for h in hits]


def bounds(working_modules: Iterable[WorkingModule]) -> Rect | None:
    """Tight axis-aligned box over all primitives; None for nothing."""
    box = None
    for wm in working_modules:
        for p in wm.world():
            box = union(box, p.bbox())
    return box


def fingerprint(working_modules: Iterable[WorkingModule]) -> str:
    """SHA-256 over a canonical text form of the generated geometry."""
    h = hashlib.sha256()
    for wm in working_modules:
        h.update(f"{wm.owner}|{wm.tag.list_name}|{wm.tag.index}|{wm.tag.extra}\n".encode())
        for p in wm.primitives:
            h.update(p.canonical().encode("utf-8") + b"\n")
    return h.hexdigest()
