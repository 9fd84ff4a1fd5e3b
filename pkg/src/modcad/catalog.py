"""Prototype catalog: a flat directory of ``<name>.ppc`` compact images."""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

from .codec import decode_compact, encode_compact, read_header
from .errors import CodecError, CommandError, NameCollision, NotFound
from .geometry import Rect
from .schema import PPSchema
from .store import PP, SpeedFn, recompute_speed_vars

SUFFIX = ".ppc"
_STEM = re.compile(r"^[\w][\w.\-]*$")


@dataclass
class CatalogEntry:
    name: str
    path: Path
    image: bytes
    schema_name: str | None
    bounds: Rect | None


def _path(directory, name: str) -> Path:
    if not _STEM.match(name) or name.endswith(SUFFIX):
        raise CommandError(f"invalid catalog name {name!r}")
    return Path(directory) / (name + SUFFIX)


def catalog_save(directory, name: str, pp: PP, overwrite: bool = False) -> Path:
    path = _path(directory, name)
    if path.exists() and not overwrite:
        raise NameCollision(f"catalog entry {name!r} already exists")
    image = encode_compact(pp)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(image)
    return path


def catalog_load(directory, name: str, schema: PPSchema, speed_fn: SpeedFn | None = None) -> PP:
    path = _path(directory, name)
    if not path.is_file():
        raise NotFound(f"no catalog entry {name!r} in {directory}")
    pp = decode_compact(path.read_bytes(), schema, speed_fn)
    recompute_speed_vars(pp)
    return pp


def catalog_list(directory,
                 preview: Callable[[bytes, str], Rect | None] | None = None) -> list[CatalogEntry]:
    """Entries sorted by name.

    `preview(image, schema_name)` computes preview bounds; entries whose
    image cannot be read get ``None`` bounds.
    """
    d = Path(directory)
    if not d.is_dir():
        return []
    out = []
    for path in sorted(d.glob("*" + SUFFIX), key=lambda p: p.stem):
        image = path.read_bytes()
        try:
            schema_name = read_header(image)[0]
        except CodecError:
            schema_name = None
        box = None
        if preview is not None and schema_name is not None:
            try:
                box = preview(image, schema_name)
            except CodecError:
                box = None
        out.append(CatalogEntry(path.stem, path, image, schema_name, box))
    return out
