"""MCD1 drawing files.

The file is the 5-byte line ``MCD1\\n`` followed by one UTF-8 JSON
document with sorted keys, so identical drawings give identical bytes.
Payloads and bytes-valued properties are stored as lowercase hex.
"""

from __future__ import annotations

import json
from pathlib import Path

from .codec import encode_compact
from .errors import DrawingFormatError, ModcadError
from .geometry import primitive_from_dict
from .model import (
    Drawing,
    DrawingSettings,
    Module,
    ModuleTypeRegistry,
    Session,
    Shape,
    Tag,
    WorkingModule,
)

MAGIC = b"MCD1\n"
VERSION = 1


def _prop_out(value):
    if isinstance(value, bytes):
        return {"hex": value.hex()}
    if isinstance(value, tuple):
        return list(value)
    return value


def _prop_in(kind: str, value):
    if kind == "bytes":
        return bytes.fromhex(value["hex"])
    if kind == "point":
        return tuple(float(v) for v in value)
    return value


def drawing_to_dict(drawing: Drawing) -> dict:
    elements = []
    for e in drawing.elements:
        if isinstance(e, Module):
            elements.append({
                "element": "module", "id": e.id, "type_name": e.type_name,
                "properties": {k: _prop_out(v) for k, v in e.properties.items()},
                "payload": e.payload.hex(), "anchor": list(e.anchor),
                "geometry": [p.to_dict() for p in e.geometry],
            })
        elif isinstance(e, WorkingModule):
            elements.append({
                "element": "working", "id": e.id, "owner": e.owner,
                "tag": list(e.tag), "origin": list(e.origin),
                "primitives": [p.to_dict() for p in e.primitives],
            })
        else:
            elements.append({"element": "shape", "id": e.id, "primitive": e.primitive.to_dict()})
    sessions = {}
    for ext_id, s in drawing.sessions.items():
        payload = encode_compact(s.pp) if s.pp is not None else s.payload
        sessions[ext_id] = {"payload": payload.hex(), "replace_target": s.replace_target}
    st = drawing.settings
    return {
        "version": VERSION,
        "sheet": list(drawing.sheet_size),
        "settings": {"color": st.color, "line_type": st.line_type, "text_height": st.text_height},
        "next_id": drawing.next_id,
        "elements": elements,
        "sessions": sessions,
    }


def drawing_from_dict(doc: dict, registry: ModuleTypeRegistry | None = None) -> Drawing:
    try:
        w, h = doc["sheet"]
        drawing = Drawing(w, h, DrawingSettings(**doc["settings"]), registry)
        for item in doc["elements"]:
            kind = item["element"]
            if kind == "module":
                kinds = drawing.registry.get(item["type_name"]).kinds()
                props = {k: _prop_in(kinds.get(k, "text"), v) for k, v in item["properties"].items()}
                el = Module(item["type_name"], props, bytes.fromhex(item["payload"]),
                            tuple(primitive_from_dict(p) for p in item["geometry"]),
                            tuple(item["anchor"]))
            elif kind == "working":
                el = WorkingModule(item["owner"], Tag(*item["tag"]),
                                   tuple(primitive_from_dict(p) for p in item["primitives"]),
                                   tuple(item["origin"]))
            elif kind == "shape":
                el = Shape(primitive_from_dict(item["primitive"]))
            else:
                raise DrawingFormatError(f"unknown element kind {kind!r}")
            drawing.add(el, item["id"])
        drawing.next_id = max(drawing.next_id, int(doc.get("next_id", 1)))
        for ext_id, s in doc.get("sessions", {}).items():
            drawing.sessions[ext_id] = Session(bytes.fromhex(s["payload"]), None, s["replace_target"])
    except ModcadError as exc:
        if isinstance(exc, DrawingFormatError):
            raise
        raise DrawingFormatError(str(exc)) from exc
    except (KeyError, TypeError, ValueError) as exc:
        raise DrawingFormatError(f"malformed drawing: {exc!r}") from exc
    return drawing


def dumps_drawing(drawing: Drawing) -> bytes:
    text = json.dumps(drawing_to_dict(drawing), ensure_ascii=False, sort_keys=True, indent=1)
    return MAGIC + text.encode("utf-8") + b"\n"


def loads_drawing(data: bytes, registry: ModuleTypeRegistry | None = None) -> Drawing:
    if not data.startswith(MAGIC):
        raise DrawingFormatError("not an MCD1 drawing")
    try:
        doc = json.loads(data[len(MAGIC):].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise DrawingFormatError(f"drawing body is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("version") != VERSION:
        raise DrawingFormatError("unsupported drawing version")
    return drawing_from_dict(doc, registry)


def save_drawing(drawing: Drawing, path) -> None:
    Path(path).write_bytes(dumps_drawing(drawing))


def load_drawing(path, registry: ModuleTypeRegistry | None = None) -> Drawing:
    with open(path, "rb") as fh:
        return loads_drawing(fh.read(), registry)
