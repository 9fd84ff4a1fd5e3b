"""Deterministic, diff-friendly text dump of a drawing and its PPs."""

from __future__ import annotations

import json

from .codec import decode_compact
from .errors import CodecError
from .extension import Engine
from .model import Drawing, Module, Shape, WorkingModule
from .schema import FieldSchema
from .store import PP


def fmt_num(v) -> str:
    s = f"{float(v):.3f}"
    return "0.000" if s == "-0.000" else s


def fmt_value(f: FieldSchema, v) -> str:
    if f.kind == "fixed":
        return fmt_num(v)
    if f.kind == "flag":
        return "true" if v else "false"
    if f.kind == "ref":
        return "-" if v is None else str(v)
    if f.kind == "enum":
        return f.labels[v]
    if f.kind == "text":
        return json.dumps(v, ensure_ascii=False)
    return str(v)


def fmt_property(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, float)):
        return fmt_num(v)
    if isinstance(v, tuple):
        return ",".join(fmt_num(x) for x in v)
    if isinstance(v, bytes):
        return "0x" + v.hex()
    return json.dumps(v, ensure_ascii=False)


def dump_pp(pp: PP, indent: str = "") -> list[str]:
    s = pp.schema
    out = [f"{indent}pp {s.name} v{s.version} hash={s.hash:016x}"]
    general = {f.name: f for f in s.general}
    for name in sorted(general):
        out.append(f"{indent}  general {name}={fmt_value(general[name], pp.general[name])}")
    for lst in s.lists:
        rows = pp.records[lst.name]
        out.append(f"{indent}  list {lst.name} ({len(rows)})")
        for i, rec in enumerate(rows):
            vals = " ".join(f"{f.name}={fmt_value(f, rec[f.name])}" for f in lst.fields)
            out.append(f"{indent}    {i}: {vals}")
    return out


def _payload_lines(engine: Engine | None, payload: bytes, indent: str) -> list[str]:
    if not payload:
        return []
    if engine is None:
        return [f"{indent}payload {len(payload)} bytes"]
    try:
        _, pp = engine.decode(payload)
    except (CodecError, Exception) as exc:  # dump must never fail on a bad payload
        return [f"{indent}payload {len(payload)} bytes (undecodable: {exc})"]
    return dump_pp(pp, indent)


def dump_drawing(drawing: Drawing, engine: Engine | None = None) -> str:
    w, h = drawing.sheet_size
    st = drawing.settings
    out = [
        f"sheet {fmt_num(w)} x {fmt_num(h)}",
        f"settings color={st.color} line_type={st.line_type} text_height={fmt_num(st.text_height)}",
        f"elements {len(drawing.elements)}",
    ]
    for e in drawing.elements:
        if isinstance(e, Module):
            out.append(f"[{e.id}] module {json.dumps(e.type_name, ensure_ascii=False)} "
                       f"anchor={fmt_num(e.anchor[0])},{fmt_num(e.anchor[1])} "
                       f"primitives={len(e.geometry)} payload={len(e.payload)}")
            for key in sorted(e.properties):
                out.append(f"    property {json.dumps(key, ensure_ascii=False)} = "
                           f"{fmt_property(e.properties[key])}")
            out.extend(_payload_lines(engine, e.payload, "    "))
        elif isinstance(e, WorkingModule):
            out.append(f"[{e.id}] working {e.owner} {e.tag.list_name}[{e.tag.index}]"
                       f" extra={e.tag.extra} primitives={len(e.primitives)}")
        elif isinstance(e, Shape):
            out.append(f"[{e.id}] shape {e.primitive.canonical()}")
    for ext_id in sorted(drawing.sessions):
        s = drawing.sessions[ext_id]
        target = "-" if s.replace_target is None else str(s.replace_target)
        out.append(f"session {ext_id} replace_target={target}")
        if s.pp is not None:
            out.extend(dump_pp(s.pp, "    "))
        elif engine is not None and ext_id in engine.extensions:
            ext = engine.extensions[ext_id]
            try:
                out.extend(dump_pp(decode_compact(s.payload, ext.schema), "    "))
            except CodecError as exc:
                out.append(f"    payload undecodable: {exc}")
    return "\n".join(out) + "\n"
