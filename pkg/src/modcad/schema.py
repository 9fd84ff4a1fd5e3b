"""Schema declarations for parametric representations.

A schema names a set of object lists.  Each list holds records whose
fields have fixed bit widths, so the same declaration drives validation,
the in-memory store and the bit-packed codec.  General parameters sit
beside the lists; some of them act as settings for a list field, either
as the per-object default copied into new records or as a list-wide value
that replaces the field in every record.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Any

from .errors import FieldMismatch, ValueOutOfRange

KINDS = ("uint", "int", "fixed", "text", "flag", "ref", "enum")
MAX_TEXT_BYTES = 0xFFFF
DEFAULT_REF_BITS = 16

FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3


def fnv1a64(data: bytes) -> int:
    h = FNV_OFFSET
    for b in data:
        h ^= b
        h = (h * FNV_PRIME) & 0xFFFFFFFFFFFFFFFF
    return h


def _divisor(scale: float) -> int | None:
    inv = 1.0 / scale
    r = round(inv)
    if r > 0 and abs(inv - r) < 1e-9 * inv:
        return r
    return None


def fixed_to_steps(value: float, scale: float) -> int:
    return round(value / scale)


def fixed_from_steps(steps: int, scale: float) -> float:
    # Dividing by an integer step count keeps e.g. 7 * 0.01 == 0.07 exactly.
    d = _divisor(scale)
    return steps / d if d else steps * scale


@dataclass(frozen=True)
class FieldSchema:
    name: str
    kind: str
    bits: int = 0
    scale: float = 1.0
    target: str | None = None
    optional: bool = False
    on_delete: str | None = None
    labels: tuple[str, ...] = ()
    # Only meaningful for general parameters.
    default: Any = None
    governs: tuple[str, str] | None = None
    mode: str | None = None  # "default" (per-object) or "list" (list-wide)

    @property
    def cascades(self) -> bool:
        """True when deleting the referenced record deletes the referrer."""
        if self.on_delete is not None:
            return self.on_delete == "cascade"
        return not self.optional

    def range(self) -> tuple[int, int]:
        """Inclusive integer range of the encoded value."""
        if self.kind in ("int", "fixed"):
            return -(1 << (self.bits - 1)), (1 << (self.bits - 1)) - 1
        return 0, (1 << self.bits) - 1

    def min_bits(self) -> int:
        """Smallest number of bits one value of this field can occupy."""
        if self.kind == "text":
            return 16
        if self.kind == "flag":
            return 1
        if self.kind == "ref" and self.optional:
            return 1
        return self.bits

    def zero(self):
        return {"text": "", "flag": False, "fixed": 0.0, "ref": None}.get(self.kind, 0)

    def coerce(self, value):
        """Check `value` against the declaration and return its canonical form.

        Raises FieldMismatch for a wrong Python type and ValueOutOfRange
        when the value cannot be represented in the declared width.
        """
        kind = self.kind
        if kind == "text":
            if not isinstance(value, str):
                raise FieldMismatch(f"{self.name}: expected text, got {value!r}")
            if len(value.encode("utf-8")) > MAX_TEXT_BYTES:
                raise ValueOutOfRange(f"{self.name}: text longer than {MAX_TEXT_BYTES} bytes")
            return value
        if kind == "flag":
            if not isinstance(value, bool):
                raise FieldMismatch(f"{self.name}: expected flag, got {value!r}")
            return value
        if kind == "ref" and value is None:
            if not self.optional:
                raise FieldMismatch(f"{self.name}: reference is not optional")
            return None
        if kind == "fixed":
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise FieldMismatch(f"{self.name}: expected number, got {value!r}")
            if value != value or value in (float("inf"), float("-inf")):
                raise ValueOutOfRange(f"{self.name}: {value!r} is not finite")
            steps = fixed_to_steps(value, self.scale)
            self._check_range(steps, value)
            return fixed_from_steps(steps, self.scale)
        if isinstance(value, bool) or not isinstance(value, int):
            raise FieldMismatch(f"{self.name}: expected integer, got {value!r}")
        self._check_range(value, value)
        if kind == "enum" and value >= len(self.labels):
            raise ValueOutOfRange(f"{self.name}: enum value {value} has no label")
        return value

    def _check_range(self, encoded: int, shown) -> None:
        lo, hi = self.range()
        if not lo <= encoded <= hi:
            raise ValueOutOfRange(
                f"{self.name}: {shown!r} does not fit {self.kind}({self.bits})"
                f" [{lo}..{hi}]"
            )

    def canonical(self) -> str:
        parts = [f"field {self.name} {self.kind}"]
        if self.kind not in ("text", "flag"):
            parts.append(f"bits={self.bits}")
        if self.kind == "fixed":
            parts.append(f"scale={self.scale!r}")
        if self.kind == "ref":
            parts.append(f"target={self.target} optional={int(self.optional)}")
            parts.append(f"cascade={int(self.cascades)}")
        if self.kind == "enum":
            parts.append("labels=" + "|".join(self.labels))
        if self.governs is not None:
            parts.append(f"governs={self.governs[0]}.{self.governs[1]} mode={self.mode}")
        if self.default is not None:
            parts.append(f"default={self.default!r}")
        return " ".join(parts)


# Field constructors, named after the declared kind.

def uint(name, bits, **kw) -> FieldSchema:
    return FieldSchema(name, "uint", bits=bits, **kw)


def sint(name, bits, **kw) -> FieldSchema:
    return FieldSchema(name, "int", bits=bits, **kw)


def fixed(name, bits, scale=0.01, **kw) -> FieldSchema:
    return FieldSchema(name, "fixed", bits=bits, scale=scale, **kw)


def text(name, **kw) -> FieldSchema:
    return FieldSchema(name, "text", **kw)


def flag(name, **kw) -> FieldSchema:
    return FieldSchema(name, "flag", bits=1, **kw)


def ref(name, target, *, optional=False, on_delete=None, bits=DEFAULT_REF_BITS, **kw) -> FieldSchema:
    return FieldSchema(name, "ref", bits=bits, target=target, optional=optional,
                       on_delete=on_delete, **kw)


def enum(name, bits, labels, **kw) -> FieldSchema:
    return FieldSchema(name, "enum", bits=bits, labels=tuple(labels), **kw)


@dataclass(frozen=True)
class ListSchema:
    name: str
    fields: tuple[FieldSchema, ...]
    is_link_list: bool = False

    def field(self, name: str) -> FieldSchema | None:
        for f in self.fields:
            if f.name == name:
                return f
        return None

    def min_record_bits(self) -> int:
        return sum(f.min_bits() for f in self.fields)

    def refs(self) -> list[FieldSchema]:
        return [f for f in self.fields if f.kind == "ref"]


@dataclass(frozen=True)
class PPSchema:
    name: str
    version: int
    lists: tuple[ListSchema, ...]
    general: tuple[FieldSchema, ...] = field(default=())

    def list(self, name: str) -> ListSchema | None:
        for lst in self.lists:
            if lst.name == name:
                return lst
        return None

    def general_field(self, name: str) -> FieldSchema | None:
        for f in self.general:
            if f.name == name:
                return f
        return None

    @property
    def list_names(self) -> list[str]:
        return [lst.name for lst in self.lists]

    def canonical_text(self) -> str:
        lines = [f"schema {self.name} v{self.version}"]
        for lst in self.lists:
            lines.append(f"list {lst.name} link={int(lst.is_link_list)}")
            lines.extend("  " + f.canonical() for f in lst.fields)
        lines.append("general")
        lines.extend("  " + f.canonical() for f in self.general)
        return "\n".join(lines) + "\n"

    @cached_property
    def hash(self) -> int:
        return fnv1a64(self.canonical_text().encode("utf-8"))

    def defaults_for(self, list_name: str) -> dict[str, FieldSchema]:
        """Per-object default parameters keyed by the record field they seed."""
        return {
            f.governs[1]: f
            for f in self.general
            if f.governs and f.governs[0] == list_name and f.mode == "default"
        }

    def list_wide_for(self, list_name: str) -> dict[str, FieldSchema]:
        return {
            f.governs[1]: f
            for f in self.general
            if f.governs and f.governs[0] == list_name and f.mode == "list"
        }


def validate_schema(schema: PPSchema) -> list[str]:
    """Return every structural violation in `schema`; empty means valid."""
    out: list[str] = []
    seen_lists: set[str] = set()
    for lst in schema.lists:
        if lst.name in seen_lists:
            out.append(f"duplicate list {lst.name}")
        seen_lists.add(lst.name)
        if not lst.fields:
            out.append(f"list {lst.name} has no fields")
        names = [f.name for f in lst.fields]
        for dup in sorted({n for n in names if names.count(n) > 1}):
            out.append(f"duplicate field {lst.name}.{dup}")
        for f in lst.fields:
            out.extend(_field_violations(f, f"{lst.name}.{f.name}"))
            if f.kind == "ref" and f.target not in {x.name for x in schema.lists}:
                out.append(f"unknown target {f.target} in {lst.name}.{f.name}")
        if lst.is_link_list:
            refs = lst.refs()
            if len(refs) < 2 or len(refs) != len(lst.fields):
                out.append(f"malformed link list {lst.name}")

    gnames = [f.name for f in schema.general]
    for dup in sorted({n for n in gnames if gnames.count(n) > 1}):
        out.append(f"duplicate general parameter {dup}")
    governed: set[tuple[str, str]] = set()
    for f in schema.general:
        out.extend(_field_violations(f, f"general.{f.name}"))
        if f.kind == "ref":
            out.append(f"general parameter {f.name} cannot be a reference")
        if f.governs is None:
            continue
        lname, fname = f.governs
        lst = schema.list(lname)
        if f.governs in governed:
            out.append(f"{lname}.{fname} governed by more than one setting")
        governed.add(f.governs)
        if lst is None:
            out.append(f"setting {f.name} governs unknown list {lname}")
        elif f.mode == "default":
            target = lst.field(fname)
            if target is None:
                out.append(f"default {f.name} governs missing field {lname}.{fname}")
            elif (target.kind, target.bits, target.scale, target.labels) != (
                f.kind, f.bits, f.scale, f.labels
            ):
                out.append(f"default {f.name} kind differs from {lname}.{fname}")
        elif f.mode == "list":
            if lst.field(fname) is not None:
                out.append(f"list-wide setting {f.name} clashes with record field {lname}.{fname}")
        else:
            out.append(f"setting {f.name} has unknown mode {f.mode!r}")

    cycle = find_list_cycle(schema)
    if cycle:
        out.append("cycle " + ",".join(cycle))
    return out


def _field_violations(f: FieldSchema, where: str) -> list[str]:
    out = []
    if f.kind not in KINDS:
        return [f"{where}: unknown kind {f.kind}"]
    if f.kind not in ("text",) and not 1 <= f.bits <= 64:
        out.append(f"{where}: bits {f.bits} outside 1..64")
    if f.kind == "fixed" and not f.scale > 0:
        out.append(f"{where}: scale must be positive")
    if f.kind == "enum" and (not f.labels or len(f.labels) > (1 << min(f.bits, 16))):
        out.append(f"{where}: enum labels do not fit {f.bits} bits")
    if f.on_delete not in (None, "cascade", "null"):
        out.append(f"{where}: unknown on_delete {f.on_delete!r}")
    if f.on_delete == "null" and not f.optional:
        out.append(f"{where}: on_delete=null needs an optional reference")
    return out


def find_list_cycle(schema: PPSchema) -> list[str]:
    """Return one reference cycle between lists (in path order), or []."""
    edges = {
        lst.name: [f.target for f in lst.refs() if schema.list(f.target) is not None]
        for lst in schema.lists
    }
    state: dict[str, int] = {}
    stack: list[str] = []

    def visit(node):
        state[node] = 1
        stack.append(node)
        for nxt in edges.get(node, ()):
            if state.get(nxt) == 1:
                return stack[stack.index(nxt):]
            if nxt not in state:
                found = visit(nxt)
                if found:
                    return found
        stack.pop()
        state[node] = 2
        return None

    for name in edges:
        if name not in state:
            found = visit(name)
            if found:
                return list(found)
    return []
