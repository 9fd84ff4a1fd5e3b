"""The expanded, in-memory parametric representation (PP).

A PP is a tiny relational database: each schema list is an array of
records, record indices are the primary keys, and references hold
indices into other lists.  All mutation goes through the functions in
this module so that referential integrity holds after every call.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Mapping

from .errors import (
    BrokenRef,
    FieldMismatch,
    IndexOutOfRange,
    InvalidSchema,
    UnknownList,
    UseAfterRelease,
)
from .schema import FieldSchema, PPSchema, validate_schema

SpeedFn = Callable[[str, Mapping[str, Any]], dict]


@dataclass
class Settings:
    """Settings view of a PP's general parameters.

    `defaults` seed the matching field of each new record; `list_wide`
    values stand in for a field that records of that list do not store.
    Both are keyed by ``(list_name, field_name)``.
    """

    defaults: dict[tuple[str, str], Any] = field(default_factory=dict)
    list_wide: dict[tuple[str, str], Any] = field(default_factory=dict)


@dataclass
class DeleteReport:
    removed: dict[str, list[int]] = field(default_factory=dict)
    nulled: dict[str, list[int]] = field(default_factory=dict)

    @property
    def total(self) -> int:
        return sum(len(v) for v in self.removed.values())

    def __bool__(self):
        return self.total > 0


class PP:
    """Expanded parametric representation bound to a schema."""

    def __init__(self, schema: PPSchema, speed_fn: SpeedFn | None = None):
        self.schema = schema
        self.records: dict[str, list[dict[str, Any]]] = {n: [] for n in schema.list_names}
        self.general: dict[str, Any] = {
            f.name: f.coerce(f.default) if f.default is not None else f.zero()
            for f in schema.general
        }
        # Cached derived values, one entry per record; None until computed.
        self.speed: dict[str, list[dict | None]] = {n: [] for n in schema.list_names}
        self.speed_fn = speed_fn
        self._released = False

    # -- lifecycle ---------------------------------------------------------

    @property
    def released(self) -> bool:
        return self._released

    def live(self) -> "PP":
        if self._released:
            raise UseAfterRelease(f"PP of schema {self.schema.name} was released")
        return self

    def copy(self) -> "PP":
        self.live()
        other = PP.__new__(PP)
        other.schema = self.schema
        other.records = {k: [dict(r) for r in v] for k, v in self.records.items()}
        other.general = dict(self.general)
        other.speed = {k: copy.deepcopy(v) for k, v in self.speed.items()}
        other.speed_fn = self.speed_fn
        other._released = False
        return other

    # -- access ------------------------------------------------------------

    def list_schema(self, name: str):
        lst = self.schema.list(name)
        if lst is None:
            raise UnknownList(f"schema {self.schema.name} has no list {name!r}")
        return lst

    def count(self, list_name: str) -> int:
        self.live()
        self.list_schema(list_name)
        return len(self.records[list_name])

    def record(self, list_name: str, index: int) -> dict[str, Any]:
        rows = self.live().records.get(list_name)
        if rows is None:
            raise UnknownList(list_name)
        if not 0 <= index < len(rows):
            raise IndexOutOfRange(f"{list_name}[{index}] does not exist ({len(rows)} records)")
        return rows[index]

    def value(self, list_name: str, index: int, field_name: str):
        """Field value of a record, falling back to a list-wide setting."""
        rec = self.record(list_name, index)
        if field_name in rec:
            return rec[field_name]
        wide = self.schema.list_wide_for(list_name).get(field_name)
        if wide is None:
            raise FieldMismatch(f"{list_name} has no field {field_name!r}")
        return self.general[wide.name]

    @property
    def settings(self) -> Settings:
        s = Settings()
        for f in self.schema.general:
            if f.governs is None:
                continue
            target = s.defaults if f.mode == "default" else s.list_wide
            target[f.governs] = self.general[f.name]
        return s

    def set_general(self, name: str, value) -> None:
        f = self.live().schema.general_field(name)
        if f is None:
            raise FieldMismatch(f"no general parameter {name!r}")
        self.general[name] = f.coerce(value)

    def content(self) -> tuple:
        """Everything that gets serialized; speed variables excluded."""
        return (
            self.schema.hash,
            tuple(sorted(self.general.items())),
            tuple(
                (name, tuple(tuple(r[f.name] for f in self.list_schema(name).fields) for r in rows))
                for name, rows in self.records.items()
            ),
        )

    def __eq__(self, other):
        if not isinstance(other, PP):
            return NotImplemented
        return self.content() == other.content()

    __hash__ = None

    def __repr__(self):
        counts = ", ".join(f"{k}={len(v)}" for k, v in self.records.items())
        state = " released" if self._released else ""
        return f"<PP {self.schema.name}{state} {counts}>"


def new_pp(schema: PPSchema, general: Mapping[str, Any] | None = None,
           speed_fn: SpeedFn | None = None) -> PP:
    problems = validate_schema(schema)
    if problems:
        raise InvalidSchema(problems)
    pp = PP(schema, speed_fn)
    for k, v in (general or {}).items():
        pp.set_general(k, v)
    return pp


def release(pp: PP) -> None:
    """Drop the expanded representation; later use raises UseAfterRelease."""
    if pp._released:
        return
    pp.records = {}
    pp.speed = {}
    pp._released = True


def _check_ref(pp: PP, f: FieldSchema, value, where: str) -> None:
    if value is None:
        return
    n = len(pp.records[f.target])
    if not 0 <= value < n:
        raise BrokenRef(f"{where}: reference {value} into {f.target} (has {n} records)")


def _speed_entry(pp: PP, list_name: str, rec) -> dict | None:
    if pp.speed_fn is None:
        return {}
    return pp.speed_fn(list_name, rec) or {}


def add_object(pp: PP, list_name: str, record: Mapping[str, Any]) -> int:
    """Append a record and return its index.

    Fields missing from `record` are taken from the per-object defaults;
    optional references default to null.  Any other missing field is a
    FieldMismatch.
    """
    lst = pp.live().list_schema(list_name)
    defaults = pp.schema.defaults_for(list_name)
    unknown = set(record) - {f.name for f in lst.fields}
    if unknown:
        raise FieldMismatch(f"{list_name}: unknown fields {sorted(unknown)}")
    row: dict[str, Any] = {}
    for f in lst.fields:
        if f.name in record:
            value = f.coerce(record[f.name])
        elif f.name in defaults:
            value = pp.general[defaults[f.name].name]
        elif f.kind == "ref" and f.optional:
            value = None
        else:
            raise FieldMismatch(f"{list_name}: missing field {f.name!r}")
        if f.kind == "ref":
            _check_ref(pp, f, value, f"{list_name}.{f.name}")
        row[f.name] = value
    pp.records[list_name].append(row)
    pp.speed[list_name].append(_speed_entry(pp, list_name, row))
    return len(pp.records[list_name]) - 1


def edit_object(pp: PP, list_name: str, index: int, changes: Mapping[str, Any]) -> None:
    """Set fields of one record in place; all-or-nothing."""
    lst = pp.live().list_schema(list_name)
    rec = pp.record(list_name, index)
    staged = {}
    for name, value in changes.items():
        f = lst.field(name)
        if f is None:
            raise FieldMismatch(f"{list_name} has no field {name!r}")
        value = f.coerce(value)
        if f.kind == "ref":
            _check_ref(pp, f, value, f"{list_name}[{index}].{name}")
        staged[name] = value
    rec.update(staged)
    pp.speed[list_name][index] = _speed_entry(pp, list_name, rec)


def delete_objects(pp: PP, list_name: str, indices: Iterable[int]) -> DeleteReport:
    """Delete records, cascading through references, then renumber.

    A record that references a deleted record through a cascading field
    is deleted too, transitively.  Non-cascading (optional) references to
    deleted records are set to null.  Surviving references are shifted
    down by the number of deleted records below them.
    """
    pp.live().list_schema(list_name)
    targets = set(indices)
    n = len(pp.records[list_name])
    bad = [i for i in targets if not 0 <= i < n]
    if bad:
        raise IndexOutOfRange(f"{list_name}: indices {sorted(bad)} out of range 0..{n - 1}")
    report = DeleteReport()
    if not targets:
        return report

    removed: dict[str, set[int]] = {name: set() for name in pp.records}
    removed[list_name] |= targets
    cascading = [
        (lst.name, f) for lst in pp.schema.lists for f in lst.refs() if f.cascades
    ]
    changed = True
    while changed:
        changed = False
        for lname, f in cascading:
            gone_targets = removed[f.target]
            if not gone_targets:
                continue
            gone = removed[lname]
            for i, rec in enumerate(pp.records[lname]):
                if i not in gone and rec[f.name] in gone_targets:
                    gone.add(i)
                    changed = True

    # Per-list remap: old index -> new index, None when removed.
    remap: dict[str, list[int | None]] = {}
    for name, rows in pp.records.items():
        gone = removed[name]
        table, shift = [], 0
        for i in range(len(rows)):
            if i in gone:
                table.append(None)
                shift += 1
            else:
                table.append(i - shift)
        remap[name] = table

    for lst in pp.schema.lists:
        rows, speed = pp.records[lst.name], pp.speed[lst.name]
        gone = removed[lst.name]
        keep = [i for i in range(len(rows)) if i not in gone]
        refs = lst.refs()
        nulled = []
        for i in keep:
            rec = rows[i]
            for f in refs:
                old = rec[f.name]
                if old is None:
                    continue
                new = remap[f.target][old]
                if new is None:
                    nulled.append(remap[lst.name][i])
                rec[f.name] = new
        pp.records[lst.name] = [rows[i] for i in keep]
        pp.speed[lst.name] = [speed[i] for i in keep]
        if gone:
            report.removed[lst.name] = sorted(gone)
        if nulled:
            report.nulled[lst.name] = sorted(set(nulled))
    return report


def check_integrity(pp: PP) -> list[str]:
    """List every dangling reference and speed-cache length mismatch."""
    pp.live()
    out = []
    for lst in pp.schema.lists:
        rows = pp.records.get(lst.name, [])
        for f in lst.refs():
            size = len(pp.records.get(f.target, []))
            for i, rec in enumerate(rows):
                v = rec.get(f.name)
                if v is None:
                    if not f.optional:
                        out.append(f"{lst.name}[{i}].{f.name}: null in non-optional reference")
                elif not 0 <= v < size:
                    out.append(f"{lst.name}[{i}].{f.name}: reference {v} outside {f.target} (size {size})")
        speed = pp.speed.get(lst.name, [])
        if len(speed) != len(rows):
            out.append(f"{lst.name}: speed cache has {len(speed)} entries for {len(rows)} records")
    return out


def recompute_speed_vars(pp: PP, speed_fn: SpeedFn | None = None) -> None:
    """Refill every speed entry from its record."""
    pp.live()
    if speed_fn is not None:
        pp.speed_fn = speed_fn
    for name, rows in pp.records.items():
        pp.speed[name] = [_speed_entry(pp, name, r) for r in rows]


def referrers(pp: PP, list_name: str, index: int) -> list[tuple[str, int, str]]:
    """Records holding a reference to ``list_name[index]``."""
    out = []
    for lst in pp.schema.lists:
        for f in lst.refs():
            if f.target != list_name:
                continue
            for i, rec in enumerate(pp.records[lst.name]):
                if rec[f.name] == index:
                    out.append((lst.name, i, f.name))
    return out
