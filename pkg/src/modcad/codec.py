"""Bit-packed compact image of a PP (the ``.ppc`` format, see FORMAT.md).

Layout::

    "PPC1" | u16 name length | name (UTF-8) | u64 schema hash
    general parameters, bit-packed, zero-padded to a byte boundary
    for each list in schema order:
        u32 record count | records bit-packed back to back | zero padding

Multi-byte integers are little-endian; bit fields are written MSB-first.
Text fields are byte-aligned and carry a u16 byte length.
"""

from __future__ import annotations

import struct

from .errors import BadMagic, CorruptPayload, SchemaMismatch, ValueOutOfRange
from .schema import FieldSchema, PPSchema, fixed_from_steps, fixed_to_steps
from .store import PP, SpeedFn, release  # noqa: F401  (release is part of the codec surface)

MAGIC = b"PPC1"


class BitWriter:
    def __init__(self):
        self.buf = bytearray()
        self._acc = 0
        self._nbits = 0

    def write(self, value: int, bits: int) -> None:
        self._acc = (self._acc << bits) | value
        self._nbits += bits
        while self._nbits >= 8:
            self._nbits -= 8
            self.buf.append((self._acc >> self._nbits) & 0xFF)
        self._acc &= (1 << self._nbits) - 1

    def align(self) -> None:
        if self._nbits:
            self.write(0, 8 - self._nbits)

    def write_bytes(self, data: bytes) -> None:
        self.align()
        self.buf += data

    def getvalue(self) -> bytes:
        self.align()
        return bytes(self.buf)


class BitCursor:
    """Bounds-checked MSB-first reader over a byte string."""

    def __init__(self, data: bytes, offset: int = 0):
        self.data = bytes(data)
        self.pos = offset * 8
        self.end = len(self.data) * 8

    @property
    def byte(self) -> int:
        return self.pos >> 3

    @property
    def bit(self) -> int:
        return self.pos & 7

    @property
    def remaining_bits(self) -> int:
        return self.end - self.pos

    def read(self, bits: int) -> int:
        stop = self.pos + bits
        if bits < 0 or stop > self.end:
            raise CorruptPayload(
                f"read of {bits} bits at byte {self.byte} bit {self.bit} runs past end"
            )
        first, last = self.pos >> 3, (stop + 7) >> 3
        chunk = int.from_bytes(self.data[first:last], "big")
        self.pos = stop
        return (chunk >> (last * 8 - stop)) & ((1 << bits) - 1)

    def align(self) -> None:
        pad = (-self.pos) & 7
        if pad and self.read(pad):
            raise CorruptPayload(f"non-zero padding before byte {self.byte}")

    def read_bytes(self, n: int) -> bytes:
        self.align()
        if n < 0 or self.pos + n * 8 > self.end:
            raise CorruptPayload(f"{n} bytes requested at byte {self.byte}, past end")
        start = self.pos >> 3
        self.pos += n * 8
        return self.data[start:start + n]

    def read_uint_le(self, nbytes: int) -> int:
        return int.from_bytes(self.read_bytes(nbytes), "little")


# -- field coding ---------------------------------------------------------------

def _encode_field(w: BitWriter, f: FieldSchema, value, where: str) -> None:
    kind = f.kind
    if kind == "text":
        raw = value.encode("utf-8")
        if len(raw) > 0xFFFF:
            raise ValueOutOfRange(f"{where}: text of {len(raw)} bytes")
        w.write_bytes(struct.pack("<H", len(raw)) + raw)
        return
    if kind == "flag":
        w.write(1 if value else 0, 1)
        return
    if kind == "ref" and f.optional:
        if value is None:
            w.write(0, 1)
            return
        w.write(1, 1)
    if kind == "fixed":
        n = fixed_to_steps(value, f.scale)
    else:
        n = value
    lo, hi = f.range()
    if not isinstance(n, int) or isinstance(n, bool) or not lo <= n <= hi:
        raise ValueOutOfRange(f"{where}: {value!r} does not fit {kind}({f.bits}) [{lo}..{hi}]")
    if kind == "enum" and n >= len(f.labels):
        raise ValueOutOfRange(f"{where}: enum value {n} has no label")
    w.write(n & ((1 << f.bits) - 1), f.bits)


def _decode_field(c: BitCursor, f: FieldSchema):
    kind = f.kind
    if kind == "text":
        n = c.read_uint_le(2)
        try:
            return c.read_bytes(n).decode("utf-8")
        except UnicodeDecodeError as exc:
            raise CorruptPayload(f"{f.name}: invalid UTF-8") from exc
    if kind == "flag":
        return bool(c.read(1))
    if kind == "ref" and f.optional and not c.read(1):
        return None
    raw = c.read(f.bits)
    if kind in ("int", "fixed") and raw >> (f.bits - 1):
        raw -= 1 << f.bits
    if kind == "fixed":
        return fixed_from_steps(raw, f.scale)
    if kind == "enum" and raw >= len(f.labels):
        raise CorruptPayload(f"{f.name}: enum value {raw} has no label")
    return raw


# -- public API -------------------------------------------------------------------

def header(schema: PPSchema) -> bytes:
    name = schema.name.encode("utf-8")
    return MAGIC + struct.pack("<H", len(name)) + name + struct.pack("<Q", schema.hash)


def encode_compact(pp: PP) -> bytes:
    """Encode `pp`; raises ValueOutOfRange rather than truncating any value."""
    schema = pp.live().schema
    w = BitWriter()
    w.write_bytes(header(schema))
    for f in schema.general:
        _encode_field(w, f, pp.general[f.name], f"general.{f.name}")
    w.align()
    for lst in schema.lists:
        rows = pp.records[lst.name]
        w.write_bytes(struct.pack("<I", len(rows)))
        for i, rec in enumerate(rows):
            for f in lst.fields:
                _encode_field(w, f, rec[f.name], f"{lst.name}[{i}].{f.name}")
        w.align()
    return w.getvalue()


def read_header(image: bytes) -> tuple[str, int, int]:
    """Return (schema name, schema hash, offset of the body)."""
    c = BitCursor(image)
    if len(image) < len(MAGIC):
        raise CorruptPayload("image shorter than magic")
    if c.read_bytes(4) != MAGIC:
        raise BadMagic("not a compact PP image")
    n = c.read_uint_le(2)
    try:
        name = c.read_bytes(n).decode("utf-8")
    except UnicodeDecodeError as exc:
        raise CorruptPayload("schema name is not UTF-8") from exc
    digest = c.read_uint_le(8)
    return name, digest, c.byte


def decode_compact(image: bytes, schema: PPSchema, speed_fn: SpeedFn | None = None) -> PP:
    """Inverse of :func:`encode_compact`.

    Speed arrays come back allocated with None entries; call
    ``recompute_speed_vars`` to fill them.
    """
    name, digest, offset = read_header(image)
    if name != schema.name or digest != schema.hash:
        raise SchemaMismatch(
            f"image is {name!r}/{digest:016x}, expected {schema.name!r}/{schema.hash:016x}"
        )
    c = BitCursor(image, offset)
    pp = PP(schema, speed_fn)
    for f in schema.general:
        pp.general[f.name] = _decode_field(c, f)
    c.align()
    for lst in schema.lists:
        count = c.read_uint_le(4)
        if count * lst.min_record_bits() > c.remaining_bits:
            raise CorruptPayload(f"{lst.name}: {count} records cannot fit in remaining bytes")
        rows = []
        for _ in range(count):
            rows.append({f.name: _decode_field(c, f) for f in lst.fields})
        c.align()
        pp.records[lst.name] = rows
        pp.speed[lst.name] = [None] * count
    if c.remaining_bits:
        raise CorruptPayload(f"{c.remaining_bits // 8} trailing bytes")
    for lst in schema.lists:
        for f in lst.refs():
            size = len(pp.records[f.target])
            for i, rec in enumerate(pp.records[lst.name]):
                v = rec[f.name]
                if v is not None and v >= size:
                    raise CorruptPayload(f"{lst.name}[{i}].{f.name} -> {v} outside {f.target}")
    return pp

