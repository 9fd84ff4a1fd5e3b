"""Extension contract, engine and the typical command set.

An extension supplies a PP schema, a generator turning one record into
primitives, a speed function, settings seeding and its own special
commands.  The engine adds the typical commands every extension shares
(add, delete, edit, set, read, take, write, place, pick, extent) and keeps
the drawing's working modules in step with the PP after each command.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Mapping, Sequence

from .catalog import catalog_list, catalog_load, catalog_save
from .codec import decode_compact, encode_compact, read_header
from .errors import (
    CommandError,
    DuplicateExtension,
    ElementNotFound,
    ExtensionMismatch,
    InvalidSchema,
    InvariantFailure,
    UnknownCommand,
    UnknownExtension,
)
from .geometry import Primitive, Rect
from .model import (
    Drawing,
    DrawingSettings,
    Module,
    ModuleTypeRegistry,
    Session,
    builtin_registry,
    extract_pp,
    place_module,
)
from .regen import RecordContext, bounds, generate_all, pick, regenerate
from .schema import FieldSchema, PPSchema, validate_schema
from .store import (
    PP,
    Settings,
    SpeedFn,
    add_object,
    check_integrity,
    delete_objects,
    edit_object,
    new_pp,
    recompute_speed_vars,
)

CATALOG_ENV = "MODCAD_CATALOG"
TYPICAL = ("add", "delete", "edit", "set", "read", "take", "write", "place", "pick", "extent")


@dataclass
class CommandResult:
    message: str = ""
    value: Any = None


@dataclass
class CommandContext:
    engine: "Engine"
    drawing: Drawing
    ext: "Extension"
    pp: PP
    session: Session
    closed: bool = False


Handler = Callable[[CommandContext, list[str]], CommandResult]


@dataclass(frozen=True)
class Command:
    name: str
    usage: str
    help: str
    handler: Handler
    mutates: bool = True


@dataclass(frozen=True)
class Extension:
    """Descriptor of one problem-oriented extension."""

    id: str
    module_type: str
    schema: PPSchema
    generator: Callable[[RecordContext], Sequence[Primitive] | None]
    speed_fn: SpeedFn | None = None
    init_settings: Callable[[DrawingSettings], Mapping[str, Any]] | None = None
    commands: tuple[Command, ...] = ()
    check: Callable[[PP], None] | None = None
    module_properties: Callable[[PP], dict] | None = None
    title: str = ""

    def command_table(self) -> dict[str, Command]:
        table = {c.name: c for c in TYPICAL_COMMANDS}
        table.update({c.name: c for c in self.commands})
        return table


# -- argument parsing -----------------------------------------------------------------

def parse_numbers(token: str, n: int) -> tuple[float, ...]:
    parts = token.split(",")
    try:
        values = tuple(float(p) for p in parts)
    except ValueError:
        raise CommandError(f"expected {n} comma-separated numbers, got {token!r}") from None
    if len(values) != n:
        raise CommandError(f"expected {n} comma-separated numbers, got {token!r}")
    return values


def parse_int(token: str, what: str = "index") -> int:
    try:
        return int(token)
    except ValueError:
        raise CommandError(f"{what} must be an integer, got {token!r}") from None


def parse_value(f: FieldSchema, token: str):
    kind = f.kind
    try:
        if kind == "text":
            return token
        if kind == "flag":
            low = token.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError
        if kind == "ref":
            return None if token in ("-", "null") else int(token)
        if kind == "enum":
            return f.labels.index(token) if token in f.labels else int(token)
        if kind == "fixed":
            return float(token)
        return int(token)
    except ValueError:
        raise CommandError(f"{f.name}: cannot read {token!r} as {kind}") from None


def parse_assignments(fields: Mapping[str, FieldSchema], tokens: Sequence[str], where: str) -> dict:
    out = {}
    for tok in tokens:
        key, sep, raw = tok.partition("=")
        if not sep:
            raise CommandError(f"expected field=value, got {tok!r}")
        if key not in fields:
            raise CommandError(f"{where} has no field {key!r}")
        out[key] = parse_value(fields[key], raw)
    return out


def _need(args: Sequence[str], n: int, usage: str) -> None:
    if len(args) < n:
        raise CommandError(f"usage: {usage}")


# -- typical commands ---------------------------------------------------------------

def _cmd_add(ctx, args):
    _need(args, 1, "add <list> field=value ...")
    lst = ctx.pp.list_schema(args[0])
    values = parse_assignments({f.name: f for f in lst.fields}, args[1:], lst.name)
    i = add_object(ctx.pp, lst.name, values)
    return CommandResult(f"{lst.name}[{i}] added", i)


def _cmd_delete(ctx, args):
    _need(args, 2, "delete <list> <index> ...")
    report = delete_objects(ctx.pp, args[0], [parse_int(a) for a in args[1:]])
    parts = [f"{name}{idx}" for name, idx in sorted(report.removed.items())]
    return CommandResult("deleted " + " ".join(parts), report)


def _cmd_edit(ctx, args):
    _need(args, 3, "edit <list> <index> field=value ...")
    lst = ctx.pp.list_schema(args[0])
    index = parse_int(args[1])
    values = parse_assignments({f.name: f for f in lst.fields}, args[2:], lst.name)
    edit_object(ctx.pp, lst.name, index, values)
    return CommandResult(f"{lst.name}[{index}] edited")


def _cmd_set(ctx, args):
    _need(args, 1, "set param=value ...")
    fields = {f.name: f for f in ctx.pp.schema.general}
    for key, value in parse_assignments(fields, args, "general").items():
        ctx.pp.set_general(key, value)
    return CommandResult("general parameters updated")


def _cmd_read(ctx, args):
    _need(args, 1, "read <name>")
    ext = ctx.ext
    pp = catalog_load(ctx.engine.catalog_dir, args[0], ext.schema, ext.speed_fn)
    _replace_pp(ctx, pp)
    ctx.session.replace_target = None
    return CommandResult(f"read {args[0]!r} from catalog")


def _cmd_take(ctx, args):
    _need(args, 1, "take <module-id>")
    mid = parse_int(args[0], "module id")
    module = ctx.drawing.get(mid)
    if not isinstance(module, Module) or module.type_name != ctx.ext.module_type:
        raise ElementNotFound(f"element {mid} is not a {ctx.ext.module_type!r} module")
    _replace_pp(ctx, extract_pp(module, ctx.ext.schema, ctx.ext.speed_fn))
    ctx.session.replace_target = mid
    return CommandResult(f"took PP from module {mid}")


def _cmd_write(ctx, args):
    _need(args, 1, "write <name> [--overwrite]")
    path = catalog_save(ctx.engine.catalog_dir, args[0], ctx.pp, overwrite="--overwrite" in args[1:])
    return CommandResult(f"wrote {path}", path)


def _cmd_place(ctx, args):
    _need(args, 1, "place <x,y> [comment]")
    anchor = parse_numbers(args[0], 2)
    pp, ext, drawing = ctx.pp, ctx.ext, ctx.drawing
    if pp.schema.general_field("anchor_x") is not None:
        pp.set_general("anchor_x", anchor[0])
        pp.set_general("anchor_y", anchor[1])
        anchor = (pp.general["anchor_x"], pp.general["anchor_y"])
    regenerate(drawing, pp, ext)
    props = dict(ext.module_properties(pp)) if ext.module_properties else {}
    if len(args) > 1:
        props["Комментарий"] = " ".join(args[1:])
    mid = place_module(drawing, drawing.working_modules(ext.id), encode_compact(pp),
                       ext.module_type, anchor, ctx.session.replace_target, props)
    ctx.closed = True
    return CommandResult(f"placed module {mid}", mid)


def _cmd_pick(ctx, args):
    _need(args, 2, "pick <x,y> <radius> [list ...]")
    point = parse_numbers(args[0], 2)
    try:
        radius = float(args[1])
    except ValueError:
        raise CommandError(f"radius must be a number, got {args[1]!r}") from None
    lists = args[2:] or None
    tags = pick(ctx.drawing, point, radius, lists, owner=ctx.ext.id)
    return CommandResult(" ".join(f"{t.list_name}[{t.index}]" for t in tags), tags)


def _cmd_extent(ctx, args):
    box = bounds(ctx.drawing.working_modules(ctx.ext.id))
    if box is None:
        return CommandResult("empty", None)
    return CommandResult(" ".join(f"{v:.3f}" for v in box), box)


def _replace_pp(ctx: CommandContext, pp: PP) -> None:
    ctx.pp.records, ctx.pp.general, ctx.pp.speed = pp.records, pp.general, pp.speed


TYPICAL_COMMANDS = (
    Command("add", "add <list> field=value ...", "add an object to a list", _cmd_add),
    Command("delete", "delete <list> <index> ...", "delete objects and everything referring to them", _cmd_delete),
    Command("edit", "edit <list> <index> field=value ...", "change fields of one object", _cmd_edit),
    Command("set", "set param=value ...", "change general parameters and settings", _cmd_set),
    Command("read", "read <name>", "read a parameter set from the catalog", _cmd_read),
    Command("take", "take <module-id>", "take the parameter set of a placed module", _cmd_take),
    Command("write", "write <name> [--overwrite]", "write the parameter set to the catalog", _cmd_write, mutates=False),
    Command("place", "place <x,y> [comment]", "place the result into the drawing as one module", _cmd_place),
    Command("pick", "pick <x,y> <radius> [list ...]", "list working modules near a point", _cmd_pick, mutates=False),
    Command("extent", "extent", "overall bounds of the working modules", _cmd_extent, mutates=False),
)


# -- engine ---------------------------------------------------------------------------

class Engine:
    def __init__(self, registry: ModuleTypeRegistry | None = None, catalog_dir=None):
        self.types = registry if registry is not None else builtin_registry()
        self.extensions: dict[str, Extension] = {}
        self.catalog_dir = Path(catalog_dir or os.environ.get(CATALOG_ENV, "catalog"))

    def register(self, ext: Extension) -> None:
        register_extension(self, ext)

    def get(self, ext_id: str) -> Extension:
        try:
            return self.extensions[ext_id]
        except KeyError:
            raise UnknownExtension(ext_id) from None

    def for_schema(self, schema_name: str) -> Extension | None:
        for ext in self.extensions.values():
            if ext.schema.name == schema_name:
                return ext
        return None

    def for_module_type(self, type_name: str) -> Extension | None:
        for ext in self.extensions.values():
            if ext.module_type == type_name:
                return ext
        return None

    def new_pp(self, ext: Extension, drawing: Drawing | None = None) -> PP:
        seeded = ext.init_settings(drawing.settings if drawing else DrawingSettings()) \
            if ext.init_settings else {}
        return new_pp(ext.schema, seeded, ext.speed_fn)

    def decode(self, image: bytes) -> tuple[Extension, PP]:
        """Decode an image by whichever registered extension owns its schema."""
        name = read_header(image)[0]
        ext = self.for_schema(name)
        if ext is None:
            raise ExtensionMismatch(f"no extension for schema {name!r}")
        pp = decode_compact(image, ext.schema, ext.speed_fn)
        recompute_speed_vars(pp)
        return ext, pp

    def session_pp(self, drawing: Drawing, ext: Extension) -> PP:
        session = drawing.sessions.get(ext.id)
        if session is None:
            return self.new_pp(ext, drawing)
        if session.pp is None:
            session.pp = decode_compact(session.payload, ext.schema, ext.speed_fn)
            recompute_speed_vars(session.pp)
        return session.pp

    def preview_bounds(self, image: bytes, schema_name: str) -> Rect | None:
        ext = self.for_schema(schema_name)
        if ext is None:
            return None
        _, pp = self.decode(image)
        return bounds(generate_all(pp, ext))

    def catalog(self):
        return catalog_list(self.catalog_dir, self.preview_bounds)

    def run(self, drawing: Drawing, ext_id: str, command: str, args: Sequence[str] = ()) -> CommandResult:
        return run_command(self, drawing, ext_id, command, args)


def register_extension(engine: Engine, ext: Extension) -> None:
    if ext.id in engine.extensions:
        raise DuplicateExtension(ext.id)
    problems = validate_schema(ext.schema)
    if problems:
        raise InvalidSchema(problems)
    engine.types.get(ext.module_type)
    clash = sorted({c.name for c in ext.commands} & set(TYPICAL))
    if clash:
        raise CommandError(f"extension {ext.id!r} redefines typical commands {clash}")
    engine.extensions[ext.id] = ext


def init_settings(ext: Extension, drawing: Drawing) -> Settings:
    """Settings a fresh PP of `ext` starts with in `drawing`."""
    seeded = ext.init_settings(drawing.settings) if ext.init_settings else {}
    return new_pp(ext.schema, seeded).settings


def run_command(engine: Engine, drawing: Drawing, ext_id: str, command: str,
                args: Sequence[str] = ()) -> CommandResult:
    """Dispatch one menu command, then regenerate the working modules.

    Mutating commands operate on a copy of the session PP; the copy is
    committed only when the command and the extension's own checks pass.
    """
    ext = engine.get(ext_id)
    cmd = ext.command_table().get(command)
    if cmd is None:
        raise UnknownCommand(f"{ext_id}: unknown command {command!r}")
    session = drawing.sessions.get(ext.id) or Session()
    pp = engine.session_pp(drawing, ext)
    work = pp.copy() if cmd.mutates else pp
    ctx = CommandContext(engine, drawing, ext, work, session)
    result = cmd.handler(ctx, list(args))
    if ctx.closed:
        drawing.sessions.pop(ext.id, None)
        return result
    if not cmd.mutates:
        return result
    if ext.check is not None:
        ext.check(work)
    problems = check_integrity(work)
    if problems:
        raise InvariantFailure(f"{ext_id} {command}: " + "; ".join(problems))
    session.pp = work
    drawing.sessions[ext.id] = session
    regenerate(drawing, work, ext)
    expected = {wm.tag for wm in generate_all(work, ext)}
    actual = {wm.tag for wm in drawing.working_modules(ext.id)}
    if expected != actual:
        raise InvariantFailure(f"{ext_id} {command}: working modules out of step with PP")
    return result


def command_help(ext: Extension) -> list[str]:
    return [f"{c.usage:<40} {c.help}" for c in ext.command_table().values()]



def place_pp(drawing: Drawing, ext: Extension, pp: PP, anchor: tuple[float, float],
             properties: dict | None = None) -> int:
    """Place a ready PP as a new module without touching any editing session."""
    pp = pp.copy()
    if pp.schema.general_field("anchor_x") is not None:
        pp.set_general("anchor_x", anchor[0])
        pp.set_general("anchor_y", anchor[1])
        anchor = (pp.general["anchor_x"], pp.general["anchor_y"])
    if ext.check is not None:
        ext.check(pp)
    props = dict(ext.module_properties(pp)) if ext.module_properties else {}
    props.update(properties or {})
    return place_module(drawing, generate_all(pp, ext), encode_compact(pp),
                        ext.module_type, anchor, None, props)


def default_engine(catalog_dir=None) -> Engine:
    """Engine with the shipped extensions registered."""
    from .ext import BUILTIN

    engine = Engine(catalog_dir=catalog_dir)
    for ext in BUILTIN:
        engine.register(ext)
    return engine
