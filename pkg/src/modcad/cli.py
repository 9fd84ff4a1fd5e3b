"""Command-line front end.

Exit codes: 0 on success, 1 on a user error (message on stderr), 2 when an
internal invariant check fails.
"""

from __future__ import annotations

import argparse
import shlex
import sys
from pathlib import Path
from typing import Sequence

from .catalog import catalog_load, catalog_save
from .dump import dump_drawing, fmt_num
from .errors import CommandError, InvariantFailure, ModcadError, ScriptError
from .extension import Engine, command_help, default_engine, place_pp
from .ext import spec_table
from .fileio import load_drawing, save_drawing
from .geometry import Marker
from .model import Drawing, DrawingSettings, Module, Session
from .regen import generate_all
from .svg import render_svg, write_svg

SPEC_MARGIN = 10.0  # mm between a specification table and the sheet corner


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage errors as exit code 1, not 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _parse_point(token: str) -> tuple[float, float]:
    parts = token.split(",")
    try:
        x, y = (float(p) for p in parts)
    except ValueError:
        raise CommandError(f"expected x,y got {token!r}") from None
    return x, y


def parse_property(kind: str, token: str):
    try:
        if kind == "number":
            return float(token)
        if kind == "flag":
            low = token.lower()
            if low in ("1", "true", "yes"):
                return True
            if low in ("0", "false", "no"):
                return False
            raise ValueError
        if kind == "point":
            return _parse_point(token)
        if kind == "bytes":
            return bytes.fromhex(token)
    except ValueError:
        raise CommandError(f"cannot read {token!r} as {kind}") from None
    return token


# -- operations shared by subcommands and scripts ---------------------------------------

def place_plain_module(drawing: Drawing, type_name: str, at: str, assignments: Sequence[str]) -> int:
    """Place a module that carries only properties (and no PP)."""
    kinds = drawing.registry.get(type_name).kinds()
    props = {}
    for tok in assignments:
        key, sep, raw = tok.partition("=")
        if not sep:
            raise CommandError(f"expected key=value, got {tok!r}")
        if key not in kinds:
            raise CommandError(f"{type_name!r} has no property {key!r}")
        props[key] = parse_property(kinds[key], raw)
    anchor = _parse_point(at)
    return drawing.add(Module(type_name, props, b"", (Marker(anchor, "cross"),), anchor))


def spec_build(engine: Engine, drawing: Drawing, sources: Sequence, at: str | None = None) -> int:
    """Harvest specifying properties and place the table as a new module."""
    ext = engine.get("table")
    pp = spec_table.build_specification(drawing, sources)
    if at is None:
        w, _ = spec_table.table_size(pp)
        sw, sh = drawing.sheet_size
        anchor = (sw - SPEC_MARGIN - w, sh - SPEC_MARGIN)
    else:
        anchor = _parse_point(at)
    return place_pp(drawing, ext, pp, anchor)


def _resolve(base: Path, name: str) -> Path:
    p = Path(name)
    return p if p.is_absolute() else base / p


def run_script(engine: Engine, drawing: Drawing, text: str, base: Path, out=None) -> None:
    """Execute a script against `drawing`; relative paths resolve against `base`."""
    out = out or sys.stdout
    for n, raw in enumerate(text.splitlines(), 1):
        try:
            tokens = shlex.split(raw, comments=True)
        except ValueError as exc:
            raise ScriptError(n, str(exc)) from None
        if not tokens:
            continue
        head, args = tokens[0], tokens[1:]
        try:
            if head == "module":
                if len(args) < 2:
                    raise CommandError("usage: module <type> <x,y> key=value ...")
                mid = place_plain_module(drawing, args[0], args[1], args[2:])
                print(f"placed module {mid}", file=out)
            elif head == "spec":
                ns = _spec_args(args)
                mid = spec_build(engine, drawing, [_resolve(base, s) for s in ns.sources], ns.at)
                print(f"placed module {mid}", file=out)
            elif head == "export-svg":
                if len(args) != 1:
                    raise CommandError("usage: export-svg <out.svg>")
                write_svg(drawing, _resolve(base, args[0]))
            elif head in engine.extensions:
                if not args:
                    raise CommandError(f"usage: {head} <command> [args ...]")
                result = engine.run(drawing, head, args[0], args[1:])
                if result.message:
                    print(result.message, file=out)
            else:
                raise CommandError(f"unknown command {head!r}")
        except InvariantFailure as exc:
            raise InvariantFailure(f"line {n}: {exc}") from exc
        except ScriptError:
            raise
        except ModcadError as exc:
            raise ScriptError(n, str(exc)) from exc


def _spec_args(args: Sequence[str]) -> argparse.Namespace:
    if not args or args[0] != "build":
        raise CommandError("usage: spec build [--from a.mcd ...] [--at x,y]")
    p = argparse.ArgumentParser(prog="spec build", add_help=False, exit_on_error=False)
    p.add_argument("--from", dest="sources", nargs="*", default=[])
    p.add_argument("--at")
    try:
        ns, extra = p.parse_known_args(list(args[1:]))
    except argparse.ArgumentError as exc:
        raise CommandError(str(exc)) from None
    if extra:
        raise CommandError(f"unexpected arguments {extra}")
    return ns


# -- subcommands -----------------------------------------------------------------

def _cmd_new(engine, ns):
    drawing = Drawing(ns.width, ns.height,
                      DrawingSettings(ns.color, ns.line_type, ns.text_height))
    save_drawing(drawing, ns.file)


def _cmd_run(engine, ns):
    drawing = load_drawing(ns.file)
    script = Path(ns.script)
    try:
        text = script.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise CommandError(f"cannot read script {script}: {exc}") from None
    run_script(engine, drawing, text, script.parent)
    save_drawing(drawing, ns.file)


def _cmd_types(engine, ns):
    for tdef in engine.types:
        owner = engine.for_module_type(tdef.type_name)
        suffix = f" [extension {owner.id}]" if owner else ""
        kind = "payload" if tdef.has_payload else "plain"
        print(f"{tdef.type_name} ({kind}){suffix}")
        for key, k in tdef.allowed_properties:
            print(f"    {key}: {k}")


def _cmd_ext(engine, ns):
    if ns.id is None:
        for ext in engine.extensions.values():
            print(f"{ext.id}: {ext.title} -> {ext.module_type}")
        return
    ext = engine.get(ns.id)
    if ns.command is None:
        print("\n".join(command_help(ext)))
        return
    args, file = _take_file_option(ns.args, ns.file)
    if file is None:
        raise CommandError("ext: --file is required to run a command")
    drawing = load_drawing(file)
    result = engine.run(drawing, ext.id, ns.command, args)
    if result.message:
        print(result.message)
    if ext.command_table()[ns.command].mutates:
        save_drawing(drawing, file)


def _take_file_option(args: list[str], file: str | None) -> tuple[list[str], str | None]:
    """Pull ``--file F`` out of the free-form command arguments."""
    rest = []
    it = iter(args)
    for a in it:
        if a == "--file":
            file = next(it, None)
            if file is None:
                raise CommandError("--file needs a value")
        elif a.startswith("--file="):
            file = a[len("--file="):]
        else:
            rest.append(a)
    return rest, file


def _cmd_catalog(engine, ns):
    if ns.action == "ls":
        for e in engine.catalog():
            box = "-" if e.bounds is None else " ".join(fmt_num(v) for v in e.bounds)
            print(f"{e.name}\t{e.schema_name or '?'}\t{len(e.image)} bytes\t{box}")
    elif ns.action == "save":
        drawing = load_drawing(ns.file)
        ext = engine.get(ns.ext)
        if ext.id not in drawing.sessions:
            raise CommandError(f"no {ext.id} session in {ns.file}")
        pp = engine.session_pp(drawing, ext)
        print(catalog_save(engine.catalog_dir, ns.name, pp, ns.overwrite))
    elif ns.action == "load":
        drawing = load_drawing(ns.file)
        ext = engine.get(ns.ext)
        pp = catalog_load(engine.catalog_dir, ns.name, ext.schema, ext.speed_fn)
        drawing.sessions[ext.id] = Session(b"", pp, None)
        from .regen import regenerate

        regenerate(drawing, pp, ext)
        save_drawing(drawing, ns.file)
    elif ns.action == "preview":
        entry = next((e for e in engine.catalog() if e.name == ns.name), None)
        if entry is None:
            raise CommandError(f"no catalog entry {ns.name!r}")
        ext, pp = engine.decode(entry.image)
        Path(ns.out).write_text(render_svg(generate_all(pp, ext)), encoding="utf-8")


def _cmd_export_svg(engine, ns):
    write_svg(load_drawing(ns.file), ns.out)


def _cmd_dump(engine, ns):
    sys.stdout.write(dump_drawing(load_drawing(ns.file), engine))


def _cmd_spec(engine, ns):
    out = Path(ns.out)
    drawing = load_drawing(out) if out.exists() else Drawing()
    mid = spec_build(engine, drawing, ns.sources, ns.at)
    save_drawing(drawing, out)
    print(f"placed module {mid}")


def _cmd_module(engine, ns):
    drawing = load_drawing(ns.file)
    mid = place_plain_module(drawing, ns.type, ns.at, ns.props)
    save_drawing(drawing, ns.file)
    print(f"placed module {mid}")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="modcad", description="Modular CAD kernel command line.")
    sub = p.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    s = sub.add_parser("new", help="create an empty drawing")
    s.add_argument("file")
    s.add_argument("width", type=float)
    s.add_argument("height", type=float)
    s.add_argument("--color", type=int, default=7)
    s.add_argument("--line-type", type=int, default=0)
    s.add_argument("--text-height", type=float, default=3.5)
    s.set_defaults(fn=_cmd_new)

    s = sub.add_parser("run", help="run a command script against a drawing")
    s.add_argument("file")
    s.add_argument("script")
    s.set_defaults(fn=_cmd_run)

    s = sub.add_parser("types", help="list module types")
    s.set_defaults(fn=_cmd_types)

    s = sub.add_parser("ext", help="list extensions or run one extension command")
    s.add_argument("id", nargs="?")
    s.add_argument("command", nargs="?")
    s.add_argument("args", nargs=argparse.REMAINDER)
    s.add_argument("--file")
    s.set_defaults(fn=_cmd_ext)

    s = sub.add_parser("catalog", help="prototype catalog")
    csub = s.add_subparsers(dest="action", required=True, parser_class=_Parser)
    csub.add_parser("ls")
    c = csub.add_parser("save")
    c.add_argument("file")
    c.add_argument("ext")
    c.add_argument("name")
    c.add_argument("--overwrite", action="store_true")
    c = csub.add_parser("load")
    c.add_argument("file")
    c.add_argument("ext")
    c.add_argument("name")
    c = csub.add_parser("preview")
    c.add_argument("name")
    c.add_argument("out")
    s.set_defaults(fn=_cmd_catalog)

    s = sub.add_parser("export-svg", help="render a drawing as SVG")
    s.add_argument("file")
    s.add_argument("out")
    s.set_defaults(fn=_cmd_export_svg)

    s = sub.add_parser("dump", help="print a deterministic text dump")
    s.add_argument("file")
    s.set_defaults(fn=_cmd_dump)

    s = sub.add_parser("spec", help="specification tables")
    ssub = s.add_subparsers(dest="action", required=True, parser_class=_Parser)
    b = ssub.add_parser("build")
    b.add_argument("out")
    b.add_argument("--from", dest="sources", nargs="*", default=[])
    b.add_argument("--at")
    s.set_defaults(fn=_cmd_spec)

    s = sub.add_parser("module", help="place a properties-only module")
    s.add_argument("file")
    s.add_argument("type")
    s.add_argument("at")
    s.add_argument("props", nargs="*")
    s.set_defaults(fn=_cmd_module)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        ns.fn(default_engine(), ns)
    except InvariantFailure as exc:
        print(f"modcad: internal error: {exc}", file=sys.stderr)
        return 2
    except ModcadError as exc:
        print(f"modcad: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"modcad: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
