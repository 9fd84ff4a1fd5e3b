from dataclasses import replace

import pytest

from modcad.errors import (
    BreakNotAllowed,
    CommandError,
    ElementNotFound,
    DuplicateExtension,
    InvalidSchema,
    UnknownCommand,
    UnknownExtension,
    UnknownType,
)
from modcad.extension import TYPICAL, Engine, command_help, init_settings, run_command
from modcad.ext import BUILTIN, axono, user
from modcad.model import Drawing, DrawingSettings, Module
from modcad.regen import visible_tags
from modcad.schema import ListSchema, PPSchema, ref
from modcad.store import check_integrity


def tags(drawing, owner):
    return {wm.tag for wm in drawing.working_modules(owner)}


def test_register_twice(engine):
    with pytest.raises(DuplicateExtension):
        engine.register(axono.EXTENSION)


def test_register_cyclic_schema():
    cyclic = PPSchema("cyc", 1, (ListSchema("A", (ref("b", "B"),)), ListSchema("B", (ref("a", "A"),))))
    with pytest.raises(InvalidSchema):
        Engine().register(replace(user.EXTENSION, id="cyc", schema=cyclic))


def test_register_unknown_module_type():
    with pytest.raises(UnknownType):
        Engine().register(replace(user.EXTENSION, module_type="Нет"))


def test_special_command_cannot_shadow_typical():
    bad = replace(user.EXTENSION, commands=user.EXTENSION.commands + (
        replace(user.EXTENSION.commands[0], name="add"),))
    with pytest.raises(CommandError):
        Engine().register(bad)


def test_typical_commands_identical_across_extensions(engine):
    tables = [e.command_table() for e in BUILTIN]
    for name in TYPICAL:
        usages = {t[name].usage for t in tables}
        handlers = {t[name].handler for t in tables}
        assert len(usages) == 1 and len(handlers) == 1
    assert {"add", "delete", "edit", "read", "take", "write", "place"} <= set(TYPICAL)


def test_init_settings_from_drawing():
    d = Drawing(settings=DrawingSettings(color=3, text_height=5.0))
    s = init_settings(axono.EXTENSION, d)
    assert s.defaults[("labels", "height")] == 5.0
    assert s.defaults[("pipes", "diameter_mm")] == 50
    assert s.list_wide[("pipes", "color")] == 3


def test_fresh_pp_carries_settings(engine):
    d = Drawing(settings=DrawingSettings(text_height=3.5))
    run_command(engine, d, "axono", "label", ["0,0,0", "DN50"])
    pp = engine.session_pp(d, engine.get("axono"))
    assert pp.records["labels"][0]["height"] == 3.5


def test_add_axis_makes_working_modules(engine, drawing):
    run_command(engine, drawing, "axono", "add-axis", ["0,0,0", "1000,0,0", "1000,1000,0"])
    pp = engine.session_pp(drawing, engine.get("axono"))
    assert len(pp.records["points"]) == 3 and len(pp.records["pipes"]) == 2
    assert tags(drawing, "axono") == visible_tags(pp, engine.get("axono"))


def test_place_gives_one_module(engine, drawing):
    run_command(engine, drawing, "axono", "add-axis", ["0,0,0", "1000,0,0"])
    res = run_command(engine, drawing, "axono", "place", ["10,10"])
    mods = drawing.modules()
    assert [m.id for m in mods] == [res.value]
    assert drawing.working_modules() == []
    assert "axono" not in drawing.sessions


def test_take_edit_place_replaces(engine, drawing):
    run_command(engine, drawing, "axono", "add-axis", ["0,0,0", "1000,0,0"])
    mid = run_command(engine, drawing, "axono", "place", ["10,10"]).value
    run_command(engine, drawing, "axono", "take", [str(mid)])
    run_command(engine, drawing, "axono", "edit", ["pipes", "0", "diameter_mm=80"])
    again = run_command(engine, drawing, "axono", "place", ["10,10"]).value
    assert again == mid and len(drawing.modules()) == 1
    pp = engine.decode(drawing.get(mid).payload)[1]
    assert pp.records["pipes"][0]["diameter_mm"] == 80


def test_unknown_command_and_extension(engine, drawing):
    with pytest.raises(UnknownCommand):
        run_command(engine, drawing, "axono", "nope")
    with pytest.raises(UnknownExtension):
        run_command(engine, drawing, "nope", "add")


def test_failed_command_leaves_session_untouched(engine, drawing):
    run_command(engine, drawing, "axono", "add-axis", ["0,0,0", "1000,0,0", "2000,0,1000"])
    before = engine.session_pp(drawing, engine.get("axono")).copy()
    elements = list(drawing.elements)
    with pytest.raises(BreakNotAllowed):
        run_command(engine, drawing, "axono", "add-break", ["X", "1500", "-100"])
    assert engine.session_pp(drawing, engine.get("axono")) == before
    assert drawing.elements == elements


def test_generic_add_delete_set(engine, drawing):
    run_command(engine, drawing, "user", "add", ["points", "x=0", "y=0"])
    run_command(engine, drawing, "user", "add", ["points", "x=10", "y=0"])
    run_command(engine, drawing, "user", "add", ["segments", "a=0", "b=1"])
    run_command(engine, drawing, "user", "set", ["line_color=2"])
    run_command(engine, drawing, "user", "add", ["segments", "a=1", "b=0", "line_type=dashed"])
    pp = engine.session_pp(drawing, engine.get("user"))
    assert [s["color"] for s in pp.records["segments"]] == [7, 2]
    assert pp.records["segments"][1]["line_type"] == 1
    res = run_command(engine, drawing, "user", "delete", ["points", "0"])
    assert res.value.removed == {"points": [0], "segments": [0, 1]}
    pp = engine.session_pp(drawing, engine.get("user"))
    assert check_integrity(pp) == []
    assert tags(drawing, "user") == set()


def test_bad_arguments_are_command_errors(engine, drawing):
    for cmd, args in [("add", ["points", "x"]), ("add", ["points", "q=1"]), ("edit", ["points"]),
                      ("place", ["a,b"]), ("add", ["points", "x=abc", "y=0"])]:
        with pytest.raises(CommandError):
            run_command(engine, drawing, "user", cmd, args)


def test_write_read_catalog(engine, drawing):
    run_command(engine, drawing, "axono", "add-axis", ["0,0,0", "1000,0,0"])
    run_command(engine, drawing, "axono", "write", ["proto"])
    run_command(engine, drawing, "axono", "delete", ["points", "0", "1"])
    run_command(engine, drawing, "axono", "read", ["proto"])
    pp = engine.session_pp(drawing, engine.get("axono"))
    assert len(pp.records["pipes"]) == 1
    assert (engine.catalog_dir / "proto.ppc").is_file()


def test_pick_and_extent_commands(engine, drawing):
    run_command(engine, drawing, "axono", "add-axis", ["0,0,0", "1000,0,0"])
    run_command(engine, drawing, "axono", "set", ["anchor_x=20", "anchor_y=20"])
    assert run_command(engine, drawing, "axono", "pick", ["25,20", "0.5"]).message == "pipes[0]"
    assert run_command(engine, drawing, "axono", "extent").value == pytest.approx((20, 20, 30, 20))


def test_take_requires_matching_module(engine, drawing):
    mid = drawing.add(Module("Арматура"))
    with pytest.raises(ElementNotFound):
        run_command(engine, drawing, "axono", "take", [str(mid)])


def test_help_lists_all_commands():
    lines = command_help(axono.EXTENSION)
    assert len(lines) == len(TYPICAL) + 3
    assert any(line.startswith("add-break") for line in lines)
