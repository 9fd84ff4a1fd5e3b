import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from modcad.codec import encode_compact
from modcad.errors import (
    CorruptPayload,
    DrawingFormatError,
    DuplicateElementId,
    DuplicatePropertyKey,
    DuplicateType,
    EmptyResult,
    PropertyError,
    ReplaceTargetMissing,
    SchemaMismatch,
    UnknownType,
)
from modcad.ext import axono, spec_table
from modcad.fileio import dumps_drawing, load_drawing, loads_drawing, save_drawing
from modcad.geometry import Segment
from modcad.model import (
    Drawing,
    Module,
    ModuleTypeDef,
    ModuleTypeRegistry,
    Shape,
    Tag,
    WorkingModule,
    builtin_registry,
    extract_pp,
    place_module,
    register_module_type,
    validate_properties,
)
from modcad.regen import generate_all
from modcad.store import new_pp
from modcad.svg import render_svg

AX = axono.EXTENSION
AXONO_TYPE = "Аксонометрическая схема"


def axono_pp():
    pp = new_pp(AX.schema, speed_fn=AX.speed_fn)
    axono.add_axis(pp, [(0, 0, 0), (1000, 0, 0), (1000, 0, 1500)])
    axono.attach_label(pp, 0, "DN50")
    return pp


def wm(i):
    return WorkingModule("t", Tag("items", i), (Segment((0, 0), (i + 1, 0)),), (0.0, 0.0))


# -- registry ---------------------------------------------------------------------------

def test_register_user_type():
    reg = ModuleTypeRegistry()
    t = register_module_type(reg, ModuleTypeDef(
        "Пользовательский", (("Привязка", "point"), ("Симметрия", "flag"), ("Комментарий", "text")), True))
    assert reg.get("Пользовательский") is t


def test_builtin_catalogue():
    reg = builtin_registry()
    assert len(reg) == 15
    keys = reg.get("Арматура").kinds()
    assert {"Строительная длина", "Обозначение", "Наименование", "Масса", "Dy", "Py"} <= set(keys)
    assert set(reg.get("Пользовательский").kinds()) == {"Привязка", "Симметрия", "Комментарий"}
    payload_types = {t.type_name for t in reg if t.has_payload}
    assert payload_types == {"Пользовательский", AXONO_TYPE, "Табличный"}


def test_register_twice():
    reg = builtin_registry()
    with pytest.raises(DuplicateType):
        reg.register(ModuleTypeDef("Арматура", ()))


def test_duplicate_property_key():
    with pytest.raises(DuplicatePropertyKey):
        ModuleTypeRegistry().register(ModuleTypeDef("X", (("a", "text"), ("a", "number"))))


def test_unknown_type():
    with pytest.raises(UnknownType):
        builtin_registry().get("Нет такого")


@settings(max_examples=50)
@given(st.sampled_from([t.type_name for t in builtin_registry()]), st.text(min_size=1, max_size=8))
def test_properties_outside_allowed_set_rejected(type_name, key):
    reg = builtin_registry()
    if key in reg.get(type_name).kinds():
        return
    with pytest.raises(PropertyError):
        validate_properties(reg, type_name, {key: "x"})


def test_property_kind_checked():
    reg = builtin_registry()
    validate_properties(reg, "Арматура", {"Масса": 1.5, "Привязка": (1.0, 2.0), "Симметрия": True})
    with pytest.raises(PropertyError):
        validate_properties(reg, "Арматура", {"Масса": "heavy"})
    with pytest.raises(PropertyError):
        validate_properties(reg, "Арматура", {"Симметрия": 1})


# -- drawing -----------------------------------------------------------------------------

def test_drawing_rejects_bad_module_and_duplicate_ids():
    d = Drawing()
    with pytest.raises(PropertyError):
        d.add(Module("Арматура", {"Цвет": "red"}))
    d.add(Shape(Segment((0, 0), (1, 1))), 5)
    with pytest.raises(DuplicateElementId):
        d.add(Shape(Segment((0, 0), (1, 1))), 5)


# -- place / extract ---------------------------------------------------------------------

def test_place_collects_working_modules():
    d = Drawing()
    for i in range(3):
        d.add(wm(i))
    mid = place_module(d, d.working_modules(), b"", "Арматура", (10, 20))
    assert len(d.elements) == 1
    m = d.get(mid)
    assert m.geometry == (Segment((10, 20), (11, 20)), Segment((10, 20), (12, 20)), Segment((10, 20), (13, 20)))
    assert m.anchor == (10.0, 20.0)


def test_place_replace_keeps_id_and_count():
    d = Drawing()
    d.add(Shape(Segment((0, 0), (1, 0))))
    pp = axono_pp()
    first = place_module(d, generate_all(pp, AX), encode_compact(pp), AXONO_TYPE, (0, 0))
    d.add(Shape(Segment((0, 0), (2, 0))))
    n = len(d.elements)
    axono.attach_label(pp, 1, "Т2")
    second = place_module(d, generate_all(pp, AX), encode_compact(pp), AXONO_TYPE, (0, 0), replace_target=first)
    assert second == first and len(d.elements) == n
    assert d.elements[1].id == first
    assert extract_pp(d.get(first), AX.schema, AX.speed_fn) == pp


def test_place_replace_idempotent_svg():
    pp = axono_pp()
    d = Drawing()
    mid = place_module(d, generate_all(pp, AX), encode_compact(pp), AXONO_TYPE, (50, 50))
    once = render_svg(d)
    place_module(d, generate_all(pp, AX), encode_compact(pp), AXONO_TYPE, (50, 50), replace_target=mid)
    assert render_svg(d) == once


def test_place_errors():
    d = Drawing()
    with pytest.raises(EmptyResult):
        place_module(d, [], b"", "Арматура", (0, 0))
    with pytest.raises(UnknownType):
        place_module(d, [wm(0)], b"", "Нет", (0, 0))
    with pytest.raises(ReplaceTargetMissing):
        place_module(d, [wm(0)], b"", "Арматура", (0, 0), replace_target=7)
    other = d.add(Module("Трубопровод"))
    with pytest.raises(ReplaceTargetMissing):
        place_module(d, [wm(0)], b"", "Арматура", (0, 0), replace_target=other)


def test_extract_round_trip_and_module_unchanged():
    pp = axono_pp()
    d = Drawing()
    mid = place_module(d, generate_all(pp, AX), encode_compact(pp), AXONO_TYPE, (0, 0))
    m = d.get(mid)
    payload = m.payload
    back = extract_pp(m, AX.schema, AX.speed_fn)
    assert back == pp and back.speed == pp.speed
    assert m.payload == payload


def test_extract_wrong_schema():
    pp = axono_pp()
    m = Module(AXONO_TYPE, {}, encode_compact(pp))
    with pytest.raises(SchemaMismatch):
        extract_pp(m, spec_table.SCHEMA)


def test_extract_truncated():
    image = encode_compact(axono_pp())
    for n in range(len(image)):
        with pytest.raises(CorruptPayload):
            extract_pp(Module(AXONO_TYPE, {}, image[:n]), AX.schema)


def test_module_geometry_matches_generator():
    """The parametric part fully determines the geometric part."""
    pp = axono_pp()
    d = Drawing()
    mid = place_module(d, generate_all(pp, AX), encode_compact(pp), AXONO_TYPE, (30, 40))
    m = d.get(mid)
    regen = extract_pp(m, AX.schema, AX.speed_fn)
    expected = tuple(p.translate(30, 40) for w in generate_all(regen, AX) for p in w.primitives)
    assert m.geometry == expected


# -- drawing files ------------------------------------------------------------------------

def test_drawing_file_round_trip(tmp_path):
    d = Drawing(297, 210)
    d.add(Shape(Segment((0, 0), (10, 10), color=2)))
    pp = axono_pp()
    place_module(d, generate_all(pp, AX), encode_compact(pp), AXONO_TYPE, (5, 5),
                 properties={"Комментарий": "x"})
    d.add(Module("Арматура", {"Масса": 2.5, "Привязка": (1.0, 2.0), "Обозначение": "A"}))
    d.add(Module("Прибор", {"Несущая геометрия": b"\x00\x01"}))
    path = tmp_path / "a.mcd"
    save_drawing(d, path)
    back = load_drawing(path)
    assert dumps_drawing(back) == path.read_bytes()
    assert render_svg(back) == render_svg(d)
    assert back.get(4).properties["Несущая геометрия"] == b"\x00\x01"
    assert back.get(3).properties["Привязка"] == (1.0, 2.0)


@pytest.mark.parametrize("data", [b"", b"MCD2\n{}", b"MCD1\nnot json", b"MCD1\n[]",
                                  b'MCD1\n{"version": 1}', b"MCD1\n\xff"])
def test_bad_drawing_files(data):
    with pytest.raises(DrawingFormatError):
        loads_drawing(data)
