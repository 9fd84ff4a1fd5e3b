"""Drawings, module types and the module lifecycle.

A module is a drawing element whose payload (a compact PP image) fully
determines its geometry.  Module types restrict which properties a
module may carry.  While a PP is being edited its visible objects live in
the drawing as tagged working modules; :func:`place_module` collects them
into a single module.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Iterable, NamedTuple, Sequence

from .codec import decode_compact
from .errors import (
    DuplicateElementId,
    DuplicatePropertyKey,
    DuplicateType,
    ElementNotFound,
    EmptyResult,
    PropertyError,
    ReplaceTargetMissing,
    UnknownType,
)
from .geometry import Primitive
from .schema import PPSchema
from .store import PP, SpeedFn, recompute_speed_vars

PROPERTY_KINDS = ("text", "number", "point", "flag", "bytes")


@dataclass(frozen=True)
class ModuleTypeDef:
    type_name: str
    allowed_properties: tuple[tuple[str, str], ...]
    has_payload: bool = False

    def kinds(self) -> dict[str, str]:
        return dict(self.allowed_properties)


class ModuleTypeRegistry:
    def __init__(self):
        self._types: dict[str, ModuleTypeDef] = {}

    def register(self, definition: ModuleTypeDef) -> ModuleTypeDef:
        if definition.type_name in self._types:
            raise DuplicateType(definition.type_name)
        keys = [k for k, _ in definition.allowed_properties]
        dups = sorted({k for k in keys if keys.count(k) > 1})
        if dups:
            raise DuplicatePropertyKey(f"{definition.type_name}: {dups}")
        for key, kind in definition.allowed_properties:
            if kind not in PROPERTY_KINDS:
                raise PropertyError(f"{definition.type_name}.{key}: unknown kind {kind!r}")
        self._types[definition.type_name] = definition
        return definition

    def get(self, type_name: str) -> ModuleTypeDef:
        try:
            return self._types[type_name]
        except KeyError:
            raise UnknownType(type_name) from None

    def __contains__(self, type_name):
        return type_name in self._types

    def __iter__(self):
        return iter(self._types.values())

    def __len__(self):
        return len(self._types)


def register_module_type(registry: ModuleTypeRegistry, definition: ModuleTypeDef) -> ModuleTypeDef:
    return registry.register(definition)


def check_property(kind: str, value) -> bool:
    if kind == "text":
        return isinstance(value, str)
    if kind == "number":
        return isinstance(value, (int, float)) and not isinstance(value, bool)
    if kind == "flag":
        return isinstance(value, bool)
    if kind == "bytes":
        return isinstance(value, bytes)
    if kind == "point":
        return (isinstance(value, tuple) and len(value) == 2
                and all(check_property("number", v) for v in value))
    return False


def validate_properties(registry: ModuleTypeRegistry, type_name: str,
                        properties: dict[str, Any]) -> None:
    kinds = registry.get(type_name).kinds()
    for key, value in properties.items():
        if key not in kinds:
            raise PropertyError(f"property {key!r} is not allowed for {type_name!r}")
        if not check_property(kinds[key], value):
            raise PropertyError(f"{type_name}.{key}: {value!r} is not a {kinds[key]}")


# Property kinds for the built-in catalogue; anything unlisted is text.
_KIND_BY_KEY = {
    "Привязка": "point",
    "Симметрия": "flag",
    "Строительная длина": "number",
    "Масса": "number",
    "Dy": "number",
    "Py": "number",
    "Масштаб при создании": "number",
    "Цена": "number",
    "На щите": "flag",
    "Несущая геометрия": "bytes",
    "Пароль": "bytes",
}

_BUILTIN_TYPES = [
    ("Пользовательский", ["Привязка", "Симметрия", "Комментарий"], True),
    ("Трубопровод", [], False),
    ("Арматура", ["Привязка", "Симметрия", "Комментарий", "Строительная длина",
                  "Обозначение", "Наименование", "Масса", "Примечание", "Dy", "Py"], False),
    ("Таблица КИПиА", [], False),
    ("Прибор", ["Привязка", "Несущая геометрия", "Позиционное обозначение", "Обозначение",
                "Наименование", "Масса", "Примечание", "Тип, марка оборудования",
                "Единица измерения", "Код единиц измерения", "Код завода-изготовителя",
                "Код оборудования, материала", "Цена", "Наименование и технич. х-ка",
                "На щите", "Функциональный признак прибора", "Верхний индекс",
                "Нижний индекс", "Комментарий", "Тип линии приборов КИП"], False),
    ("Исполнительный механизм", [], False),
    ("План этажа", ["Комментарий", "Параметры этажа в плане", "Масштаб при создании"], False),
    ("Обозначение для аксонометрии", ["Привязка", "Симметрия", "Комментарий",
                                      "Вырезаемый на трубе отрезок"], False),
    ("Аксонометрическая схема", ["Комментарий", "Параметры аксонометрич. схемы",
                                 "Масштаб при создании"], True),
    ("Оформление чертежа", ["Описание оформления чертежа"], False),
    ("Табличный", ["Комментарий", "Описание таблицы"], True),
    ("Позиционное обозначение", ["Тип позиционного обозначения",
                                 "Тип объекта позиционного обозначения",
                                 "Специфицирующие свойства"], False),
    ("Профиль наружной сети ВК", ["Комментарий", "Параметры профиля наружной сети ВК",
                                  "Масштаб при создании"], False),
    ("Молниезащита зданий и сооружений", ["Комментарий",
                                          "Параметры молниезащиты зданий и сооружений",
                                          "Масштаб при создании"], False),
    ("Электронная подпись", ["Сотрудник", "Должность", "Пароль", "Дата", "Время"], False),
]


def builtin_registry() -> ModuleTypeRegistry:
    """A fresh registry holding the standard module-type catalogue."""
    reg = ModuleTypeRegistry()
    for name, keys, payload in _BUILTIN_TYPES:
        reg.register(ModuleTypeDef(
            name, tuple((k, _KIND_BY_KEY.get(k, "text")) for k in keys), payload))
    return reg


# -- drawing elements -------------------------------------------------------------

class Tag(NamedTuple):
    list_name: str
    index: int
    extra: int = 0


@dataclass
class WorkingModule:
    """Temporary element visualising one PP object while it is edited.

    `primitives` are in the PP's local frame; `origin` is where that
    frame's (0, 0) sits on the sheet.
    """

    owner: str
    tag: Tag
    primitives: tuple[Primitive, ...]
    origin: tuple[float, float] = (0.0, 0.0)
    id: int = 0

    def world(self) -> list[Primitive]:
        ox, oy = self.origin
        if ox == 0 and oy == 0:
            return list(self.primitives)
        return [p.translate(ox, oy) for p in self.primitives]


@dataclass
class Module:
    type_name: str
    properties: dict[str, Any] = field(default_factory=dict)
    payload: bytes = b""
    geometry: tuple[Primitive, ...] = ()
    anchor: tuple[float, float] = (0.0, 0.0)
    id: int = 0

    def world(self) -> list[Primitive]:
        return list(self.geometry)


@dataclass
class Shape:
    """A plain primitive placed directly on the sheet."""

    primitive: Primitive
    id: int = 0

    def world(self) -> list[Primitive]:
        return [self.primitive]


@dataclass
class DrawingSettings:
    color: int = 7
    line_type: int = 0
    text_height: float = 3.5


@dataclass
class Session:
    """An extension's PP under edit, kept with the drawing between commands."""

    payload: bytes = b""
    pp: PP | None = None
    replace_target: int | None = None


class Drawing:
    def __init__(self, width: float = 420.0, height: float = 297.0,
                 settings: DrawingSettings | None = None,
                 registry: ModuleTypeRegistry | None = None):
        self.sheet_size = (float(width), float(height))
        self.settings = settings or DrawingSettings()
        self.registry = registry if registry is not None else builtin_registry()
        self.elements: list[Module | WorkingModule | Shape] = []
        self.sessions: dict[str, Session] = {}
        self.next_id = 1

    def add(self, element, element_id: int | None = None):
        if isinstance(element, Module):
            validate_properties(self.registry, element.type_name, element.properties)
        if element_id is None:
            element_id = self.next_id
        if any(e.id == element_id for e in self.elements):
            raise DuplicateElementId(element_id)
        element.id = element_id
        self.next_id = max(self.next_id, element_id + 1)
        self.elements.append(element)
        return element_id

    def get(self, element_id: int):
        for e in self.elements:
            if e.id == element_id:
                return e
        raise ElementNotFound(f"no element with id {element_id}")

    def remove(self, element_ids: Iterable[int]) -> None:
        ids = set(element_ids)
        self.elements = [e for e in self.elements if e.id not in ids]

    def modules(self, type_name: str | None = None) -> list[Module]:
        return [e for e in self.elements if isinstance(e, Module)
                and (type_name is None or e.type_name == type_name)]

    def working_modules(self, owner: str | None = None) -> list[WorkingModule]:
        return [e for e in self.elements if isinstance(e, WorkingModule)
                and (owner is None or e.owner == owner)]

    def __repr__(self):
        w, h = self.sheet_size
        return f"<Drawing {w:g}x{h:g} elements={len(self.elements)}>"


def place_module(drawing: Drawing, working_modules: Sequence[WorkingModule], payload: bytes,
                 type_name: str, anchor: tuple[float, float],
                 replace_target: int | None = None,
                 properties: dict[str, Any] | None = None) -> int:
    """Collect working modules into one module at `anchor`; return its id.

    Working-module geometry is moved so the PP origin lands on `anchor`.
    With `replace_target` the existing module keeps its id and position in
    the element list; otherwise the module is appended.
    """
    tdef = drawing.registry.get(type_name)
    if not working_modules:
        raise EmptyResult("nothing to place: no working modules")
    target = None
    if replace_target is not None:
        target = next((e for e in drawing.elements
                       if isinstance(e, Module) and e.id == replace_target), None)
        if target is None or target.type_name != type_name:
            raise ReplaceTargetMissing(f"no {type_name!r} module with id {replace_target}")
    properties = dict(properties or {})
    validate_properties(drawing.registry, type_name, properties)

    ax, ay = anchor
    geometry = tuple(p.translate(ax, ay) for wm in working_modules for p in wm.primitives)
    module = Module(type_name, properties, payload if tdef.has_payload else b"",
                    geometry, (float(ax), float(ay)))
    drawing.remove(wm.id for wm in working_modules)
    if target is not None:
        module.id = target.id
        drawing.elements[drawing.elements.index(target)] = module
        return module.id
    return drawing.add(module)


def extract_pp(module: Module, schema: PPSchema, speed_fn: SpeedFn | None = None) -> PP:
    """Decode a module's payload into an expanded PP with fresh speed variables."""
    pp = decode_compact(module.payload, schema, speed_fn)
    recompute_speed_vars(pp)
    return pp
