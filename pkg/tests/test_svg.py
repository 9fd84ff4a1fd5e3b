import re
import xml.etree.ElementTree as ET

from modcad.ext import axono
from modcad.geometry import Arc, Circle, Marker, Polyline, Segment, Text
from modcad.model import Drawing, Shape
from modcad.regen import generate_all
from modcad.store import new_pp
from modcad.svg import DASHES, num, render_svg

NS = "{http://www.w3.org/2000/svg}"


def test_empty_drawing_only_frame():
    root = ET.fromstring(render_svg(Drawing(420, 297)))
    assert root.get("viewBox") == "0 0 420.000 297.000"
    assert [child.tag for child in root] == [NS + "rect"]


def test_render_is_deterministic():
    d = Drawing()
    d.add(Shape(Segment((1, 1), (2, 3))))
    assert render_svg(d) == render_svg(d)


def test_y_axis_flipped_and_three_decimals():
    d = Drawing(100, 50)
    d.add(Shape(Segment((1, 2), (10.12345, 20), line_type=1)))
    line = ET.fromstring(render_svg(d)).find(NS + "line")
    assert (line.get("x1"), line.get("y1"), line.get("x2"), line.get("y2")) == ("1.000", "48.000", "10.123", "30.000")
    assert line.get("stroke-dasharray") == DASHES[1]


def test_all_primitives_render_valid_xml():
    d = Drawing()
    for p in (Segment((0, 0), (1, 1)), Polyline(((0, 0), (1, 1), (2, 0)), closed=True),
              Circle((5, 5), 2), Arc((5, 5), 2, 0, 90), Arc((5, 5), 2, 0, 360),
              Text((1, 1), 3.5, 30, "a<b&c"), Marker((3, 3), "dot"), Marker((3, 3), "cross"),
              Marker((3, 3), "elevation")):
        d.add(Shape(p))
    root = ET.fromstring(render_svg(d))
    assert root.find(NS + "text").text == "a<b&c"
    nums = re.findall(r' (?:x1|y1|x2|y2|cx|cy|r|x|y|font-size)="([^"]+)"', render_svg(d))
    assert nums and all(len(n.split(".")[1]) == 3 for n in nums)


def test_negative_zero_normalised():
    assert num(-0.0001) == "0.000"


def test_preview_of_working_modules():
    pp = new_pp(axono.SCHEMA, speed_fn=axono.speed)
    axono.add_axis(pp, [(0, 0, 0), (1000, 0, 0)])
    svg = render_svg(generate_all(pp, axono.EXTENSION))
    root = ET.fromstring(svg)
    assert root.get("viewBox") == "0 0 20.000 10.000"  # 10 mm pipe plus 5 mm margins
    assert root.find(NS + "g").get("data-tag") == "axono:pipes:0:0"
