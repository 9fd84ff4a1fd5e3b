import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from modcad.errors import (
    BrokenRef,
    FieldMismatch,
    IndexOutOfRange,
    InvalidSchema,
    UnknownList,
    UseAfterRelease,
)
from modcad.ext import axono
from modcad.schema import ListSchema, PPSchema, fixed, fnv1a64, ref, text, uint, validate_schema
from modcad.store import (
    add_object,
    check_integrity,
    delete_objects,
    edit_object,
    new_pp,
    recompute_speed_vars,
    referrers,
    release,
)

from chain import CHAIN, all_deletions, chain_pp, rebuild_oracle, random_chain


# -- schema ------------------------------------------------------------------------

def test_validate_schema_dag_ok():
    assert validate_schema(CHAIN) == []


def test_validate_schema_two_cycle():
    s = PPSchema("c", 1, (
        ListSchema("A", (ref("b", "B"),)),
        ListSchema("B", (ref("a", "A"),)),
    ))
    assert "cycle A,B" in validate_schema(s)


def test_validate_schema_unknown_target():
    s = PPSchema("c", 1, (ListSchema("A", (ref("q", "Q"),)),))
    assert any(v.startswith("unknown target Q") for v in validate_schema(s))


def test_validate_schema_malformed_link_list():
    s = PPSchema("c", 1, (
        ListSchema("A", (uint("v", 3),)),
        ListSchema("AA", (ref("a", "A"), uint("w", 2)), is_link_list=True),
    ))
    assert "malformed link list AA" in validate_schema(s)


def test_validate_schema_duplicates():
    s = PPSchema("c", 1, (
        ListSchema("A", (uint("v", 3), uint("v", 4))),
        ListSchema("A", (uint("w", 3),)),
    ))
    problems = validate_schema(s)
    assert "duplicate list A" in problems
    assert "duplicate field A.v" in problems


def _has_cycle_oracle(edges):
    # Kahn's algorithm: a topological order exists iff there is no cycle.
    indeg = {n: 0 for n in edges}
    for n, outs in edges.items():
        for m in outs:
            indeg[m] += 1
    ready = [n for n, d in indeg.items() if d == 0]
    seen = 0
    while ready:
        n = ready.pop()
        seen += 1
        for m in edges[n]:
            indeg[m] -= 1
            if indeg[m] == 0:
                ready.append(m)
    return seen != len(edges)


@settings(max_examples=300, deadline=None)
@given(st.integers(1, 6).flatmap(
    lambda n: st.tuples(st.just(n), st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)),
                                             max_size=10))))
def test_cycle_flag_matches_topological_sort(graph):
    n, edge_list = graph
    names = [f"L{i}" for i in range(n)]
    edges = {name: [] for name in names}
    lists = []
    for i, name in enumerate(names):
        fields = [uint("v", 1)]
        for j, (a, b) in enumerate(edge_list):
            if a == i:
                fields.append(ref(f"r{j}", names[b]))
                edges[name].append(names[b])
        lists.append(ListSchema(name, tuple(fields)))
    problems = validate_schema(PPSchema("g", 1, tuple(lists)))
    assert any(p.startswith("cycle ") for p in problems) == _has_cycle_oracle(edges)


def test_schema_hash_is_fnv1a_of_canonical_text():
    assert CHAIN.hash == fnv1a64(CHAIN.canonical_text().encode("utf-8"))
    assert fnv1a64(b"") == 0xCBF29CE484222325
    assert fnv1a64(b"a") == 0xAF63DC4C8601EC8C


def test_new_pp_rejects_invalid_schema():
    bad = PPSchema("c", 1, (ListSchema("A", (ref("q", "Q"),)),))
    with pytest.raises(InvalidSchema):
        new_pp(bad)


# -- add / edit ----------------------------------------------------------------------

def test_first_append_is_index_zero():
    pp = new_pp(axono.SCHEMA)
    assert add_object(pp, "points", {"x": 0, "y": 0, "z": 0}) == 0


def test_add_with_missing_target_is_broken_ref():
    pp = new_pp(axono.SCHEMA)
    add_object(pp, "points", {"x": 0, "y": 0, "z": 0})
    with pytest.raises(BrokenRef):
        add_object(pp, "pipes", {"start": 0, "end": 1})
    assert check_integrity(pp) == []


def test_per_object_default_injected():
    pp = new_pp(axono.SCHEMA, {"default_diameter": 50})
    add_object(pp, "points", {"x": 0, "y": 0, "z": 0})
    add_object(pp, "points", {"x": 1000, "y": 0, "z": 0})
    i = add_object(pp, "pipes", {"start": 0, "end": 1})
    assert pp.records["pipes"][i]["diameter_mm"] == 50
    pp.set_general("default_diameter", 80)
    j = add_object(pp, "pipes", {"start": 1, "end": 0})
    assert pp.records["pipes"][j]["diameter_mm"] == 80
    assert pp.records["pipes"][i]["diameter_mm"] == 50  # earlier copies stay editable per object


def test_list_wide_setting_is_not_stored_per_record():
    pp = new_pp(axono.SCHEMA, {"pipe_color": 3})
    add_object(pp, "points", {"x": 0, "y": 0, "z": 0})
    add_object(pp, "points", {"x": 1, "y": 0, "z": 0})
    add_object(pp, "pipes", {"start": 0, "end": 1})
    assert "color" not in pp.records["pipes"][0]
    assert pp.value("pipes", 0, "color") == 3
    pp.set_general("pipe_color", 5)
    assert pp.value("pipes", 0, "color") == 5
    with pytest.raises(FieldMismatch):
        add_object(pp, "pipes", {"start": 0, "end": 1, "color": 2})


def test_settings_split_between_mechanisms():
    s = new_pp(axono.SCHEMA).settings
    assert s.defaults[("pipes", "diameter_mm")] == 50
    assert ("pipes", "color") in s.list_wide
    assert not set(s.defaults) & set(s.list_wide)


def test_add_errors():
    pp = new_pp(axono.SCHEMA)
    with pytest.raises(UnknownList):
        add_object(pp, "valves", {})
    with pytest.raises(FieldMismatch):
        add_object(pp, "points", {"x": 0, "y": 0})
    with pytest.raises(FieldMismatch):
        add_object(pp, "points", {"x": "a", "y": 0, "z": 0})


def test_edit_is_all_or_nothing():
    pp = chain_pp([1, 2], [(0, 1)], [])
    with pytest.raises(BrokenRef):
        edit_object(pp, "pipes", 0, {"start": 1, "end": 7})
    assert pp.records["pipes"][0] == {"start": 0, "end": 1}
    with pytest.raises(IndexOutOfRange):
        edit_object(pp, "pipes", 3, {"start": 1})


# -- delete ---------------------------------------------------------------------------

def test_delete_point_renumbers_surviving_pipe():
    pp = chain_pp([0, 1, 2], [(0, 1), (1, 2)], [])
    delete_objects(pp, "points", [0])
    assert pp.records["points"] == [{"x": 1}, {"x": 2}]
    assert pp.records["pipes"] == [{"start": 0, "end": 1}]
    assert pp == rebuild_oracle(chain_pp([0, 1, 2], [(0, 1), (1, 2)], []), "points", [0])


def test_delete_empty_selection_is_identity():
    pp = chain_pp([0, 1], [(0, 1)], [(0, None, "a")])
    before = pp.copy()
    report = delete_objects(pp, "points", [])
    assert not report and report.removed == {}
    assert pp == before


def test_delete_all_points_cascades_transitively():
    pp = chain_pp([0, 1, 2], [(0, 1), (1, 2)], [(0, 1, "a"), (1, None, "b")])
    report = delete_objects(pp, "points", [0, 1, 2])
    assert all(len(v) == 0 for v in pp.records.values())
    assert report.removed == {"points": [0, 1, 2], "pipes": [0, 1], "labels": [0, 1]}


def test_optional_ref_is_nulled_not_cascaded():
    pp = chain_pp([0, 1, 2], [(0, 1), (1, 2)], [(1, 0, "keep")])
    report = delete_objects(pp, "pipes", [0])
    assert pp.records["labels"] == [{"target": 0, "see": None, "t": "keep"}]
    assert report.nulled == {"labels": [0]}


def test_axono_free_label_survives_pipe_deletion():
    pp = new_pp(axono.SCHEMA, speed_fn=axono.speed)
    axono.add_axis(pp, [(0, 0, 0), (1000, 0, 0), (1000, 1000, 0)])
    bound = axono.attach_label(pp, 0, "DN50")
    free = axono.attach_label(pp, (5, 5, 5), "free")
    delete_objects(pp, "pipes", [0, 1])
    assert [r["text"] for r in pp.records["labels"]] == ["free"]
    assert (bound, free) == (0, 1)
    assert check_integrity(pp) == []


def test_delete_out_of_range():
    pp = chain_pp([0], [], [])
    with pytest.raises(IndexOutOfRange):
        delete_objects(pp, "points", [1])


def test_cascade_oracle_exhaustive_small():
    """Every chain PP with up to 2 records per list, every deletion subset."""
    cases = 0
    for n_pts in range(3):
        pipe_opts = list(itertools.product(range(n_pts), repeat=2))
        for n_pipes in range(3):
            for pipes in itertools.product(pipe_opts, repeat=n_pipes):
                label_opts = list(itertools.product(range(n_pipes), [None, *range(n_pipes)]))
                for n_labels in range(3):
                    for labels in itertools.product(label_opts, repeat=n_labels):
                        base = chain_pp(range(n_pts), pipes, [(t, s, "") for t, s in labels])
                        for name, subset in all_deletions(base):
                            pp = base.copy()
                            delete_objects(pp, name, subset)
                            assert pp == rebuild_oracle(base, name, subset), (pipes, labels, name, subset)
                            cases += 1
    assert cases > 1000


def test_cascade_oracle_random_six():
    rng = random.Random(20030601)
    for _ in range(60):
        base = random_chain(rng, 6)
        for name, subset in all_deletions(base):
            pp = base.copy()
            delete_objects(pp, name, subset)
            assert pp == rebuild_oracle(base, name, subset)
            assert check_integrity(pp) == []


@settings(max_examples=100, deadline=None)
@given(st.randoms(use_true_random=False), st.data())
def test_delete_order_independent(rng, data):
    base = random_chain(rng, 6)
    name = data.draw(st.sampled_from(base.schema.list_names))
    n = len(base.records[name])
    if n == 0:
        return
    picks = data.draw(st.lists(st.integers(0, n - 1), min_size=1, max_size=n, unique=True))
    a, b = base.copy(), base.copy()
    delete_objects(a, name, picks)
    delete_objects(b, name, list(reversed(picks)))
    assert a == b


# -- integrity, speed vars, lifecycle ------------------------------------------------

def test_integrity_names_corrupt_ref():
    pp = chain_pp([0, 1], [(0, 1)], [])
    pp.records["pipes"][0]["end"] = 99
    problems = check_integrity(pp)
    assert len(problems) == 1
    assert "pipes[0].end" in problems[0]


def test_integrity_after_random_ops():
    rng = random.Random(7)
    pp = new_pp(CHAIN)
    for step in range(1000):
        op = rng.random()
        np_ = len(pp.records["points"])
        npi = len(pp.records["pipes"])
        if op < 0.4 or np_ == 0:
            add_object(pp, "points", {"x": rng.randrange(16)})
        elif op < 0.7:
            add_object(pp, "pipes", {"start": rng.randrange(np_), "end": rng.randrange(np_)})
        elif op < 0.8 and npi:
            add_object(pp, "labels", {"target": rng.randrange(npi), "t": "x"})
        else:
            name = rng.choice(CHAIN.list_names)
            n = len(pp.records[name])
            if n:
                delete_objects(pp, name, rng.sample(range(n), rng.randint(1, min(3, n))))
        assert check_integrity(pp) == [], f"step {step}"


def test_speed_var_extent_oracle():
    pp = new_pp(axono.SCHEMA, speed_fn=axono.speed)
    i = axono.attach_label(pp, (0, 0, 0), "DN50", 2.5)
    assert pp.speed["labels"][i]["width"] == pytest.approx(4 * 2.5 * 0.6)
    assert pp.speed["labels"][i]["width"] == pytest.approx(6.0)


def test_recompute_speed_vars():
    pp = new_pp(axono.SCHEMA, speed_fn=axono.speed)
    recompute_speed_vars(pp)  # empty: no-op
    axono.attach_label(pp, (0, 0, 0), "abc", 2.0)
    pp.speed["labels"] = [None]
    recompute_speed_vars(pp)
    assert pp.speed["labels"][0] == {"width": pytest.approx(3.6), "height": 2.0}


def test_release():
    pp = chain_pp([1], [], [])
    release(pp)
    with pytest.raises(UseAfterRelease):
        add_object(pp, "points", {"x": 1})
    release(new_pp(CHAIN))


def test_referrers():
    pp = chain_pp([0, 1], [(0, 1), (1, 1)], [])
    assert sorted(referrers(pp, "points", 1)) == [("pipes", 0, "end"), ("pipes", 1, "end"), ("pipes", 1, "start")]


def test_fixed_field_shape():
    f = fixed("x", 32)
    assert f.coerce(1.234) == 1.23
