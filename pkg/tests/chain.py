"""Three-list chain schema and the rebuild oracle for cascade deletes."""

import itertools

from modcad.schema import ListSchema, PPSchema, ref, text, uint
from modcad.store import add_object, new_pp

# points <- pipes <- labels; labels also carry an optional "see" link
# that is nulled rather than cascaded.
CHAIN = PPSchema(
    name="chain",
    version=1,
    lists=(
        ListSchema("points", (uint("x", 4),)),
        ListSchema("pipes", (ref("start", "points"), ref("end", "points"))),
        ListSchema("labels", (ref("target", "pipes"), ref("see", "pipes", optional=True), text("t"))),
    ),
)


def chain_pp(points, pipes, labels):
    pp = new_pp(CHAIN)
    for x in points:
        add_object(pp, "points", {"x": x})
    for a, b in pipes:
        add_object(pp, "pipes", {"start": a, "end": b})
    for tgt, see, t in labels:
        add_object(pp, "labels", {"target": tgt, "see": see, "t": t})
    return pp


def rebuild_oracle(pp, list_name, doomed):
    """Reachability oracle: rebuild from scratch, keeping only records whose
    cascading reference closure avoids every deleted record."""
    schema = pp.schema
    dead = {(list_name, i) for i in doomed}

    def alive(name, i):
        if (name, i) in dead:
            return False
        rec = pp.records[name][i]
        for f in schema.list(name).refs():
            if f.cascades and rec[f.name] is not None and not alive(f.target, rec[f.name]):
                return False
        return True

    survivors = {
        name: [i for i in range(len(pp.records[name])) if alive(name, i)]
        for name in schema.list_names
    }
    new_index = {name: {old: new for new, old in enumerate(keep)} for name, keep in survivors.items()}
    out = new_pp(schema)
    for name in schema.list_names:
        for old in survivors[name]:
            rec = dict(pp.records[name][old])
            for f in schema.list(name).refs():
                if rec[f.name] is not None:
                    rec[f.name] = new_index[f.target].get(rec[f.name])
            add_object(out, name, rec)
    return out


def random_chain(rng, max_n):
    n_pts = rng.randint(0, max_n)
    pipes = [] if n_pts == 0 else [
        (rng.randrange(n_pts), rng.randrange(n_pts)) for _ in range(rng.randint(0, max_n))
    ]
    labels = [] if not pipes else [
        (rng.randrange(len(pipes)), rng.choice([None, rng.randrange(len(pipes))]), "L")
        for _ in range(rng.randint(0, max_n))
    ]
    return chain_pp([rng.randrange(16) for _ in range(n_pts)], pipes, labels)


def all_deletions(pp):
    for name in pp.schema.list_names:
        n = len(pp.records[name])
        for k in range(n + 1):
            for subset in itertools.combinations(range(n), k):
                yield name, subset
