import itertools
import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cayleylift.balls import Ball, ResourceCapExceeded, ball, local_ball
from cayleylift.constraints import (BoundaryError, ConstraintError, ConstraintParseError,
                                    Labelling, constraint_by_name, decode_vertices, defect_set,
                                    edge_to_vertex_coding, encode_edges, labelling_from_json,
                                    labelling_to_json, meets_at, orientation, parse_constraint,
                                    perfect_matching, proper_coloring, solve_decoration)
from cayleylift.diagrams import cayley_constraint, standard_diagram
from cayleylift.search import SearchBudget, ball_automorphisms
from conftest import cball, group

PATH_ORIENT = """\
constraint radius=1 arity=2 alphabet=in,out
# a vertex with two neighbours: one edge in, one out
pattern edges: (0,1),(0,2)
allow:
  edge 0 1 = out
  edge 1 0 = in
  edge 0 2 = in
  edge 2 0 = out
"""


def path_ball(n):
    """Path of 2n+1 vertices centred at 0, as a radius-n ball."""
    order = [0]
    for k in range(1, n + 1):
        order += [2 * k - 1, 2 * k]
    adj = [set() for _ in range(2 * n + 1)]
    for k in range(1, n + 1):
        for side in (0, 1):
            a = 0 if k == 1 else 2 * (k - 1) - 1 + side
            b = 2 * k - 1 + side
            adj[a].add(b)
            adj[b].add(a)
    depth = [0] + [(v + 1) // 2 for v in range(1, 2 * n + 1)]
    return Ball(adj=[tuple(sorted(a)) for a in adj], depth=depth, radius=n)


def direct_proper(host, f, k):
    """Oracle: interior vertices whose colour is repeated at a neighbour."""
    bad = []
    for x in host.interior(1):
        if f.get(x) is None or any(f.get(y) is None for y in host.adj[x]):
            bad.append(x)
        elif any(f[y] == f[x] for y in host.adj[x]):
            bad.append(x)
    return bad


def test_builtin_lines():
    c = parse_constraint("builtin proper-coloring k=3")
    assert (c.arity, c.radius, c.alphabet) == (1, 1, (0, 1, 2))
    o = parse_constraint("constraint radius=1 arity=2 alphabet=0,1\nbuiltin orientation")
    assert o.arity == 2
    b = path_ball(1)
    assert o.accept(b, {(0, 1): 1, (1, 0): 0, (0, 2): 0, (2, 0): 1})
    assert not o.accept(b, {(0, 1): 1, (1, 0): 1, (0, 2): 0, (2, 0): 1})


def test_extensional_closure_adds_reflection():
    c = parse_constraint(PATH_ORIENT)
    allowed = c.params["allowed"]
    # sites in pattern order: (0,1),(0,2),(1,0),(2,0)
    assert ("out", "in", "in", "out") in allowed
    assert ("in", "out", "out", "in") in allowed
    assert len(allowed) == 2


def test_extensional_constraint_on_a_path():
    c = parse_constraint(PATH_ORIENT)
    host = path_ball(3)
    # orient every edge away from the left end: u -> v with v further right
    pos = {0: 0}
    for v in range(1, host.n):
        pos[v] = (v + 1) // 2 * (1 if v % 2 else -1)
    f = {(u, v): ("out" if pos[v] > pos[u] else "in") for u, v in host.edges()}
    assert all(meets_at(host, f, x, c) for x in host.interior(1))
    f[(0, 1)] = f[(1, 0)] = "out"
    assert not meets_at(host, f, 0, c)


@pytest.mark.parametrize("text,line", [
    ("constraint radius=1 arity=3 alphabet=a", 1),
    ("constraint radius=1 arity=1 alphabet=a,a", 1),
    ("constraint radius=1 arity=1 alphabet=a,b\npattern edges: (0,1)\nallow:\n  vertex 0 = c\n"
     "  vertex 1 = a", 4),
    ("constraint radius=2 arity=1 alphabet=a\npattern edges: (0,1)\nallow:\n  vertex 0 = a\n"
     "  vertex 1 = a", 2),
    ("constraint radius=1 arity=1 alphabet=a\npattern edges: (0,1)\nallow:\n  vertex 0 = a", 3),
    ("constraint radius=1 arity=1 alphabet=a\nwhatever", 2),
    ("builtin nope", 1),
    ("builtin proper-coloring k=x", 1),
    ("constraint radius=2 arity=1 alphabet=0,1,2\nbuiltin proper-coloring k=3", 1),
    ("constraint radius=1 arity=1 alphabet=a,b\nbuiltin proper-coloring k=2", 1),
])
def test_parse_errors_carry_positions(text, line):
    with pytest.raises(ConstraintParseError) as exc:
        parse_constraint(text)
    assert exc.value.line == line and exc.value.column >= 1


def test_constraint_by_name():
    assert constraint_by_name("proper-coloring:4").alphabet == (0, 1, 2, 3)
    assert constraint_by_name("orientation").arity == 2
    assert constraint_by_name("cayley:2", group("gamma")).radius == 2
    with pytest.raises(ConstraintError):
        constraint_by_name("cayley:2")
    with pytest.raises(ConstraintError):
        constraint_by_name("bogus")


def test_constant_colouring_fails_everywhere():
    host = cball("gamma", 3)
    f = {v: 0 for v in range(host.n)}
    c = proper_coloring(3)
    assert not any(meets_at(host, f, x, c) for x in host.interior(1))


def test_boundary_is_a_precondition():
    host = cball("gamma", 2)
    f = {v: 0 for v in range(host.n)}
    far = next(v for v in range(host.n) if host.depth[v] == 2)
    with pytest.raises(BoundaryError):
        meets_at(host, f, far, proper_coloring(3))
    with pytest.raises(BoundaryError):
        meets_at(host, f, host.n + 5, proper_coloring(3))


def test_orientation_on_a_path():
    host = path_ball(4)
    pos = {0: 0}
    for v in range(1, host.n):
        pos[v] = (v + 1) // 2 * (1 if v % 2 else -1)
    f = {(u, v): int(pos[v] > pos[u]) for u, v in host.edges()}
    assert all(meets_at(host, f, x, orientation()) for x in host.interior(1))


def test_standard_labelling_meets_cayley_constraint():
    for name in ("gamma", "c2*c3", "lamplighter-DL", "dinf-grr"):
        host = cball(name, 4)
        d = standard_diagram(host)
        c = cayley_constraint(group(name), 2)
        assert all(meets_at(host, d.labels, x, c) for x in host.interior(2))


def test_defect_fraction_cases():
    host = cball("c2*c3", 3)
    sol = solve_decoration(host, proper_coloring(3))
    assert defect_set(host, sol, proper_coloring(3)).fraction == 0
    empty = defect_set(host, Labelling(1, (0, 1, 2)), proper_coloring(3))
    assert empty.fraction == 1 and empty.checked == len(host.interior(1))


def test_flipped_vertex_defects_match_recount():
    host = cball("gamma", 3)
    c = proper_coloring(3)
    sol = solve_decoration(host, c)
    x = 1
    vals = dict(sol.values)
    vals[x] = vals[next(iter(host.adj[x]))]
    f = Labelling(1, c.alphabet, vals)
    rep = defect_set(host, f, c)
    assert list(rep.defective) == direct_proper(host, vals, 3)
    assert x in rep.defective
    assert set(rep.defective) <= {x, *host.adj[x]}
    assert rep.fraction == Fraction(len(rep.defective), rep.checked)
    doc = json.loads(rep.to_json())
    assert doc["checked"] == rep.checked and Fraction(doc["fraction"]) == rep.fraction


@settings(max_examples=40)
@given(st.lists(st.integers(0, 2), min_size=42, max_size=42))
def test_defects_agree_with_direct_recount(cols):
    host = cball("gamma", 3)
    f = dict(enumerate(cols))
    assert list(defect_set(host, f, proper_coloring(3)).defective) == direct_proper(host, f, 3)


@settings(max_examples=30)
@given(st.data())
def test_meets_at_is_invariant_under_local_automorphisms(data):
    name = data.draw(st.sampled_from(["c2*c3", "gamma"]))
    host = cball(name, 3)
    c = data.draw(st.sampled_from([proper_coloring(2), perfect_matching(), orientation()]))
    x = data.draw(st.sampled_from(host.interior(c.radius)))
    loc = local_ball(host, x, c.radius)
    autos = ball_automorphisms(loc, True)
    sigma = data.draw(st.sampled_from(autos)).vertex_map
    ids = loc.host_ids
    if c.arity == 1:
        vals = {ids[v]: data.draw(st.sampled_from(c.alphabet)) for v in range(loc.n)}
        moved = {ids[sigma[v]]: vals[ids[v]] for v in range(loc.n)}
    else:
        vals = {(ids[u], ids[v]): data.draw(st.sampled_from(c.alphabet)) for u, v in loc.edges()}
        moved = {(ids[sigma[u]], ids[sigma[v]]): vals[(ids[u], ids[v])] for u, v in loc.edges()}
    assert meets_at(host, vals, x, c) == meets_at(host, moved, x, c)


def brute_solutions(host, c):
    sites = list(range(host.n)) if c.arity == 1 else list(host.edges())
    out = []
    for combo in itertools.product(c.alphabet, repeat=len(sites)):
        f = dict(zip(sites, combo))
        if all(meets_at(host, f, x, c) for x in host.interior(c.radius)):
            out.append(f)
    return out


@pytest.mark.parametrize("name,n,c", [
    ("c2*c3", 1, proper_coloring(3)),
    ("c2*c3", 1, proper_coloring(2)),
    ("c2*c3", 2, proper_coloring(2)),
    ("gamma", 1, proper_coloring(3)),
    ("c2*c3", 1, orientation()),
    ("c2*c3", 1, perfect_matching()),
])
def test_solver_agrees_with_exhaustive_enumeration(name, n, c):
    from cayleylift.constraints import iter_decorations
    host = ball(group(name), n)
    sites = host.n if c.arity == 1 else 2 * host.num_edges
    assert sites <= 12
    brute = brute_solutions(host, c)
    ours = list(iter_decorations(host, c))
    key = lambda f: tuple(sorted(f.items(), key=repr))  # noqa: E731
    assert sorted(map(key, (o.values for o in ours))) == sorted(map(key, brute))
    got = solve_decoration(host, c)
    assert (got is None) == (not brute)


def test_solver_examples():
    assert solve_decoration(cball("gamma", 2), proper_coloring(3)) is not None
    # the triangle at the root is fully checked only once its corners are interior
    assert solve_decoration(cball("c2*c3", 1), proper_coloring(2)) is not None
    assert solve_decoration(cball("c2*c3", 2), proper_coloring(2)) is None
    d = solve_decoration(cball("c2*c3", 3), cayley_constraint(group("c2*c3"), 3))
    assert d is not None
    assert defect_set(cball("c2*c3", 3), d, cayley_constraint(group("c2*c3"), 3)).fraction == 0


def test_solver_budget_is_not_absence():
    with pytest.raises(ResourceCapExceeded):
        solve_decoration(cball("gamma", 4), proper_coloring(2), budget=SearchBudget(5))


def test_labelling_validation():
    with pytest.raises(ConstraintError):
        Labelling(3, (0,))
    with pytest.raises(ConstraintError):
        Labelling(1, (0, 1), {0: 2})
    f = Labelling(2, (0, 1), {(0, 0): 1})
    with pytest.raises(ConstraintError):
        f.check_host(cball("gamma", 1))


def test_labelling_json_round_trip():
    f = Labelling(2, (0, 1), {(0, 1): 1, (1, 0): 0})
    assert labelling_from_json(labelling_to_json(f), (0, 1)) == f
    g = Labelling(1, ("a", "b"), {3: "a", 0: "b"})
    assert labelling_from_json(labelling_to_json(g), ("a", "b")) == g


def test_coding_round_trip_on_standard_diagram():
    G = group("c2*c3")
    host = cball("c2*c3", 3)
    d = standard_diagram(host)
    enc = encode_edges(host, Labelling(2, tuple(G.labels), d.labels), G)
    dec = decode_vertices(host, enc, G)
    assert dec == d.labels
    assert all(enc[v][0] == G.labels[0] for v in range(host.n))


def test_coding_requires_arity_two():
    with pytest.raises(ConstraintError):
        edge_to_vertex_coding(proper_coloring(3), group("gamma"))


def test_coding_correspondence_exhaustive():
    G = group("c2*c3")
    host = cball("c2*c3", 2)
    for c in (orientation(), perfect_matching()):
        coded = edge_to_vertex_coding(c, G)
        assert coded.radius == c.radius + 1 and coded.arity == 1
        edges = list(host.edges())
        inner = [x for x in host.interior(coded.radius)]
        assert inner == [0]
        for combo in itertools.product((0, 1), repeat=len(edges)):
            f = dict(zip(edges, combo))
            g = encode_edges(host, Labelling(2, (0, 1), f), G)
            assert meets_at(host, f, 0, c) == meets_at(host, g, 0, coded)


def test_coding_on_unit_ball_both_directions():
    """Every vertex labelling of B_1 is T-decoded; it meets the coded
    constraint exactly when its decoding is a valid orientation."""
    G = group("c2*c3")
    host = cball("c2*c3", 2)
    coded = edge_to_vertex_coding(orientation(), G)
    rng = np.random.default_rng(5)
    k = len(G.labels) + 1
    for _ in range(300):
        g = {v: tuple(int(b) for b in rng.integers(0, 2, k)) for v in range(host.n)}
        f = decode_vertices(host, g, G)
        assert meets_at(host, g, 0, coded) == meets_at(host, f, 0, orientation())


def test_coding_detects_a_root_violation():
    G = group("c2*c3")
    host = cball("c2*c3", 2)
    f = {(u, v): int(u < v) for u, v in host.edges()}
    v = host.adj[0][0]
    f[(0, v)] = f[(v, 0)] = 1
    assert not meets_at(host, f, 0, orientation())
    g = encode_edges(host, Labelling(2, (0, 1), f), G)
    assert not meets_at(host, g, 0, edge_to_vertex_coding(orientation(), G))
