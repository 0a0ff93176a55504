import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cayleylift.balls import Ball, ball, local_ball
from cayleylift.constraints import meets_at, proper_coloring
from cayleylift.diagrams import cayley_constraint
from cayleylift.fiid import (RuleFailure, assemble, draw_seeds, evaluate_at, invariance_check,
                             run_rule, sample_rng, simulate)
from cayleylift.rules import (RULE_NAMES, fibre_bits, greedy_color, heisenberg_diagram,
                              heisenberg_factor, heisenberg_factor_at, heisenberg_swap_diagram,
                              lamplighter_order_diagram, rule_by_name, shift_bits, shift_swaps,
                              triangle_orientation)
from conftest import cball, group

HEIS = group("heis-c2")
H3 = HEIS.group.right


def split(label):
    a, q = label.split(".", 1)
    return int(a), q


def twisted(host, x, out, twist):
    """Standard labels at ``x`` with the C2 part shifted by ``twist(u) + twist(w)``."""
    exp = {}
    for w in host.adj[x]:
        a, q = split(host.edge_gen[(x, w)])
        exp[w] = f"{(a + twist(x) + twist(w)) % 2}.{q}"
    return out == exp


@pytest.fixture(scope="module")
def heis3():
    return ball(HEIS, 3)


def test_heisenberg_rule_is_a_twisted_standard_diagram(heis3):
    host = heis3
    idx = host.index
    rule = heisenberg_diagram()
    for s in range(6):
        seeds = draw_seeds(host, 5, 1, s).values[:, 0]

        def z(v):
            _, m = host.elements[v]
            return int(seeds[idx[(1, m)]] < seeds[idx[(0, m)]]) if (1, m) in idx else None

        for x in host.interior(2):
            out = evaluate_at(host, rule, seeds[:, None], x)
            assert out is not None and twisted(host, x, out, z)


def test_swap_rule_matches_the_factor(heis3):
    host = heis3
    rule = heisenberg_swap_diagram()
    for s in range(6):
        seeds = draw_seeds(host, 6, 1, s).values
        y = {host.elements[v]: int(seeds[v, 0] >= 0.5) for v in range(host.n)}
        x_of = lambda v: heisenberg_factor_at(y, host.elements[v][1])  # noqa: E731
        for x in host.interior(2):
            assert twisted(host, x, evaluate_at(host, rule, seeds, x), x_of)


def test_swap_rule_with_small_seeds_is_standard(heis3):
    host = heis3
    seeds = np.full((host.n, 1), 0.25)
    for x in host.interior(2):
        out = evaluate_at(host, heisenberg_swap_diagram(), seeds, x)
        assert out == {w: host.edge_gen[(x, w)] for w in host.adj[x]}


@pytest.mark.parametrize("rule,name,R,i", [
    (triangle_orientation(), "c2*c3", 4, 3),
    (lamplighter_order_diagram(), "lamplighter-DL", 4, 2),
    (heisenberg_swap_diagram(), "heis-c2", 4, 2),
])
def test_diagram_rules_meet_cayley_constraint(rule, name, R, i):
    G = group(name)
    rep = simulate(G, rule, R, cayley_constraint(G, i), 30, 3, host=cball(name, R))
    assert rep.failures == 0 and all(f == 0 for f in rep.per_sample)


def test_heisenberg_rule_meets_cayley_constraint():
    rep = simulate(HEIS, heisenberg_diagram(), 4, cayley_constraint(HEIS, 2), 5, 3)
    assert rep.failures == 0


@pytest.mark.parametrize("rule,name,trials", [
    (triangle_orientation(), "c2*c3", 200),
    (lamplighter_order_diagram(), "lamplighter-DL", 200),
    (heisenberg_diagram(), "heis-c2", 40),
])
def test_diagram_rules_are_invariant(rule, name, trials):
    b = ball(group(name), rule.radius)
    assert invariance_check(rule, b, trials, 11)


def test_lamplighter_coin_is_fair_and_proper():
    b = cball("lamplighter-DL", 2)
    rule = lamplighter_order_diagram()
    up = [w for w in b.adj[0] if b.height[w] == 1]
    dn = [w for w in b.adj[0] if b.height[w] == -1]
    rng = sample_rng(21)
    n = 10_000
    hits = 0
    for _ in range(n):
        out = rule(b, rng.random((b.n, 1)))
        assert {out[u] for u in up} == {"(1,{})", "(1,{0})"}
        assert {out[d] for d in dn} == {"(-1,{})", "(-1,{-1})"}
        hits += out[up[0]] == "(1,{})"
    assert abs(hits / n - 0.5) < 0.05


def test_lamplighter_rule_needs_heights():
    b = cball("lamplighter-DL", 2)
    bare = Ball(adj=b.adj, depth=b.depth, radius=b.radius)
    host_seeds = np.random.default_rng(0).random((b.n, 1))
    with pytest.raises(RuleFailure):
        lamplighter_order_diagram()(bare, host_seeds)


def test_triangle_rule_rejects_other_shapes():
    b = cball("gamma", 1)
    with pytest.raises(RuleFailure):
        triangle_orientation()(b, np.zeros((b.n, 1)) + np.arange(b.n)[:, None])


def test_greedy_can_need_a_sixth_colour():
    b = cball("gamma", 8)
    seeds = draw_seeds(b, 3, 1, 3621).values
    assert evaluate_at(b, greedy_color(6, radius=8), seeds, 0) == 5
    assert evaluate_at(b, greedy_color(5, radius=8), seeds, 0) is None


def test_greedy_output_is_proper_where_defined():
    host = cball("gamma", 5)
    rule = greedy_color(6, radius=3)
    for s in range(10):
        seeds = draw_seeds(host, 8, 1, s).values
        lab = assemble(host, rule, run_rule(host, rule, seeds))
        for x in host.interior(4):
            if all(v in lab.values for v in (x, *host.adj[x])):
                assert meets_at(host, lab, x, proper_coloring(6))


def test_greedy_arguments():
    with pytest.raises(ValueError):
        greedy_color(0)


def test_rule_names_resolve():
    G = group("c2*c3")
    for name in RULE_NAMES:
        concrete = name.replace("(k)", "(3)").replace("(label)", "(1)")
        assert rule_by_name(concrete, G).name
    with pytest.raises(ValueError):
        rule_by_name("edge-echo")
    with pytest.raises(ValueError):
        rule_by_name("nope")


# ---------------------------------------------------------------------------
# the factor on bit fields of C2 x H3

elements = st.tuples(st.integers(-3, 3), st.integers(-3, 3), st.integers(-5, 5))
fields = st.dictionaries(st.tuples(st.integers(0, 1), elements), st.just(1), max_size=12)


@settings(max_examples=200)
@given(fields, fields, st.lists(elements, min_size=1, max_size=8))
def test_factor_is_a_homomorphism(y1, y2, window):
    xor = {k: 1 for k in set(y1) ^ set(y2)}
    F1, F2, F = (heisenberg_factor(y, window) for y in (y1, y2, xor))
    assert all(F[m] == (F1[m] + F2[m]) % 2 for m in window)


@settings(max_examples=200)
@given(fields, st.integers(0, 1), elements, st.lists(elements, min_size=1, max_size=8))
def test_factor_equivariance(y, b, ell, window):
    g = (b, ell)
    x = lambda m: heisenberg_factor_at(y, m)  # noqa: E731
    for conv in ("displayed", "left"):
        moved = shift_bits(y, g, conv)
        rhs = shift_swaps(x, ell, conv)
        assert all(heisenberg_factor_at(moved, m) == rhs(m) for m in window)


def test_factor_small_cases():
    e = H3.identity()
    assert heisenberg_factor_at({}, (1, 0, 0)) == 0
    y = {(0, e): 1}
    assert heisenberg_factor_at(y, e) == 0 and heisenberg_factor_at(y, (1, 0, 0)) == 1
    assert fibre_bits({(0, e): 1, (1, e): 1}, e) == 0
    with pytest.raises(ValueError):
        shift_bits(y, (0, e), "sideways")


def test_local_ball_seeds_are_all_the_rule_reads():
    host = cball("c2*c3", 4)
    rule = triangle_orientation()
    seeds = draw_seeds(host, 2).values
    loc = local_ball(host, 0, rule.radius)
    outside = [v for v in range(host.n) if v not in set(loc.host_ids)]
    poked = seeds.copy()
    poked[outside] = 1 - poked[outside]
    assert evaluate_at(host, rule, seeds, 0) == evaluate_at(host, rule, poked, 0)
