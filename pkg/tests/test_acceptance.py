"""The fourteen acceptance criteria, each at its stated size and time budget.

Every test prints one ``PASS``/``FAIL`` line; the lines are repeated in the
terminal summary. Wall-clock budgets are asserted alongside correctness.
"""

import io
import itertools
import time
from contextlib import contextmanager

import numpy as np
import pytest

from cayleylift.balls import ball, diestel_leader_ball
from cayleylift.cli import main as cli_main
from cayleylift.coloring import augmenting_3coloring, full_orbit_colorings, parity_analysis
from cayleylift.constraints import (Labelling, decode_vertices, edge_to_vertex_coding,
                                    encode_edges, meets_at, orientation, perfect_matching,
                                    proper_coloring)
from cayleylift.diagrams import Diagram, cayley_constraint, enumerate_diagrams, holonomy
from cayleylift.fiid import draw_seeds, invariance_check, simulate
from cayleylift.groups import canonical, multiply
from cayleylift.lifting import holonomy_identity_test, lift_rule
from cayleylift.rigidity import component_swap_split, extendable_automorphisms
from cayleylift.rules import (edge_echo, greedy_color, heisenberg_diagram, heisenberg_factor,
                              heisenberg_factor_at, lamplighter_order_diagram, shift_bits,
                              shift_swaps, triangle_orientation)
from cayleylift.search import ball_automorphisms, ball_isomorphic
from conftest import ACCEPTANCE_LINES, EXTRA, ROSTER, group
from oracles import count_triangles, naive_ball
from rulekit import aware, diagram_region_failure, label_threshold, noisy_triangles


@contextmanager
def criterion(num, title, budget):
    """Time the block; report PASS only if its checks hold within ``budget`` seconds."""
    notes = []
    t0 = time.perf_counter()
    ok = False
    try:
        yield notes
        ok = True
    finally:
        dt = time.perf_counter() - t0
        in_time = dt < budget
        verdict = "PASS" if ok and in_time else "FAIL"
        extra = f" [{'; '.join(notes)}]" if notes else ""
        why = "" if in_time or not ok else " (over budget)"
        line = f"{verdict} criterion {num}: {title} ({dt:.1f}s / {budget}s){why}{extra}"
        print(line)
        ACCEPTANCE_LINES.append(line)
    assert in_time, f"criterion {num} took {dt:.1f}s, budget {budget}s"


def test_c01_group_axioms():
    names = ROSTER + EXTRA
    with criterion(1, f"group axioms on {len(names)} groups", 10) as notes:
        assert len(names) >= 9
        for name in names:
            G = group(name)
            rng = np.random.default_rng(101)
            H, e = G.group, G.identity()
            mul, inv = G.mul, G.inv
            for _ in range(10_000):
                x, y, z = H.random_element(rng), H.random_element(rng), H.random_element(rng)
                assert mul(mul(x, y), z) == mul(x, mul(y, z))
                assert mul(x, e) == x == mul(e, x)
                assert mul(x, inv(x)) == e
            labs = G.labels
            for _ in range(300):
                u = [labs[i] for i in rng.integers(0, len(labs), rng.integers(0, 13))]
                v = [labs[i] for i in rng.integers(0, len(labs), rng.integers(0, 13))]
                assert canonical(G, u + v) == multiply(G, canonical(G, u), canonical(G, v))
        notes.append("10^4 triples and 300 word pairs per group")


def test_c02_ball_counts():
    cases = [(n, r) for n in ("c2*c3", "gamma", "delta", "lamplighter-DL", "dinf-grr")
             for r in range(5)] + [("heis-c2", r) for r in range(3)]
    with criterion(2, "ball counts against word enumeration", 60) as notes:
        for name, r in cases:
            G = group(name)
            verts, edges = naive_ball(G, r)
            b = ball(G, r)
            assert set(b.elements) == verts and b.num_edges == edges, (name, r)
        notes.append(f"{len(cases)} (group, n) pairs")


def test_c03_isomorphisms():
    with criterion(3, "B_3(gamma) ~ B_3(delta), B_2(lamplighter-DL) ~ DL(2)", 60):
        assert ball_isomorphic(ball(group("gamma"), 3), ball(group("delta"), 3)) is not None
        dl = diestel_leader_ball(2)
        assert ball_isomorphic(ball(group("lamplighter-DL"), 2), dl) is not None


def test_c04_grr_evidence():
    with criterion(4, "extendable automorphism counts", 120) as notes:
        for name in ("dinf-grr", "f2-grr"):
            for n in (1, 2):
                c = len(extendable_automorphisms(group(name), n, 2))
                notes.append(f"{name}({n},2)={c}")
                assert c == 1
        for name in ("c2*c3", "heis-c2"):
            c = len(extendable_automorphisms(group(name), 1, 2))
            notes.append(f"{name}(1,2)={c}")
            assert c > 1


@pytest.mark.slow
def test_c05_lamplighter_split():
    with criterion(5, "lamplighter-DL (3,2) component-swap split", 120) as notes:
        G = group("lamplighter-DL")
        maps = extendable_automorphisms(G, 3, 2)
        split = component_swap_split(ball(G, 3), maps)
        notes.append(f"{len(maps)} maps: {split['preserving']} keep, {split['swapping']} swap")
        assert split["preserving"] == split["swapping"] == len(maps) // 2 > 0


def test_c06_triangle_diagrams():
    with criterion(6, "c2*c3 diagrams on B_2 = 2^triangles", 30) as notes:
        b = ball(group("c2*c3"), 2)
        t = count_triangles(b.adj)
        got = len(enumerate_diagrams(b, 3))
        notes.append(f"{got} diagrams, {t} triangles")
        assert got == 2 ** t


@pytest.mark.slow
def test_c07_builtin_diagram_rules():
    cases = [(triangle_orientation(), "c2*c3", 3), (heisenberg_diagram(), "heis-c2", 4),
             (lamplighter_order_diagram(), "lamplighter-DL", 4)]
    with criterion(7, "diagram rules: phi_2 500/500 and invariance 10^3", 300) as notes:
        for rule, name, R in cases:
            G = group(name)
            rep = simulate(G, rule, R, cayley_constraint(G, 2), 500, 7)
            inv = invariance_check(rule, ball(G, rule.radius), 1000, 7)
            notes.append(f"{rule.name}: {rep.samples - rep.failures}/500, "
                         f"{inv.trials} trials")
            assert rep.failures == 0 and rep.samples == 500
            assert inv.ok and inv.trials == 1000


def _field(rng):
    k = int(rng.integers(0, 12))
    return {(int(rng.integers(0, 2)), tuple(int(c) for c in rng.integers(-3, 4, 3))): 1
            for _ in range(k)}


def test_c08_heisenberg_factor():
    with criterion(8, "Heisenberg factor: homomorphism and equivariance on 10^3", 10):
        rng = np.random.default_rng(8)
        for _ in range(1000):
            y1, y2 = _field(rng), _field(rng)
            window = [tuple(int(c) for c in rng.integers(-4, 5, 3)) for _ in range(6)]
            xor = {k: 1 for k in set(y1) ^ set(y2)}
            F1, F2, F = (heisenberg_factor(y, window) for y in (y1, y2, xor))
            assert all(F[m] == (F1[m] + F2[m]) % 2 for m in window)
            ell = tuple(int(c) for c in rng.integers(-3, 4, 3))
            g = (int(rng.integers(0, 2)), ell)
            rhs = shift_swaps(lambda m: heisenberg_factor_at(y1, m), ell)
            moved = shift_bits(y1, g)
            assert all(heisenberg_factor_at(moved, m) == rhs(m) for m in window)


def test_c09_holonomy_identities():
    with criterion(9, "holonomy identities on 10^3 instances per host", 30) as notes:
        b = ball(group("c2*c3"), 3)
        ds = enumerate_diagrams(b, 3)
        autos = ball_automorphisms(b, True)
        per = -(-1000 // len(ds))
        total = 0
        for k, d in enumerate(ds):
            rep = holonomy_identity_test(b, d, per, seed=k, autos=autos)
            assert rep.ok
            total += rep.trials
        G = group("gamma")
        g2 = ball(G, 2)
        autos = ball_automorphisms(g2, True)
        gd = []
        for f in autos[:20]:
            inv = f.inverse().vertex_map
            lab = {(u, v): G.label_of[G.mul(G.inv(g2.elements[inv[u]]), g2.elements[inv[v]])]
                   for u, v in g2.edges()}
            d = Diagram(g2, lab, G)
            assert holonomy(d).consistent
            gd.append(d)
        gtotal = 0
        for k, d in enumerate(gd):
            rep = holonomy_identity_test(g2, d, 50, seed=k, autos=autos)
            assert rep.ok
            gtotal += rep.trials
        notes.append(f"c2*c3: {len(ds)} diagrams, {total} trials; gamma: {len(gd)} diagrams, "
                     f"{gtotal} trials")
        assert total >= 1000 and gtotal >= 1000


@pytest.mark.slow
def test_c10_lifting():
    G = group("c2*c3")
    with criterion(10, "lifting: phi_3 500/500, invariance, defect inequality", 300) as notes:
        lifted = lift_rule(triangle_orientation(), edge_echo(G), G)
        rep = simulate(G, lifted, lifted.radius + 3, cayley_constraint(G, 3), 500, 10)
        assert rep.failures == 0 and rep.samples == 500
        b = ball(G, 3)
        for gr in (edge_echo(G), label_threshold("b")):
            inv = invariance_check(lift_rule(triangle_orientation(), gr, G), b, 1000, 10)
            assert inv.ok and inv.trials == 1000
        H = group("heis-c2")
        inv = invariance_check(lift_rule(heisenberg_diagram(), label_threshold("0.A"), H),
                               ball(H, 3), 100, 10)
        assert inv.ok
        dr, gr = noisy_triangles(0.002), aware(greedy_color(4, radius=5))
        noisy = lift_rule(dr, gr, G)
        c = proper_coloring(4)
        p_lift = float(simulate(G, noisy, noisy.radius + 1, c, 1000, 11).estimate)
        p_dr = diagram_region_failure(G, dr, gr.radius + c.radius, 3, 1000, 12)
        p_gr = float(simulate(G, gr, gr.radius + 1, c, 1000, 13).estimate)
        notes.append(f"lifted {p_lift:.3f} <= {p_dr:.3f} + {p_gr:.3f} + 0.02")
        assert p_dr + p_gr < 1
        assert p_lift <= p_dr + p_gr + 0.02


@pytest.mark.slow
def test_c11_augmenting_coloring():
    with criterion(11, "gamma augmenting 3-colouring, 100 samples on B_7, N=5", 600) as notes:
        b = ball(group("gamma"), 7)
        finals = []
        for s in range(100):
            r = augmenting_3coloring(b, draw_seeds(b, 11, 1, s), 5)
            assert r.non_increasing(), s
            assert r.certificate["proper"], s
            finals.append(float(r.missed_fraction[-1]))
        mean = sum(finals) / len(finals)
        notes.append(f"mean final {mean:.4f}, max {max(finals):.4f}")
        assert mean < 0.05


def test_c12_delta_parity():
    with criterion(12, "delta parity over all full-orbit colourings of B_2", 600) as notes:
        b = ball(group("delta"), 2)
        count = 0
        for f in full_orbit_colorings(b):
            rep = parity_analysis(b, f)
            assert rep.values_ok and rep.constant_ok and rep.alternating_ok
            count += 1
        notes.append(f"{count} colourings")
        assert count > 0


def test_c13_coding_round_trip():
    G = group("c2*c3")
    with criterion(13, "edge/vertex coding on B_2(c2*c3), binary alphabet", 60) as notes:
        host = ball(G, 2)
        edges = [(u, v) for u, v in host.edges() if u < v]
        inner = host.interior(1)
        coded = {c.name: edge_to_vertex_coding(c, G) for c in (orientation(), perfect_matching())}
        checked = 0
        for bits in itertools.product((0, 1), repeat=2 * len(edges)):
            f = {}
            for (u, v), a, b in zip(edges, bits[::2], bits[1::2]):
                f[(u, v)], f[(v, u)] = a, b
            g = encode_edges(host, Labelling(2, (0, 1), f), G)
            back = decode_vertices(host, g, G)
            assert back == f
            again = encode_edges(host, Labelling(2, (0, 1), back), G)
            assert all(again[v] == g[v] for v in inner)
            for c in (orientation(), perfect_matching()):
                assert meets_at(host, f, 0, c) == meets_at(host, g, 0, coded[c.name])
            checked += 1
        notes.append(f"{checked} edge labellings")


def _cli(argv):
    buf = io.StringIO()
    code = cli_main(argv, stdout=buf)
    return code, buf.getvalue()


def test_c14_cli_reproducible():
    runs = [
        ["simulate", "--group", "preset:c2*c3", "--rule", "triangle-orientation",
         "--constraint", "cayley:3", "--R", "4", "--samples", "100", "--seed", "7"],
        ["simulate", "--group", "preset:gamma", "--rule", "greedy-color(6)",
         "--constraint", "proper-coloring:6", "--R", "5", "--samples", "50", "--seed", "3"],
        ["lift", "--group", "preset:c2*c3", "--diagram-rule", "triangle-orientation",
         "--gamma-rule", "edge-echo", "--constraint", "cayley:3", "--R", "5",
         "--samples", "40", "--seed", "2"],
        ["color-augment", "--n", "5", "--rounds", "3", "--samples", "5", "--seed", "9",
         "--format", "csv"],
        ["diagrams", "enumerate", "--group", "preset:c2*c3", "--n", "3", "--i", "3"],
        ["grr", "--group", "preset:dinf-grr", "--n", "1", "2", "--k", "2"],
    ]
    with criterion(14, "CLI reruns are byte-identical", 10) as notes:
        for argv in runs:
            first, second = _cli(argv), _cli(argv)
            assert first[0] == 0 and first == second, argv[0]
        notes.append(f"{len(runs)} invocations")
