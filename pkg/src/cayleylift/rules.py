"""Concrete local rules and the Heisenberg fibre-swap factor."""

from __future__ import annotations

from functools import lru_cache
from typing import Iterable, Optional

import numpy as np

from .balls import Ball, ball
from .fiid import AWARE, OBLIVIOUS, LocalRule, RuleFailure
from .groups import DirectProduct, Cyclic, Heisenberg, MarkedGroup, make_group
from .search import refine

__all__ = [
    "constant_rule",
    "greedy_color",
    "edge_echo",
    "standard_diagram_rule",
    "triangle_orientation",
    "heisenberg_diagram",
    "heisenberg_swap_diagram",
    "lamplighter_order_diagram",
    "rule_by_name",
    "RULE_NAMES",
    "heisenberg_factor",
    "heisenberg_factor_at",
    "shift_bits",
    "shift_swaps",
    "fibre_bits",
]


def _argmin(seeds: np.ndarray, vs: Iterable[int]) -> int:
    vs = list(vs)
    vals = [seeds[v, 0] for v in vs]
    lo = min(vals)
    if vals.count(lo) > 1:
        raise RuleFailure("seed tie")
    return vs[vals.index(lo)]


# ---------------------------------------------------------------------------
# generic rules


def constant_rule(label, alphabet: Optional[tuple] = None, arity: int = 1) -> LocalRule:
    alphabet = tuple(alphabet) if alphabet is not None else (label,)

    def evaluate(b, seeds, labels, info):
        if arity == 1:
            return label
        return {w: label for w in b.adj[0]}

    return LocalRule(f"constant({label})", 0 if arity == 1 else 1, OBLIVIOUS, arity,
                     alphabet, evaluate)


def greedy_color(k: int, radius: int = 4) -> LocalRule:
    """Colour = least colour unused by lower-seed neighbours, computed
    recursively down decreasing-seed paths; fails if a path reaches the
    boundary of the ball or the colour would exceed ``k - 1``."""
    if k < 1 or radius < 1:
        raise ValueError("need k >= 1 and radius >= 1")

    def evaluate(b, seeds, labels, info):
        s = seeds[:, 0]
        memo: dict = {}

        def colour(v):
            if v in memo:
                return memo[v]
            if b.depth[v] >= b.radius:
                raise RuleFailure("decreasing-seed path reaches the boundary")
            used = set()
            for u in b.adj[v]:
                if s[u] == s[v]:
                    raise RuleFailure("seed tie")
                if s[u] < s[v]:
                    used.add(colour(u))
            c = 0
            while c in used:
                c += 1
            memo[v] = c
            return c

        c = colour(0)
        if c >= k:
            raise RuleFailure(f"greedy needs colour {c}")
        return c

    return LocalRule(f"greedy-color({k})", radius, OBLIVIOUS, 1, tuple(range(k)), evaluate,
                     params={"k": k})


def edge_echo(G: MarkedGroup) -> LocalRule:
    """Diagram-aware: label each out-edge of the root by its diagram label."""

    def evaluate(b, seeds, labels, info):
        return {w: labels[(0, w)] for w in b.adj[0]}

    return LocalRule("edge-echo", 1, AWARE, 2, tuple(G.labels), evaluate)


def standard_diagram_rule(G: MarkedGroup) -> LocalRule:
    """The standard diagram itself, read from generator labels (a test oracle)."""

    def evaluate(b, seeds, labels, info):
        return {w: b.edge_gen[(0, w)] for w in b.adj[0]}

    return LocalRule("standard-diagram", 1, AWARE, 2, tuple(G.labels), evaluate)


# ---------------------------------------------------------------------------
# C2 * C3: orient every triangle


def triangle_orientation(G: Optional[MarkedGroup] = None) -> LocalRule:
    """The unique triangle through the root is oriented from its minimum-seed
    vertex toward that vertex's smaller-seed triangle neighbour; edges along
    the orientation are ``b``, against it ``b^-1``; the other edge is ``a``."""
    G = G or make_group("preset:c2*c3")
    a, b_, binv = "a", "b", "b^-1"
    if not {a, b_, binv} <= set(G.labels):
        raise ValueError("triangle orientation needs the c2*c3 labels a, b, b^-1")

    def analyze(b):
        nb = b.adj[0]
        if len(nb) != 3:
            raise RuleFailure("root degree is not 3")
        S = b.adjsets
        tri = [(y, z) for y in nb for z in nb if y < z and z in S[y]]
        if len(tri) != 1:
            raise RuleFailure("root is not on exactly one triangle")
        y, z = tri[0]
        other = [w for w in nb if w not in (y, z)][0]
        return (y, z, other)

    def evaluate(b, seeds, labels, info):
        y, z, other = info
        T = (0, y, z)
        m = _argmin(seeds, T)
        rest = [v for v in T if v != m]
        n = _argmin(seeds, rest)
        o = [v for v in rest if v != n][0]
        forward = {(m, n), (n, o), (o, m)}
        return {y: b_ if (0, y) in forward else binv,
                z: b_ if (0, z) in forward else binv,
                other: a}

    return LocalRule("triangle-orientation", 1, OBLIVIOUS, 2, tuple(G.labels), evaluate,
                     analyze)


# ---------------------------------------------------------------------------
# C2 x H3: choose a representative in every twin fibre


def _root_colours(b: Ball) -> np.ndarray:
    c = np.zeros(b.n, dtype=np.int64)
    c[0] = 1
    ip, ix = b.csr
    return refine(c, ip, ix)


@lru_cache(maxsize=None)
def _heis_reference() -> tuple:
    """Colour of each root neighbour in the refined standard ``B_2`` mapped
    to its quotient generator, plus the full colour histogram."""
    G = make_group("preset:heis-c2")
    ref = ball(G, 2)
    col = _root_colours(ref)
    table = {}
    for w in ref.adj[0]:
        q = ref.edge_gen[(0, w)].split(".", 1)[1]
        if table.setdefault(int(col[w]), q) != q:
            raise AssertionError("reference colours do not separate generator types")
    return table, tuple(np.bincount(col).tolist())


def heisenberg_diagram() -> LocalRule:
    """Each fibre ``{(0, m), (1, m)}`` is recognised as a twin pair; its
    smaller-seed member plays ``0``. The quotient generator of an edge is
    read off from colour refinement of the unlabelled radius-2 ball."""
    G = make_group("preset:heis-c2")

    def analyze(b):
        if b.radius < 2:
            raise RuleFailure("needs a radius-2 ball")
        table, hist = _heis_reference()
        col = _root_colours(b)
        if tuple(np.bincount(col).tolist()) != hist:
            raise RuleFailure("ball does not look like the heis-c2 ball")
        S = b.adjsets
        twins = [t for t in range(1, b.n) if S[t] == S[0]]
        if len(twins) != 1:
            raise RuleFailure("root fibre is ambiguous")
        groups: dict = {}
        for w in b.adj[0]:
            groups.setdefault(int(col[w]), []).append(w)
        pairs = []
        for c, ws in groups.items():
            if len(ws) != 2 or c not in table or S[ws[0]] != S[ws[1]]:
                raise RuleFailure("neighbour fibres are ambiguous")
            pairs.append((ws[0], ws[1], table[c]))
        return twins[0], pairs

    def evaluate(b, seeds, labels, info):
        twin, pairs = info
        s = seeds[:, 0]

        def side(v, p):
            if s[v] == s[p]:
                raise RuleFailure("seed tie")
            return 0 if s[v] < s[p] else 1

        me = side(0, twin)
        out = {}
        for w, p, q in pairs:
            out[w] = f"{(side(w, p) - me) % 2}.{q}"
            out[p] = f"{(side(p, w) - me) % 2}.{q}"
        return out

    return LocalRule("heisenberg-diagram", 2, OBLIVIOUS, 2, tuple(G.labels), evaluate, analyze)


def heisenberg_swap_diagram() -> LocalRule:
    """Diagram-aware: threshold seeds to bits ``y = [seed >= 1/2]`` and move
    vertex ``(a, m)`` to ``(a + F(y)(m), m)``. The constant term of ``F``
    cancels along every edge, so the label of ``(u, w)`` only needs the fibre
    sums at ``u`` and ``w``."""
    G = make_group("preset:heis-c2")

    def analyze(b):
        S = b.adjsets
        twins = [t for t in range(1, b.n) if S[t] == S[0]]
        if b.radius < 2 or len(twins) != 1:
            raise RuleFailure("root fibre not visible")
        return twins[0]

    def evaluate(b, seeds, labels, info):
        y = (seeds[:, 0] >= 0.5).astype(int)
        parts = {w: labels[(0, w)].split(".", 1) for w in b.adj[0]}
        by_q: dict = {}
        for w, (_, q) in parts.items():
            by_q.setdefault(q, []).append(w)
        Y0 = y[0] + y[info]
        out = {}
        for w, (a, q) in parts.items():
            p = [v for v in by_q[q] if v != w][0]
            out[w] = f"{(int(a) + Y0 + y[w] + y[p]) % 2}.{q}"
        return out

    return LocalRule("heisenberg-swap-diagram", 2, AWARE, 2, tuple(G.labels), evaluate, analyze)


# the factor F and the two shift conventions

_C2H = DirectProduct(Cyclic(2), Heisenberg())
_H = Heisenberg()


def fibre_bits(y: dict, m) -> int:
    return (y.get((0, m), 0) + y.get((1, m), 0)) % 2


def heisenberg_factor_at(y: dict, m) -> int:
    """``F(y)(m)`` for a finitely supported bit field ``y`` on ``C2 x H3``."""
    return (fibre_bits(y, m) + fibre_bits(y, _H.identity())) % 2


def heisenberg_factor(y: dict, window: Iterable) -> dict:
    return {m: heisenberg_factor_at(y, m) for m in window}


def shift_bits(y: dict, g, convention: str = "displayed") -> dict:
    """Shift a finitely supported field by ``g = (b, l)``.

    ``"left"``: ``(g.y)(v) = y(g^-1 v)``. ``"displayed"``: ``(g.y)(v) = y(g v)``,
    the convention under which the swap action reads ``x(l) + x(l m)``.
    """
    if convention == "left":
        return {_C2H.mul(g, v): bit for v, bit in y.items() if bit}
    if convention == "displayed":
        gi = _C2H.inv(g)
        return {_C2H.mul(gi, v): bit for v, bit in y.items() if bit}
    raise ValueError(f"unknown convention {convention!r}")


def shift_swaps(x, ell, convention: str = "displayed"):
    """The induced action on swap patterns, as a function ``m -> bit``.

    ``"displayed"``: ``x(l) + x(l m)``; ``"left"``: ``x(l^-1) + x(l^-1 m)``.
    """
    if convention == "left":
        ell = _H.inv(ell)
    elif convention != "displayed":
        raise ValueError(f"unknown convention {convention!r}")
    return lambda m: (x(ell) + x(_H.mul(ell, m))) % 2


# ---------------------------------------------------------------------------
# lamplighter with the Diestel--Leader generators


def lamplighter_order_diagram() -> LocalRule:
    """Every up-going ``K_{2,2}`` (two vertices of one height, their two
    common upper neighbours) gets one of its two perfect matchings labelled
    ``(1,{})``: the one through the edge joining the minimum-seed lower
    vertex to the minimum-seed upper vertex. The other matching is
    ``(1,{0})``; downward edges carry the paired labels. Reads heights."""
    G = make_group("preset:lamplighter-DL")
    UP0, UP1, DN0, DN1 = "(1,{})", "(1,{0})", "(-1,{})", "(-1,{-1})"

    def analyze(b):
        if b.height is None:
            raise RuleFailure("needs the height order")
        h = b.height
        h0 = h[0]
        S = b.adjsets
        up = [w for w in b.adj[0] if h[w] == h0 + 1]
        dn = [w for w in b.adj[0] if h[w] == h0 - 1]
        if len(up) != 2 or len(dn) != 2 or len(b.adj[0]) != 4:
            raise RuleFailure("root is not a Diestel--Leader vertex")
        low = [v for v in S[up[0]] & S[up[1]] if h[v] == h0]
        high = [v for v in S[dn[0]] & S[dn[1]] if h[v] == h0]
        if len(low) != 2 or len(high) != 2:
            raise RuleFailure("quadruple is cut by the boundary")
        sib_low = low[0] if low[1] == 0 else low[1]
        sib_high = high[0] if high[1] == 0 else high[1]
        return up, sib_low, dn, sib_high

    def evaluate(b, seeds, labels, info):
        up, sib_low, dn, sib_high = info
        out = {}
        lmin = _argmin(seeds, (0, sib_low))
        umin = _argmin(seeds, up)
        for u in up:
            out[u] = UP0 if (lmin == 0) == (u == umin) else UP1
        umin2 = _argmin(seeds, (0, sib_high))
        lmin2 = _argmin(seeds, dn)
        for d in dn:
            out[d] = DN0 if (umin2 == 0) == (d == lmin2) else DN1
        return out

    return LocalRule("lamplighter-order-diagram", 2, OBLIVIOUS, 2, tuple(G.labels), evaluate,
                     analyze, uses_height=True)


# ---------------------------------------------------------------------------

RULE_NAMES = ("triangle-orientation", "heisenberg-diagram", "heisenberg-swap-diagram",
              "lamplighter-order-diagram",
              "greedy-color(k)", "edge-echo", "standard-diagram", "constant(label)")


def rule_by_name(name: str, G: Optional[MarkedGroup] = None) -> LocalRule:
    if name == "triangle-orientation":
        return triangle_orientation()
    if name == "heisenberg-diagram":
        return heisenberg_diagram()
    if name == "heisenberg-swap-diagram":
        return heisenberg_swap_diagram()
    if name == "lamplighter-order-diagram":
        return lamplighter_order_diagram()
    if name.startswith("greedy-color(") and name.endswith(")"):
        return greedy_color(int(name[len("greedy-color("):-1]))
    if name.startswith("constant(") and name.endswith(")"):
        arg = name[len("constant("):-1]
        return constant_rule(int(arg) if arg.lstrip("-").isdigit() else arg)
    if name in ("edge-echo", "standard-diagram"):
        if G is None:
            raise ValueError(f"{name} needs a group")
        return edge_echo(G) if name == "edge-echo" else standard_diagram_rule(G)
    raise ValueError(f"unknown rule {name!r}")

