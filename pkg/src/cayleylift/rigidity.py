"""Finite evidence about ``Aut_e(G)``: extendable automorphisms and friends."""

from __future__ import annotations

from typing import Optional

from .balls import Ball, BallMap, ball, local_ball
from .groups import MarkedGroup
from .search import SearchBudget, ball_isomorphic, isomorphisms

__all__ = [
    "extendable_automorphisms",
    "extendable_table",
    "ball_components",
    "component_swap_split",
    "fiber_edge_subgraph",
    "same_depth_neighbourhoods_isomorphic",
]


def extendable_automorphisms(G: MarkedGroup, n: int, k: int = 2, *, use_height: bool = False,
                             big: Optional[Ball] = None,
                             budget: Optional[SearchBudget] = None) -> list:
    """Automorphisms of ``B_n(e)`` that are restrictions of root-fixing
    automorphisms of ``B_{n+k}(e)``.

    ``B_n`` is the prefix of ``B_{n+k}`` in the shared BFS order, so the
    restriction is just the first ``|B_n|`` entries of the vertex map.
    """
    if n < 0 or k < 0:
        raise ValueError("radius and margin must be non-negative")
    small = ball(G, n)
    if big is None:
        big = ball(G, n + k)
    if use_height and big.height is None:
        raise ValueError("use_height needs a height attribute")
    out = [BallMap(small, small, tuple(m))
           for m in isomorphisms(big, big, root_to_root=True, use_height=use_height,
                                 prefix=small.n, budget=budget)]
    return out


def extendable_table(G: MarkedGroup, ns, ks) -> list:
    """Rows ``{"n", "k", "count"}`` for every pair in ``ns x ks``."""
    rows = []
    for n in ns:
        for k in ks:
            rows.append({"n": n, "k": k, "count": len(extendable_automorphisms(G, n, k))})
    return rows


def ball_components(b: Ball, vertices) -> list:
    """Connected components of the subgraph induced on ``vertices`` (sorted lists)."""
    vs = set(vertices)
    seen = set()
    comps = []
    for s in sorted(vs):
        if s in seen:
            continue
        comp = [s]
        seen.add(s)
        i = 0
        while i < len(comp):
            u = comp[i]
            i += 1
            for w in b.adj[u]:
                if w in vs and w not in seen:
                    seen.add(w)
                    comp.append(w)
        comps.append(sorted(comp))
    return comps


def component_swap_split(b: Ball, maps) -> dict:
    """Split root-fixing maps of ``b`` by whether they swap the components
    of ``B_2(root) minus root``.

    Returns counts ``{"preserving", "swapping", "components"}``.
    """
    punctured = [v for v in range(b.n) if 1 <= b.depth[v] <= 2]
    comps = ball_components(b, punctured)
    if len(comps) != 2:
        raise ValueError(f"punctured 2-ball has {len(comps)} components, expected 2")
    first = set(comps[0])
    keep = swap = 0
    for f in maps:
        images = {f(v) for v in comps[0]}
        if images == first:
            keep += 1
        elif images == set(comps[1]):
            swap += 1
        else:
            raise ValueError("map does not permute the two components")
    return {"preserving": keep, "swapping": swap, "components": [len(c) for c in comps]}


def fiber_edge_subgraph(G: MarkedGroup) -> dict:
    """Induced subgraph on two adjacent C2-fibres of ``heis-c2``.

    The fibre of ``m`` is ``{(0, m), (1, m)}``. Returns the number of edges
    inside the four vertices and whether fibre partners are adjacent; with the
    generating set ``C2 x (F u F^-1)`` this is ``K_{2,2}`` (4 edges), not ``K_4``.
    """
    _, m = G.gens[0][1]
    H = G.group.right
    verts = [(0, H.identity()), (1, H.identity()), (0, m), (1, m)]
    elems = set(G.element_of.values())
    count = 0
    for i in range(4):
        for j in range(i + 1, 4):
            if G.mul(G.inv(verts[i]), verts[j]) in elems:
                count += 1
    partners = G.mul(G.inv(verts[0]), verts[1]) in elems
    return {"edges": count, "fibre_partners_adjacent": partners,
            "shape": "K4" if count == 6 else ("K2,2" if count == 4 else f"{count} edges")}


def same_depth_neighbourhoods_isomorphic(b: Ball, u: int, v: int) -> bool:
    """Whether the induced unit balls around ``u`` and ``v`` inside ``b`` agree."""
    return ball_isomorphic(local_ball(b, u, 1), local_ball(b, v, 1)) is not None
