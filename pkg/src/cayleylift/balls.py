"""Cayley-graph balls, the Diestel--Leader ball, and their exports."""

from __future__ import annotations

import json
import os
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional

import numpy as np

from .groups import MarkedGroup

__all__ = [
    "ResourceCapExceeded",
    "Ball",
    "BallMap",
    "default_max_vertices",
    "ball",
    "local_ball",
    "diestel_leader_ball",
    "ball_to_json",
    "ball_to_dot",
    "triangles",
]

ENV_MAX_VERTICES = "CAYLEYLIFT_MAX_VERTICES"


class ResourceCapExceeded(RuntimeError):
    """A ball or search outgrew its configured budget."""


def default_max_vertices() -> int:
    return int(os.environ.get(ENV_MAX_VERTICES, 200_000))


@dataclass(eq=False)
class Ball:
    """Rooted finite graph; vertex 0 is the root.

    ``elements`` and ``edge_gen`` are present for balls cut out of a Cayley
    graph and ``None``/empty otherwise. ``height`` optionally carries an
    integer vertex attribute that structure-aware searches respect.
    """

    adj: list
    depth: list
    radius: int
    elements: Optional[list] = None
    edge_gen: dict = field(default_factory=dict)
    group: Optional[MarkedGroup] = None
    height: Optional[list] = None
    host_ids: Optional[tuple] = None
    root: int = 0

    def __post_init__(self):
        self._local: dict = {}

    @property
    def n(self) -> int:
        return len(self.adj)

    def __len__(self) -> int:
        return len(self.adj)

    @cached_property
    def index(self) -> dict:
        return {x: i for i, x in enumerate(self.elements or ())}

    @cached_property
    def adjsets(self) -> list:
        return [frozenset(a) for a in self.adj]

    @cached_property
    def csr(self) -> tuple:
        indptr = np.zeros(self.n + 1, dtype=np.int64)
        indptr[1:] = np.cumsum([len(a) for a in self.adj])
        indices = np.fromiter((v for a in self.adj for v in a), dtype=np.int64,
                              count=int(indptr[-1]))
        return indptr, indices

    def edges(self):
        """Ordered edges ``(u, v)`` in vertex order."""
        for u, nb in enumerate(self.adj):
            for v in nb:
                yield (u, v)

    @cached_property
    def num_edges(self) -> int:
        return sum(len(a) for a in self.adj) // 2

    def interior(self, r: int) -> list:
        """Vertices whose radius-``r`` ball lies inside this ball."""
        return [v for v, d in enumerate(self.depth) if d <= self.radius - r]

    def label(self, u: int, v: int):
        return self.edge_gen[(u, v)]


@dataclass(frozen=True)
class BallMap:
    source: Ball
    target: Ball
    vertex_map: tuple

    def __call__(self, v: int) -> int:
        return self.vertex_map[v]

    def inverse(self) -> "BallMap":
        inv = [0] * len(self.vertex_map)
        for i, j in enumerate(self.vertex_map):
            inv[j] = i
        return BallMap(self.target, self.source, tuple(inv))

    def compose(self, other: "BallMap") -> "BallMap":
        """``self o other`` (apply ``other`` first)."""
        return BallMap(other.source, self.target, tuple(self.vertex_map[j] for j in other.vertex_map))

    def is_isomorphism(self) -> bool:
        a, b, m = self.source, self.target, self.vertex_map
        if a.n != b.n or len(set(m)) != a.n or a.num_edges != b.num_edges:
            return False
        bs = b.adjsets
        return all(m[v] in bs[m[u]] for u, v in a.edges())


def ball(G: MarkedGroup, n: int, max_vertices: Optional[int] = None) -> Ball:
    """Induced ball ``B_n(e)`` of ``Cay(G)`` by BFS over canonical forms.

    Vertices are ordered by BFS layer, then by generator order, so the
    first ``|B_m|`` vertices of ``ball(G, n)`` are exactly ``ball(G, m)``.
    """
    if n < 0:
        raise ValueError("radius must be non-negative")
    cap = default_max_vertices() if max_vertices is None else max_vertices
    e = G.identity()
    elements = [e]
    index = {e: 0}
    depth = [0]
    frontier = [0]
    for d in range(1, n + 1):
        nxt = []
        for u in frontier:
            x = elements[u]
            for lab, g in G.gens:
                y = G.mul(x, g)
                if y not in index:
                    index[y] = len(elements)
                    elements.append(y)
                    depth.append(d)
                    nxt.append(index[y])
                    if len(elements) > cap:
                        raise ResourceCapExceeded(
                            f"ball of radius {n} in {G.name} exceeds {cap} vertices")
        frontier = nxt
    adj = []
    edge_gen = {}
    for u, x in enumerate(elements):
        nb = []
        for lab, g in G.gens:
            v = index.get(G.mul(x, g))
            if v is not None:
                nb.append(v)
                edge_gen[(u, v)] = lab
        adj.append(tuple(sorted(nb)))
    height = [G.height_fn(x) for x in elements] if G.height_fn is not None else None
    b = Ball(adj=adj, depth=depth, radius=n, elements=elements, edge_gen=edge_gen, group=G,
             height=height)
    b.__dict__["index"] = index
    return b


def _bfs(adj, start: int, r: int):
    dist = {start: 0}
    order = [start]
    q = deque([start])
    while q:
        u = q.popleft()
        if dist[u] == r:
            continue
        for v in adj[u]:
            if v not in dist:
                dist[v] = dist[u] + 1
                order.append(v)
                q.append(v)
    return order, dist


def local_ball(host: Ball, x: int, r: int) -> Ball:
    """The induced ball of radius ``r`` around ``x``, renumbered with ``x`` as root.

    Local ids follow BFS from ``x`` with neighbours in host order; the
    ``host_ids`` tuple maps local ids back. Results are cached on ``host``.
    """
    key = (x, r)
    hit = host._local.get(key)
    if hit is not None:
        return hit
    order, dist = _bfs(host.adj, x, r)
    loc = {v: i for i, v in enumerate(order)}
    adj = [tuple(sorted(loc[w] for w in host.adj[v] if w in loc)) for v in order]
    edge_gen = {}
    if host.edge_gen:
        for v in order:
            lv = loc[v]
            for w in host.adj[v]:
                lw = loc.get(w)
                if lw is not None:
                    edge_gen[(lv, lw)] = host.edge_gen[(v, w)]
    b = Ball(
        adj=adj,
        depth=[dist[v] for v in order],
        radius=r,
        elements=[host.elements[v] for v in order] if host.elements is not None else None,
        edge_gen=edge_gen,
        group=host.group,
        height=[host.height[v] for v in order] if host.height is not None else None,
        host_ids=tuple(order),
    )
    host._local[key] = b
    return b


# ---------------------------------------------------------------------------
# Diestel--Leader graph from two height-graded 3-regular trees


def _tree_up(v, bit):
    d, bits = v
    if d > 0 and not bits and bit == 0:
        return (d - 1, ())
    return (d, bits + (bit,))


def _tree_down(v):
    d, bits = v
    return (d, bits[:-1]) if bits else (d + 1, ())


def _tree_height(v) -> int:
    d, bits = v
    return len(bits) - d


def diestel_leader_ball(n: int) -> Ball:
    """Radius-``n`` ball of the Diestel--Leader graph ``DL(2, 2)``.

    A tree vertex is ``(d, bits)``: walk ``d`` steps down from the base then
    up along ``bits``; each vertex has one neighbour below and two above.
    Graph vertices are pairs ``(v, w)`` with ``h(v) + h(w) = 0``; an edge
    moves one coordinate up and the other down. ``height`` records ``h(v)``.
    """
    if n < 0:
        raise ValueError("radius must be non-negative")
    base = ((0, ()), (0, ()))

    def nbrs(p):
        v, w = p
        out = [(_tree_up(v, b), _tree_down(w)) for b in (0, 1)]
        out += [(_tree_down(v), _tree_up(w, b)) for b in (0, 1)]
        return out

    verts = [base]
    index = {base: 0}
    depth = [0]
    frontier = [base]
    for d in range(1, n + 1):
        nxt = []
        for p in frontier:
            for q in nbrs(p):
                if q not in index:
                    index[q] = len(verts)
                    verts.append(q)
                    depth.append(d)
                    nxt.append(q)
        frontier = nxt
    adj = [tuple(sorted(index[q] for q in nbrs(p) if q in index)) for p in verts]
    b = Ball(adj=adj, depth=depth, radius=n, height=[_tree_height(p[0]) for p in verts])
    b.dl_vertices = verts
    return b


# ---------------------------------------------------------------------------
# helpers and exports


def triangles(b: Ball) -> list:
    """All 3-cliques ``(u, v, w)`` with ``u < v < w``."""
    out = []
    S = b.adjsets
    for u in range(b.n):
        for v in b.adj[u]:
            if v <= u:
                continue
            for w in b.adj[v]:
                if w > v and w in S[u]:
                    out.append((u, v, w))
    return out


def _word(b: Ball, v: int) -> str:
    """A geodesic label word from the root to ``v`` (via BFS parents)."""
    if not b.edge_gen:
        return ""
    word = []
    while v != b.root:
        u = min(w for w in b.adj[v] if b.depth[w] == b.depth[v] - 1)
        word.append(b.edge_gen[(u, v)])
        v = u
    return " ".join(reversed(word))


def ball_to_json(b: Ball) -> str:
    doc = {
        "root": b.root,
        "radius": b.radius,
        "vertices": [{"id": v, "word": _word(b, v)} for v in range(b.n)],
        "edges": [{"u": u, "v": v, "label": b.edge_gen.get((u, v))}
                  for u, v in b.edges() if u < v],
    }
    return json.dumps(doc, sort_keys=True)


def ball_to_dot(b: Ball) -> str:
    lines = ["graph ball {"]
    for v in range(b.n):
        lines.append(f'  {v} [label="{v}", depth={b.depth[v]}];')
    for u, v in b.edges():
        if u < v:
            lab = b.edge_gen.get((u, v))
            attr = f' [label="{lab}"]' if lab is not None else ""
            lines.append(f"  {u} -- {v}{attr};")
    lines.append("}")
    return "\n".join(lines) + "\n"
