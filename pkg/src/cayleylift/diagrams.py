"""Cayley diagrams on balls: the constraint family, holonomy, enumeration, shifts."""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Optional, Sequence

from .balls import Ball, BallMap
from .constraints import CSP, Constraint, DefectReport, defect_set
from .groups import MarkedGroup
from .search import SearchBudget

__all__ = [
    "Diagram",
    "Holonomy",
    "EpsilonDefects",
    "standard_diagram",
    "walk_violation",
    "cayley_constraint",
    "verify_diagram",
    "path_product",
    "holonomy",
    "enumerate_diagrams",
    "shift_diagram",
    "epsilon_action_defects",
    "diagram_to_json",
    "diagram_from_json",
    "diagrams_to_jsonl",
]


@dataclass(eq=False)
class Diagram:
    """Generator labels on the ordered edges of ``host``.

    Pairing of ``labels(u, v)`` with ``labels(v, u)`` is part of what the
    Cayley constraint checks, so it is not enforced here.
    """

    host: Ball
    labels: dict
    group: MarkedGroup

    def __post_init__(self):
        known = set(self.group.labels)
        for k, v in self.labels.items():
            if v not in known:
                raise ValueError(f"{v!r} at {k!r} is not a generator label")

    def is_paired(self) -> bool:
        p = self.group.pairing
        return all(self.labels.get((v, u)) == p[lab] for (u, v), lab in self.labels.items())

    def is_total(self) -> bool:
        return all(e in self.labels for e in self.host.edges())

    def same_labels(self, other: "Diagram") -> bool:
        return self.labels == other.labels


@dataclass
class Holonomy:
    base: int
    values: dict
    consistent: bool
    bad_edges: list = field(default_factory=list)
    injective: bool = True

    def vertex_of(self) -> dict:
        """Inverse table element -> vertex (meaningful when consistent)."""
        return {g: v for v, g in self.values.items()}

    def to_ball(self, target: Ball) -> dict:
        """Vertex map ``v -> target.index[values[v]]`` where defined."""
        idx = target.index
        return {v: idx[g] for v, g in self.values.items() if g in idx}


def standard_diagram(host: Ball) -> Diagram:
    """``d(x, y) = x^-1 y`` on a ball cut from a Cayley graph."""
    if host.group is None:
        raise ValueError("the host carries no group")
    return Diagram(host, dict(host.edge_gen), host.group)


# ---------------------------------------------------------------------------
# the constraint family


def walk_violation(b: Ball, lab, G: MarkedGroup, length: int,
                   starts: Optional[Sequence[int]] = None):
    """First walk of at most ``length`` steps whose label product is the
    identity exactly when it is open, as ``(start, end, product)``.

    Walks only use labelled edges. States ``(vertex, product)`` are
    deduplicated breadth-first, which loses no walks because a state first
    reached earlier has at least as many steps left.
    """
    e = G.identity()
    times = G.times_label
    adj = b.adj
    get = lab.get
    for s in range(b.n) if starts is None else starts:
        frontier = [(s, e)]
        seen = {(s, e)}
        for _ in range(length):
            nxt = []
            for v, g in frontier:
                for w in adj[v]:
                    l = get((v, w))
                    if l is None:
                        continue
                    h = times(g, l)
                    st = (w, h)
                    if st in seen:
                        continue
                    if (h == e) != (w == s):
                        return (s, w, h)
                    seen.add(st)
                    nxt.append(st)
            frontier = nxt
            if not frontier:
                break
    return None


def _injective(b: Ball, lab, v: int) -> bool:
    seen = set()
    for w in b.adj[v]:
        l = lab.get((v, w))
        if l is None:
            continue
        if l in seen:
            return False
        seen.add(l)
    return True


def _full(b: Ball, lab, v: int, G: MarkedGroup) -> bool:
    """Condition (2) at ``v``; vacuous unless ``v`` has full degree and all labels are set."""
    nb = b.adj[v]
    if len(nb) != G.degree:
        return True
    got = [lab.get((v, w)) for w in nb]
    if any(l is None for l in got):
        return True
    return set(got) == set(G.labels)


def cayley_constraint(G: MarkedGroup, i: int) -> Constraint:
    """Radius-``i`` edge constraint: local injectivity of labels, every label
    present at full-degree vertices, and walks of length at most ``i`` close
    exactly when their label product is trivial."""
    if i < 1:
        raise ValueError("relation length must be at least 1")

    def check(b, lab):
        for v in range(b.n):
            if not _injective(b, lab, v) or not _full(b, lab, v, G):
                return False
        return walk_violation(b, lab, G, i) is None

    return Constraint(f"cayley-diagram(i={i})", i, 2, tuple(G.labels), check, check,
                      {"i": i, "group": G.name})


def verify_diagram(d: Diagram, i: int) -> DefectReport:
    return defect_set(d.host, d.labels, cayley_constraint(d.group, i))


def path_product(d: Diagram, path: Sequence[int]):
    G = d.group
    g = G.identity()
    S = d.host.adjsets
    for u, v in zip(path, path[1:]):
        if v not in S[u]:
            raise ValueError(f"{u} and {v} are not adjacent")
        lab = d.labels.get((u, v))
        if lab is None:
            raise ValueError(f"edge ({u}, {v}) is unlabelled")
        g = G.times_label(g, lab)
    return g


def holonomy(d: Diagram, base: Optional[int] = None) -> Holonomy:
    """Label products along BFS-tree paths from ``base`` (default: the root)."""
    b = d.host
    G = d.group
    base = b.root if base is None else base
    values = {base: G.identity()}
    q = deque([base])
    while q:
        u = q.popleft()
        for w in b.adj[u]:
            if w not in values:
                lab = d.labels.get((u, w))
                if lab is None:
                    continue
                values[w] = G.times_label(values[u], lab)
                q.append(w)
    bad = []
    for u, w in b.edges():
        lab = d.labels.get((u, w))
        if lab is None or u not in values or w not in values \
                or G.times_label(values[u], lab) != values[w]:
            bad.append((u, w))
    consistent = not bad and len(values) == b.n
    return Holonomy(base, values, consistent, bad, len(set(values.values())) == len(values))


# ---------------------------------------------------------------------------
# enumeration


def _dist_from(b: Ball, s: int) -> list:
    dist = [-1] * b.n
    dist[s] = 0
    q = deque([s])
    while q:
        u = q.popleft()
        for w in b.adj[u]:
            if dist[w] < 0:
                dist[w] = dist[u] + 1
                q.append(w)
    return dist


class _PairedView:
    """Ordered-edge view of an assignment to undirected sites ``u < v``."""

    __slots__ = ("a", "pair")

    def __init__(self, a, pair):
        self.a = a
        self.pair = pair

    def get(self, key, default=None):
        u, v = key
        if u < v:
            return self.a.get(key, default)
        lab = self.a.get((v, u))
        return default if lab is None else self.pair[lab]


def _diagram_csp(B: Ball, G: MarkedGroup, i: int, first: Sequence,
                 budget: Optional[SearchBudget]) -> tuple:
    """Host-global search: conditions (1)-(3) at every vertex and every walk
    of the ball ``B``. For ``i >= 2`` walks of length 2 force pairing, so
    sites are undirected edges carrying ``d(u, v)`` for ``u < v``."""
    paired = i >= 2
    if paired:
        sites = [(u, v) for u, v in B.edges() if u < v]
    else:
        sites = list(B.edges())
    firstset = set(first)
    order = [s for s in sites if s in firstset] + [s for s in sites if s not in firstset]

    def view(a):
        return _PairedView(a, G.pairing) if paired else a

    checks = []
    for v in range(B.n):
        ss = [(min(v, w), max(v, w)) if paired else (v, w) for w in B.adj[v]]

        def fn(a, v=v):
            lab = view(a)
            return _injective(B, lab, v) and _full(B, lab, v, G)

        checks.append((ss, fn))
    dists = [_dist_from(B, s) for s in range(B.n)]
    for s in range(B.n):
        near = {x for x in range(B.n) if 0 <= dists[s][x] <= i - 1}
        ss = [st for st in sites if st[0] in near or st[1] in near]

        def fn(a, s=s):
            return walk_violation(B, view(a), G, i, starts=(s,)) is None

        checks.append((ss, fn))
    return CSP(sites, tuple(G.labels), checks, budget, order=order), paired


def enumerate_diagrams(host: Ball, i: int, *, extend_to: Optional[Ball] = None,
                       group: Optional[MarkedGroup] = None,
                       budget: Optional[SearchBudget] = None) -> list:
    """All labellings of ``host`` satisfying the Cayley conditions for walks
    of length at most ``i`` everywhere in ``host``.

    With ``extend_to`` (a larger ball whose first vertices are ``host``), the
    search runs on the larger ball and returns the distinct restrictions to
    ``host`` of its solutions.
    """
    return list(iter_diagrams(host, i, extend_to=extend_to, group=group, budget=budget))


def iter_diagrams(host: Ball, i: int, *, extend_to: Optional[Ball] = None,
                  group: Optional[MarkedGroup] = None,
                  budget: Optional[SearchBudget] = None) -> Iterator[Diagram]:
    G = group or host.group
    if G is None:
        raise ValueError("need a marked group")
    B = host if extend_to is None else extend_to
    if extend_to is not None:
        if extend_to.n < host.n or (host.elements is not None and extend_to.elements is not None
                                    and extend_to.elements[:host.n] != host.elements):
            raise ValueError("host must be a prefix of extend_to")
    hedges = list(host.edges())
    first = [(u, v) for u, v in hedges if u < v or i < 2]
    csp, paired = _diagram_csp(B, G, i, first, budget)
    prefix = None
    if extend_to is not None:
        prefix = sum(1 for s in csp.order if s[0] < host.n and s[1] < host.n)
    for sol in csp.solutions(prefix=prefix):
        labels = {}
        for u, v in hedges:
            if paired:
                lab = sol[(u, v)] if u < v else G.pairing[sol[(v, u)]]
            else:
                lab = sol[(u, v)]
            labels[(u, v)] = lab
        yield Diagram(host, labels, G)


# ---------------------------------------------------------------------------
# shifts and epsilon-actions


def shift_diagram(d: Diagram, f: BallMap) -> Diagram:
    """``(f . d)(u, v) = d(f^-1 u, f^-1 v)``."""
    if f.source is not d.host or f.target is not d.host or not f.is_isomorphism():
        raise ValueError("shift needs an automorphism of the diagram's host")
    inv = f.inverse().vertex_map
    labels = {}
    for u, v in d.host.edges():
        lab = d.labels.get((inv[u], inv[v]))
        if lab is not None:
            labels[(u, v)] = lab
    return Diagram(d.host, labels, d.group)


@dataclass(frozen=True)
class EpsilonDefects:
    preimage: Fraction
    measure: Fraction
    composition: Fraction

    def as_tuple(self) -> tuple:
        return (self.preimage, self.measure, self.composition)


def epsilon_action_defects(d: Diagram) -> EpsilonDefects:
    """Finite analogues of the three epsilon-action quantities.

    ``a(g, x) = y`` iff ``y`` is the unique neighbour with ``d(x, y) = g``.
    With right-multiplication edges the composition law read off a diagram
    is ``a(g g', x) = a(g', a(g, x))``; a pair ``(g, g')`` is tested when
    ``g g'`` is a generator or the identity. All three are measured over
    vertices at depth at most ``radius - 2``.
    """
    b = d.host
    G = d.group
    E = G.labels
    interior = b.interior(2)
    if not interior:
        return EpsilonDefects(Fraction(0), Fraction(0), Fraction(0))
    step: dict = {}

    def act(g, x):
        key = (g, x)
        if key not in step:
            ys = [y for y in b.adj[x] if d.labels.get((x, y)) == g]
            step[key] = ys[0] if len(ys) == 1 else None
        return step[key]

    n = len(interior)
    bad_pre = 0
    worst = 0
    for x in interior:
        ok = True
        for g in E:
            pre = sum(1 for y in b.adj[x] if act(g, y) == x)
            worst = max(worst, abs(1 - pre))
            if pre != 1:
                ok = False
        bad_pre += not ok
    e = G.identity()
    pairs = []
    for g in E:
        for h in E:
            gh = G.mul(G.gen(g), G.gen(h))
            if gh == e:
                pairs.append((g, h, None))
            elif gh in G.label_of:
                pairs.append((g, h, G.label_of[gh]))
    bad_comp = 0
    for x in interior:
        for g, h, gh in pairs:
            y = act(g, x)
            two = None if y is None else act(h, y)
            one = x if gh is None else act(gh, x)
            if two is None or one is None or two != one:
                bad_comp += 1
                break
    return EpsilonDefects(Fraction(bad_pre, n), Fraction(worst, n), Fraction(bad_comp, n))


# ---------------------------------------------------------------------------
# serialisation


def diagram_to_json(d: Diagram, host_ref: str = "") -> str:
    labels = [{"u": u, "v": v, "label": d.labels[(u, v)]}
              for u, v in d.host.edges() if (u, v) in d.labels]
    return json.dumps({"host_ref": host_ref, "labels": labels}, sort_keys=True)


def diagram_from_json(text: str, host: Ball, group: Optional[MarkedGroup] = None) -> Diagram:
    doc = json.loads(text)
    labels = {(int(r["u"]), int(r["v"])): r["label"] for r in doc["labels"]}
    S = host.adjsets
    for u, v in labels:
        if not (0 <= u < host.n) or v not in S[u]:
            raise ValueError(f"({u}, {v}) is not an edge of the host")
    return Diagram(host, labels, group or host.group)


def diagrams_to_jsonl(ds, host_ref: str = "") -> Iterator[str]:
    for d in ds:
        yield diagram_to_json(d, host_ref)
