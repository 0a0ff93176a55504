"""Local constraints on vertex and edge labellings, and a backtracking solver.

A constraint of radius ``n`` is judged on the induced ball ``B_n(x)`` with
the labelling pulled back into local coordinates. Arity-1 local labels are
lists indexed by local vertex id; arity-2 local labels are dicts keyed by
ordered local edges. Missing values appear as ``None`` in partial checks.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Iterator, Optional, Sequence

from .balls import Ball, local_ball
from .search import SearchBudget, ball_automorphisms, isomorphisms

__all__ = [
    "BoundaryError",
    "ConstraintError",
    "ConstraintParseError",
    "Labelling",
    "Constraint",
    "DefectReport",
    "proper_coloring",
    "orientation",
    "perfect_matching",
    "extensional",
    "parse_constraint",
    "constraint_by_name",
    "meets_at",
    "defect_set",
    "solve_decoration",
    "iter_decorations",
    "edge_to_vertex_coding",
    "encode_edges",
    "decode_vertices",
    "CSP",
    "labelling_to_json",
    "labelling_from_json",
]


class ConstraintError(ValueError):
    """Malformed constraint or labelling."""


class BoundaryError(ValueError):
    """The radius-n ball around the vertex leaves the host ball."""


class ConstraintParseError(ConstraintError):
    def __init__(self, message: str, line: int, column: int = 1):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


@dataclass
class Labelling:
    """Partial labelling of vertices (arity 1) or ordered edges (arity 2)."""

    arity: int
    alphabet: tuple
    values: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.arity not in (1, 2):
            raise ConstraintError("arity must be 1 or 2")
        if isinstance(self.alphabet, _ProductAlphabet):
            allowed = self.alphabet
        else:
            self.alphabet = tuple(self.alphabet)
            allowed = set(self.alphabet)
        for k, v in self.values.items():
            if v not in allowed:
                raise ConstraintError(f"label {v!r} at {k!r} is not in the alphabet")

    def get(self, key, default=None):
        return self.values.get(key, default)

    def __getitem__(self, key):
        return self.values[key]

    def __len__(self) -> int:
        return len(self.values)

    def check_host(self, host: Ball) -> None:
        """Raise unless every arity-2 key is an edge of ``host``."""
        if self.arity == 2:
            S = host.adjsets
            for u, v in self.values:
                if v not in S[u]:
                    raise ConstraintError(f"({u}, {v}) is not an edge of the host")

    def sites(self, host: Ball) -> list:
        return host_sites(host, self.arity)

    def is_total(self, host: Ball) -> bool:
        return all(s in self.values for s in host_sites(host, self.arity))


def host_sites(host: Ball, arity: int) -> list:
    return list(range(host.n)) if arity == 1 else list(host.edges())


@dataclass(eq=False)
class Constraint:
    """A radius-``n`` predicate on labelled balls.

    ``accept(ball, lab)`` sees a total local labelling; ``consistent`` sees a
    partial one and returns False only when no completion can be accepted.
    ``reads_edge_labels`` marks constraints that look at generator labels.
    """

    name: str
    radius: int
    arity: int
    alphabet: tuple
    accept: Callable[[Ball, Any], bool]
    consistent: Optional[Callable[[Ball, Any], bool]] = None
    params: dict = field(default_factory=dict)
    reads_edge_labels: bool = False

    def check_partial(self, b: Ball, lab) -> bool:
        vals = lab if self.arity == 1 else lab.values()
        if any(v is None for v in vals):
            return True if self.consistent is None else self.consistent(b, lab)
        return self.accept(b, lab)

    def __repr__(self) -> str:
        return f"Constraint({self.name!r}, radius={self.radius}, arity={self.arity})"


@dataclass(frozen=True)
class DefectReport:
    checked: int
    defective: tuple
    fraction: Fraction

    def to_dict(self) -> dict:
        return {"checked": self.checked, "defective": list(self.defective),
                "fraction": str(self.fraction)}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


# ---------------------------------------------------------------------------
# builtins


def proper_coloring(k: int) -> Constraint:
    if k < 1:
        raise ConstraintError("need at least one colour")

    def accept(b, lab):
        c = lab[0]
        return all(lab[v] != c for v in b.adj[0])

    def consistent(b, lab):
        c = lab[0]
        return c is None or all(lab[v] != c for v in b.adj[0])

    return Constraint(f"proper-coloring(k={k})", 1, 1, tuple(range(k)), accept, consistent,
                      {"k": k})


def orientation() -> Constraint:
    def accept(b, lab):
        return all(lab[(0, v)] == 1 - lab[(v, 0)] for v in b.adj[0])

    def consistent(b, lab):
        for v in b.adj[0]:
            x, y = lab.get((0, v)), lab.get((v, 0))
            if x is not None and y is not None and x != 1 - y:
                return False
        return True

    return Constraint("orientation", 1, 2, (0, 1), accept, consistent)


def perfect_matching() -> Constraint:
    """Symmetric 0/1 edge labels with exactly one matched edge at the root."""

    def accept(b, lab):
        if any(lab[(0, v)] != lab[(v, 0)] for v in b.adj[0]):
            return False
        return sum(lab[(0, v)] for v in b.adj[0]) == 1

    def consistent(b, lab):
        ones = unknown = 0
        for v in b.adj[0]:
            x, y = lab.get((0, v)), lab.get((v, 0))
            if x is not None and y is not None and x != y:
                return False
            val = x if x is not None else y
            if val is None:
                unknown += 1
            else:
                ones += val
        return ones <= 1 and ones + unknown >= 1

    return Constraint("perfect-matching", 1, 2, (0, 1), accept, consistent)


# ---------------------------------------------------------------------------
# extensional constraints


def _pattern_ball(n_vertices: int, edges: Sequence[tuple]) -> Ball:
    adj = [set() for _ in range(n_vertices)]
    for u, v in edges:
        adj[u].add(v)
        adj[v].add(u)
    depth = [-1] * n_vertices
    depth[0] = 0
    order = [0]
    for u in order:
        for v in sorted(adj[u]):
            if depth[v] < 0:
                depth[v] = depth[u] + 1
                order.append(v)
    if min(depth) < 0:
        raise ConstraintError("pattern graph is not connected")
    return Ball(adj=[tuple(sorted(a)) for a in adj], depth=depth, radius=max(depth))


def extensional(pattern: Ball, arity: int, alphabet: Sequence, allowed: Sequence,
                name: str = "extensional") -> Constraint:
    """Constraint from an explicit allow-list over ``pattern``.

    Each allowed labelling is a dict (vertex or ordered edge -> label). The
    allow-set is closed under every automorphism of the pattern, so the
    choice of isomorphism onto a host ball does not matter.
    """
    sites = host_sites(pattern, arity)
    alphabet = tuple(alphabet)
    aset = set(alphabet)
    base = []
    for lab in allowed:
        missing = [s for s in sites if s not in lab]
        if missing:
            raise ConstraintError(f"allowed labelling misses site {missing[0]!r}")
        if any(lab[s] not in aset for s in sites):
            raise ConstraintError("allowed labelling uses a label outside the alphabet")
        base.append(tuple(lab[s] for s in sites))
    index = {s: i for i, s in enumerate(sites)}
    autos = ball_automorphisms(pattern, root_fixing=False)
    closed = set()
    for t in base:
        for f in autos:
            m = f.vertex_map
            if arity == 1:
                closed.add(tuple(t[m[v]] for v in sites))
            else:
                closed.add(tuple(t[index[(m[u], m[v])]] for u, v in sites))
    closed_list = sorted(closed, key=repr)
    iso_cache: dict = {}

    def pull(b, lab):
        key = id(b)
        hit = iso_cache.get(key)
        if hit is None or hit[0] is not b:
            got = next(isomorphisms(pattern, b, root_to_root=False, first_only=True), None)
            hit = (b, got)
            iso_cache[key] = hit
        g = hit[1]
        if g is None:
            return None
        if arity == 1:
            return tuple(lab[g[v]] for v in sites)
        return tuple(lab.get((g[u], g[v])) for u, v in sites)

    def accept(b, lab):
        t = pull(b, lab)
        return t is not None and t in closed

    def consistent(b, lab):
        t = pull(b, lab)
        if t is None:
            return False
        return any(all(x is None or x == y for x, y in zip(t, row)) for row in closed_list)

    c = Constraint(name, pattern.radius, arity, alphabet, accept, consistent,
                   {"pattern": pattern, "allowed": frozenset(closed)})
    return c


# ---------------------------------------------------------------------------
# parsing

_HEADER = re.compile(r"constraint\b(.*)$")
_KV = re.compile(r"(\w+)=(\S+)")
_PAIR = re.compile(r"\(\s*(-?\d+)\s*,\s*(-?\d+)\s*\)")


def _strip(line: str) -> str:
    return line.split("#", 1)[0].rstrip()


def _parse_kv(text: str, lineno: int, offset: int) -> dict:
    out = {}
    pos = 0
    for tok in text.split():
        start = text.index(tok, pos)
        pos = start + len(tok)
        m = _KV.fullmatch(tok)
        if not m:
            raise ConstraintParseError(f"expected key=value, got {tok!r}", lineno, offset + start + 1)
        out[m.group(1)] = (m.group(2), offset + start + 1)
    return out


def _builtin(name: str, params: dict, lineno: int, col: int, group=None) -> Constraint:
    def num(key, default=None):
        if key not in params:
            if default is None:
                raise ConstraintParseError(f"builtin {name} needs {key}=", lineno, col)
            return default
        val, c = params[key]
        try:
            return int(val)
        except ValueError:
            raise ConstraintParseError(f"{key} must be an integer", lineno, c) from None

    if name == "proper-coloring":
        return proper_coloring(num("k"))
    if name == "orientation":
        return orientation()
    if name == "perfect-matching":
        return perfect_matching()
    if name == "cayley-diagram":
        from .diagrams import cayley_constraint
        from .groups import make_group
        if "group" in params:
            group = make_group(params["group"][0])
        if group is None:
            raise ConstraintParseError("cayley-diagram needs group=<descriptor>", lineno, col)
        return cayley_constraint(group, num("i"))
    raise ConstraintParseError(f"unknown builtin {name!r}", lineno, col)


def parse_constraint(text: str, group=None) -> Constraint:
    """Parse the line-oriented constraint format.

    ``group`` supplies the marked group for ``cayley-diagram`` when the
    builtin line does not name one.
    """
    header = None
    builtin = None
    pattern_edges = None
    pattern_line = 0
    blocks: list = []
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip(raw)
        if not line.strip():
            continue
        indent = len(line) - len(line.lstrip())
        body = line.strip()
        col = indent + 1
        if body.startswith("constraint"):
            if header is not None:
                raise ConstraintParseError("duplicate header", lineno, col)
            kv = _parse_kv(body[len("constraint"):], lineno, indent + len("constraint"))
            for key in ("radius", "arity", "alphabet"):
                if key not in kv:
                    raise ConstraintParseError(f"header needs {key}=", lineno, col)
            try:
                radius = int(kv["radius"][0])
                arity = int(kv["arity"][0])
            except ValueError:
                raise ConstraintParseError("radius and arity must be integers", lineno, col) from None
            if arity not in (1, 2):
                raise ConstraintParseError("arity must be 1 or 2", lineno, kv["arity"][1])
            alphabet = tuple(a for a in kv["alphabet"][0].split(",") if a)
            if len(set(alphabet)) != len(alphabet) or not alphabet:
                raise ConstraintParseError("alphabet must be a non-empty list of distinct labels",
                                           lineno, kv["alphabet"][1])
            header = (radius, arity, alphabet, lineno)
        elif body.startswith("builtin"):
            parts = body.split(None, 2)
            if len(parts) < 2:
                raise ConstraintParseError("builtin needs a name", lineno, col)
            rest = parts[2] if len(parts) > 2 else ""
            params = _parse_kv(rest, lineno, indent + body.index(rest) if rest else 0)
            builtin = _builtin(parts[1], params, lineno, indent + body.index(parts[1]) + 1, group)
        elif body.startswith("pattern"):
            m = re.match(r"pattern\s+edges\s*:\s*(.*)$", body)
            if not m:
                raise ConstraintParseError("expected 'pattern edges: (u,v),...'", lineno, col)
            spec = m.group(1)
            pairs = [(int(a), int(b)) for a, b in _PAIR.findall(spec)]
            leftover = _PAIR.sub("", spec).replace(",", "").strip()
            if leftover or not pairs:
                pos = spec.find(leftover[:1]) if leftover else 0
                raise ConstraintParseError("malformed edge list", lineno,
                                           indent + body.index(spec) + pos + 1)
            pattern_edges = pairs
            pattern_line = lineno
        elif body == "allow:":
            current = {}
            blocks.append((lineno, current))
        elif body.startswith("vertex") or body.startswith("edge"):
            if current is None:
                raise ConstraintParseError("assignment outside an allow: block", lineno, col)
            m = re.fullmatch(r"vertex\s+(-?\d+)\s*=\s*(\S+)", body) or \
                re.fullmatch(r"edge\s+(-?\d+)\s+(-?\d+)\s*=\s*(\S+)", body)
            if not m:
                raise ConstraintParseError("expected 'vertex <id> = <label>' or "
                                           "'edge <u> <v> = <label>'", lineno, col)
            g = m.groups()
            key = int(g[0]) if len(g) == 2 else (int(g[0]), int(g[1]))
            if key in current:
                raise ConstraintParseError(f"site {key!r} assigned twice", lineno, col)
            current[key] = (g[-1], lineno, indent + m.start(len(g)) + 1)
        else:
            raise ConstraintParseError(f"unrecognised line {body!r}", lineno, col)

    if builtin is not None:
        if blocks or pattern_edges:
            raise ConstraintParseError("builtin and allow blocks cannot be mixed", pattern_line or 1)
        if header is not None:
            radius, arity, alphabet, hl = header
            if radius != builtin.radius:
                raise ConstraintParseError(
                    f"radius mismatch: header {radius}, builtin {builtin.radius}", hl)
            if arity != builtin.arity:
                raise ConstraintParseError("arity mismatch with builtin", hl)
            if tuple(map(str, builtin.alphabet)) != alphabet:
                raise ConstraintParseError("alphabet mismatch with builtin", hl)
        return builtin
    if header is None:
        raise ConstraintParseError("missing 'constraint' header", 1)
    radius, arity, alphabet, hl = header
    if pattern_edges is None:
        raise ConstraintParseError("missing 'pattern edges:' line", hl)
    nv = max(max(u, v) for u, v in pattern_edges) + 1
    try:
        pattern = _pattern_ball(nv, pattern_edges)
    except ConstraintError as exc:
        raise ConstraintParseError(str(exc), pattern_line) from None
    if pattern.radius != radius:
        raise ConstraintParseError(
            f"radius mismatch: header says {radius}, pattern has radius {pattern.radius}",
            pattern_line)
    if not blocks:
        raise ConstraintParseError("no allow: blocks", hl)
    sites = host_sites(pattern, arity)
    siteset = set(sites)
    aset = set(alphabet)
    allowed = []
    for bl, block in blocks:
        lab = {}
        for key, (val, ln, c) in block.items():
            if (arity == 1) != isinstance(key, int):
                raise ConstraintParseError("assignment kind does not match arity", ln, 1)
            if key not in siteset:
                raise ConstraintParseError(f"{key!r} is not a site of the pattern", ln, 1)
            if val not in aset:
                raise ConstraintParseError(f"label {val!r} is not in the alphabet", ln, c)
            lab[key] = val
        missing = [s for s in sites if s not in lab]
        if missing:
            raise ConstraintParseError(f"allow block is not total; missing {missing[0]!r}", bl)
        allowed.append(lab)
    return extensional(pattern, arity, alphabet, allowed)


def constraint_by_name(name: str, group=None) -> Constraint:
    """Short names: ``proper-coloring:<k>``, ``orientation``,
    ``perfect-matching``, ``cayley:<i>``."""
    head, _, arg = name.partition(":")
    if head in ("proper-coloring", "coloring") and arg:
        return proper_coloring(int(arg))
    if head == "orientation" and not arg:
        return orientation()
    if head == "perfect-matching" and not arg:
        return perfect_matching()
    if head in ("cayley", "cayley-diagram") and arg:
        if group is None:
            raise ConstraintError("cayley constraints need a group")
        from .diagrams import cayley_constraint
        return cayley_constraint(group, int(arg))
    raise ConstraintError(f"unknown constraint name {name!r}")


# ---------------------------------------------------------------------------
# checking


def _pull(loc: Ball, f, arity: int):
    ids = loc.host_ids
    vals = f.values if isinstance(f, Labelling) else f
    if arity == 1:
        return [vals.get(h) for h in ids]
    return {(u, v): vals.get((ids[u], ids[v])) for u, v in loc.edges()}


def _require_interior(host: Ball, x: int, r: int) -> None:
    if not 0 <= x < host.n:
        raise BoundaryError(f"vertex {x} is not in the host")
    if host.depth[x] > host.radius - r:
        raise BoundaryError(
            f"B_{r}({x}) leaves the host: depth {host.depth[x]} > {host.radius} - {r}")


def meets_at(host: Ball, f, x: int, c: Constraint) -> bool:
    """Whether ``f`` meets ``c`` at ``x``; missing values count as failure."""
    _require_interior(host, x, c.radius)
    loc = local_ball(host, x, c.radius)
    lab = _pull(loc, f, c.arity)
    vals = lab if c.arity == 1 else lab.values()
    if any(v is None for v in vals):
        return False
    return bool(c.accept(loc, lab))


def defect_set(host: Ball, f, c: Constraint) -> DefectReport:
    checked = host.interior(c.radius)
    bad = tuple(x for x in checked if not meets_at(host, f, x, c))
    frac = Fraction(len(bad), len(checked)) if checked else Fraction(0)
    return DefectReport(len(checked), bad, frac)


# ---------------------------------------------------------------------------
# backtracking


class CSP:
    """Finite-domain search with partial-assignment checks.

    ``checks`` is a list of ``(sites, fn)``; ``fn(assign)`` gets the shared
    partial assignment dict and returns False on a definite violation.
    Sites are chosen most-constrained first (fewest viable labels, ties by
    site order) unless ``order`` fixes a static sequence.
    """

    def __init__(self, sites: Sequence, domain: Sequence, checks: Sequence,
                 budget: Optional[SearchBudget] = None, order: Optional[Sequence] = None,
                 domains: Optional[dict] = None):
        self.sites = list(sites)
        self.domain = tuple(domain)
        self.domains = domains or {}
        self.fns = [fn for _, fn in checks]
        self.touch = {s: [] for s in self.sites}
        for ci, (ss, _) in enumerate(checks):
            for s in ss:
                if s in self.touch:
                    self.touch[s].append(ci)
        self.rank = {s: i for i, s in enumerate(self.sites)}
        self.order = list(order) if order is not None else None
        self.budget = budget or SearchBudget()
        self.assign: dict = {}

    def _viable(self, site) -> list:
        out = []
        a = self.assign
        fns = self.fns
        idx = self.touch[site]
        for lab in self.domains.get(site, self.domain):
            a[site] = lab
            if all(fns[ci](a) for ci in idx):
                out.append(lab)
        del a[site]
        return out

    def _pick(self, free: list):
        if self.order is not None:
            s = free[0]
            return s, self._viable(s)
        best = None
        for s in free:
            v = self._viable(s)
            if best is None or len(v) < len(best[1]):
                best = (s, v)
                if len(v) <= 1:
                    break
        return best

    def solutions(self, prefix: Optional[int] = None) -> Iterator[dict]:
        """Yield complete assignments. With ``prefix=p`` (static order only)
        yield each distinct assignment of the first ``p`` ordered sites that
        extends to a full solution, once."""
        free = list(self.order) if self.order is not None else list(self.sites)
        if prefix is not None and self.order is None:
            raise ValueError("prefix enumeration needs a static order")
        yield from self._rec(free, prefix)

    def _rec(self, free, prefix):
        self.budget.tick()
        if prefix is not None and len(free) == len(self.order) - prefix:
            if not free or self._exists(free):
                yield dict(self.assign)
            return
        if not free:
            yield dict(self.assign)
            return
        site, viable = self._pick(free)
        rest = [s for s in free if s != site]
        for lab in viable:
            self.assign[site] = lab
            yield from self._rec(rest, prefix)
            del self.assign[site]

    def _exists(self, free) -> bool:
        saved = dict(self.assign)
        order = self.order
        self.order = None
        try:
            for _ in self._rec(free, None):
                return True
            return False
        finally:
            self.order = order
            self.assign = saved


def _interior_checks(host: Ball, c: Constraint):
    checks = []
    for x in host.interior(c.radius):
        loc = local_ball(host, x, c.radius)
        ids = loc.host_ids
        if c.arity == 1:
            ss = list(ids)

            def fn(a, loc=loc, ids=ids):
                return c.check_partial(loc, [a.get(h) for h in ids])
        else:
            ledges = list(loc.edges())
            ss = [(ids[u], ids[v]) for u, v in ledges]

            def fn(a, loc=loc, ledges=ledges, ss=ss):
                return c.check_partial(loc, {le: a.get(he) for le, he in zip(ledges, ss)})
        checks.append((ss, fn))
    return checks


def iter_decorations(host: Ball, c: Constraint, budget: Optional[SearchBudget] = None,
                     fixed: Optional[dict] = None) -> Iterator[Labelling]:
    """Every total labelling meeting ``c`` at all interior vertices.

    Sites outside every checked ball are not branched on; they take the
    first alphabet label. ``fixed`` pins some sites in advance.
    """
    checks = _interior_checks(host, c)
    touched = []
    seen = set()
    for ss, _ in checks:
        for s in ss:
            if s not in seen:
                seen.add(s)
                touched.append(s)
    allsites = host_sites(host, c.arity)
    rank = {s: i for i, s in enumerate(allsites)}
    touched.sort(key=rank.__getitem__)
    domains = {s: (v,) for s, v in (fixed or {}).items()}
    csp = CSP(touched, c.alphabet, checks, budget, domains=domains)
    filler = c.alphabet[0]
    for sol in csp.solutions():
        vals = {s: sol.get(s, (fixed or {}).get(s, filler)) for s in allsites}
        yield Labelling(c.arity, c.alphabet, vals)


def solve_decoration(host: Ball, c: Constraint, budget: Optional[SearchBudget] = None,
                     max_nodes: Optional[int] = 1_000_000) -> Optional[Labelling]:
    """A total labelling meeting ``c`` at every interior vertex, or None.

    None means the search was exhaustive; running out of nodes raises
    :class:`ResourceCapExceeded` instead.
    """
    budget = budget or SearchBudget(max_nodes)
    return next(iter_decorations(host, c, budget), None)


# ---------------------------------------------------------------------------
# the edge -> vertex coding


def _gen_index(G) -> dict:
    return {lab: i + 1 for i, lab in enumerate(G.labels)}


def encode_edges(host: Ball, f, G, filler=None) -> Labelling:
    """Vertex labels ``(v0, f(v, v g_1), ..., f(v, v g_k))``.

    Slot 0 carries no edge information and holds ``filler``; slots for
    generators whose edge leaves the host also hold ``filler``.
    """
    vals = f.values if isinstance(f, Labelling) else f
    alphabet = f.alphabet if isinstance(f, Labelling) else None
    if filler is None:
        filler = alphabet[0] if alphabet else None
    gi = _gen_index(G)
    out = {}
    for v in range(host.n):
        row = [filler] * (len(gi) + 1)
        for w in host.adj[v]:
            lab = vals.get((v, w))
            if lab is not None:
                row[gi[host.edge_gen[(v, w)]]] = lab
        out[v] = tuple(row)
    return Labelling(1, _ProductAlphabet(alphabet or (filler,), len(gi) + 1), out)


def decode_vertices(host: Ball, g, G) -> dict:
    """Edge labels ``f(v, w) = g(v)[slot of edge_gen(v, w)]``."""
    vals = g.values if isinstance(g, Labelling) else g
    gi = _gen_index(G)
    out = {}
    for v in range(host.n):
        row = vals.get(v)
        if row is None:
            continue
        for w in host.adj[v]:
            out[(v, w)] = row[gi[host.edge_gen[(v, w)]]]
    return out


class _ProductAlphabet(tuple):
    """Lazily described ``A^(k)``; membership is checked structurally."""

    def __new__(cls, base, k):
        obj = super().__new__(cls, ())
        obj.base = tuple(base)
        obj.k = k
        return obj

    def __contains__(self, item):
        return isinstance(item, tuple) and len(item) == self.k and all(x in self.base for x in item)

    def __len__(self):
        return len(self.base) ** self.k

    def __iter__(self):
        from itertools import product
        return iter(product(self.base, repeat=self.k))

    def __getitem__(self, i):
        if i == 0:
            return (self.base[0],) * self.k
        raise IndexError("product alphabets only expose their first element")

    def __repr__(self):
        return f"{self.base!r}^{self.k}"


def edge_to_vertex_coding(c: Constraint, G) -> Constraint:
    """Arity-1, radius ``n + 1`` constraint over ``A^(E u {0})`` met by a
    vertex labelling exactly where its decoded edge labelling meets ``c``.

    The coded constraint reads generator labels to find each edge's slot.
    """
    if c.arity != 2:
        raise ConstraintError("the coding applies to arity-2 constraints")
    n = c.radius
    gi = _gen_index(G)

    def decode_local(b, lab):
        sub = local_ball(b, 0, n)
        ids = sub.host_ids
        out = {}
        for u, v in sub.edges():
            row = lab[ids[u]]
            out[(u, v)] = None if row is None else row[gi[b.edge_gen[(ids[u], ids[v])]]]
        return sub, out

    def accept(b, lab):
        sub, out = decode_local(b, lab)
        return c.accept(sub, out)

    def consistent(b, lab):
        sub, out = decode_local(b, lab)
        return c.check_partial(sub, out)

    return Constraint(f"coded({c.name})", n + 1, 1, _ProductAlphabet(c.alphabet, len(gi) + 1),
                      accept, consistent, {"inner": c}, reads_edge_labels=True)


# ---------------------------------------------------------------------------
# serialisation


def labelling_to_json(f: Labelling) -> str:
    if f.arity == 1:
        rows = [{"v": v, "label": lab} for v, lab in sorted(f.values.items())]
    else:
        rows = [{"u": u, "v": v, "label": lab} for (u, v), lab in sorted(f.values.items())]
    return json.dumps({"arity": f.arity, "labels": rows}, sort_keys=True)


def labelling_from_json(text: str, alphabet: Sequence) -> Labelling:
    doc = json.loads(text)
    arity = int(doc["arity"])
    if arity == 1:
        vals = {int(r["v"]): r["label"] for r in doc["labels"]}
    else:
        vals = {(int(r["u"]), int(r["v"])): r["label"] for r in doc["labels"]}
    return Labelling(arity, alphabet, vals)
