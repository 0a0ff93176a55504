"""C3-orbit colourings: augmenting-chain 3-colouring and the parity obstruction."""

from __future__ import annotations

import csv
import io
import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Optional

import numpy as np

from .balls import Ball, triangles
from .constraints import Labelling

__all__ = [
    "Orbits",
    "orbit_structure",
    "AugmentResult",
    "augmenting_3coloring",
    "missed_orbits",
    "coloring_certificate",
    "ParityReport",
    "PreconditionViolation",
    "parity_analysis",
    "full_orbit_colorings",
    "orbit_seed_coding",
]


@dataclass(frozen=True)
class Orbits:
    """Triangle partition of a ball.

    ``of[v]`` is the orbit index of ``v`` (``-1`` if ``v``'s triangle is cut
    by the boundary); ``members[o]`` lists the three vertices of orbit ``o``.
    ``nbrs[o]`` are the orbits joined to ``o`` by a non-triangle edge.
    """

    of: tuple
    members: tuple
    nbrs: tuple
    depth: tuple

    def __len__(self) -> int:
        return len(self.members)


def orbit_structure(b: Ball) -> Orbits:
    tris = triangles(b)
    of = [-1] * b.n
    members = []
    for t in tris:
        if any(of[v] != -1 for v in t):
            raise ValueError("triangles overlap; not a C3-orbit graph")
        for v in t:
            of[v] = len(members)
        members.append(tuple(t))
    nbrs = [set() for _ in members]
    for u, v in b.edges():
        ou, ov = of[u], of[v]
        if ou != -1 and ov != -1 and ou != ov:
            nbrs[ou].add(ov)
            nbrs[ov].add(ou)
    depth = tuple(max(b.depth[v] for v in m) for m in members)
    return Orbits(tuple(of), tuple(members), tuple(tuple(sorted(s)) for s in nbrs), depth)


def missed_orbits(orb: Orbits, A: set, which=None) -> list:
    which = range(len(orb)) if which is None else which
    return [o for o in which if not any(v in A for v in orb.members[o])]


def _free(b: Ball, A: set, v: int, ignore=()) -> bool:
    return all(w not in A or w in ignore for w in b.adj[v])


def _initial_set(b: Ball, orb: Orbits, s: np.ndarray) -> set:
    A: set = set()
    order = sorted((v for v in range(b.n) if orb.of[v] != -1), key=lambda v: s[v])
    for v in order:
        if _free(b, A, v):
            A.add(v)
    return A


def _chains(b: Ball, orb: Orbits, A: set, n: int) -> list:
    """All augmenting chains ``(x, v_1..v_k, y)`` with ``1 <= k <= n``.

    Consecutive ``v_i`` lie in adjacent orbits (they cannot be adjacent
    themselves); ``x ~ v_1`` and ``v_k ~ y`` are edges.
    """
    missed = set(missed_orbits(orb, A))
    rep = {orb.of[v]: v for v in A}
    out = []

    def grow(path, opath):
        v = path[-1]
        for q in orb.nbrs[orb.of[v]]:
            if q in opath:
                continue
            if q in missed:
                if len(path) >= 2:
                    for y in b.adj[v]:
                        if orb.of[y] == q:
                            out.append(tuple(path + [y]))
            elif q in rep and len(path) <= n:
                grow(path + [rep[q]], opath + [q])

    for o in sorted(missed):
        for x in orb.members[o]:
            for v1 in b.adj[x]:
                if v1 in A:
                    grow([x, v1], [o, orb.of[v1]])
    return out


def _still_chain(orb: Orbits, A: set, p: tuple) -> bool:
    missed = set(missed_orbits(orb, A, (orb.of[p[0]], orb.of[p[-1]])))
    return (orb.of[p[0]] in missed and orb.of[p[-1]] in missed
            and all(v in A for v in p[1:-1]))


def _augment(b: Ball, orb: Orbits, A: set, p: tuple, s: np.ndarray) -> Optional[set]:
    """Replace ``A`` on the orbits of ``p`` (all but ``y``'s) so that each of
    them is met, keeping independence. Returns the new set or None."""
    touched = [orb.of[v] for v in p[:-1]]
    base = A - {v for o in touched for v in orb.members[o]}
    best = None
    for pick in itertools.product(*(orb.members[o] for o in touched)):
        chosen = set(pick)
        if not all(_free(b, base | chosen, v, ignore=(v,)) for v in pick):
            continue
        if any(w in chosen for v in pick for w in b.adj[v]):
            continue
        changed = sum(1 for v in pick if v not in A)
        key = (changed, tuple(s[v] for v in pick))
        if best is None or key < best[0]:
            best = (key, chosen)
    return None if best is None else base | best[1]


@dataclass
class AugmentResult:
    """Outcome of one run: the independent set, per-round missed fractions
    over the measured orbits, the colouring and its certificate."""

    A: set
    missed_fraction: list
    augmentations: list
    coloring: Labelling
    certificate: dict
    measured: int
    history: list = field(default_factory=list)

    def non_increasing(self) -> bool:
        f = self.missed_fraction
        return all(f[i + 1] <= f[i] for i in range(len(f) - 1))

    def to_dict(self) -> dict:
        return {"missed_fraction": [str(f) for f in self.missed_fraction],
                "missed_fraction_float": [float(f) for f in self.missed_fraction],
                "augmentations": self.augmentations, "measured_orbits": self.measured,
                "independent_set_size": len(self.A), "certificate": self.certificate}

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["round", "missed_fraction", "augmentations"])
        for i, f in enumerate(self.missed_fraction):
            w.writerow([i, float(f), self.augmentations[i]])
        return buf.getvalue()


def _check_independent(b: Ball, orb: Orbits, A: set):
    for v in A:
        if any(w in A for w in b.adj[v]):
            raise AssertionError(f"A is not independent at {v}")
    for m in orb.members:
        if sum(v in A for v in m) > 1:
            raise AssertionError("A meets an orbit twice")


def _b_step(b: Ball, label: str = "b") -> dict:
    return {u: v for (u, v), lab in b.edge_gen.items() if lab == label}


def _colour(b: Ball, orb: Orbits, A: set) -> dict:
    step = _b_step(b)
    out = {}
    for v in range(b.n):
        if orb.of[v] == -1:
            continue
        u, i = v, 0
        while i < 3 and u not in A:
            u = step.get(u)
            i += 1
            if u is None:
                break
        if u is not None and i < 3:
            out[v] = i
    return out


def coloring_certificate(b: Ball, orb: Orbits, A: set, c: dict) -> dict:
    """Check properness of ``c`` on every edge between vertices whose orbits
    are met by ``A``; returns counts and the violating edges."""
    hit = {o for o in range(len(orb)) if not missed_orbits(orb, A, [o])}
    checked = 0
    bad = []
    for u, v in b.edges():
        if orb.of[u] in hit and orb.of[v] in hit:
            checked += 1
            if c.get(u) == c.get(v):
                bad.append([u, v])
    return {"edges_checked": checked, "violations": bad, "proper": not bad}


def augmenting_3coloring(b: Ball, seeds, rounds: int, *, margin: int = 2,
                         check: bool = True) -> AugmentResult:
    """Grow an independent set meeting the C3-orbits by augmenting chains.

    Round ``n`` applies chains of length at most ``n`` until none remain;
    within a sweep chains are taken in increasing order of their seed
    tuples and each is re-validated against the current set first, so
    overlapping chains never act on stale data. Missed fractions are
    reported over orbits lying within depth ``radius - margin``.
    """
    if rounds < 1:
        raise ValueError("rounds must be at least 1")
    s = np.asarray(getattr(seeds, "values", seeds), dtype=float)
    s = s[:, 0] if s.ndim == 2 else s
    orb = orbit_structure(b)
    measured = [o for o in range(len(orb)) if orb.depth[o] <= b.radius - margin]
    if not measured:
        raise ValueError("no orbits inside the measured region")

    def frac(A):
        return Fraction(len(missed_orbits(orb, A, measured)), len(measured))

    A = _initial_set(b, orb, s)
    if check:
        _check_independent(b, orb, A)
    fractions = [frac(A)]
    counts = [0]
    for n in range(1, rounds + 1):
        applied = 0
        while True:
            progress = False
            for o in missed_orbits(orb, A):
                free = [v for v in orb.members[o] if _free(b, A, v)]
                if free:
                    A.add(min(free, key=lambda v: s[v]))
                    applied += 1
                    progress = True
            for p in sorted(_chains(b, orb, A, n), key=lambda p: tuple(s[v] for v in p)):
                if not _still_chain(orb, A, p):
                    continue
                new = _augment(b, orb, A, p, s)
                if new is None:
                    continue
                if len(new) <= len(A):
                    raise AssertionError("augmentation did not grow the set")
                A = new
                applied += 1
                progress = True
                if check:
                    _check_independent(b, orb, A)
            if not progress:
                break
        fractions.append(frac(A))
        counts.append(applied)
    c = _colour(b, orb, A)
    cert = coloring_certificate(b, orb, A, c)
    return AugmentResult(A, fractions, counts, Labelling(1, (0, 1, 2), c), cert, len(measured))


# ---------------------------------------------------------------------------
# parity obstruction


class PreconditionViolation(ValueError):
    def __init__(self, msg: str, orbit: int):
        super().__init__(msg)
        self.orbit = orbit


@dataclass(frozen=True)
class ParityReport:
    """``c[o]`` is ``f(vb) - f(v) mod 3`` on orbit ``o`` (constant there).

    ``sign`` maps 1 to +1 and 2 to -1; ``even_agreement`` is the fraction of
    orbit pairs at quotient distance two with equal sign.
    """

    c: dict
    values_ok: bool
    constant_ok: bool
    alternating_ok: bool
    sign: dict
    even_pairs: int
    even_agreement: Fraction

    @property
    def ok(self) -> bool:
        return self.values_ok and self.constant_ok and self.alternating_ok

    def to_dict(self) -> dict:
        return {"values_in_pm1": self.values_ok, "orbit_constant": self.constant_ok,
                "alternating": self.alternating_ok, "ok": self.ok, "orbits": len(self.c),
                "sign": {str(k): v for k, v in sorted(self.sign.items())},
                "even_pairs": self.even_pairs, "even_agreement": str(self.even_agreement)}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _full(b: Ball, orb: Orbits, o: int, step: dict) -> bool:
    return all(v in step for v in orb.members[o])


def parity_analysis(b: Ball, f, orbits: Optional[list] = None) -> ParityReport:
    """Evaluate ``c_f`` on the given orbits (default: every orbit whose
    vertices all have a ``b``-successor in the ball and are coloured).

    Raises PreconditionViolation at the first orbit where ``f`` is improper.
    """
    vals = f.values if isinstance(f, Labelling) else f
    orb = orbit_structure(b)
    step = _b_step(b)
    if orbits is None:
        orbits = [o for o in range(len(orb)) if _full(b, orb, o, step)
                  and all(v in vals for v in orb.members[o])]
    orbits = list(orbits)
    oset = set(orbits)
    for o in orbits:
        for v in orb.members[o]:
            for w in b.adj[v]:
                if orb.of[w] in oset and vals.get(w) == vals[v]:
                    raise PreconditionViolation(f"f is not proper at orbit {o}", o)
    per_vertex = {v: (vals[step[v]] - vals[v]) % 3 for o in orbits for v in orb.members[o]}
    values_ok = all(x in (1, 2) for x in per_vertex.values())
    constant_ok = all(len({per_vertex[v] for v in orb.members[o]}) == 1 for o in orbits)
    c = {o: per_vertex[orb.members[o][0]] for o in orbits}
    alternating_ok = all(c[o] != c[q] for o in orbits for q in orb.nbrs[o] if q in oset)
    sign = {o: 1 if x == 1 else -1 for o, x in c.items()}
    pairs = set()
    for o in orbits:
        for q in orb.nbrs[o]:
            for r in orb.nbrs[q]:
                if r != o and r in oset:
                    pairs.add((min(o, r), max(o, r)))
    agree = sum(1 for o, r in pairs if sign[o] == sign[r])
    ratio = Fraction(agree, len(pairs)) if pairs else Fraction(1)
    return ParityReport(c, values_ok, constant_ok, alternating_ok, sign, len(pairs), ratio)


def full_orbit_colorings(b: Ball, k: int = 3) -> Iterator[dict]:
    """Every proper ``k``-colouring of the subgraph induced on full orbits."""
    orb = orbit_structure(b)
    step = _b_step(b)
    verts = sorted(v for o in range(len(orb)) if _full(b, orb, o, step)
                   for v in orb.members[o])
    vs = set(verts)
    nb = {v: [w for w in b.adj[v] if w in vs] for v in verts}
    col: dict = {}

    def rec(i):
        if i == len(verts):
            yield dict(col)
            return
        v = verts[i]
        used = {col[w] for w in nb[v] if w in col}
        for x in range(k):
            if x not in used:
                col[v] = x
                yield from rec(i + 1)
                del col[v]

    yield from rec(0)


def orbit_seed_coding(b: Ball, quotient_values) -> np.ndarray:
    """Seeds on a ``C2^{*3} x| C3`` ball from three seed fields on the
    quotient: vertex ``gamma b^i`` receives ``quotient_values(gamma)[i]``."""
    if b.elements is None:
        raise ValueError("needs group elements")
    return np.array([quotient_values(g)[i] for g, i in b.elements], dtype=float)
