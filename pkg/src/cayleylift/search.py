"""Isomorphism and automorphism search by colour refinement plus backtracking.

Both graphs are refined jointly on their disjoint union so colour ids are
comparable across the two sides. A branch individualises the least vertex of
the smallest non-singleton cell of the source and tries every target in the
same cell. Leaves are verified edge by edge, so hash collisions in the
refinement can only cost pruning power, never correctness.
"""

from __future__ import annotations

from typing import Iterator, Optional, Sequence

import numpy as np

from .balls import Ball, BallMap, ResourceCapExceeded

__all__ = [
    "SearchBudget",
    "refine",
    "isomorphisms",
    "ball_automorphisms",
    "ball_isomorphic",
    "automorphism_group_sample",
    "brute_force_automorphisms",
]

_HASH_CACHE = [np.zeros(0, dtype=np.uint64)]


def _hashes(k: int) -> np.ndarray:
    h = _HASH_CACHE[0]
    if len(h) < k:
        size = max(k, 2 * len(h), 1024)
        h = np.random.default_rng(0x5EED).integers(1, 2**63, size=size, dtype=np.uint64)
        _HASH_CACHE[0] = h
    return h


class SearchBudget:
    """Counts search-tree nodes and raises once ``limit`` is reached."""

    def __init__(self, limit: Optional[int] = None):
        self.limit = limit
        self.nodes = 0

    def tick(self):
        self.nodes += 1
        if self.limit is not None and self.nodes > self.limit:
            raise ResourceCapExceeded(f"search exceeded {self.limit} nodes")


def refine(colors: np.ndarray, indptr: np.ndarray, indices: np.ndarray) -> np.ndarray:
    """Colour refinement to the coarsest equitable partition below ``colors``.

    Each round keys a vertex by a hash of (own colour, neighbour-colour
    multiset); new colours are the ranks of those keys, so the output is
    canonical for isomorphic inputs.
    """
    colors = np.unique(colors, return_inverse=True)[1].astype(np.int64)
    k = int(colors.max()) + 1 if len(colors) else 0
    cs = np.zeros(len(indices) + 1, dtype=np.uint64)
    lo, hi = indptr[:-1], indptr[1:]
    while True:
        h = _hashes(2 * k + 2)
        np.cumsum(h[colors[indices]], out=cs[1:])
        # own colour mixed in with a second, independent hash
        key = (cs[hi] - cs[lo]) * np.uint64(0x9E3779B97F4A7C15) + h[k + 1 + colors]
        new = np.unique(key, return_inverse=True)[1].reshape(-1).astype(np.int64)
        k2 = int(new.max()) + 1 if len(new) else 0
        colors = new
        if k2 == k:
            return colors
        k = k2


def _union_csr(a: Ball, b: Ball):
    ia, xa = a.csr
    ib, xb = b.csr
    indptr = np.concatenate([ia, ib[1:] + ia[-1]])
    indices = np.concatenate([xa, xb + a.n])
    return indptr, indices


def _initial(a: Ball, b: Ball, root_to_root: bool, use_height: bool,
             init_a: Optional[Sequence] = None, init_b: Optional[Sequence] = None) -> np.ndarray:
    cols = [np.zeros(a.n, dtype=np.int64), np.zeros(b.n, dtype=np.int64)]
    if init_a is not None:
        cols = [np.asarray(init_a, dtype=np.int64).copy(), np.asarray(init_b, dtype=np.int64).copy()]
    if use_height:
        if a.height is None or b.height is None:
            raise ValueError("height-preserving search needs a height attribute on both balls")
        ha = np.asarray(a.height) - a.height[a.root]
        hb = np.asarray(b.height) - b.height[b.root]
        lo = min(ha.min(), hb.min())
        span = max(ha.max(), hb.max()) - lo + 1
        cols = [cols[0] * span + (ha - lo), cols[1] * span + (hb - lo)]
    if root_to_root:
        m = max(cols[0].max(), cols[1].max()) + 1
        cols[0][a.root] = m
        cols[1][b.root] = m
    return np.concatenate(cols)


def _edge_codes(b: Ball):
    codes = b.__dict__.get("_edge_codes")
    if codes is None:
        indptr, indices = b.csr
        src = np.repeat(np.arange(b.n, dtype=np.int64), np.diff(indptr))
        codes = (src, indices, np.sort(src * b.n + indices))
        b.__dict__["_edge_codes"] = codes
    return codes


def _verify(a: Ball, b: Ball, m: Sequence[int]) -> bool:
    if a.n != b.n or a.num_edges != b.num_edges:
        return False
    src, dst, _ = _edge_codes(a)
    _, _, target = _edge_codes(b)
    m = np.asarray(m, dtype=np.int64)
    if len(np.unique(m)) != a.n:
        return False
    return bool(np.array_equal(np.sort(m[src] * b.n + m[dst]), target))


def _balanced(colors: np.ndarray, na: int) -> bool:
    k = int(colors.max()) + 1
    return np.array_equal(np.bincount(colors[:na], minlength=k), np.bincount(colors[na:], minlength=k))


def _leaf_map(colors: np.ndarray, na: int) -> list:
    ca, cb = colors[:na], colors[na:]
    pos = np.empty(int(colors.max()) + 1, dtype=np.int64)
    pos[cb] = np.arange(len(cb))
    return pos[ca].tolist()


def _quick_completion(colors: np.ndarray, na: int) -> list:
    """Pair the vertices of each cell in increasing order on both sides."""
    ca, cb = colors[:na], colors[na:]
    oa = np.argsort(ca, kind="stable")
    ob = np.argsort(cb, kind="stable")
    m = np.empty(na, dtype=np.int64)
    m[oa] = ob
    return m.tolist()


def isomorphisms(a: Ball, b: Ball, *, root_to_root: bool = True, use_height: bool = False,
                 first_only: bool = False, prefix: Optional[int] = None,
                 init_a: Optional[Sequence] = None, init_b: Optional[Sequence] = None,
                 rng: Optional[np.random.Generator] = None,
                 budget: Optional[SearchBudget] = None) -> Iterator[list]:
    """Yield vertex maps ``a -> b`` that are graph isomorphisms.

    With ``prefix=p`` the search enumerates the distinct restrictions to
    vertices ``0..p-1`` of ``a`` of isomorphisms, yielding each restriction
    once (as a length-``p`` list) together with a witness found by a
    first-solution search on the remaining vertices.
    """
    if a.n != b.n:
        return
    budget = budget or SearchBudget()
    na = a.n
    indptr, indices = _union_csr(a, b)
    colors = refine(_initial(a, b, root_to_root, use_height, init_a, init_b), indptr, indices)

    def branch_cell(cols, restrict):
        ca = cols[:na]
        sizes = np.bincount(ca)
        if restrict is not None:
            cand = np.unique(ca[:restrict])
            cand = cand[sizes[cand] > 1]
        else:
            cand = np.flatnonzero(sizes > 1)
        if len(cand) == 0:
            return None
        c = int(cand[np.argmin(sizes[cand])])
        return c

    def targets(cols, c):
        tb = np.flatnonzero(cols[na:] == c)
        if rng is not None:
            tb = rng.permutation(tb)
        return tb.tolist()

    def individualise(cols, v, w):
        c2 = cols.copy()
        m = int(cols.max()) + 1
        c2[v] = m
        c2[na + w] = m
        return refine(c2, indptr, indices)

    def exists(cols):
        """First completion of ``cols`` to an isomorphism, or None."""
        budget.tick()
        if not _balanced(cols, na):
            return None
        c = branch_cell(cols, None)
        if c is None:
            m = _leaf_map(cols, na)
            return m if _verify(a, b, m) else None
        m = _quick_completion(cols, na)
        if _verify(a, b, m):
            return m
        v = int(np.flatnonzero(cols[:na] == c)[0])
        for w in targets(cols, c):
            got = exists(individualise(cols, v, w))
            if got is not None:
                return got
        return None

    def rec(cols):
        budget.tick()
        if not _balanced(cols, na):
            return
        if prefix is not None:
            c = branch_cell(cols, prefix)
            if c is None:
                m = exists(cols)
                if m is not None:
                    yield m[:prefix]
                return
        else:
            c = branch_cell(cols, None)
            if c is None:
                m = _leaf_map(cols, na)
                if _verify(a, b, m):
                    yield m
                return
        v = int(np.flatnonzero(cols[:na] == c)[0])
        for w in targets(cols, c):
            yield from rec(individualise(cols, v, w))

    if first_only:
        m = exists(colors)
        if m is not None:
            yield m
        return
    yield from rec(colors)


def ball_automorphisms(b: Ball, root_fixing: bool = True, *, use_height: bool = False,
                       max_count: Optional[int] = None,
                       budget: Optional[SearchBudget] = None) -> list:
    """Every graph automorphism of ``b`` (root-fixing if requested).

    Raises :class:`ResourceCapExceeded` if more than ``max_count`` exist.
    """
    out = []
    for m in isomorphisms(b, b, root_to_root=root_fixing, use_height=use_height, budget=budget):
        out.append(BallMap(b, b, tuple(m)))
        if max_count is not None and len(out) > max_count:
            raise ResourceCapExceeded(f"more than {max_count} automorphisms")
    return out


def ball_isomorphic(a: Ball, b: Ball, root_to_root: bool = True) -> Optional[BallMap]:
    for m in isomorphisms(a, b, root_to_root=root_to_root, first_only=True):
        return BallMap(a, b, tuple(m))
    return None


def automorphism_group_sample(b: Ball, count: int, rng: np.random.Generator, *,
                              root_fixing: bool = True, use_height: bool = False) -> list:
    """``count`` automorphisms found by randomised first-solution descents."""
    out = []
    for _ in range(count):
        for m in isomorphisms(b, b, root_to_root=root_fixing, use_height=use_height,
                              first_only=True, rng=rng):
            out.append(BallMap(b, b, tuple(m)))
    return out


def brute_force_automorphisms(b: Ball, root_fixing: bool = True) -> list:
    """Reference enumeration by depth-preserving backtracking without refinement.

    Only usable on small balls; kept as an independent cross-check.
    """
    n = b.n
    S = b.adjsets
    deg = [len(a) for a in b.adj]
    m = [-1] * n
    used = [False] * n
    out = []
    order = sorted(range(n), key=lambda v: (b.depth[v], v))

    def ok(u, w):
        if deg[u] != deg[w]:
            return False
        if root_fixing and b.depth[u] != b.depth[w]:
            return False
        for x in b.adj[u]:
            if m[x] >= 0 and m[x] not in S[w]:
                return False
        return True

    def rec(i):
        if i == n:
            if _verify(b, b, m):
                out.append(BallMap(b, b, tuple(m)))
            return
        u = order[i]
        for w in range(n):
            if not used[w] and ok(u, w):
                m[u] = w
                used[w] = True
                rec(i + 1)
                used[w] = False
                m[u] = -1

    rec(0)
    return out
