"""Composing a diagram rule with a rule that reads generator labels."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .balls import Ball, ball, local_ball
from .diagrams import Diagram, holonomy, shift_diagram
from .fiid import LocalRule, RuleFailure, sample_rng
from .groups import MarkedGroup
from .search import automorphism_group_sample, ball_automorphisms
from .balls import BallMap, ResourceCapExceeded

__all__ = ["LiftedRule", "lift_rule", "HolonomyReport", "holonomy_identity_test"]


@dataclass(frozen=True, eq=False)
class LiftedRule(LocalRule):
    """A rule built by :func:`lift_rule`; seed layer 1 feeds the diagram rule
    and the remaining layers feed the decoration rule."""

    diagram_rule: Optional[LocalRule] = None
    gamma_rule: Optional[LocalRule] = None
    group: Optional[MarkedGroup] = None


def _inner_diagram(b: Ball, dr: LocalRule, seeds: np.ndarray, labels, rg: int) -> dict:
    """Diagram labels on every out-edge of every vertex within depth ``rg``."""
    out = {}
    for u in range(b.n):
        if b.depth[u] > rg:
            continue
        loc = local_ball(b, u, dr.radius)
        ids = loc.host_ids
        loc_labels = None
        if not dr.oblivious:
            loc_labels = {(p, q): labels.get((ids[p], ids[q])) for p, q in loc.edges()}
        res = dr(loc, seeds[np.asarray(ids), :dr.layers], loc_labels)
        for w, lab in res.items():
            out[(u, ids[w])] = lab
    return out


def _inner_holonomy(b: Ball, G: MarkedGroup, diag: dict, rg: int, std: Ball) -> dict:
    """Local vertex -> group element, required to be a label-consistent
    bijection from the inner ball onto the standard ball of radius ``rg``."""
    h = {0: G.identity()}
    order = [0]
    for u in order:
        for w in b.adj[u]:
            if b.depth[w] > rg:
                continue
            lab = diag.get((u, w))
            if lab is None:
                raise RuleFailure("diagram label missing inside the inner ball")
            g = G.times_label(h[u], lab)
            if w in h:
                if h[w] != g:
                    raise RuleFailure("holonomy is inconsistent")
            else:
                h[w] = g
                order.append(w)
    if len(set(h.values())) != len(h) or set(h.values()) != set(std.elements):
        raise RuleFailure("holonomy does not identify the inner ball with the standard ball")
    return h


def lift_rule(dr: LocalRule, gr: LocalRule, G: MarkedGroup) -> LiftedRule:
    """Run ``dr`` on layer-1 seeds around the root, read off the holonomy of
    the resulting diagram, move the remaining seed layers to the standard
    ball along it, run ``gr`` there and move its output back.

    The result is diagram-oblivious whenever ``dr`` is. Any inconsistency of
    the generated diagram within ``B_{r_gr}`` is a failure at the root.
    """
    if dr.arity != 2:
        raise ValueError("the diagram rule must label edges")
    if not set(dr.alphabet) <= set(G.labels):
        raise ValueError("the diagram rule's alphabet is not the generator set")
    rg = gr.radius
    std = ball(G, rg)

    def evaluate(b, seeds, labels, info):
        diag = _inner_diagram(b, dr, seeds, labels, rg)
        h = _inner_holonomy(b, G, diag, rg, std)
        idx = std.index
        pulled = np.empty((std.n, gr.layers))
        for v, g in h.items():
            pulled[idx[g]] = seeds[v, dr.layers:dr.layers + gr.layers]
        out = gr(std, pulled)
        if gr.arity == 1 or out is None:
            return out
        back = {idx[g]: v for v, g in h.items()}
        return {back[w]: lab for w, lab in out.items()}

    return LiftedRule(f"lift({dr.name},{gr.name})", dr.radius + rg, dr.mode, gr.arity,
                      gr.alphabet, evaluate, layers=dr.layers + gr.layers,
                      uses_height=dr.uses_height,
                      params={"diagram_rule": dr.name, "gamma_rule": gr.name},
                      diagram_rule=dr, gamma_rule=gr, group=G)


@dataclass(frozen=True)
class HolonomyReport:
    trials: int
    rebase_checked: int
    rebase_failures: int
    shift_checked: int
    shift_failures: int
    first_failure: Optional[dict] = None

    @property
    def ok(self) -> bool:
        return self.rebase_failures == 0 and self.shift_failures == 0

    def to_json(self) -> str:
        return json.dumps(self.__dict__ | {"ok": self.ok}, sort_keys=True, default=str)


def _auto_pool(b: Ball, rng, cap: int = 2000, pool: int = 64) -> list:
    try:
        return list(ball_automorphisms(b, True, max_count=cap))
    except ResourceCapExceeded:
        return list(automorphism_group_sample(b, pool, rng))


def holonomy_identity_test(b: Ball, d: Diagram, trials: int, seed: int = 0,
                           autos: Optional[list] = None) -> HolonomyReport:
    """Check, exactly, on random instances:

    * rebasing: ``h_root(v) == h_root(u) * h_u(v)`` for random vertices ``u, v``;
    * shifting: for a root-fixing automorphism ``s`` of ``b``, the holonomy of
      the shifted diagram satisfies ``h'(s(v)) == h(v)``.
    """
    if d.host is not b:
        raise ValueError("diagram lives on a different ball")
    G = d.group
    base = holonomy(d)
    if not base.consistent:
        raise ValueError("diagram is not consistent on the ball")
    rng = sample_rng(seed, 0)
    if autos is None:
        autos = _auto_pool(b, rng)
    rebased: dict = {}
    shifted: dict = {}
    rb_fail = sh_fail = 0
    first = None
    for t in range(trials):
        u, v = (int(x) for x in rng.integers(b.n, size=2))
        if u not in rebased:
            rebased[u] = holonomy(d, u)
        hu = rebased[u]
        if G.mul(base.values[u], hu.values[v]) != base.values[v]:
            rb_fail += 1
            first = first or {"identity": "rebase", "u": u, "v": v}
        k = int(rng.integers(len(autos)))
        f: BallMap = autos[k]
        if k not in shifted:
            shifted[k] = holonomy(shift_diagram(d, f))
        hs = shifted[k]
        w = int(rng.integers(b.n))
        if not hs.consistent or hs.values[f(w)] != base.values[w]:
            sh_fail += 1
            first = first or {"identity": "shift", "automorphism": k, "v": w}
    return HolonomyReport(trials, trials, rb_fail, trials, sh_fail, first)
