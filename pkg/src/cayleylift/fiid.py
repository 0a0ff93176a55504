"""Factor-of-i.i.d. local rules: seeds, evaluation, Monte Carlo, invariance checks."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Optional

import numpy as np

from .balls import Ball, ResourceCapExceeded, ball, local_ball
from .constraints import Constraint, Labelling, meets_at
from .groups import MarkedGroup
from .search import automorphism_group_sample, ball_automorphisms

__all__ = [
    "RuleFailure",
    "ModeError",
    "SeedConfig",
    "LocalRule",
    "SimReport",
    "InvarianceResult",
    "blind",
    "draw_seeds",
    "sample_rng",
    "evaluate_at",
    "run_rule",
    "assemble",
    "simulate",
    "invariance_check",
]

OBLIVIOUS = "oblivious"
AWARE = "aware"


class RuleFailure(RuntimeError):
    """The rule cannot produce an output at this vertex (ties, odd local shape)."""


class ModeError(ValueError):
    pass


@dataclass(frozen=True)
class SeedConfig:
    """i.i.d. uniform reals, one row per vertex and one column per layer."""

    seed: int
    values: np.ndarray

    @property
    def layers(self) -> int:
        return self.values.shape[1]


def sample_rng(seed: int, index: int = 0) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, index]))


def draw_seeds(b: Ball, seed: int, layers: int = 1, index: int = 0) -> SeedConfig:
    return SeedConfig(seed, sample_rng(seed, index).random((b.n, layers)))


@dataclass(frozen=True, eq=False)
class LocalRule:
    """``evaluate(ball, seeds, labels, info)`` returns the root's output.

    Arity-1 rules return a label; arity-2 rules return ``{w: label}`` over
    the root's neighbours ``w`` (local ids). ``labels`` is the generator
    labelling of the local ball for diagram-aware rules and None otherwise.
    ``analyze(ball)`` is an optional seed-independent precomputation,
    cached per ball. ``uses_height`` marks rules that read the height order.
    """

    name: str
    radius: int
    mode: str
    arity: int
    alphabet: tuple
    evaluate: Callable[..., Any]
    analyze: Optional[Callable[[Ball], Any]] = None
    layers: int = 1
    uses_height: bool = False
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.mode not in (OBLIVIOUS, AWARE):
            raise ModeError(f"unknown mode {self.mode!r}")
        if self.arity not in (1, 2):
            raise ValueError("arity must be 1 or 2")

    @property
    def oblivious(self) -> bool:
        return self.mode == OBLIVIOUS

    def info(self, b: Ball):
        if self.analyze is None:
            return None
        cache = b.__dict__.setdefault("_rule_info", {})
        key = id(self)
        if key not in cache:
            try:
                cache[key] = (True, self.analyze(b))
            except RuleFailure as exc:
                cache[key] = (False, exc)
        ok, val = cache[key]
        if not ok:
            raise val
        return val

    def __call__(self, b: Ball, seeds: np.ndarray, labels: Optional[dict] = None):
        """Evaluate at the root of ``b`` (already local); respects the mode."""
        if self.oblivious:
            view = blind(b)
            return self.evaluate(view, seeds, None, self.info(view))
        if labels is None:
            labels = b.edge_gen
        return self.evaluate(b, seeds, labels, self.info(b))


def blind(b: Ball) -> Ball:
    """The same rooted graph without elements, generator labels or group."""
    if b.group is None and not b.edge_gen and b.elements is None:
        return b
    view = b.__dict__.get("_blind")
    if view is None:
        view = Ball(adj=b.adj, depth=b.depth, radius=b.radius, height=b.height)
        b.__dict__["_blind"] = view
    return view


def _host_index(loc: Ball) -> np.ndarray:
    arr = loc.__dict__.get("_ids_arr")
    if arr is None:
        arr = np.asarray(loc.host_ids, dtype=np.int64)
        loc.__dict__["_ids_arr"] = arr
    return arr


def evaluate_at(host: Ball, rule: LocalRule, seeds: np.ndarray, x: int,
                labels: Optional[dict] = None):
    """Rule output at host vertex ``x`` in host coordinates, or None on failure.

    ``labels`` overrides the host's generator labels for diagram-aware rules.
    """
    if host.depth[x] > host.radius - rule.radius:
        raise ValueError(f"B_{rule.radius}({x}) leaves the host")
    loc = local_ball(host, x, rule.radius)
    ids = loc.host_ids
    local_seeds = seeds[_host_index(loc)]
    loc_labels = None
    if not rule.oblivious:
        if labels is None:
            loc_labels = loc.edge_gen
        else:
            loc_labels = {(u, v): labels.get((ids[u], ids[v])) for u, v in loc.edges()}
    try:
        out = rule(loc, local_seeds, loc_labels)
    except RuleFailure:
        return None
    if rule.arity == 1 or out is None:
        return out
    return {ids[w]: lab for w, lab in out.items()}


def run_rule(host: Ball, rule: LocalRule, seeds: np.ndarray, vertices=None,
             labels: Optional[dict] = None) -> dict:
    if vertices is None:
        vertices = host.interior(rule.radius)
    return {x: evaluate_at(host, rule, seeds, x, labels) for x in vertices}


def assemble(host: Ball, rule: LocalRule, outputs: dict) -> Labelling:
    """Collect per-vertex outputs into one (possibly partial) labelling."""
    vals = {}
    if rule.arity == 1:
        vals = {x: o for x, o in outputs.items() if o is not None}
    else:
        for x, o in outputs.items():
            if o is None:
                continue
            for w, lab in o.items():
                if lab is not None:
                    vals[(x, w)] = lab
    return Labelling(rule.arity, rule.alphabet, vals)


@dataclass(frozen=True)
class SimReport:
    samples: int
    failures: int
    estimate: Fraction
    half_width: float
    per_sample: tuple

    def to_dict(self) -> dict:
        return {"samples": self.samples, "failures": self.failures,
                "estimate": str(self.estimate), "estimate_float": float(self.estimate),
                "half_width": self.half_width,
                "per_sample_defects": [str(f) for f in self.per_sample]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _report(fails: list, per_sample: list) -> SimReport:
    n = len(fails)
    k = sum(fails)
    p = Fraction(k, n) if n else Fraction(0)
    hw = 1.96 * math.sqrt(float(p) * (1 - float(p)) / n) if n else 0.0
    return SimReport(n, k, p, hw, tuple(per_sample))


def simulate(G: MarkedGroup, rule: LocalRule, R: int, c: Constraint, samples: int, seed: int,
             host: Optional[Ball] = None, record: Optional[Callable] = None) -> SimReport:
    """Monte Carlo estimate of the probability that the rule's output fails
    ``c`` at the root.

    Each sample draws fresh seeds on ``B_R(e)``, evaluates the rule at every
    vertex whose radius-``r`` ball fits, and checks ``c`` at the root. The
    per-sample defect fraction is taken over vertices whose radius-
    ``c.radius`` ball lies inside the evaluated region. ``record`` is called
    as ``record(index, seeds, labelling)`` for callers that keep samples.
    """
    if R < rule.radius + c.radius:
        raise ValueError(f"R={R} is below rule radius {rule.radius} + constraint radius {c.radius}")
    if samples < 1:
        raise ValueError("need at least one sample")
    host = host or ball(G, R)
    region = host.interior(rule.radius)
    checked = host.interior(rule.radius + c.radius)
    fails = []
    per = []
    for s in range(samples):
        seeds = draw_seeds(host, seed, rule.layers, s).values
        lab = assemble(host, rule, run_rule(host, rule, seeds, region))
        bad = sum(1 for x in checked if not meets_at(host, lab, x, c))
        root_ok = meets_at(host, lab, host.root, c)
        fails.append(0 if root_ok else 1)
        per.append(Fraction(bad, len(checked)))
        if record is not None:
            record(s, seeds, lab)
    return _report(fails, per)


@dataclass(frozen=True)
class InvarianceResult:
    ok: bool
    trials: int
    automorphisms: int
    counterexample: Optional[dict] = None

    def __bool__(self) -> bool:
        return self.ok


def _automorphism_pool(loc: Ball, use_height: bool, rng, max_enum: int, pool: int) -> list:
    try:
        return [f.vertex_map for f in ball_automorphisms(loc, True, use_height=use_height,
                                                         max_count=max_enum)]
    except ResourceCapExceeded:
        return [f.vertex_map for f in automorphism_group_sample(loc, pool, rng,
                                                                use_height=use_height)]


def invariance_check(rule: LocalRule, b: Ball, trials: int, seed: int, *,
                     max_enum: int = 2000, pool: int = 64) -> InvarianceResult:
    """Compare the rule on random seeds with the rule on the same seeds moved
    by a root-fixing automorphism of ``B_r(root)``.

    All automorphisms are used when there are at most ``max_enum``; beyond
    that a pool of ``pool`` random ones is drawn. Rules reading the height
    order are tested against height-preserving automorphisms.
    """
    if not rule.oblivious:
        raise ModeError(f"{rule.name} is diagram-aware; invariance applies to oblivious rules")
    if b.radius < rule.radius:
        raise ValueError("ball is smaller than the rule radius")
    loc = blind(local_ball(b, b.root, rule.radius))
    rng = sample_rng(seed, 0)
    autos = _automorphism_pool(loc, rule.uses_height, rng, max_enum, pool)
    n = loc.n

    def run(seeds):
        try:
            return rule(loc, seeds)
        except RuleFailure:
            return None

    for t in range(trials):
        seeds = rng.random((n, rule.layers))
        sigma = np.asarray(autos[int(rng.integers(len(autos)))], dtype=np.int64)
        moved = np.empty_like(seeds)
        moved[sigma] = seeds
        a, bb = run(seeds), run(moved)
        if rule.arity == 1 or a is None or bb is None:
            same = a == bb
        else:
            same = {int(sigma[w]): lab for w, lab in a.items()} == bb
        if not same:
            return InvarianceResult(False, t + 1, len(autos),
                                    {"trial": t, "sigma": sigma.tolist(), "output": a,
                                     "moved_output": bb})
    return InvarianceResult(True, trials, len(autos))
