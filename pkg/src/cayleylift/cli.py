"""Command-line front end. Output is JSON lines after a one-line header."""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Optional, Sequence

from . import __version__
from .balls import ENV_MAX_VERTICES, ResourceCapExceeded, ball, ball_to_dot, ball_to_json, \
    diestel_leader_ball
from .coloring import augmenting_3coloring, full_orbit_colorings, parity_analysis, \
    PreconditionViolation
from .constraints import ConstraintError, ConstraintParseError, constraint_by_name, defect_set, \
    labelling_from_json, labelling_to_json, parse_constraint, solve_decoration
from .diagrams import cayley_constraint, diagram_from_json, diagram_to_json, iter_diagrams, \
    verify_diagram
from .fiid import LocalRule, ModeError, RuleFailure, draw_seeds, simulate
from .groups import GroupError, MarkedGroup, make_group
from .lifting import lift_rule
from .rigidity import extendable_automorphisms
from .rules import rule_by_name
from .search import SearchBudget, ball_automorphisms, ball_isomorphic

FORMAT = "cayleylift-jsonl/1"

DOMAIN_ERRORS = (GroupError, ConstraintError, ResourceCapExceeded, RuleFailure, ModeError,
                 PreconditionViolation, ValueError, KeyError, OSError)


class _Out:
    def __init__(self, stream):
        self.stream = stream

    def header(self, command: str):
        self.line({"format": FORMAT, "tool": "cayleylift", "version": __version__,
                   "command": command})

    def line(self, obj):
        self.stream.write(json.dumps(obj, sort_keys=True) + "\n")

    def raw(self, text: str):
        self.stream.write(text)


def _split_top(s: str) -> list:
    parts, depth, cur = [], 0, ""
    for ch in s:
        if ch == "," and depth == 0:
            parts.append(cur)
            cur = ""
            continue
        depth += (ch == "(") - (ch == ")")
        cur += ch
    parts.append(cur)
    return [p.strip() for p in parts]


def resolve_rule(name: str, G: MarkedGroup) -> LocalRule:
    """Rule names, including ``lift(<diagram rule>,<decoration rule>)``."""
    if name.startswith("lift(") and name.endswith(")"):
        parts = _split_top(name[5:-1])
        if len(parts) != 2:
            raise ValueError(f"cannot parse {name!r}")
        return lift_rule(resolve_rule(parts[0], G), resolve_rule(parts[1], G), G)
    return rule_by_name(name, G)


def resolve_constraint(spec: str, G: Optional[MarkedGroup]):
    if os.path.exists(spec):
        with open(spec) as fh:
            return parse_constraint(fh.read(), group=G)
    return constraint_by_name(spec, group=G)


# ---------------------------------------------------------------------------
# subcommands


def cmd_ball(a, out):
    G = make_group(a.group)
    b = ball(G, a.n)
    if a.format == "dot":
        out.raw(f"// {FORMAT} cayleylift {__version__} ball\n")
        out.raw(ball_to_dot(b))
    else:
        out.header("ball")
        out.line({"group": a.group, "n": a.n, "vertices": b.n, "edges": b.num_edges})
        out.raw(ball_to_json(b) + "\n")


def cmd_aut(a, out):
    G = make_group(a.group)
    out.header("aut")
    budget = SearchBudget(a.max_nodes)
    if a.k is None:
        b = ball(G, a.n)
        count = sum(1 for _ in ball_automorphisms(b, True, use_height=a.use_height,
                                                  max_count=a.max_count))
        out.line({"group": a.group, "n": a.n, "root_fixing_automorphisms": count})
    else:
        maps = extendable_automorphisms(G, a.n, a.k, use_height=a.use_height, budget=budget)
        out.line({"group": a.group, "n": a.n, "k": a.k, "extendable": len(maps)})


def cmd_grr(a, out):
    G = make_group(a.group)
    out.header("grr")
    for n in a.n:
        for k in a.k:
            out.line({"group": a.group, "n": n, "k": k,
                      "count": len(extendable_automorphisms(G, n, k))})


def cmd_iso(a, out):
    A, B = make_group(a.a), make_group(a.b)
    out.header("iso")
    m = ball_isomorphic(ball(A, a.n), ball(B, a.n))
    out.line({"a": a.a, "b": a.b, "n": a.n, "isomorphic": m is not None,
              "map": list(m.vertex_map) if (m is not None and a.show_map) else None})


def cmd_dl(a, out):
    out.header("dl")
    d = diestel_leader_ball(a.n)
    res = {"n": a.n, "vertices": d.n, "edges": d.num_edges}
    if a.compare:
        G = make_group(a.compare)
        res["compare"] = a.compare
        res["isomorphic"] = ball_isomorphic(d, ball(G, a.n)) is not None
    out.line(res)


def cmd_constraint(a, out):
    G = make_group(a.group)
    c = resolve_constraint(a.constraint, G)
    b = ball(G, a.n)
    out.header(f"constraint {a.action}")
    if a.action == "check":
        with open(a.labelling) as fh:
            f = labelling_from_json(fh.read(), c.alphabet)
        rep = defect_set(b, f, c)
        out.line({"constraint": c.name, "n": a.n} | rep.to_dict())
    else:
        sol = solve_decoration(b, c, max_nodes=a.max_nodes)
        out.line({"constraint": c.name, "n": a.n, "found": sol is not None})
        if sol is not None:
            out.raw(labelling_to_json(sol) + "\n")


def cmd_diagrams(a, out):
    G = make_group(a.group)
    b = ball(G, a.n)
    out.header(f"diagrams {a.action}")
    ref = f"{a.group}:B{a.n}"
    if a.action == "enumerate":
        ext = ball(G, a.extend_to) if a.extend_to is not None else None
        count = 0
        for d in iter_diagrams(b, a.i, extend_to=ext, budget=SearchBudget(a.max_nodes)):
            count += 1
            if not a.count_only:
                out.raw(diagram_to_json(d, ref) + "\n")
            if a.limit is not None and count >= a.limit:
                break
        out.line({"count": count, "i": a.i, "n": a.n, "truncated":
                  a.limit is not None and count >= a.limit})
    else:
        bad = 0
        with open(a.diagram) as fh:
            for k, line in enumerate(l for l in fh if l.strip()):
                doc = json.loads(line)
                if "labels" not in doc:
                    continue
                d = diagram_from_json(line, b, G)
                rep = verify_diagram(d, a.i)
                bad += bool(rep.defective)
                out.line({"index": k, "i": a.i} | rep.to_dict())
        if bad:
            raise ConstraintError(f"{bad} diagram(s) violate the Cayley conditions")


def _sim(G, rule, a, c):
    return simulate(G, rule, a.R, c, a.samples, a.seed)


def cmd_simulate(a, out):
    G = make_group(a.group)
    rule = resolve_rule(a.rule, G)
    c = resolve_constraint(a.constraint, G)
    out.header("simulate")
    rep = _sim(G, rule, a, c)
    out.line({"group": a.group, "rule": rule.name, "constraint": c.name, "R": a.R,
              "seed": a.seed} | rep.to_dict())


def cmd_lift(a, out):
    G = make_group(a.group)
    dr = resolve_rule(a.diagram_rule, G)
    gr = resolve_rule(a.gamma_rule, G)
    c = resolve_constraint(a.constraint, G)
    lifted = lift_rule(dr, gr, G)
    out.header("lift")
    rep = _sim(G, lifted, a, c)
    out.line({"part": "lifted", "rule": lifted.name, "radius": lifted.radius,
              "constraint": c.name, "seed": a.seed} | rep.to_dict())
    inner = cayley_constraint(G, a.diagram_i)
    if a.R >= dr.radius + inner.radius:
        rd = simulate(G, dr, a.R, inner, a.samples, a.seed)
        out.line({"part": "diagram", "rule": dr.name, "constraint": inner.name} | rd.to_dict())
    rg = simulate(G, gr, a.R, c, a.samples, a.seed)
    out.line({"part": "decoration", "rule": gr.name, "constraint": c.name} | rg.to_dict())


def cmd_parity(a, out):
    G = make_group(a.group)
    b = ball(G, a.n)
    out.header("parity")
    if a.coloring:
        with open(a.coloring) as fh:
            f = labelling_from_json(fh.read(), (0, 1, 2))
        rep = parity_analysis(b, f)
        out.line(rep.to_dict())
        if not rep.ok:
            raise ValueError("parity properties fail")
        return
    total = good = 0
    for f in full_orbit_colorings(b):
        total += 1
        rep = parity_analysis(b, f)
        good += rep.ok
        if a.verbose:
            out.line({"index": total - 1} | rep.to_dict())
    out.line({"group": a.group, "n": a.n, "colorings": total, "satisfying": good,
              "all_hold": good == total})


def cmd_color_augment(a, out):
    G = make_group(a.group)
    b = ball(G, a.n)
    if a.format == "csv":
        out.raw(f"# {FORMAT} cayleylift {__version__} color-augment\n")
        out.raw("sample,round,missed_fraction,augmentations\n")
    else:
        out.header("color-augment")
    finals = []
    mono = proper = True
    for s in range(a.samples):
        r = augmenting_3coloring(b, draw_seeds(b, a.seed, 1, s), a.rounds)
        finals.append(float(r.missed_fraction[-1]))
        mono &= r.non_increasing()
        proper &= r.certificate["proper"]
        if a.format == "csv":
            for i, f in enumerate(r.missed_fraction):
                out.raw(f"{s},{i},{float(f)!r},{r.augmentations[i]}\n")
        else:
            out.line({"sample": s} | r.to_dict())
    summary = {"samples": a.samples, "rounds": a.rounds, "n": a.n,
               "mean_final_missed": sum(finals) / len(finals), "max_final_missed": max(finals),
               "non_increasing": mono, "proper": proper}
    if a.format == "csv":
        out.raw("# " + json.dumps(summary, sort_keys=True) + "\n")
    else:
        out.line(summary)


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="cayleylift",
        description="Cayley-graph balls, constraints, diagrams and factor-of-i.i.d. rules.",
        epilog=f"Ball size cap: ${ENV_MAX_VERTICES} (default 200000 vertices).")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("ball", help="emit B_n(e)")
    s.add_argument("--group", required=True)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--format", choices=("json", "dot"), default="json")
    s.set_defaults(fn=cmd_ball)

    s = sub.add_parser("aut", help="root-fixing or extendable automorphism counts")
    s.add_argument("--group", required=True)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--k", type=int)
    s.add_argument("--use-height", action="store_true")
    s.add_argument("--max-count", type=int)
    s.add_argument("--max-nodes", type=int)
    s.set_defaults(fn=cmd_aut)

    s = sub.add_parser("grr", help="extendable-automorphism table over n and k")
    s.add_argument("--group", required=True)
    s.add_argument("--n", type=int, nargs="+", required=True)
    s.add_argument("--k", type=int, nargs="+", default=[2])
    s.set_defaults(fn=cmd_grr)

    s = sub.add_parser("iso", help="are two balls isomorphic (root to root)")
    s.add_argument("--a", required=True)
    s.add_argument("--b", required=True)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--show-map", action="store_true")
    s.set_defaults(fn=cmd_iso)

    s = sub.add_parser("dl", help="Diestel-Leader ball, optionally compared with a group ball")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--compare", default="preset:lamplighter-DL")
    s.set_defaults(fn=cmd_dl)

    s = sub.add_parser("constraint", help="check or solve a constraint on a ball")
    s.add_argument("action", choices=("check", "solve"))
    s.add_argument("--group", required=True)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--constraint", required=True, help="builtin name or constraint file")
    s.add_argument("--labelling", help="labelling JSON (check)")
    s.add_argument("--max-nodes", type=int, default=1_000_000)
    s.set_defaults(fn=cmd_constraint)

    s = sub.add_parser("diagrams", help="enumerate or verify Cayley diagrams")
    s.add_argument("action", choices=("enumerate", "verify"))
    s.add_argument("--group", required=True)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--i", type=int, default=2)
    s.add_argument("--extend-to", type=int)
    s.add_argument("--limit", type=int)
    s.add_argument("--count-only", action="store_true")
    s.add_argument("--max-nodes", type=int)
    s.add_argument("--diagram", help="JSON-lines file of diagrams (verify)")
    s.set_defaults(fn=cmd_diagrams)

    for name, fn in (("simulate", cmd_simulate), ("lift", cmd_lift)):
        s = sub.add_parser(name, help="Monte Carlo failure estimate at the root")
        s.add_argument("--group", required=True)
        if name == "simulate":
            s.add_argument("--rule", required=True)
        else:
            s.add_argument("--diagram-rule", required=True)
            s.add_argument("--gamma-rule", required=True)
            s.add_argument("--diagram-i", type=int, default=2)
        s.add_argument("--constraint", required=True)
        s.add_argument("--R", type=int, required=True)
        s.add_argument("--samples", type=int, default=100)
        s.add_argument("--seed", type=int, required=True)
        s.set_defaults(fn=fn)

    s = sub.add_parser("parity", help="parity obstruction for proper 3-colourings")
    s.add_argument("--group", default="preset:delta")
    s.add_argument("--n", type=int, default=2)
    s.add_argument("--coloring", help="labelling JSON; default enumerates every colouring")
    s.add_argument("--verbose", action="store_true")
    s.set_defaults(fn=cmd_parity)

    s = sub.add_parser("color-augment", help="augmenting-chain 3-colouring")
    s.add_argument("--group", default="preset:gamma")
    s.add_argument("--n", type=int, default=7)
    s.add_argument("--rounds", type=int, default=5)
    s.add_argument("--samples", type=int, default=100)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--format", choices=("json", "csv"), default="json")
    s.set_defaults(fn=cmd_color_augment)
    return p


def main(argv: Optional[Sequence[str]] = None, stdout=None) -> int:
    parser = build_parser()
    stdout = stdout or sys.stdout
    try:
        a = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if a.command == "constraint" and a.action == "check" and not a.labelling:
        parser.print_usage(sys.stderr)
        sys.stderr.write("constraint check needs --labelling\n")
        return 2
    if a.command == "diagrams" and a.action == "verify" and not a.diagram:
        parser.print_usage(sys.stderr)
        sys.stderr.write("diagrams verify needs --diagram\n")
        return 2
    out = _Out(stdout)
    try:
        a.fn(a, out)
    except ConstraintParseError as exc:
        sys.stderr.write(json.dumps({"error": str(exc), "line": exc.line,
                                     "column": exc.column}) + "\n")
        return 1
    except DOMAIN_ERRORS as exc:
        sys.stderr.write(json.dumps({"error": f"{type(exc).__name__}: {exc}"}) + "\n")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
