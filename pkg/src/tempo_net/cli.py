"""Command-line front end: ``tempo-net <verb> <net> [options]``.

Exit codes: 0 found / holds, 1 nothing found / fails, 2 usage or input
error, 3 budget exceeded.
"""
from __future__ import annotations

import argparse
import json
import logging
import random
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence

from .concrete import SampledGraph, ltl_check, sampled_search
from .errors import BudgetExceeded
from .folding import ENGINES, Witness, search
from .linarith import Constraint, ParseError, eq, fmt_rat, parse_constraint, parse_rat, tparam, LinExpr
from .net import NetError, NetSpec, format_net, instantiate, resolve_net
from .props import And, InTime, PropError, parse_interval, parse_ltl, parse_prop, parse_temporal
from .synthesis import (ag_synthesis, bounded_response, ef_in_time, model_check, parse_strategy, strat_explore,
                        with_extra_params)

EXIT_FOUND, EXIT_NONE, EXIT_USAGE, EXIT_BUDGET = 0, 1, 2, 3


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    net: str
    engine: str = "fold-global"
    params: Dict[str, Fraction] = field(default_factory=dict)
    max_states: int = 50_000
    max_depth: Optional[int] = None
    max_sols: Optional[int] = None
    json: bool = False
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        if self.max_states <= 0 or (self.max_depth is not None and self.max_depth < 0):
            raise UsageError("budgets must be positive")
        if self.max_sols is not None and self.max_sols <= 0:
            raise UsageError("--max-sols must be positive")
        if self.engine not in ENGINES:
            raise UsageError(f"unknown engine {self.engine!r}; expected one of {', '.join(ENGINES)}")


def _bindings(items: Sequence[str]) -> Dict[str, Fraction]:
    out = {}
    for it in items or ():
        name, sep, val = it.partition("=")
        if not sep or not name.strip():
            raise UsageError(f"bad --param {it!r}; expected name=value")
        try:
            out[name.strip()] = parse_rat(val.strip())
        except (ValueError, ZeroDivisionError, ParseError) as exc:
            raise UsageError(f"bad value in --param {it!r}") from exc
    return out


def _config(ns) -> RunConfig:
    return RunConfig(net=ns.net, engine=getattr(ns, "engine", "fold-global"), params=_bindings(ns.param),
                     max_states=ns.max_states, max_depth=getattr(ns, "max_depth", None),
                     max_sols=getattr(ns, "max_sols", None), json=ns.json, seed=getattr(ns, "seed", 0),
                     workers=getattr(ns, "workers", 1))


def _load(cfg: RunConfig, extra: Sequence[str] = ()) -> NetSpec:
    net = resolve_net(cfg.net)
    if extra:
        net = with_extra_params(net, extra)
    known = {v.name: v for v in net.params()}
    atoms = []
    for name, val in cfg.params.items():
        if name not in known:
            raise UsageError(f"unknown parameter {name!r}")
        atoms.append(eq(LinExpr.var(known[name]), LinExpr.const(val)))
    if atoms:
        net = net.with_k0(net.k0 & Constraint(atoms))
    return net


def _ground(cfg: RunConfig):
    net = resolve_net(cfg.net)
    return instantiate(net, cfg.params)


def _witness_json(w: Witness) -> dict:
    return {"marking": {p: str(n) for p, n in w.marking.items()},
            "param_constraint": str(w.param_constraint),
            "full_constraint": str(w.full_constraint),
            "path": w.path,
            "goal_projection": str(w.goal_projection)}


def _emit(cfg: RunConfig, obj, text: str) -> None:
    if cfg.json:
        print(json.dumps(obj, indent=2, sort_keys=True))
    else:
        print(text)


def _print_witnesses(cfg: RunConfig, ws: List[Witness], explored: Optional[int] = None) -> int:
    if cfg.json:
        print(json.dumps({"witnesses": [_witness_json(w) for w in ws], "explored": explored}, indent=2))
    else:
        if not ws:
            print("no solution")
        for w in ws:
            print(w.describe())
            print("  path: " + (" ".join(w.path) or "(initial state)"))
        if explored is not None:
            print(f"states explored: {explored}")
    return EXIT_FOUND if ws else EXIT_NONE


# ---------------------------------------------------------------------------
# verbs

def cmd_check(ns) -> int:
    cfg = _config(ns)
    net = _load(cfg, ns.extra_param)
    extra = [tparam(n) for n in ns.extra_param]
    prop = parse_prop(ns.prop, net, extra)
    if ns.within:
        window = parse_interval(ns.within, net, extra)
        ws = ef_in_time(net, prop, window, engine=cfg.engine, max_sols=cfg.max_sols, max_states=cfg.max_states,
                        workers=cfg.workers)
        return _print_witnesses(cfg, ws)
    out = search(net, prop, cfg.engine, max_sols=cfg.max_sols, max_depth=cfg.max_depth,
                 max_states=cfg.max_states, workers=cfg.workers)
    return _print_witnesses(cfg, out.witnesses, out.explored)


def cmd_synth(ns) -> int:
    cfg = _config(ns)
    net = _load(cfg)
    goal = ns.goal.strip()
    if goal.startswith("AG "):
        prop = parse_prop(goal[3:], net)
        res = ag_synthesis(net, prop, max_rounds=ns.max_rounds, max_states=cfg.max_states, workers=cfg.workers)
        text = f"{res.constraint}\n  rounds: {res.rounds}, states explored: {res.explored}"
        _emit(cfg, {"constraint": str(res.constraint), "rounds": res.rounds, "explored": res.explored}, text)
        return EXIT_NONE if res.constraint.is_false() else EXIT_FOUND
    if goal.startswith("EF "):
        prop = parse_prop(goal[3:], net)
        out = search(net, prop, cfg.engine, max_sols=cfg.max_sols, max_states=cfg.max_states, workers=cfg.workers)
        return _print_witnesses(cfg, out.witnesses, out.explored)
    raise UsageError("--goal must start with 'AG ' or 'EF '")


def cmd_response(ns) -> int:
    cfg = _config(ns)
    net = _load(cfg)
    phi, psi = parse_prop(ns.phi, net), parse_prop(ns.psi, net)
    try:
        b = parse_rat(ns.b)
    except (ValueError, ZeroDivisionError, ParseError) as exc:
        raise UsageError(f"bad bound {ns.b!r}") from exc
    r = bounded_response(net, phi, psi, b, max_states=cfg.max_states)
    if r.holds:
        _emit(cfg, {"holds": True, "explored": r.explored}, f"holds (states explored: {r.explored})")
        return EXIT_FOUND
    w = r.witness
    _emit(cfg, {"holds": False, "witness": _witness_json(w), "explored": r.explored},
          f"violation: {w.describe()}\n  path: {' '.join(w.path)}")
    return EXIT_NONE


def cmd_run(ns) -> int:
    cfg = _config(ns)
    net = _load(cfg)
    strategy = parse_strategy(ns.strategy, net)
    prop = parse_prop(ns.prop, net)
    r = strat_explore(net, strategy, prop, max_sols=cfg.max_sols, max_states=cfg.max_states, merge=ns.merge)
    if not cfg.json:
        print(f"reachable states under the strategy: {len(r.states)}")
    return _print_witnesses(cfg, r.witnesses)


def cmd_mc(ns) -> int:
    cfg = _config(ns)
    net = _load(cfg)
    f = parse_temporal(ns.formula, net)
    tb = None
    if ns.time_bound is not None:
        try:
            tb = parse_rat(ns.time_bound)
        except (ValueError, ZeroDivisionError, ParseError) as exc:
            raise UsageError(f"bad time bound {ns.time_bound!r}") from exc
    r = model_check(net, ns.quant, f, tb, max_states=cfg.max_states)
    _emit(cfg, {"holds": r.holds, "explored": r.explored}, f"{str(r.holds).lower()} (states explored: {r.explored})")
    return EXIT_FOUND if r.holds else EXIT_NONE


def cmd_sim(ns) -> int:
    cfg = _config(ns)
    g = _ground(cfg)
    sg = SampledGraph(g, parse_rat(ns.step))
    rng = random.Random(cfg.seed)
    s = sg.initial()
    trace = []
    for _ in range(ns.bound):
        succ = list(sg.successors(s))
        if not succ:
            break
        label, s = rng.choice(succ)
        trace.append(label)
    _emit(cfg, {"steps": len(trace), "trace": trace, "marking": dict(zip(g.places, s.marking)),
                "clocks": {t: str(c) for t, c in zip(g.labels, s.clocks)}},
          f"after {len(trace)} steps: {s.describe(g)}")
    return EXIT_FOUND


def cmd_search_concrete(ns) -> int:
    cfg = _config(ns)
    g = _ground(cfg)
    prop = parse_prop(ns.prop, g.spec)
    tb = None
    if ns.within:
        w = parse_interval(ns.within, g.spec)
        if w.upper is None or not w.upper.is_const() or not w.lower.is_const():
            raise UsageError("--within needs constant, finite bounds for concrete search")
        prop = And(prop, InTime(w))
        tb = w.upper.constant
    r = sampled_search(g, prop, parse_rat(ns.step), max_sols=cfg.max_sols, max_depth=cfg.max_depth,
                       time_bound=tb, max_states=cfg.max_states)
    sols = [{"state": s.describe(g), "path": p} for s, p in r.solutions]
    text = "\n".join(f"{x['state']}\n  path: {' '.join(x['path']) or '(initial state)'}" for x in sols) or "no solution"
    _emit(cfg, {"solutions": sols, "explored": r.explored}, text + f"\nstates explored: {r.explored}")
    return EXIT_FOUND if sols else EXIT_NONE


def cmd_ltl(ns) -> int:
    cfg = _config(ns)
    g = _ground(cfg)
    f = parse_ltl(ns.formula, g.spec)
    tb = None if ns.time_bound is None else parse_rat(ns.time_bound)
    r = ltl_check(g, f, parse_rat(ns.step), state_budget=cfg.max_states, time_bound=tb)
    if r.holds:
        _emit(cfg, {"holds": True, "explored": r.explored}, f"true (states explored: {r.explored})")
        return EXIT_FOUND
    pre = [s.describe(g) for s in r.prefix]
    cyc = [s.describe(g) for s in r.cycle]
    text = "false\ncounterexample prefix:\n" + "\n".join("  " + x for x in pre) + "\ncycle:\n" + \
        "\n".join("  " + x for x in cyc)
    _emit(cfg, {"holds": False, "prefix": pre, "cycle": cyc}, text)
    return EXIT_NONE


def cmd_fmt(ns) -> int:
    net = resolve_net(ns.net)
    sys.stdout.write(format_net(net))
    return EXIT_FOUND


def cmd_validate(ns) -> int:
    net = resolve_net(ns.net)
    for w in net.warnings:
        print(f"warning: {w}")
    print(f"ok: {net.name}: {len(net.places)} places, {len(net.transitions)} transitions, "
          f"{len(net.params())} parameters; initial constraint {net.k0}")
    return EXIT_FOUND


def cmd_bench(ns) -> int:
    from .regress import run_bench, run_known_results
    if ns.known_results:
        ok = run_known_results(verbose=True)
    else:
        ok = run_bench(engines=ns.engines.split(","), max_states=ns.max_states, nets=ns.nets,
                       json_out=ns.json)
    return EXIT_FOUND if ok else EXIT_NONE


# ---------------------------------------------------------------------------

def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="tempo-net", description="Analysis of parametric time Petri nets.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="verb", required=True)

    def common(p, net=True):
        if net:
            p.add_argument("net", help="net file (.tpn or .json) or bundled net name")
        p.add_argument("--param", action="append", default=[], metavar="NAME=VALUE")
        p.add_argument("--max-states", type=int, default=50_000)
        p.add_argument("--json", action="store_true")
        p.add_argument("--workers", type=int, default=1)
        return p

    p = common(sub.add_parser("check", help="EF reachability / synthesis"))
    p.add_argument("--prop", required=True)
    p.add_argument("--engine", default="fold-global")
    p.add_argument("--max-sols", type=int)
    p.add_argument("--max-depth", type=int)
    p.add_argument("--within", help="time window [l,u] for time-bounded reachability")
    p.add_argument("--extra-param", action="append", default=[], metavar="NAME",
                   help="declare a synthesis parameter usable in --within and --prop")
    p.set_defaults(fn=cmd_check)

    p = common(sub.add_parser("synth", help="AG or EF parameter synthesis"))
    p.add_argument("--goal", required=True, help='"AG <prop>" or "EF <prop>"')
    p.add_argument("--engine", default="fold-global")
    p.add_argument("--max-sols", type=int)
    p.add_argument("--max-rounds", type=int, default=200)
    p.set_defaults(fn=cmd_synth)

    p = common(sub.add_parser("response", help="bounded response phi ~> psi within b"))
    p.add_argument("--phi", required=True)
    p.add_argument("--psi", required=True)
    p.add_argument("--b", required=True)
    p.set_defaults(fn=cmd_response)

    p = common(sub.add_parser("run", help="exploration under a priority strategy"))
    p.add_argument("--strategy", required=True, help='"all" or "priority(t3, ...)"')
    p.add_argument("--prop", default="true")
    p.add_argument("--max-sols", type=int)
    p.add_argument("--merge", choices=("equal", "subsume"), default="equal")
    p.set_defaults(fn=cmd_run)

    p = common(sub.add_parser("mc", help="A/E model checking of the non-nested timed fragment"))
    p.add_argument("--quant", required=True, choices=("A", "E"))
    p.add_argument("--formula", required=True)
    p.add_argument("--time-bound")
    p.set_defaults(fn=cmd_mc)

    p = common(sub.add_parser("sim", help="random run of the sampled concrete semantics"))
    p.add_argument("--step", default="1")
    p.add_argument("--bound", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=cmd_sim)

    p = common(sub.add_parser("search-concrete", help="breadth-first search on the sampled semantics"))
    p.add_argument("--prop", required=True)
    p.add_argument("--step", default="1")
    p.add_argument("--within")
    p.add_argument("--max-sols", type=int)
    p.add_argument("--max-depth", type=int)
    p.set_defaults(fn=cmd_search_concrete)

    p = common(sub.add_parser("ltl", help="LTL checking on the sampled semantics"))
    p.add_argument("--formula", required=True)
    p.add_argument("--step", default="1")
    p.add_argument("--time-bound")
    p.set_defaults(fn=cmd_ltl)

    p = sub.add_parser("fmt", help="print a net in canonical form")
    p.add_argument("net")
    p.set_defaults(fn=cmd_fmt)

    p = sub.add_parser("validate", help="load a net and report its invariants")
    p.add_argument("net")
    p.set_defaults(fn=cmd_validate)

    p = sub.add_parser("bench", help="benchmark query matrix over the bundled nets")
    p.add_argument("--known-results", action="store_true",
                   help="replay every published reference example instead of the query matrix")
    p.add_argument("--engines", default=",".join(ENGINES))
    p.add_argument("--nets", nargs="*", default=None)
    p.add_argument("--max-states", type=int, default=2_000)
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=cmd_bench)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    ap = _parser()
    try:
        ns = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_FOUND
    logging.basicConfig(level=logging.INFO if ns.verbose else logging.ERROR, format="%(levelname)s: %(message)s")
    try:
        return ns.fn(ns)
    except BudgetExceeded as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (UsageError, ParseError, PropError, NetError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
