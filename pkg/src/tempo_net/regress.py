"""Benchmark query matrix and the replay of published reference results.

The matrix asks EF (p > n) for every place p and n in 0..2, plus AG
1-safety, on the bundled producer-consumer, scheduling and tutorial nets.
Verdicts and constraints are compared with ``nets/golden.json``.
"""
from __future__ import annotations

import json
import time
from dataclasses import dataclass
from importlib import resources
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from .errors import BudgetExceeded
from .folding import ENGINES, search
from .linarith import Constraint, Formula, formula_equivalent, parse_constraint, parse_formula
from .net import NetSpec, load_bundled
from .props import KBounded, PlaceCmp, parse_interval, parse_prop, parse_temporal
from .linarith import LinExpr

BENCH_NETS = ("producer", "scheduling", "tutorial")


def load_golden() -> dict:
    ref = resources.files("tempo_net").joinpath("nets", "golden.json")
    return json.loads(ref.read_text(encoding="utf-8"))


@dataclass
class Outcome:
    net: str
    query: str
    engine: str
    verdict: str              # "reachable", "unreachable" or "budget"
    constraint: Optional[str]
    explored: int
    seconds: float


def ef_query(net: NetSpec, place: str, n: int, engine: str, max_states: int) -> Outcome:
    prop = PlaceCmp(place, ">", LinExpr.const(n))
    q = f"EF ({place} > {n})"
    t = time.perf_counter()
    try:
        o = search(net, prop, engine, max_sols=1, max_states=max_states)
    except BudgetExceeded as exc:
        return Outcome(net.name, q, engine, "budget", None, exc.explored, time.perf_counter() - t)
    dt = time.perf_counter() - t
    if o.witnesses:
        return Outcome(net.name, q, engine, "reachable", str(o.witnesses[0].param_constraint), o.explored, dt)
    return Outcome(net.name, q, engine, "unreachable", None, o.explored, dt)


def ag_query(net: NetSpec, max_states: int) -> Outcome:
    from .synthesis import ag_synthesis
    t = time.perf_counter()
    try:
        r = ag_synthesis(net, KBounded(LinExpr.const(1)), max_states=max_states)
    except BudgetExceeded as exc:
        return Outcome(net.name, "AG k-bounded(1)", "ag", "budget", None, exc.explored, time.perf_counter() - t)
    return Outcome(net.name, "AG k-bounded(1)", "ag", "done", str(r.constraint), r.explored,
                   time.perf_counter() - t)


def _agrees(o: Outcome, golden: dict, net: NetSpec) -> Tuple[bool, str]:
    g = golden.get(o.net, {}).get(o.query)
    if g is None:
        return True, "no golden entry"
    if o.verdict == "budget":
        # running out of budget never contradicts a golden verdict
        return True, "budget"
    if o.query.startswith("AG"):
        ok = formula_equivalent(parse_formula(o.constraint, net.resolver()), parse_formula(g["constraint"], net.resolver()))
        return ok, "" if ok else f"expected {g['constraint']}"
    if g["verdict"] != o.verdict and g["verdict"] != "budget":
        return False, f"expected {g['verdict']}"
    if o.verdict == "reachable" and o.engine == "fold-global" and g.get("constraint"):
        ok = formula_equivalent(parse_formula(o.constraint, net.resolver()),
                                parse_formula(g["constraint"], net.resolver()))
        return ok, "" if ok else f"expected {g['constraint']}"
    return True, ""


def run_bench(engines: Sequence[str] = ENGINES, max_states: int = 2_000, nets: Optional[Sequence[str]] = None,
              json_out: bool = False, out=print) -> bool:
    golden = load_golden()
    rows: List[Tuple[Outcome, bool, str]] = []

    def record(o: Outcome, net: NetSpec) -> None:
        ok, why = _agrees(o, golden, net)
        rows.append((o, ok, why))
        if not json_out:
            c = o.constraint if o.constraint is not None else "-"
            out(f"{'ok  ' if ok else 'FAIL'} {o.net:<11} {o.query:<20} {o.engine:<11} {o.verdict:<11} "
                f"{o.explored:>6} {o.seconds:8.2f}s  {c}{'  [' + why + ']' if why and not ok else ''}")

    for name in nets or BENCH_NETS:
        net = load_bundled(name)
        for place in net.places:
            for n in range(3):
                for e in engines:
                    record(ef_query(net, place, n, e, max_states), net)
        record(ag_query(net, max_states * 10), net)
    if json_out:
        out(json.dumps([dict(o.__dict__, ok=ok, note=why) for o, ok, why in rows], indent=2))
    return all(ok for _, ok, _ in rows)


# ---------------------------------------------------------------------------
# reference results

def _eqv(net: NetSpec, got, want: str) -> bool:
    if isinstance(got, Constraint):
        got = Formula([got])
    return formula_equivalent(got, parse_formula(want, net.resolver()))


def _checks() -> List[Tuple[str, Callable[[], Tuple[bool, str]]]]:
    from .synthesis import ag_synthesis, ef_in_time, model_check, strat_explore, Priority, with_extra_params
    from .symbolic import initial_state, successors, R1S

    def ef(name, prop, want, marking=None):
        def run():
            net = load_bundled(name)
            o = search(net, parse_prop(prop, net), max_sols=1)
            if not o.witnesses:
                return False, "no witness"
            w = o.witnesses[0]
            ok = _eqv(net, w.param_constraint, want)
            if marking is not None:
                ok = ok and {p: int(str(v)) for p, v in w.marking.items()} == marking
            return ok, w.describe()
        return run

    def ag(name, want):
        def run():
            net = load_bundled(name)
            r = ag_synthesis(net, KBounded(LinExpr.const(1)))
            return _eqv(net, r.constraint, want), str(r.constraint)
        return run

    def no_solution(name, engine):
        def run():
            net = load_bundled(name)
            o = search(net, parse_prop("not k-bounded(1)", net), engine)
            return not o.witnesses, f"{o.explored} states"
        return run

    def first_fire():
        net = load_bundled("inhibitor")
        s0 = initial_state(net, R1S)
        kids = [c for lab, c in successors(s0) if lab.startswith("tick")]
        for k in kids:
            for lab, c in successors(k):
                if lab == "t1":
                    want = f"{net.k0} and l1 <= u3"
                    return _eqv(net, c.param_constraint(), want), str(c.param_constraint())
        return False, "t1 never fires first"

    def strategy():
        net = load_bundled("producer")
        r = strat_explore(net, Priority(("t3",)), parse_prop("k-bounded(1)", net))
        bad = strat_explore(net, Priority(("t3",)), parse_prop("not k-bounded(1)", net))
        return len(r.states) == 12 and len(r.witnesses) == 12 and not bad.witnesses, f"{len(r.states)} states"

    def in_time():
        net = with_extra_params(load_bundled("scheduling"), ["b"])
        w = parse_interval("[0, b]", net)
        ws = ef_in_time(net, parse_prop("not k-bounded(1)", net), w, max_sols=4)
        target = "2*a <= b and 30 <= a and a <= 48"
        hits = [x for x in ws if _eqv(net, x.param_constraint, target)]
        return bool(hits), "; ".join(str(x.param_constraint) for x in ws)

    def mc(quant, formula, tb, want):
        def run():
            net = load_bundled("tutorial")
            r = model_check(net, quant, parse_temporal(formula, net), tb)
            return r.holds == want, str(r.holds).lower()
        return run

    return [
        ("EF not k-bounded(1), producer: p2=2 when 4 <= a", ef("producer", "not k-bounded(1)", "4 <= a",
                                                              {"p2": 2, "p4": 1, "p5": 1})),
        ("EF p2 > 1, producer: 4 <= a", ef("producer", "p2 > 1", "4 <= a")),
        ("EF diff>(t1,t3,10), producer: 6 <= a", ef("producer", "diff>(t1, t3, 10)", "6 <= a")),
        ("AG k-bounded(1), producer: 0 <= a < 4", ag("producer", "0 <= a and a < 4")),
        ("AG k-bounded(1), scheduling: 48 < a <= 70", ag("scheduling", "48 < a and a <= 70")),
        ("AG k-bounded(1), tutorial: false", ag("tutorial", "false")),
        ("AG k-bounded(1), parametric marking: x1 < 1 and x3 < 1",
         ag("producer_pmark", "x1 < 1 and x3 < 1 and 0 <= x1 and 0 <= x3 and a = 1")),
        ("first firing of t1 adds l1 <= u3", first_fire),
        ("folding terminates without solution (fold-global)", no_solution("producer_safe", "fold-global")),
        ("folding terminates without solution (fold-branch)", no_solution("producer_safe", "fold-branch")),
        ("priority(t3): 12 states, all 1-bounded", strategy),
        ("EF within [0,b], scheduling: 2a <= b and a <= 48", in_time),
        ("tutorial A <> start >= 2", mc("A", "<> start >= 2", None, True)),
        ("tutorial E <[0,20]> start >= 2 is false", mc("E", "<[0,20]> start >= 2", 20, False)),
        ("tutorial E <[0,30]> start >= 2 is true", mc("E", "<[0,30]> start >= 2", 30, True)),
        ("tutorial E k-bounded(1) U[0,30] start >= 2 is true",
         mc("E", "k-bounded(1) U [0,30] start >= 2", 90, True)),
        ("tutorial A k-bounded(2) U[0,90] start >= 3 is false",
         mc("A", "k-bounded(2) U [0,90] start >= 3", 90, False)),
        ("tutorial E k-bounded(2) U[0,90] start >= 3 is true",
         mc("E", "k-bounded(2) U [0,90] start >= 3", 90, True)),
    ]


def run_known_results(verbose: bool = True, out=print) -> bool:
    ok_all = True
    for name, fn in _checks():
        t = time.perf_counter()
        try:
            ok, detail = fn()
        except BudgetExceeded as exc:
            ok, detail = False, f"budget exceeded: {exc}"
        ok_all &= ok
        if verbose:
            out(f"{'PASS' if ok else 'FAIL'}  {name}  ({detail}; {time.perf_counter() - t:.2f}s)")
    return ok_all
