"""Acceptance criteria, one PASS/FAIL line each.

Run with ``pytest tests/test_acceptance.py -v`` (lines appear inline) or
``python tests/test_acceptance.py`` for just the summary.  Constraint
results are compared up to logical equivalence (implication both ways);
verdicts and state counts are compared exactly.
"""
from __future__ import annotations

import subprocess
import sys
import time
from pathlib import Path

import pytest

from tempo_net.concrete import ltl_check, sampled_search
from tempo_net.errors import BudgetExceeded
from tempo_net.folding import search
from tempo_net.linarith import (Formula, LinExpr, formula_equivalent, ge, implies, is_sat, le, parse_constraint,
                                parse_formula)
from tempo_net.net import instantiate, load_bundled
from tempo_net.props import KBounded, parse_interval, parse_ltl, parse_prop, parse_temporal
from tempo_net.symbolic import R1S, initial_state, successors
from tempo_net.synthesis import Priority, ag_synthesis, ef_in_time, model_check, strat_explore, with_extra_params

HERE = Path(__file__).resolve().parent

# tolerances, pinned
AG_SECONDS = 60.0
SYM_BUDGET = 10_000
SUITE_SECONDS = 300.0


def eqv(net, got, want: str) -> bool:
    if not isinstance(got, Formula):
        got = Formula([got])
    return formula_equivalent(got, parse_formula(want, net.resolver()))


def ef_overflow():
    n = load_bundled("producer")
    w = search(n, parse_prop("not k-bounded(1)", n), max_sols=1).witnesses[0]
    ok = w.marking["p2"] == 2 and eqv(n, w.param_constraint, "4 <= a")
    return ok, w.describe()


def ef_clock_difference():
    n = load_bundled("producer")
    w = search(n, parse_prop("diff>(t1, t3, 10)", n), max_sols=1).witnesses[0]
    return eqv(n, w.param_constraint, "6 <= a"), str(w.param_constraint)


def ag_three_nets():
    want = {"producer": "0 <= a and a < 4", "scheduling": "48 < a and a <= 70", "tutorial": "false"}
    ok, notes = True, []
    for name, target in want.items():
        n = load_bundled(name)
        t = time.perf_counter()
        r = ag_synthesis(n, KBounded(LinExpr.const(1)))
        dt = time.perf_counter() - t
        ok &= eqv(n, r.constraint, target) and dt < AG_SECONDS
        notes.append(f"{name}: {r.constraint} in {dt:.1f}s")
    return ok, "; ".join(notes)


def ag_parametric_marking():
    n = load_bundled("producer_pmark")
    r = ag_synthesis(n, KBounded(LinExpr.const(1)))
    # a = 1 is pinned by the initial constraint of this net
    ok = eqv(n, r.constraint, "x1 < 1 and x3 < 1 and 0 <= x1 and 0 <= x3 and a = 1")
    return ok, str(r.constraint)


def first_fire():
    n = load_bundled("inhibitor")
    for lab, k in successors(initial_state(n, R1S)):
        if not lab.startswith("tick"):
            continue
        for lab2, c in successors(k):
            if lab2 == "t1":
                return eqv(n, c.param_constraint(), f"{n.k0} and l1 <= u3"), str(c.param_constraint())
    return False, "t1 never fires first"


def folding_terminates():
    n = load_bundled("producer_safe")
    goal = parse_prop("not k-bounded(1)", n)
    notes, ok = [], True
    for engine in ("fold-branch", "fold-global"):
        o = search(n, goal, engine)
        ok &= not o.witnesses
        notes.append(f"{engine}: no solution after {o.explored} states")
    try:
        search(n, goal, "sym", max_states=SYM_BUDGET)
        ok = False
        notes.append("sym: finished within budget")
    except BudgetExceeded:
        notes.append(f"sym: over {SYM_BUDGET} states")
    return ok, "; ".join(notes)


def strategy():
    n = load_bundled("producer")
    r = strat_explore(n, Priority(("t3",)), parse_prop("k-bounded(1)", n))
    ok = len(r.states) == 12 and len(r.witnesses) == len(r.states)
    return ok, f"{len(r.states)} states, {len(r.witnesses)} 1-bounded"


def timed_reachability():
    n = with_extra_params(load_bundled("scheduling"), ["b"])
    ws = ef_in_time(n, parse_prop("not k-bounded(1)", n), parse_interval("[0, b]", n), max_sols=4)
    r = n.resolver()
    both = parse_constraint("2*a <= b", r) & parse_constraint("a <= 48", r)
    sched = any(implies(w.param_constraint, both) and eqv(n, w.param_constraint, "2*a <= b and 30 <= a and a <= 48")
                for w in ws)
    g = load_bundled("net3")
    g = g.with_k0(g.k0 & parse_constraint("l = 3 and u = 4", g.resolver()))
    hits = ef_in_time(g, parse_prop("not k-bounded(1)", g), parse_interval("[5, 10]", g), max_sols=1)
    inside = bool(hits) and is_sat(hits[0].full_constraint & ge(hits[0].state.global_time, 5)
                                   & le(hits[0].state.global_time, 10))
    return sched and inside, f"scheduling hit: {sched}; net3(3,4) within [5,10]: {inside}"


MC_CASES = [
    ("A", "<> start >= 2", None, True),
    ("E", "<[0,30]> start >= 2", 30, True),
    ("E", "<[0,20]> start >= 2", 20, False),
    ("E", "k-bounded(1) U [0,30] start >= 2", 90, True),
    ("A", "k-bounded(2) U [0,90] start >= 3", 90, False),
    ("E", "k-bounded(2) U [0,90] start >= 3", 90, True),
]


def model_checking():
    n = load_bundled("tutorial")
    got = [model_check(n, q, parse_temporal(f, n), tb).holds for q, f, tb, _ in MC_CASES]
    want = [w for *_, w in MC_CASES]
    return got == want, " ".join(str(g).lower() for g in got)


def concrete_analysis():
    n = load_bundled("net3")
    g23, g34 = instantiate(n, {"l": 2, "u": 3}), instantiate(n, {"l": 3, "u": 4})
    safe23 = not sampled_search(g23, parse_prop("not k-bounded(1)", n)).solutions
    unsafe34 = bool(sampled_search(g34, parse_prop("not k-bounded(1)", n), max_sols=1).solutions)
    safe34_2 = not sampled_search(g34, parse_prop("not k-bounded(2)", n)).solutions
    live = ltl_check(g34, parse_ltl("([]<> p3 = 0) /\\ ([]<> p3 = 1)", n)).holds
    cex = ltl_check(g34, parse_ltl("<> (p2 = 2)", n))
    ok = safe23 and unsafe34 and safe34_2 and live and not cex.holds and bool(cex.cycle)
    return ok, (f"net3(2,3) 1-safe={safe23}; net3(3,4) 1-safe={not unsafe34} 2-safe={safe34_2}; "
                f"LTL holds={live}; <>(p2=2) counterexample={not cex.holds}")


PROPERTY_SUITES = [
    "test_concrete.py::test_bisimulation_random_runs",
    "test_symbolic.py::test_symbolic_witness_replays_concretely",
    "test_symbolic.py::test_concrete_run_has_symbolic_counterpart",
    "test_linarith.py::test_projection_point_oracle",
    "test_folding.py::test_subsumption_agrees_with_sampling",
]


def property_suites():
    t = time.perf_counter()
    r = subprocess.run([sys.executable, "-m", "pytest", "-q", "-p", "no:cacheprovider",
                        *[str(HERE / s) for s in PROPERTY_SUITES]],
                       cwd=HERE.parent, capture_output=True, text=True)
    dt = time.perf_counter() - t
    tail = r.stdout.strip().splitlines()[-1] if r.stdout.strip() else r.stderr.strip()[-200:]
    return r.returncode == 0 and dt < SUITE_SECONDS, f"{tail}; wall {dt:.0f}s (limit {SUITE_SECONDS:.0f}s)"


CRITERIA = [
    ("EF-synthesis, producer: p2=2 when 4 <= a", ef_overflow),
    ("clock difference, producer: 6 <= a", ef_clock_difference),
    ("AG-synthesis on producer, scheduling, tutorial", ag_three_nets),
    ("parametric initial marking", ag_parametric_marking),
    ("first-fire state class adds l1 <= u3", first_fire),
    ("folding termination and unfolded divergence", folding_terminates),
    ("priority(t3) strategy: 12 states", strategy),
    ("timed reachability", timed_reachability),
    ("tutorial model checking verdicts", model_checking),
    ("concrete sampled analysis of net3", concrete_analysis),
    ("property suites", property_suites),
]


@pytest.mark.parametrize("title,fn", CRITERIA, ids=[c[0] for c in CRITERIA])
def test_criterion(title, fn, capsys):
    t = time.perf_counter()
    ok, detail = fn()
    with capsys.disabled():
        print(f"\n{'PASS' if ok else 'FAIL'}  {title}  ({detail}; {time.perf_counter() - t:.1f}s)")
    assert ok, detail


if __name__ == "__main__":
    bad = 0
    for title, fn in CRITERIA:
        ok, detail = fn()
        bad += not ok
        print(f"{'PASS' if ok else 'FAIL'}  {title}  ({detail})")
    sys.exit(1 if bad else 0)
