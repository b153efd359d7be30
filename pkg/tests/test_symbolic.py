from __future__ import annotations

import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tempo_net.concrete import Mode, TickFlag, fire, firable, initial, mte, tick
from tempo_net.folding import project_now, project_now_direct
from tempo_net.linarith import (Constraint, LinExpr, eq, equivalent, find_model, implies, is_sat, le,
                                parse_constraint)
from tempo_net.net import instantiate, load_bundled
from tempo_net.symbolic import R1S, R2S, R3S, delta, initial_state, successors, sym_fire, sym_tick

from conftest import BENCH, sample_valuation


def test_first_tick_on_inhibitor_net():
    n = load_bundled("inhibitor")
    (s,) = sym_tick(initial_state(n))
    t0 = LinExpr.var(delta(0))
    clocks = dict(zip(n.labels, s.clocks))
    assert clocks == {"t1": t0, "t2": LinExpr.const(0), "t3": t0}
    assert s.tick_flag == TickFlag.NOT_OK
    res = n.resolver()
    r = lambda name: delta(0) if name == "T0" else res(name)
    assert implies(s.constraint, parse_constraint("0 <= T0 and T0 <= u1 and T0 <= u3", r))


def test_first_fire_adds_ordering():
    n = load_bundled("inhibitor")
    (s,) = sym_tick(initial_state(n))
    (c,) = sym_fire(s, n.transition("t1"))
    assert c.describe() == "B=1 C=1"
    want = n.k0 & parse_constraint("l1 <= u3", n.resolver())
    assert equivalent(c.param_constraint(), want)


def test_initial_successors_on_inhibitor_net():
    n = load_bundled("inhibitor")
    labels = sorted(lab for lab, _ in successors(initial_state(n)))
    assert labels == ["t1", "t3", "tick(T0)"]


def test_ground_net3_start_has_only_a_tick():
    n = load_bundled("net3")
    n = n.with_k0(n.k0 & parse_constraint("l = 3 and u = 4", n.resolver()))
    assert [lab for lab, _ in successors(initial_state(n))] == ["tick(T0)"]


def test_r3s_alternates():
    n = load_bundled("producer")
    s = initial_state(n, R3S)
    assert [lab for lab, _ in successors(s, R3S)] == ["tick(T0)"]
    (_, t) = successors(s, R3S)[0]
    labs = [lab for lab, _ in successors(t, R3S)]
    assert "tick(T1)" not in labs


def test_parametric_marking_splits():
    n = load_bundled("producer_pmark")
    # t2 is enabled iff 1 <= x1: both branches are explored
    kids = sym_tick(initial_state(n))
    assert len(kids) >= 2
    r = n.resolver()
    assert any(implies(k.param_constraint(), parse_constraint("1 <= x1", r)) for k in kids)
    assert any(implies(k.param_constraint(), parse_constraint("x1 < 1", r)) for k in kids)


def test_time_bound_prunes_ticks():
    n = load_bundled("net3")
    s = initial_state(n, R2S(1))
    (t,) = sym_tick(s, R2S(1))
    # t1 needs a clock of at least 2: nothing can fire before the bound
    assert not [lab for lab, _ in successors(t, R2S(1)) if not lab.startswith("tick")]


def test_core_matches_direct_projection():
    n = load_bundled("producer")
    rng = random.Random(3)
    s = initial_state(n)
    for _ in range(12):
        a = project_now(s).constraint
        b = project_now_direct(s)
        assert equivalent(a, b)
        s = rng.choice(successors(s))[1]


# ---------------------------------------------------------------------------
# round trips between the symbolic and concrete semantics

def _walk(net, rng, depth):
    s = initial_state(net)
    path = []
    for _ in range(depth):
        kids = successors(s)
        if not kids:
            break
        lab, s2 = rng.choice(kids)
        # one fresh delay per tick, never reused
        assert s2.fresh_counter == s.fresh_counter + (1 if lab.startswith("tick") else 0)
        s = s2
        path.append(lab)
    return s, path


def _replay(net, point, path):
    val = {v.name: point.get(v, Fraction(0)) for v in net.params()}
    g = instantiate(net, val)
    c = initial(g, Mode.R1)
    k = 0
    for lab in path:
        if lab.startswith("tick"):
            c = tick(c, point[delta(k)], g)
            k += 1
        else:
            c = fire(c, lab, g)
    return g, c


SYM_NETS = BENCH + ("producer_pmark",)


@settings(max_examples=120, deadline=None)
@given(name=st.sampled_from(SYM_NETS), rnd=st.randoms(use_true_random=False), depth=st.integers(1, 8))
def test_symbolic_witness_replays_concretely(name, rnd, depth):
    net = load_bundled(name)
    s, path = _walk(net, rnd, depth)
    point = find_model(s.constraint)
    assert point is not None
    g, c = _replay(net, point, path)
    assert list(c.marking) == [int(e.evaluate(point)) for e in s.marking]
    assert list(c.clocks) == [e.evaluate(point) for e in s.clocks]


@settings(max_examples=120, deadline=None)
@given(name=st.sampled_from(BENCH), rnd=st.randoms(use_true_random=False), length=st.integers(1, 6))
def test_concrete_run_has_symbolic_counterpart(name, rnd, length):
    net = load_bundled(name)
    val = sample_valuation(name, rnd)
    g = instantiate(net, val)
    pins = Constraint(eq(LinExpr.var(v), LinExpr.const(Fraction(val[v.name]))) for v in net.params())
    c = initial(g, Mode.R1)
    cands = [initial_state(net)]
    for _ in range(length):
        moves = [("fire", i) for i in firable(c, g)]
        if c.tick_flag == TickFlag.OK:
            moves.append(("tick", None))
        if not moves:
            break
        kind, i = rnd.choice(moves)
        if kind == "fire":
            c = fire(c, i, g)
            nxt = [s2 for s in cands for lab, s2 in successors(s) if lab == g.labels[i]]
        else:
            b = mte(c, g)
            d = Fraction(rnd.randint(0, 8)) if b is None else b * Fraction(rnd.randint(0, 3), 3)
            pin = eq(LinExpr.var(delta(cands[0].fresh_counter)), LinExpr.const(d))
            c = tick(c, d, g)
            pins = pins & pin
            nxt = [s2 for s in cands for lab, s2 in successors(s) if lab.startswith("tick")]
        cands = [s2 for s2 in nxt if is_sat(s2.constraint & pins)]
        assert cands, "no symbolic successor admits the concrete step"
    assert any(
        all(is_sat(s.constraint & pins & eq(e, LinExpr.const(m))) for e, m in zip(s.marking, c.marking))
        for s in cands
    )


@settings(max_examples=60, deadline=None)
@given(name=st.sampled_from(BENCH), rnd=st.randoms(use_true_random=False), depth=st.integers(1, 6))
def test_markings_and_clocks_nonnegative(name, rnd, depth):
    net = load_bundled(name)
    s, _ = _walk(net, rnd, depth)
    for e in list(s.marking) + list(s.clocks):
        assert implies(s.constraint, Constraint.TRUE & le(LinExpr.const(0), e))
