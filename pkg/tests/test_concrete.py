from __future__ import annotations

import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tempo_net import concrete as cs
from tempo_net.concrete import (ClockOutOfInterval, DelayTooLarge, InactiveTransition, Mode, SampledGraph,
                                SemanticsError, TickFlag, explore, fire, firable, initial, interval_can_fire,
                                interval_fire_step, interval_initial, interval_time_step, ltl_check, mte,
                                sampled_search, tick)
from tempo_net.errors import BudgetExceeded
from tempo_net.net import instantiate, load_bundled
from tempo_net.props import parse_ltl, parse_prop

from conftest import BENCH, sample_valuation


@pytest.fixture
def n34(ground):
    return ground("net3", l=3, u=4)


@pytest.fixture
def inh(ground):
    return ground("inhibitor_ground")


def clocks(g, s):
    return {t: c for t, c in zip(g.labels, s.clocks)}


def test_mte_values(n34, inh):
    assert mte(initial(n34), n34) == 6
    # t2 is inhibited and contributes nothing
    assert mte(initial(inh), inh) == 2


def test_mte_infinite_without_active_bounds(ground):
    g = ground("producer", a=1)
    s = cs.ConcreteState((0, 0, 0, 0, 0), initial(g).clocks)
    assert mte(s, g) is None


def test_tick_and_fire_trace(inh):
    s = tick(initial(inh), 2, inh)
    assert clocks(inh, s) == {"t1": 2, "t2": 0, "t3": 2}
    s = fire(s, "t3", inh)
    assert dict(inh.bag(s.marking).items()) == {"A": 1, "E": 1}
    assert clocks(inh, s) == {"t1": 2, "t2": 0, "t3": 0}
    s = fire(tick(s, 3, inh), "t1", inh)
    assert dict(inh.bag(s.marking).items()) == {"C": 1, "E": 1}


def test_tick_zero_only_touches_bookkeeping(n34):
    s0 = initial(n34, Mode.R2)
    s1 = tick(s0, 0, n34)
    assert s1.marking == s0.marking and s1.clocks == s0.clocks
    assert s1.tick_flag == TickFlag.NOT_OK and s1.global_time == 0


def test_errors_are_distinct(n34, inh):
    with pytest.raises(DelayTooLarge):
        tick(initial(n34), 7, n34)
    with pytest.raises(SemanticsError):
        tick(initial(n34), -1, n34)
    with pytest.raises(InactiveTransition):
        fire(initial(inh), "t2", inh)
    with pytest.raises(ClockOutOfInterval):
        fire(initial(n34), "t1", n34)
    with pytest.raises(SemanticsError):
        tick(tick(initial(n34, Mode.R1), 1, n34), 1, n34)


def test_interval_oracle_trace(inh):
    s = interval_time_step(interval_initial(inh), 2, inh)
    i1, i2, i3 = (inh.index(t) for t in ("t1", "t2", "t3"))
    assert (s.lower[i1], s.upper[i1]) == (3, 4)
    assert (s.lower[i3], s.upper[i3]) == (0, 0)
    s = interval_fire_step(s, "t3", inh)
    assert (s.lower[i2], s.upper[i2]) == (3, 4)
    with pytest.raises(DelayTooLarge):
        interval_time_step(interval_initial(inh), 3, inh)


def test_sampled_search_net3(ground):
    not1 = lambda g: parse_prop("not k-bounded(1)", g.spec)
    g34 = ground("net3", l=3, u=4)
    r = sampled_search(g34, not1(g34), max_sols=1)
    assert r.solutions and g34.bag(r.solutions[0][0].marking)["p2"] == 2
    g23 = ground("net3", l=2, u=3)
    assert not sampled_search(g23, not1(g23)).solutions
    assert not sampled_search(g34, parse_prop("not k-bounded(2)", g34.spec)).solutions


def test_sampled_search_global_time(n34):
    p = parse_prop("not k-bounded(1) and in-time [5, inf]", n34.spec)
    r = sampled_search(n34, p, max_sols=1, time_bound=10)
    assert r.solutions[0][0].global_time == 8


def test_sampled_search_budget(ground):
    g = ground("producer", a=7)
    with pytest.raises(BudgetExceeded):
        sampled_search(g, parse_prop("p1 > 5", g.spec), max_states=200)


def test_ltl_examples(n34):
    f = parse_ltl("([]<> p3 = 0) /\\ ([]<> p3 = 1)", n34.spec)
    assert ltl_check(n34, f).holds
    r = ltl_check(n34, parse_ltl("<> (p2 = 2)", n34.spec))
    assert not r.holds and r.cycle
    assert ltl_check(n34, parse_ltl("[] true", n34.spec)).holds


def test_ltl_budget(n34):
    with pytest.raises(BudgetExceeded):
        ltl_check(n34, parse_ltl("[] true", n34.spec), state_budget=10)


def test_single_successor_at_start(n34):
    sg = SampledGraph(n34)
    assert [lab for lab, _ in sg.successors(sg.initial())] == ["tick"]


def test_r0_r1_reach_same_markings(n34):
    r0 = {s.marking for s in explore(SampledGraph(n34))}
    # alternation: a tick may only follow a firing; merge by reaching with
    # ticks of one step that can be chained through a zero firing set
    seen, stack = set(), [initial(n34, Mode.R1)]
    while stack:
        s = stack.pop()
        if s in seen:
            continue
        seen.add(s)
        for i in firable(s, n34):
            stack.append(fire(s, i, n34))
        if s.tick_flag == TickFlag.OK:
            for k in (1, 2, 3, 4, 5, 6):
                b = mte(s, n34)
                if b is None or k <= b:
                    stack.append(tick(s, k, n34))
    assert {s.marking for s in seen} == r0


# ---------------------------------------------------------------------------
# randomized runs: concrete clocks against the interval oracle

def _delay(rng: random.Random, bound):
    if bound is None:
        return Fraction(rng.randint(0, 12), rng.choice([1, 2]))
    return bound * Fraction(rng.randint(0, 4), 4)


def _related(g, s, o) -> bool:
    if s.marking != o.marking:
        return False
    for i in range(len(g.labels)):
        if not g.enabled(s.marking, i):
            if s.clocks[i] != 0:
                return False
            continue
        if g.upper[i] is not None and s.clocks[i] != g.upper[i] - o.upper[i]:
            return False
        if max(Fraction(0), g.lower[i] - s.clocks[i]) != o.lower[i]:
            return False
    return True


@pytest.mark.parametrize("name", BENCH)
@settings(max_examples=500, deadline=None)
@given(rnd=st.randoms(use_true_random=False))
def test_bisimulation_random_runs(name, rnd):
    g = instantiate(load_bundled(name), sample_valuation(name, rnd))
    s, o = initial(g), interval_initial(g)
    gt = Fraction(0)
    # untagged state carrying a global clock, as the sampled graph builds it
    s2 = cs.ConcreteState(s.marking, s.clocks, None, Fraction(0))
    for _ in range(25):
        assert _related(g, s, o)
        assert set(firable(s, g)) == {i for i in range(len(g.labels)) if interval_can_fire(o, i, g)}
        fs = firable(s, g)
        if fs and rnd.random() < 0.5:
            i = rnd.choice(fs)
            s, o, s2 = fire(s, i, g), interval_fire_step(o, i, g), fire(s2, i, g)
        else:
            b = mte(s, g)
            d = _delay(rnd, b)
            s, o = tick(s, d, g), interval_time_step(o, d, g)
            s2 = tick(s2, d, g)
            gt += d
            if b is not None:
                # one step beyond the maximal delay is refused by both sides
                with pytest.raises(DelayTooLarge):
                    tick(s, b - d + 1, g)
                with pytest.raises(DelayTooLarge):
                    interval_time_step(o, b - d + 1, g)
        # global time is the sum of the delays
        assert s2.global_time == gt and s2.marking == s.marking


@settings(max_examples=200, deadline=None)
@given(rnd=st.randoms(use_true_random=False), name=st.sampled_from(BENCH))
def test_mte_drops_by_delay(rnd, name):
    g = instantiate(load_bundled(name), sample_valuation(name, rnd))
    s = initial(g)
    for _ in range(10):
        b = mte(s, g)
        if b is not None:
            d = _delay(rnd, b)
            s2 = tick(s, d, g)
            assert mte(s2, g) == b - d
            s = s2
        fs = firable(s, g)
        if not fs:
            break
        s = fire(s, rnd.choice(fs), g)
