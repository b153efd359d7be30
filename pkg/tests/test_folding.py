from __future__ import annotations

import random
from collections import defaultdict
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tempo_net.errors import BudgetExceeded
from tempo_net.folding import (ENGINES, VisitedMap, canonical_key, project_now, search, subsumes)
from tempo_net.linarith import Constraint, Formula, LinExpr, equivalent, find_model, ge, is_sat, le, negate
from tempo_net.net import load_bundled
from tempo_net.props import parse_prop
from tempo_net.symbolic import initial_state, successors


def _layer_states(name: str, depth: int):
    net = load_bundled(name)
    frontier = [initial_state(net)]
    out = list(frontier)
    for _ in range(depth):
        nxt = []
        for s in frontier:
            nxt.extend(c for _, c in successors(s))
        out.extend(nxt)
        frontier = nxt
    return out


@pytest.fixture(scope="module")
def pools():
    """States grouped by canonical key; only keys with several members."""
    out = {}
    for name in ("producer", "scheduling", "tutorial", "inhibitor"):
        groups = defaultdict(list)
        for s in _layer_states(name, 6):
            groups[project_now(s).key].append(s)
        out[name] = [g for g in groups.values() if len(g) > 1]
    return out


def _points(c: Constraint, rng: random.Random, n: int):
    """Diverse models of ``c``: find_model under random box cuts."""
    vs = sorted(c.vars())
    base = find_model(c)
    if base is None:
        return []
    pts = [base]
    for _ in range(n):
        cut = c
        for v in vs:
            if rng.random() < 0.5:
                x = LinExpr.var(v)
                k = base[v] + rng.randint(-5, 5)
                cut = cut & (le(x, k) if rng.random() < 0.5 else ge(x, k))
        p = find_model(cut)
        if p is not None:
            pts.append(p)
    return pts


@settings(max_examples=200, deadline=None)
@given(rnd=st.randoms(use_true_random=False), name=st.sampled_from(["producer", "scheduling", "tutorial", "inhibitor"]))
def test_subsumption_agrees_with_sampling(pools, rnd, name):
    group = rnd.choice(pools[name])
    u, v = rnd.choice(group), rnd.choice(group)
    pu, pv = project_now(u).constraint, project_now(v).constraint
    if subsumes(u, v):
        # every sampled instance of u is an instance of v
        for p in _points(pu, rnd, 6):
            assert pv.holds_at({x: p.get(x, Fraction(0)) for x in pv.vars() | pu.vars()})
    else:
        # some instance of u lies outside v
        outside = [d for d in negate(Formula([pv])).conj(pu).disjuncts if is_sat(d)]
        assert outside
        p = find_model(outside[0])
        assert pu.holds_at(p) and not pv.holds_at({x: p.get(x, Fraction(0)) for x in pv.vars() | p.keys()})


def test_different_keys_never_subsume():
    net = load_bundled("producer")
    s0 = initial_state(net)
    kids = [c for _, c in successors(s0)]
    assert canonical_key(s0) != canonical_key(kids[0])
    assert not subsumes(kids[0], s0)
    assert subsumes(s0, s0)


def test_visited_map_prunes_covered_disjuncts():
    net = load_bundled("producer")
    states = _layer_states("producer", 4)
    vm = VisitedMap()
    for s in states:
        vm.add(s)
        assert vm.subsumed(s)
    # every added state stays covered after later additions prune entries
    assert all(vm.subsumed(s) for s in states)


@pytest.mark.parametrize("engine", ["fold-branch", "fold-global"])
def test_folding_terminates_without_solution(engine):
    net = load_bundled("producer_safe")
    o = search(net, parse_prop("not k-bounded(1)", net), engine)
    assert not o.witnesses


def test_unfolded_search_runs_out_of_budget():
    net = load_bundled("producer_safe")
    with pytest.raises(BudgetExceeded):
        search(net, parse_prop("not k-bounded(1)", net), "sym", max_states=1500)


@pytest.mark.parametrize("engine", ENGINES)
def test_engines_agree_on_first_witness(engine):
    net = load_bundled("producer")
    o = search(net, parse_prop("p2 > 1", net), engine, max_sols=1)
    assert o.witnesses
    assert equivalent(o.witnesses[0].param_constraint, net.k0 & Constraint.of(ge(LinExpr.var(net.params()[0]), 4)))


def test_unknown_engine():
    net = load_bundled("producer")
    with pytest.raises(ValueError):
        search(net, parse_prop("true", net), "bogus")


def test_witness_path_replays_symbolically():
    net = load_bundled("producer")
    w = search(net, parse_prop("not k-bounded(1)", net), max_sols=1).witnesses[0]
    s = initial_state(net)
    for lab in w.path:
        # ground markings: one successor per label
        (s,) = [c for l, c in successors(s) if l == lab]
    assert s.describe() == w.state.describe()


def test_max_depth_limits_search():
    net = load_bundled("producer")
    o = search(net, parse_prop("p2 > 1", net), max_depth=3)
    assert not o.witnesses
