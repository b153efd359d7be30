"""Symbolic semantics: constrained states, symbolic tick and fire.

A state carries two equivalent descriptions of the same set of concrete
states:

* the full path constraint ``constraint`` over parameters and the fresh
  delay variables ``T0, T1, ...``, with marking/clock/global-time
  expressions written over those delays;
* a compact ``core`` over parameters and canonical current-value variables
  (one per non-constant observable).  It is maintained step by step by
  eliminating the previous values and the new delay, so satisfiability
  checks never grow with the path length.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

from .concrete import TickFlag
from .linarith import (Atom, Constraint, LinExpr, VarId, VarKind, eliminate, ge, is_sat, le, negate, Formula)
from .net import Bag, NetSpec, Transition, sym_active, sym_bag_leq


@dataclass(frozen=True)
class Variant:
    name: str                              # "R1S", "R2S" or "R3S"
    time_bound: Optional[LinExpr] = None   # R2S only: cap on the global time

    @property
    def has_time(self) -> bool:
        return self.name == "R2S"

    @property
    def alternating(self) -> bool:
        return self.name == "R3S"


R1S = Variant("R1S")
R3S = Variant("R3S")


def R2S(time_bound=None) -> Variant:
    if time_bound is not None and not isinstance(time_bound, LinExpr):
        time_bound = LinExpr.const(Fraction(time_bound))
    return Variant("R2S", time_bound)


def now_place(p: str, inst: int = 0) -> VarId:
    return VarId(VarKind.NOW, "m:" + p, inst)


def now_clock(t: str, inst: int = 0) -> VarId:
    return VarId(VarKind.NOW, "c:" + t, inst)


def now_gt(inst: int = 0) -> VarId:
    return VarId(VarKind.NOW, "gt", inst)


def now_aux(inst: int = 0) -> VarId:
    return VarId(VarKind.NOW, "aux", inst)


def delta(k: int) -> VarId:
    return VarId(VarKind.DELTA, "T", k)


ZERO = LinExpr.const(0)


class SymState:
    """Constrained symbolic state.  Treat as immutable."""

    __slots__ = ("net", "constraint", "tick_flag", "marking", "clocks", "global_time", "aux", "fresh_counter",
                 "core", "_proj")

    def __init__(self, net: NetSpec, constraint: Constraint, tick_flag: TickFlag, marking: Tuple[LinExpr, ...],
                 clocks: Tuple[LinExpr, ...], global_time: Optional[LinExpr], aux: Optional[LinExpr],
                 fresh_counter: int, core: Constraint):
        self.net = net
        self.constraint = constraint
        self.tick_flag = tick_flag
        self.marking = marking
        self.clocks = clocks
        self.global_time = global_time
        self.aux = aux
        self.fresh_counter = fresh_counter
        self.core = core
        self._proj = None

    # observables ------------------------------------------------------------
    def observables(self) -> List[Tuple[VarId, LinExpr]]:
        out = [(now_place(p), e) for p, e in zip(self.net.places, self.marking)]
        out += [(now_clock(t), e) for t, e in zip(self.net.labels, self.clocks)]
        if self.global_time is not None:
            out.append((now_gt(), self.global_time))
        if self.aux is not None:
            out.append((now_aux(), self.aux))
        return out

    def view_values(self) -> List[Tuple[VarId, LinExpr]]:
        """Observables in core terms: constants stay constants, others become Now variables."""
        return [(v, e if e.is_const() else LinExpr.var(v)) for v, e in self.observables()]

    @property
    def marking_bag(self) -> Bag:
        return Bag(dict(zip(self.net.places, self.marking)))

    def is_ground_marking(self) -> bool:
        return all(e.is_const() for e in self.marking)

    def ground_marking(self) -> Tuple[int, ...]:
        return tuple(int(e.constant) for e in self.marking)

    def param_constraint(self) -> Constraint:
        """Projection onto the net parameters (and any extra synthesis parameters)."""
        return eliminate([v for v in self.core.vars() if not v.is_param], self.core)

    def describe(self) -> str:
        m = " ".join(f"{p}={e}" for p, e in zip(self.net.places, self.marking) if e != ZERO) or "empty"
        return f"{m}"

    def __repr__(self) -> str:
        return f"SymState({self.tick_flag}, {self.describe()}, {self.core})"


class FullView:
    """Encoder view over the full path expressions."""

    def __init__(self, s: SymState):
        self.s = s
        self.place_names = s.net.places
        self._m = dict(zip(s.net.places, s.marking))
        self._c = dict(zip(s.net.labels, s.clocks))

    def marking_expr(self, p: str) -> LinExpr:
        return self._m[p]

    def clock_expr(self, t: str) -> LinExpr:
        return self._c[t]

    def gt_expr(self) -> Optional[LinExpr]:
        return self.s.global_time


class NowView(FullView):
    """Encoder view over the compact core: Now variables for non-constant observables."""

    def __init__(self, s: SymState):
        self.s = s
        self.place_names = s.net.places
        self._m = {p: (e if e.is_const() else LinExpr.var(now_place(p))) for p, e in zip(s.net.places, s.marking)}
        self._c = {t: (e if e.is_const() else LinExpr.var(now_clock(t))) for t, e in zip(s.net.labels, s.clocks)}
        g = s.global_time
        self._g = None if g is None else (g if g.is_const() else LinExpr.var(now_gt()))

    def gt_expr(self) -> Optional[LinExpr]:
        return self._g


def _lin(n) -> LinExpr:
    return n if isinstance(n, LinExpr) else LinExpr.const(n)


def initial_state(net: NetSpec, variant: Variant = R1S, k0: Optional[Constraint] = None) -> SymState:
    k = net.k0 if k0 is None else k0
    marking = tuple(_lin(net.initial_marking[p]) for p in net.places)
    clocks = tuple(ZERO for _ in net.labels)
    gt = ZERO if variant.has_time else None
    core_atoms = list(k.atoms)
    for p, e in zip(net.places, marking):
        if not e.is_const():
            core_atoms.append(_eq(LinExpr.var(now_place(p)), e))
    core = eliminate((), Constraint(core_atoms))
    return SymState(net, k, TickFlag.OK, marking, clocks, gt, None, 0, core)


def _eq(a: LinExpr, b: LinExpr):
    from .linarith import eq
    return eq(a, b)


# ---------------------------------------------------------------------------
# guard case-splitting

def _neg_pieces(guard: Constraint) -> List[Constraint]:
    """Pairwise-disjoint constraints whose union is the negation of ``guard``."""
    out: List[Constraint] = []
    prefix = Constraint.TRUE
    for a in sorted(guard.atoms):
        for n in a.negations():
            if n is False:
                continue
            out.append(prefix & n)
        prefix = prefix & a
    # EQ negations (two strict pieces) are already disjoint
    return out


def _split(core: Constraint, guards: Sequence[Constraint]) -> List[Tuple[Tuple[bool, ...], Constraint]]:
    """Enumerate truth assignments of the guards consistent with ``core``.

    Decided guards (TRUE/FALSE literals) do not split.  Each result carries
    the conjunction of assumptions made.
    """
    branches: List[Tuple[Tuple[bool, ...], Constraint]] = [((), Constraint.TRUE)]
    for g in guards:
        if g.is_false:
            branches = [(d + (False,), c) for d, c in branches]
            continue
        if g.is_true():
            branches = [(d + (True,), c) for d, c in branches]
            continue
        nxt = []
        for d, c in branches:
            pos = c & g
            if is_sat(core & pos):
                nxt.append((d + (True,), pos))
            for piece in _neg_pieces(g):
                neg = c & piece
                if is_sat(core & neg):
                    nxt.append((d + (False,), neg))
        branches = nxt
    return branches


# ---------------------------------------------------------------------------
# steps

def _child(s: SymState, label: str, atoms: Constraint, values: List[LinExpr], flag: TickFlag,
           counter: int, new_delta: Optional[VarId]) -> Optional[SymState]:
    """Build the successor from view-level atoms and view-level new observable values.

    ``values`` is aligned with ``s.observables()``.
    """
    obs = s.observables()
    view_vars = [v for v, e in obs if not e.is_const()]
    to_full = {v: e for v, e in obs if not e.is_const()}
    prev = {v: LinExpr.var(VarId(v.kind, v.name, 1)) for v in view_vars}
    defs = []
    for (v, _), val in zip(obs, values):
        if not val.is_const():
            defs.append(_eq(LinExpr.var(v), val.substitute(prev)))
    system = s.core.substitute(prev) & atoms.substitute(prev) & Constraint(defs)
    elim = [VarId(v.kind, v.name, 1) for v in view_vars]
    if new_delta is not None:
        elim.append(new_delta)
    core = eliminate(elim, system)
    if core.is_false:
        return None
    full_vals = [val.substitute(to_full) for val in values]
    np_, nt = len(s.net.places), len(s.net.labels)
    marking = tuple(full_vals[:np_])
    clocks = tuple(full_vals[np_:np_ + nt])
    rest = full_vals[np_ + nt:]
    gt = rest.pop(0) if s.global_time is not None else None
    aux = rest.pop(0) if s.aux is not None else None
    constraint = s.constraint & atoms.substitute(to_full)
    return SymState(s.net, constraint, flag, marking, clocks, gt, aux, counter, core)


def sym_tick(s: SymState, variant: Variant = R1S) -> List[SymState]:
    if s.tick_flag != TickFlag.OK:
        return []
    net = s.net
    T = delta(s.fresh_counter)
    TE = LinExpr.var(T)
    vals = [e for _, e in s.view_values()]
    np_, nt = len(net.places), len(net.labels)
    vm = dict(zip(net.places, vals[:np_]))
    vc = vals[np_:np_ + nt]
    mbag = Bag(vm)
    guards = [sym_active(mbag, t) for t in net.transitions]
    out = []
    for decision, assumed in _split(s.core, guards):
        atoms = [ge(TE, 0)]
        new_vals = list(vals)
        for i, (t, act) in enumerate(zip(net.transitions, decision)):
            if not act:
                continue
            if t.interval.upper is not None:
                atoms.append(le(TE, t.interval.upper - vc[i]))
            new_vals[np_ + i] = vc[i] + TE
        k = np_ + nt
        if s.global_time is not None:
            g = vals[k]
            new_vals[k] = g + TE
            if variant.time_bound is not None:
                atoms.append(le(g + TE, variant.time_bound))
            k += 1
        if s.aux is not None:
            new_vals[k] = vals[k] + TE
        c = assumed & Constraint(atoms)
        child = _child(s, f"tick({T})", c, new_vals, TickFlag.NOT_OK, s.fresh_counter + 1, T)
        if child is not None:
            out.append(child)
    return out


def sym_fire(s: SymState, t: Transition, variant: Variant = R1S) -> List[SymState]:
    """All successors of firing ``t`` (several when enabledness is symbolic)."""
    if variant.alternating and s.tick_flag != TickFlag.NOT_OK:
        return []
    net = s.net
    i = net.labels.index(t.label)
    vals = [e for _, e in s.view_values()]
    np_, nt = len(net.places), len(net.labels)
    vm = dict(zip(net.places, vals[:np_]))
    mbag = Bag(vm)
    clock = vals[np_ + i]
    guard = sym_active(mbag, t) & le(t.interval.lower, clock)
    if t.interval.upper is not None:
        guard = guard & le(clock, t.interval.upper)
    if guard.is_false or not is_sat(s.core & guard):
        return []
    inter = {p: vm[p] - t.pre[p] for p in net.places}
    after = [inter[p] + t.post[p] for p in net.places]
    inter_bag = Bag(inter)
    others = [j for j in range(nt) if j != i]
    guards = [sym_bag_leq(net.transitions[j].pre, inter_bag) for j in others]
    out = []
    for decision, assumed in _split(s.core & guard, guards):
        new_vals = list(vals)
        new_vals[:np_] = after
        new_vals[np_ + i] = ZERO
        for j, en in zip(others, decision):
            if not en:
                new_vals[np_ + j] = ZERO
        child = _child(s, t.label, guard & assumed, new_vals, TickFlag.OK, s.fresh_counter, None)
        if child is not None:
            out.append(child)
    return out


def successors(s: SymState, variant: Variant = R1S) -> List[Tuple[str, SymState]]:
    out: List[Tuple[str, SymState]] = []
    for c in sym_tick(s, variant):
        out.append((f"tick(T{s.fresh_counter})", c))
    for t in s.net.transitions:
        for c in sym_fire(s, t, variant):
            out.append((t.label, c))
    return out


def with_aux(s: SymState, aux: Optional[LinExpr]) -> SymState:
    """Replace the auxiliary observable (used by the bounded-response transform).

    ``aux`` must be None or a constant; dropping a non-constant one
    eliminates its Now variable from the core.
    """
    assert aux is None or aux.is_const()
    core = s.core
    if s.aux is not None and not s.aux.is_const():
        core = eliminate([now_aux()], core)
    return SymState(s.net, s.constraint, s.tick_flag, s.marking, s.clocks, s.global_time, aux,
                    s.fresh_counter, core)
