"""Clock-based concrete semantics, the interval-shifting oracle, and
explicit-state search / LTL checking over time-sampled graphs."""
from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterator, List, Mapping, Optional, Sequence, Tuple

from .errors import BudgetExceeded
from .linarith import VarId
from .net import GroundNet
from .props import LTL, Prop, eval_prop


class TickFlag(enum.Enum):
    OK = "tickOk"
    NOT_OK = "tickNotOk"

    def __str__(self) -> str:
        return self.value


class Mode(enum.Enum):
    R0 = "R0"   # no tick flag, no global time
    R1 = "R1"   # tick/fire alternation flag
    R2 = "R2"   # alternation plus global time


class SemanticsError(ValueError):
    pass


class InactiveTransition(SemanticsError):
    pass


class ClockOutOfInterval(SemanticsError):
    pass


class DelayTooLarge(SemanticsError):
    pass


@dataclass(frozen=True)
class ConcreteState:
    marking: Tuple[int, ...]
    clocks: Tuple[Fraction, ...]
    tick_flag: Optional[TickFlag] = None
    global_time: Optional[Fraction] = None

    def describe(self, g: GroundNet) -> str:
        m = " ".join(f"{p}={n}" for p, n in zip(g.places, self.marking) if n) or "empty"
        c = " ".join(f"{t}={_q(x)}" for t, x in zip(g.labels, self.clocks) if x)
        s = f"marking {m}"
        if c:
            s += f" ; clocks {c}"
        if self.global_time is not None:
            s += f" ; GT {_q(self.global_time)}"
        return s


def _q(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


INF = None


def initial(g: GroundNet, mode: Mode = Mode.R0) -> ConcreteState:
    zero = tuple(Fraction(0) for _ in g.labels)
    if mode == Mode.R0:
        return ConcreteState(g.m0, zero)
    return ConcreteState(g.m0, zero, TickFlag.OK, Fraction(0) if mode == Mode.R2 else None)


def mte(s: ConcreteState, g: GroundNet) -> Optional[Fraction]:
    """Largest admissible delay, or None for unbounded."""
    best: Optional[Fraction] = None
    for i, up in enumerate(g.upper):
        if up is None or not g.active(s.marking, i):
            continue
        d = up - s.clocks[i]
        if best is None or d < best:
            best = d
    return best


def tick(s: ConcreteState, delta, g: GroundNet) -> ConcreteState:
    delta = Fraction(delta)
    if delta < 0:
        raise SemanticsError("negative delay")
    if s.tick_flag == TickFlag.NOT_OK:
        raise SemanticsError("two consecutive ticks are not allowed in this mode")
    bound = mte(s, g)
    if bound is not None and delta > bound:
        raise DelayTooLarge(f"delay {delta} exceeds maximal time elapse {bound}")
    clocks = tuple(c + delta if g.active(s.marking, i) else c for i, c in enumerate(s.clocks))
    flag = None if s.tick_flag is None else TickFlag.NOT_OK
    gt = None if s.global_time is None else s.global_time + delta
    return ConcreteState(s.marking, clocks, flag, gt)


def can_fire(s: ConcreteState, i: int, g: GroundNet) -> bool:
    if not g.active(s.marking, i):
        return False
    c = s.clocks[i]
    return g.lower[i] <= c and (g.upper[i] is None or c <= g.upper[i])


def fire(s: ConcreteState, t, g: GroundNet) -> ConcreteState:
    i = g.index(t) if isinstance(t, str) else t
    if not g.active(s.marking, i):
        raise InactiveTransition(f"{g.labels[i]} is not active")
    c = s.clocks[i]
    if not (g.lower[i] <= c and (g.upper[i] is None or c <= g.upper[i])):
        raise ClockOutOfInterval(f"clock of {g.labels[i]} is {c}, outside [{g.lower[i]}, {g.upper[i]}]")
    inter = tuple(a - b for a, b in zip(s.marking, g.pre[i]))
    m2 = tuple(a + b for a, b in zip(inter, g.post[i]))
    clocks = []
    for j, cj in enumerate(s.clocks):
        if j == i or not g.enabled(inter, j):
            clocks.append(Fraction(0))
        else:
            clocks.append(cj)
    flag = None if s.tick_flag is None else TickFlag.OK
    return ConcreteState(m2, tuple(clocks), flag, s.global_time)


def firable(s: ConcreteState, g: GroundNet) -> List[int]:
    return [i for i in range(len(g.labels)) if can_fire(s, i, g)]


def holds_concrete(p: Prop, s: ConcreteState, g: GroundNet, point: Mapping[VarId, Fraction] = None) -> bool:
    if point is None:
        point = {}
    marking = dict(zip(g.places, s.marking))
    clocks = dict(zip(g.labels, s.clocks))
    return eval_prop(p, marking, clocks, s.global_time, point, g.places)


def ground_point(g: GroundNet, valuation: Mapping[str, object]) -> Dict[VarId, Fraction]:
    return {v: Fraction(valuation[v.name]) for v in g.spec.params()}


# ---------------------------------------------------------------------------
# interval-shifting oracle (test use only)

@dataclass(frozen=True)
class IntervalState:
    marking: Tuple[int, ...]
    lower: Tuple[Fraction, ...]
    upper: Tuple[Optional[Fraction], ...]


def interval_initial(g: GroundNet) -> IntervalState:
    return IntervalState(g.m0, g.lower, g.upper)


def interval_time_step(s: IntervalState, delta, g: GroundNet) -> IntervalState:
    delta = Fraction(delta)
    if delta < 0:
        raise SemanticsError("negative delay")
    lo, up = [], []
    for i in range(len(g.labels)):
        en = g.enabled(s.marking, i)
        if en and g.inhibited(s.marking, i):
            lo.append(s.lower[i])
            up.append(s.upper[i])
            continue
        nl = max(Fraction(0), s.lower[i] - delta)
        nu = None if s.upper[i] is None else s.upper[i] - delta
        if en and nu is not None and nu < 0:
            raise DelayTooLarge(f"delay {delta} overshoots {g.labels[i]}")
        lo.append(nl)
        up.append(nu)
    return IntervalState(s.marking, tuple(lo), tuple(up))


def interval_fire_step(s: IntervalState, t, g: GroundNet) -> IntervalState:
    i = g.index(t) if isinstance(t, str) else t
    if not g.active(s.marking, i):
        raise InactiveTransition(f"{g.labels[i]} is not active")
    if s.lower[i] != 0:
        raise ClockOutOfInterval(f"{g.labels[i]} not yet firable")
    inter = tuple(a - b for a, b in zip(s.marking, g.pre[i]))
    m2 = tuple(a + b for a, b in zip(inter, g.post[i]))
    lo, up = list(s.lower), list(s.upper)
    for j in range(len(g.labels)):
        newly = g.enabled(m2, j) and (j == i or not g.enabled(inter, j))
        if newly:
            lo[j], up[j] = g.lower[j], g.upper[j]
    return IntervalState(m2, tuple(lo), tuple(up))


def interval_can_fire(s: IntervalState, i: int, g: GroundNet) -> bool:
    return g.active(s.marking, i) and s.lower[i] == 0


# ---------------------------------------------------------------------------
# time-sampled transition system

@dataclass
class SampledGraph:
    """Successor generator for the sampled semantics (tick of a fixed step)."""
    g: GroundNet
    step: Fraction = Fraction(1)
    time_bound: Optional[Fraction] = None

    def initial(self) -> ConcreteState:
        s = initial(self.g, Mode.R0)
        if self.time_bound is not None:
            s = ConcreteState(s.marking, s.clocks, None, Fraction(0))
        return s

    def successors(self, s: ConcreteState) -> Iterator[Tuple[str, ConcreteState]]:
        g = self.g
        for i in firable(s, g):
            yield g.labels[i], fire(s, i, g)
        bound = mte(s, g)
        if bound is not None and self.step > bound:
            return
        if self.time_bound is not None and s.global_time + self.step > self.time_bound:
            return
        yield "tick", tick(s, self.step, g)


@dataclass
class SearchResult:
    solutions: List[Tuple[ConcreteState, List[str]]] = field(default_factory=list)
    explored: int = 0


def sampled_search(g: GroundNet, prop: Prop, step=1, max_sols: Optional[int] = None,
                   max_depth: Optional[int] = None, time_bound=None, max_states: int = 100_000,
                   point: Mapping[VarId, Fraction] = None) -> SearchResult:
    """Breadth-first search for states satisfying ``prop``."""
    sg = SampledGraph(g, Fraction(step), None if time_bound is None else Fraction(time_bound))
    s0 = sg.initial()
    res = SearchResult()
    parent: Dict[ConcreteState, Tuple[Optional[ConcreteState], str]] = {s0: (None, "")}
    queue = deque([(s0, 0)])

    def path_to(s):
        out = []
        while True:
            p, lab = parent[s]
            if p is None:
                return out[::-1]
            out.append(lab)
            s = p

    while queue:
        s, d = queue.popleft()
        res.explored += 1
        if holds_concrete(prop, s, g, point):
            res.solutions.append((s, path_to(s)))
            if max_sols is not None and len(res.solutions) >= max_sols:
                return res
        if max_depth is not None and d >= max_depth:
            continue
        for lab, s2 in sg.successors(s):
            if s2 not in parent:
                if len(parent) >= max_states:
                    raise BudgetExceeded("sampled state budget exhausted", len(parent))
                parent[s2] = (s, lab)
                queue.append((s2, d + 1))
    return res


def explore(sg: SampledGraph, max_states: int = 100_000) -> Dict[ConcreteState, List[Tuple[str, ConcreteState]]]:
    """The whole reachable sampled graph (adjacency lists)."""
    s0 = sg.initial()
    adj: Dict[ConcreteState, List[Tuple[str, ConcreteState]]] = {}
    stack = [s0]
    seen = {s0}
    while stack:
        s = stack.pop()
        succ = list(sg.successors(s))
        adj[s] = succ
        for _, s2 in succ:
            if s2 not in seen:
                if len(seen) >= max_states:
                    raise BudgetExceeded("sampled state budget exhausted", len(seen))
                seen.add(s2)
                stack.append(s2)
    return adj


# ---------------------------------------------------------------------------
# LTL over sampled graphs

@dataclass
class LTLResult:
    holds: bool
    prefix: List[ConcreteState] = field(default_factory=list)
    cycle: List[ConcreteState] = field(default_factory=list)
    explored: int = 0


def ltl_check(g: GroundNet, formula: LTL, step=1, state_budget: int = 100_000,
              point: Mapping[VarId, Fraction] = None, time_bound=None) -> LTLResult:
    """Automata-theoretic check of ``formula`` on every path of the sampled graph.

    Deadlocked states are given a self-loop so that every path is infinite.
    """
    from .ltl import check_graph

    sg = SampledGraph(g, Fraction(step), None if time_bound is None else Fraction(time_bound))
    s0 = sg.initial()
    cache: Dict[ConcreteState, List[ConcreteState]] = {}

    def succ(s: ConcreteState) -> List[ConcreteState]:
        r = cache.get(s)
        if r is None:
            if len(cache) >= state_budget:
                raise BudgetExceeded("state space too large for LTL checking", len(cache))
            r = [s2 for _, s2 in sg.successors(s)] or [s]
            cache[s] = r
        return r

    def label(p: Prop, s: ConcreteState) -> bool:
        return holds_concrete(p, s, g, point)

    ok, prefix, cycle = check_graph(s0, succ, label, formula)
    return LTLResult(ok, prefix, cycle, len(cache))
