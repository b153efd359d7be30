"""Analysis drivers: EF/AG synthesis, time-bounded reachability, bounded
response, strategy-restricted exploration and A/E model checking."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

from .concrete import TickFlag
from .errors import BudgetExceeded
from .folding import (SearchOutcome, VisitedMap, Witness, goal_formula, holds, make_witness, project_now,
                      search)
from .linarith import (Constraint, Formula, LinExpr, VarId, eliminate, formula_equivalent, gt, implies, is_sat, negate,
                       simplify, tparam)
from .net import Interval, NetSpec, build_net
from .props import (Always, And, Eventually, InTime, Not, PFalse, Prop, TemporalFormula, Until, encode)
from .symbolic import (R1S, R2S, NowView, SymState, Variant, initial_state, now_aux, successors, with_aux)


def with_extra_params(net: NetSpec, names: Sequence[str]) -> NetSpec:
    """Declare additional time parameters (e.g. symbolic window bounds)."""
    fresh = [tparam(n) for n in names if n not in {v.name for v in net.params()}]
    if not fresh:
        return net
    return build_net(net.name, net.places, net.time_params + tuple(fresh), net.mark_params, net.transitions,
                     net.initial_marking, net.k0)


# ---------------------------------------------------------------------------
# EF / AG

def ef_synthesis(net: NetSpec, prop: Prop, engine: str = "fold-global", max_sols: Optional[int] = None,
                 max_depth: Optional[int] = None, max_states: int = 50_000, k0: Optional[Constraint] = None,
                 variant: Optional[Variant] = None, workers: int = 1) -> List[Witness]:
    out = search(net, prop, engine, variant=variant, k0=k0, max_sols=max_sols, max_depth=max_depth,
                 max_states=max_states, workers=workers)
    return out.witnesses


def distinct_projections(ws: Sequence[Witness]) -> List[Constraint]:
    """Parameter projections of the witnesses, up to equivalence."""
    out: List[Constraint] = []
    for w in ws:
        c = w.param_constraint
        if not any(formula_equivalent(Formula([c]), Formula([d])) for d in out):
            out.append(c)
    return out


@dataclass
class AGResult:
    constraint: Formula
    rounds: int
    explored: int


def ag_synthesis(net: NetSpec, prop: Prop, k0: Optional[Constraint] = None, max_rounds: int = 200,
                 max_states: int = 50_000, workers: int = 1) -> AGResult:
    """Parameter region (as a DNF) in which no reachable state violates ``prop``.

    Each round searches for one violation under the current region and
    removes the parameter values that realize it.
    """
    bad = Not(prop)
    pending = [net.k0 if k0 is None else k0]
    safe: List[Constraint] = []
    rounds = explored = 0
    while pending:
        k = pending.pop()
        rounds += 1
        if rounds > max_rounds:
            raise BudgetExceeded(f"AG synthesis exceeded {max_rounds} rounds", explored)
        o = search(net, bad, "fold-global", k0=k, max_sols=1, max_states=max_states, workers=workers)
        explored += o.explored
        if not o.witnesses:
            safe.append(simplify(k))
            continue
        psi = o.witnesses[0].goal_projection
        for d in negate(psi).conj(k).pruned():
            pending.append(d)
    kept: List[Constraint] = []
    for c in sorted(safe, key=len):
        if not any(implies(c, o) for o in kept):
            kept.append(c)
    return AGResult(Formula(kept), rounds, explored)


# ---------------------------------------------------------------------------
# time-bounded reachability

def ef_in_time(net: NetSpec, prop: Prop, window: Interval, engine: str = "fold-global",
               max_sols: Optional[int] = None, max_states: int = 50_000, k0: Optional[Constraint] = None,
               workers: int = 1) -> List[Witness]:
    """Witnesses reaching ``prop`` at a global time inside ``window``.

    The window's upper end caps every tick, so parametric ends (say ``b``)
    show up in the projections as constraints such as ``2*a <= b``.
    """
    variant = R2S(window.upper)
    goal = And(prop, InTime(window))
    if engine == "sym2":
        raise ValueError("time-bounded search runs on the global-clock semantics; use sym, fold-branch or fold-global")
    out = search(net, goal, engine, variant=variant, k0=k0, max_sols=max_sols, max_states=max_states,
                 workers=workers)
    return out.witnesses


# ---------------------------------------------------------------------------
# restricting a symbolic state by a condition on its observables

def restrict(s: SymState, f: Formula) -> List[SymState]:
    """Split ``s`` into the satisfiable pieces ``s and d`` for each disjunct d.

    ``f`` is written over the state's Now view (as produced by ``encode``).
    """
    obs = {v: e for v, e in s.observables() if not e.is_const()}
    out = []
    for d in f.disjuncts:
        core = simplify(s.core & d)
        if core.is_false:
            continue
        full = s.constraint & d.substitute(obs)
        out.append(SymState(s.net, full, s.tick_flag, s.marking, s.clocks, s.global_time, s.aux,
                            s.fresh_counter, core))
    return out


def _disjoint(f: Formula) -> Formula:
    """Rewrite a DNF so its disjuncts do not overlap (keeps splits exact)."""
    out: List[Constraint] = []
    seen = Formula.false()
    for d in f.disjuncts:
        pieces = Formula([d]).conj(negate(seen)) if not seen.is_false() else Formula([d])
        out.extend(p for p in pieces.disjuncts if is_sat(p))
        seen = seen | Formula([d])
    return Formula(out)


# ---------------------------------------------------------------------------
# bounded response

@dataclass
class ResponseResult:
    holds: bool
    witness: Optional[Witness]
    explored: int


def bounded_response(net: NetSpec, phi: Prop, psi: Prop, b, k0: Optional[Constraint] = None,
                     max_states: int = 50_000) -> ResponseResult:
    """Check that every phi-state is followed by a psi-state within ``b`` time units.

    A phi-clock (the auxiliary observable) starts when a transition leads to
    a phi-and-not-psi state and is dropped when a psi state is reached.
    Guards on psi split states so that the check is exact on every instance.
    """
    b = b if isinstance(b, LinExpr) else LinExpr.const(Fraction(b))

    def settle(s: SymState, was_running: bool) -> List[SymState]:
        pos = _disjoint(encode(psi, NowView(s)))
        neg = _disjoint(encode(psi, NowView(s), positive=False))
        out = []
        for piece in restrict(s, pos):
            out.append(with_aux(piece, None) if piece.aux is not None else piece)
        for piece in restrict(s, neg):
            if was_running:
                out.append(piece)
                continue
            for q in restrict(piece, _disjoint(encode(phi, NowView(piece)))):
                out.append(with_aux(q, LinExpr.const(0)))
            for q in restrict(piece, _disjoint(encode(phi, NowView(piece), positive=False))):
                out.append(q)
        return out

    def succ(s: SymState, variant: Variant):
        res = []
        for label, c in successors(s, variant):
            if label.startswith("tick"):
                res.append((label, c))
            else:
                res.extend((label, x) for x in settle(c, s.aux is not None))
        return res

    class _Late:
        """Goal: the phi-clock has passed ``b``."""

        def formula(self, s: SymState) -> Formula:
            if s.aux is None:
                return Formula.false()
            a = s.aux if s.aux.is_const() else LinExpr.var(now_aux())
            return Formula([Constraint.TRUE & gt(a, b)]).pruned()

    s0 = initial_state(net, R1S, k0)
    starts = settle(s0, False)
    explored = 0
    for st in starts:
        o = search(net, _Late(), "fold-global", init=st, max_sols=1, max_states=max_states, succ=succ)
        explored += o.explored
        if o.witnesses:
            return ResponseResult(False, o.witnesses[0], explored)
    return ResponseResult(True, None, explored)


# ---------------------------------------------------------------------------
# strategies

@dataclass(frozen=True)
class Priority:
    """Fire the first listed transition that can fire; otherwise behave freely.

    With ``ticks_yield`` (the default) a firable priority transition also
    pre-empts time elapse, i.e. the priority list is tried before any other
    step.  Set it to False to restrict only the choice among firings.
    """
    labels: Tuple[str, ...] = ()
    ticks_yield: bool = True


ALL = Priority(())


def parse_strategy(text: str, net: NetSpec) -> Priority:
    t = text.strip()
    if t in ("all", ""):
        return ALL
    if not (t.startswith("priority(") and t.endswith(")")):
        raise ValueError(f"bad strategy {text!r}; expected all or priority(t1, t2, ...)")
    labels = tuple(x.strip() for x in t[len("priority("):-1].split(",") if x.strip())
    for lab in labels:
        if lab not in net.labels:
            raise ValueError(f"unknown transition {lab!r} in strategy")
    return Priority(labels)


def strategy_successors(strategy: Priority):
    def succ(s: SymState, variant: Variant):
        res = successors(s, variant)
        for lab in strategy.labels:
            chosen = [(l, c) for l, c in res if l == lab]
            if chosen:
                if not strategy.ticks_yield:
                    chosen += [(l, c) for l, c in res if l.startswith("tick")]
                return chosen
        return res
    return succ


@dataclass
class StrategyResult:
    witnesses: List[Witness]
    states: List[SymState]


class _EqualityMap:
    """Visited set that merges only states with the same denotation."""

    def __init__(self):
        self.entries: Dict = {}

    def subsumed(self, s: SymState) -> bool:
        p = project_now(s)
        for c in self.entries.get(p.key, ()):
            if implies(p.constraint, c) and implies(c, p.constraint):
                return True
        return False

    def add(self, s: SymState) -> None:
        p = project_now(s)
        self.entries.setdefault(p.key, []).append(p.constraint)


def strat_explore(net: NetSpec, strategy: Priority, prop: Prop, max_sols: Optional[int] = None,
                  k0: Optional[Constraint] = None, max_states: int = 50_000, merge: str = "equal") -> StrategyResult:
    """Reachable states under ``strategy`` that satisfy ``prop``.

    ``merge="equal"`` identifies states only when their denotations coincide;
    ``merge="subsume"`` folds with the usual subsumption relation.
    """
    if merge == "subsume":
        o = search(net, prop, "fold-global", k0=k0, max_sols=max_sols, max_states=max_states,
                   succ=strategy_successors(strategy), keep_states=True)
        return StrategyResult(o.witnesses, o.states)
    if merge != "equal":
        raise ValueError(f"unknown merge mode {merge!r}")
    succ = strategy_successors(strategy)
    s0 = initial_state(net, R1S, k0)
    seen = _EqualityMap()
    seen.add(s0)
    out = StrategyResult([], [])
    queue = deque([(s0, [])])
    while queue:
        s, path = queue.popleft()
        out.states.append(s)
        if holds(prop, s):
            out.witnesses.append(make_witness(s, prop, path))
            if max_sols is not None and len(out.witnesses) >= max_sols:
                break
        for label, c in succ(s, R1S):
            if seen.subsumed(c):
                continue
            if len(out.states) + len(queue) >= max_states:
                raise BudgetExceeded(f"strategy state budget of {max_states} exhausted", len(out.states))
            seen.add(c)
            queue.append((c, path + [label]))
    return out


# ---------------------------------------------------------------------------
# non-nested model checking over the folded graph

Label = Callable[[SymState], bool]


class _Graph:
    """Lazily built folded graph restricted to states satisfying ``stay``."""

    def __init__(self, net: NetSpec, variant: Variant, max_states: int, k0=None):
        self.variant = variant
        self.max_states = max_states
        self.s0 = initial_state(net, variant, k0)
        self.nodes: List[SymState] = []
        self.vmap = VisitedMap()
        self.by_key: Dict = {}
        self.edges: Dict[int, List[int]] = {}
        self.dead: Dict[int, bool] = {}

    def _add(self, s: SymState) -> int:
        if len(self.nodes) >= self.max_states:
            raise BudgetExceeded(f"model checking state budget of {self.max_states} exhausted", len(self.nodes))
        i = len(self.nodes)
        self.nodes.append(s)
        self.vmap.add(s)
        self.by_key.setdefault(project_now(s).key, []).append(i)
        return i

    def _targets(self, s: SymState) -> List[int]:
        """Already-visited states that may share instances with ``s``."""
        p = project_now(s)
        return [j for j in self.by_key.get(p.key, ()) if is_sat(p.constraint & project_now(self.nodes[j]).constraint)]

    def build(self, stay: Label, stop: Optional[Label] = None) -> Optional[int]:
        """Explore states satisfying ``stay``; return the index of the first ``stop`` state found."""
        root = self._add(self.s0)
        if stop is not None and stop(self.s0):
            return root
        if not stay(self.s0):
            self.edges[root] = []
            self.dead[root] = False
            self.outside = {root}
            return None
        self.outside = set()
        queue = deque([root])
        while queue:
            i = queue.popleft()
            s = self.nodes[i]
            succ = successors(s, self.variant)
            self.dead[i] = not succ
            out: List[int] = []
            for _, c in succ:
                if self.vmap.subsumed(c):
                    out.extend(self._targets(c))
                    continue
                j = self._add(c)
                out.append(j)
                if stop is not None and stop(c):
                    self.edges[i] = out
                    return j
                if stay(c):
                    queue.append(j)
                else:
                    self.outside.add(j)
            self.edges[i] = out
        return None

    def has_cycle_or_deadlock(self, stay: Label) -> bool:
        inside = [i for i in range(len(self.nodes)) if i in self.edges and i not in self.outside]
        ok = set(inside)
        for i in inside:
            if self.dead.get(i):
                return True
        # iterative DFS colouring restricted to the stay-region
        colour = {i: 0 for i in inside}
        for r in inside:
            if colour[r]:
                continue
            stack = [(r, iter(self.edges[r]))]
            colour[r] = 1
            while stack:
                v, it = stack[-1]
                nxt = next(it, None)
                if nxt is None:
                    colour[v] = 2
                    stack.pop()
                    continue
                if nxt not in ok:
                    continue
                if colour[nxt] == 1:
                    return True
                if colour[nxt] == 0:
                    colour[nxt] = 1
                    stack.append((nxt, iter(self.edges[nxt])))
        return False


@dataclass
class MCResult:
    holds: bool
    explored: int


def _label(p: Prop) -> Label:
    return lambda s: holds(p, s)


def _window_label(w: Optional[Interval]) -> Label:
    if w is None:
        return lambda s: True
    return _label(InTime(w))


def model_check(net: NetSpec, quant: str, f: TemporalFormula, time_bound=None, max_states: int = 50_000,
                k0: Optional[Constraint] = None) -> MCResult:
    """A/E checking of the non-nested fragment.

    Atoms are evaluated existentially (``holds``); timed decorations add an
    ``in-time`` label conjoined label-wise.  ``time_bound`` caps the global
    clock and is required for any timed formula.
    """
    quant = quant.upper()
    if quant not in ("A", "E"):
        raise ValueError("quantifier must be A or E")
    timed = getattr(f, "window", None) is not None
    if timed and time_bound is None:
        raise ValueError("timed formulas need a time bound")
    variant = R2S(time_bound) if (time_bound is not None) else R1S

    def graph() -> _Graph:
        return _Graph(net, variant, max_states, k0)

    def exists_reach(target: Label) -> Tuple[bool, int]:
        g = graph()
        hit = g.build(lambda s: True, target)
        return hit is not None, len(g.nodes)

    def exists_infinite(stay: Label) -> Tuple[bool, int]:
        g = graph()
        g.build(stay)
        return g.has_cycle_or_deadlock(stay), len(g.nodes)

    def exists_until(p: Label, q: Label) -> Tuple[bool, int]:
        g = graph()
        hit = g.build(lambda s: p(s) and not q(s), q)
        return hit is not None, len(g.nodes)

    inw = _window_label(getattr(f, "window", None))
    if isinstance(f, Eventually):
        q = _label(f.p)
        qq: Label = lambda s: q(s) and inw(s)
        if quant == "E":
            r, n = exists_reach(qq)
            return MCResult(r, n)
        r, n = exists_infinite(lambda s: not qq(s))
        return MCResult(not r, n)
    if isinstance(f, Always):
        p = _label(f.p)
        pp: Label = lambda s: p(s) or not inw(s)
        if quant == "A":
            r, n = exists_reach(lambda s: not pp(s))
            return MCResult(not r, n)
        r, n = exists_infinite(pp)
        return MCResult(r, n)
    if isinstance(f, Until):
        p, q = _label(f.p), _label(f.q)
        qq = lambda s: q(s) and inw(s)
        if quant == "E":
            r, n = exists_until(p, qq)
            return MCResult(r, n)
        r1, n1 = exists_until(lambda s: not qq(s), lambda s: not p(s) and not qq(s))
        if r1:
            return MCResult(False, n1)
        r2, n2 = exists_infinite(lambda s: not qq(s))
        return MCResult(not r2, n1 + n2)
    raise ValueError(f"unsupported formula {f!r}")
