"""Now-projection, subsumption, and reachability engines with and without folding."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Dict, Hashable, List, Optional, Sequence, Tuple

from .concrete import TickFlag
from .errors import BudgetExceeded
from .linarith import Constraint, Formula, LinExpr, VarId, eliminate, eq, implies, implies_formula, is_sat
from .net import Bag, NetSpec
from .props import Prop, encode
from .linarith import VarKind
from .symbolic import (R1S, R3S, NowView, SymState, Variant, initial_state, now_clock, now_gt, now_place,
                       successors)


@dataclass(frozen=True)
class ProjectedState:
    tick_flag: TickFlag
    marking_shape: Tuple[Tuple[str, VarId], ...]
    clock_shape: Tuple[Tuple[str, VarId], ...]
    global_time_var: Optional[VarId]
    constraint: Constraint
    key: Hashable


def canonical_key(s: SymState) -> Hashable:
    if s.is_ground_marking():
        mk = ("m", s.ground_marking())
    else:
        mk = ("support", tuple(p for p, e in zip(s.net.places, s.marking) if e != LinExpr.const(0)))
    return (s.tick_flag, mk, s.aux is not None)


def project_now(s: SymState) -> ProjectedState:
    if s._proj is None:
        defs = [eq(LinExpr.var(v), e) for v, e in s.observables() if e.is_const()]
        c = s.core & Constraint(defs)
        s._proj = ProjectedState(
            s.tick_flag,
            tuple((p, now_place(p)) for p in s.net.places),
            tuple((t, now_clock(t)) for t in s.net.labels),
            now_gt() if s.global_time is not None else None,
            c,
            canonical_key(s),
        )
    return s._proj


def project_now_direct(s: SymState) -> Constraint:
    """Projection computed from the full path constraint (reference route)."""
    defs = [eq(LinExpr.var(v), e) for v, e in s.observables()]
    c = s.constraint & Constraint(defs)
    return eliminate([v for v in c.vars() if not (v.is_param or v.kind == VarKind.NOW)], c)


def subsumes(u: SymState, v: SymState) -> bool:
    """True iff ``u`` is subsumed by ``v`` (every instance of u is one of v)."""
    pu, pv = project_now(u), project_now(v)
    if pu.key != pv.key:
        return False
    return implies(pu.constraint, pv.constraint)


class VisitedMap:
    """Canonical key -> disjunction of projected constraints."""

    def __init__(self):
        self.entries: Dict[Hashable, List[Constraint]] = {}

    def subsumed(self, s: SymState) -> bool:
        p = project_now(s)
        ds = self.entries.get(p.key)
        if not ds:
            return False
        c = p.constraint
        for d in ds:
            if d.atoms <= c.atoms:
                return True
        return implies_formula(c, Formula(ds))

    def add(self, s: SymState) -> None:
        p = project_now(s)
        ds = self.entries.setdefault(p.key, [])
        # disjuncts covered by the newcomer are redundant; dropping them keeps
        # the same union
        ds[:] = [d for d in ds if not implies(d, p.constraint)]
        ds.append(p.constraint)

    def __len__(self) -> int:
        return sum(len(v) for v in self.entries.values())


# ---------------------------------------------------------------------------
# witnesses and search drivers

@dataclass
class Witness:
    marking: Bag
    param_constraint: Constraint
    full_constraint: Constraint
    path: List[str]
    state: SymState = field(repr=False)
    goal_projection: Formula = field(default_factory=Formula.false)

    def describe(self) -> str:
        m = " ".join(f"{p}={n}" for p, n in self.marking.items()) or "empty"
        return f"{m} when {self.param_constraint}"


def goal_formula(goal, s: SymState) -> Formula:
    """Goal over the state's Now view; non-Prop goals supply ``formula(s)``."""
    if isinstance(goal, Prop):
        return encode(goal, NowView(s))
    return goal.formula(s)


def holds(goal: Prop, s: SymState) -> bool:
    """Existential truth: some instance of ``s`` satisfies ``goal``."""
    return any(is_sat(s.core & d) for d in goal_formula(goal, s).disjuncts)


def make_witness(s: SymState, goal: Prop, path: List[str]) -> Witness:
    proj = []
    for d in goal_formula(goal, s).disjuncts:
        c = s.core & d
        if is_sat(c):
            proj.append(eliminate([v for v in c.vars() if not v.is_param], c))
    return Witness(s.marking_bag, s.param_constraint(), s.constraint, path, s, Formula(proj))


@dataclass
class SearchOutcome:
    witnesses: List[Witness] = field(default_factory=list)
    explored: int = 0
    states: List[SymState] = field(default_factory=list)


ENGINES = ("sym", "sym2", "fold-branch", "fold-global")


def _variant_for(engine: str, variant: Optional[Variant]) -> Variant:
    if engine == "sym2":
        return R3S
    return variant if variant is not None else R1S


SuccFn = Callable[[SymState, Variant], List[Tuple[str, SymState]]]


class _Branch:
    """Persistent path record for branch-local folding."""
    __slots__ = ("state", "parent", "label", "depth")

    def __init__(self, state: SymState, parent: Optional["_Branch"], label: str, depth: int):
        self.state = state
        self.parent = parent
        self.label = label
        self.depth = depth

    def path(self) -> List[str]:
        out = []
        b = self
        while b.parent is not None:
            out.append(b.label)
            b = b.parent
        return out[::-1]

    def subsumed(self, s: SymState) -> bool:
        p = project_now(s)
        ds = []
        b = self
        while b is not None:
            q = project_now(b.state)
            if q.key == p.key:
                if q.constraint.atoms <= p.constraint.atoms:
                    return True
                ds.append(q.constraint)
            b = b.parent
        return bool(ds) and implies_formula(p.constraint, Formula(ds))


def search(net: NetSpec, goal: Prop, engine: str = "fold-global", variant: Optional[Variant] = None,
           k0: Optional[Constraint] = None, max_sols: Optional[int] = None, max_depth: Optional[int] = None,
           max_states: int = 50_000, succ: Optional[SuccFn] = None, keep_states: bool = False,
           init: Optional[SymState] = None, workers: int = 1) -> SearchOutcome:
    """Breadth-first symbolic reachability for ``goal``.

    ``engine`` selects plain search (``sym``), alternating plain search
    (``sym2``), branch-local folding or global folding.
    """
    if engine not in ENGINES:
        raise ValueError(f"unknown engine {engine!r}; expected one of {', '.join(ENGINES)}")
    var = _variant_for(engine, variant)
    succ = succ or successors
    s0 = init if init is not None else initial_state(net, var, k0)
    out = SearchOutcome()
    folding_global = engine == "fold-global"
    folding_branch = engine == "fold-branch"
    vmap = VisitedMap()

    def visit(b: _Branch) -> bool:
        out.explored += 1
        if keep_states:
            out.states.append(b.state)
        if out.explored > max_states:
            raise BudgetExceeded(f"symbolic state budget of {max_states} exhausted", out.explored - 1)
        if holds(goal, b.state):
            out.witnesses.append(make_witness(b.state, goal, b.path()))
            if max_sols is not None and len(out.witnesses) >= max_sols:
                return True
        return False

    root = _Branch(s0, None, "", 0)
    if folding_global:
        vmap.add(s0)
    if visit(root):
        return out
    frontier = deque([root])
    pool = None
    if workers > 1 and succ is successors:
        from concurrent.futures import ProcessPoolExecutor
        pool = ProcessPoolExecutor(max_workers=workers)
    try:
        while frontier:
            level = list(frontier)
            frontier.clear()
            level = [b for b in level if max_depth is None or b.depth < max_depth]
            if pool is not None:
                succ_lists = list(pool.map(_succ_job, [(b.state, var) for b in level]))
            else:
                succ_lists = [succ(b.state, var) for b in level]
            for b, children in zip(level, succ_lists):
                for label, s2 in children:
                    if folding_global:
                        if vmap.subsumed(s2):
                            continue
                        vmap.add(s2)
                    elif folding_branch:
                        if b.subsumed(s2):
                            continue
                    nb = _Branch(s2, b, label, b.depth + 1)
                    if visit(nb):
                        return out
                    frontier.append(nb)
    finally:
        if pool is not None:
            pool.shutdown()
    return out


def _succ_job(args):
    s, var = args
    return successors(s, var)
