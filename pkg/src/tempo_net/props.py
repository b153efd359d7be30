"""State properties and temporal formulas: AST, parser, encoding, evaluation.

Symbolic evaluation is existential: a property holds in a symbolic state
when *some* instance of the state satisfies it.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, List, Mapping, Optional, Protocol, Sequence, Tuple, Union

from .linarith import (Constraint, ExprParser, Formula, LinExpr, ParseError, VarId, compare, fmt_rat, is_sat,
                       le, lt)
from .net import Bag, Interval

RELS = ("<=", ">=", "==", "!=", "<", ">", "=")


# ---------------------------------------------------------------------------
# state properties

class Prop:
    def __and__(self, other: "Prop") -> "Prop":
        return And(self, other)

    def __or__(self, other: "Prop") -> "Prop":
        return Or(self, other)

    def __invert__(self) -> "Prop":
        return Not(self)


@dataclass(frozen=True)
class PTrue(Prop):
    def __str__(self) -> str:
        return "true"


@dataclass(frozen=True)
class PFalse(Prop):
    def __str__(self) -> str:
        return "false"


@dataclass(frozen=True)
class PlaceCmp(Prop):
    place: str
    rel: str
    rhs: LinExpr

    def __str__(self) -> str:
        return f"{self.place} {self.rel} {self.rhs}"


@dataclass(frozen=True)
class ClockCmp(Prop):
    trans: str
    rel: str
    rhs: LinExpr

    def __str__(self) -> str:
        return f"clock({self.trans}) {self.rel} {self.rhs}"


@dataclass(frozen=True)
class Reach(Prop):
    """The marking covers ``bag``."""
    bag: Bag

    def __str__(self) -> str:
        return "reach(" + " ".join(f"{p}={n}" for p, n in self.bag.items()) + ")"


@dataclass(frozen=True)
class KBounded(Prop):
    bound: LinExpr

    def __str__(self) -> str:
        return f"k-bounded({self.bound})"


@dataclass(frozen=True)
class DiffGt(Prop):
    t1: str
    t2: str
    bound: LinExpr

    def __str__(self) -> str:
        return f"diff>({self.t1}, {self.t2}, {self.bound})"


@dataclass(frozen=True)
class InTime(Prop):
    window: Interval

    def __str__(self) -> str:
        return f"in-time {self.window}"


@dataclass(frozen=True)
class And(Prop):
    left: Prop
    right: Prop

    def __str__(self) -> str:
        return f"({self.left} and {self.right})"


@dataclass(frozen=True)
class Or(Prop):
    left: Prop
    right: Prop

    def __str__(self) -> str:
        return f"({self.left} or {self.right})"


@dataclass(frozen=True)
class Not(Prop):
    arg: Prop

    def __str__(self) -> str:
        return f"not {self.arg}" if not isinstance(self.arg, (And, Or)) else f"not {self.arg}"


def conj(*ps: Prop) -> Prop:
    out: Optional[Prop] = None
    for p in ps:
        out = p if out is None else And(out, p)
    return out if out is not None else PTrue()


def mentions_time(p: Prop) -> bool:
    if isinstance(p, InTime):
        return True
    if isinstance(p, (And, Or)):
        return mentions_time(p.left) or mentions_time(p.right)
    if isinstance(p, Not):
        return mentions_time(p.arg)
    return False


# ---------------------------------------------------------------------------
# encoding into constraints

class View(Protocol):
    """What an encoder needs from a state: observable values as expressions."""

    def marking_expr(self, place: str) -> LinExpr: ...

    def clock_expr(self, trans: str) -> LinExpr: ...

    def gt_expr(self) -> Optional[LinExpr]: ...

    @property
    def place_names(self) -> Sequence[str]: ...


class PropError(ValueError):
    pass


def _cmp_formula(lhs: LinExpr, rel: str, rhs: LinExpr, positive: bool) -> Formula:
    if rel == "!=":
        rel, positive = "=", not positive
    if rel == "==":
        rel = "="
    if positive:
        return Formula([Constraint.of(compare(lhs, rel, rhs))])
    neg = {"<": ">=", "<=": ">", ">": "<=", ">=": "<"}
    if rel == "=":
        return Formula([Constraint.of(lt(lhs, rhs)), Constraint.of(lt(rhs, lhs))])
    return Formula([Constraint.of(compare(lhs, neg[rel], rhs))])


def _conj(fs: List[Formula]) -> Formula:
    out = Formula.true()
    for f in fs:
        out = out.conj(f)
        if out.is_false():
            break
    return out


def _disj(fs: List[Formula]) -> Formula:
    out = Formula.false()
    for f in fs:
        out = out | f
    return out


def encode(p: Prop, view: View, positive: bool = True) -> Formula:
    """Constraint encoding of ``p`` (or of ``not p`` when ``positive`` is False)."""
    if isinstance(p, PTrue):
        return Formula.true() if positive else Formula.false()
    if isinstance(p, PFalse):
        return Formula.false() if positive else Formula.true()
    if isinstance(p, Not):
        return encode(p.arg, view, not positive)
    if isinstance(p, And):
        parts = [encode(p.left, view, positive), encode(p.right, view, positive)]
        return _conj(parts) if positive else _disj(parts)
    if isinstance(p, Or):
        parts = [encode(p.left, view, positive), encode(p.right, view, positive)]
        return _disj(parts) if positive else _conj(parts)
    if isinstance(p, PlaceCmp):
        return _cmp_formula(view.marking_expr(p.place), p.rel, p.rhs, positive)
    if isinstance(p, ClockCmp):
        return _cmp_formula(view.clock_expr(p.trans), p.rel, p.rhs, positive)
    if isinstance(p, KBounded):
        parts = [_cmp_formula(view.marking_expr(q), "<=", p.bound, positive) for q in view.place_names]
        return _conj(parts) if positive else _disj(parts)
    if isinstance(p, Reach):
        parts = [_cmp_formula(view.marking_expr(q), ">=", LinExpr.const(n), positive) for q, n in p.bag.items()]
        return _conj(parts) if positive else _disj(parts)
    if isinstance(p, DiffGt):
        d = view.clock_expr(p.t1) - view.clock_expr(p.t2)
        parts = [_cmp_formula(d, ">", p.bound, positive), _cmp_formula(-d, ">", p.bound, positive)]
        return _disj(parts) if positive else _conj(parts)
    if isinstance(p, InTime):
        gt = view.gt_expr()
        if gt is None:
            raise PropError("in-time needs a global clock (time-bounded engine)")
        parts = [_cmp_formula(gt, ">=", p.window.lower, positive)]
        if p.window.upper is not None:
            parts.append(_cmp_formula(gt, "<=", p.window.upper, positive))
        return _conj(parts) if positive else _disj(parts)
    raise PropError(f"unknown property {p!r}")


def holds_encoded(constraint: Constraint, f: Formula) -> bool:
    return any(is_sat(constraint & d) for d in f.disjuncts)


# ---------------------------------------------------------------------------
# ground evaluation

def eval_prop(p: Prop, marking: Mapping[str, int], clocks: Mapping[str, Fraction], gt: Optional[Fraction],
              point: Mapping[VarId, Fraction], places: Sequence[str]) -> bool:
    """Exact truth value of ``p`` on a ground state under parameter ``point``."""
    def ev(e: LinExpr) -> Fraction:
        return e.evaluate(point)

    def cmp(a: Fraction, rel: str, b: Fraction) -> bool:
        return {"<": a < b, "<=": a <= b, "=": a == b, "==": a == b, ">=": a >= b, ">": a > b,
                "!=": a != b}[rel]

    if isinstance(p, PTrue):
        return True
    if isinstance(p, PFalse):
        return False
    if isinstance(p, Not):
        return not eval_prop(p.arg, marking, clocks, gt, point, places)
    if isinstance(p, And):
        return eval_prop(p.left, marking, clocks, gt, point, places) and \
            eval_prop(p.right, marking, clocks, gt, point, places)
    if isinstance(p, Or):
        return eval_prop(p.left, marking, clocks, gt, point, places) or \
            eval_prop(p.right, marking, clocks, gt, point, places)
    if isinstance(p, PlaceCmp):
        return cmp(Fraction(marking.get(p.place, 0)), p.rel, ev(p.rhs))
    if isinstance(p, ClockCmp):
        return cmp(clocks[p.trans], p.rel, ev(p.rhs))
    if isinstance(p, KBounded):
        b = ev(p.bound)
        return all(marking.get(q, 0) <= b for q in places)
    if isinstance(p, Reach):
        return all(marking.get(q, 0) >= n for q, n in p.bag.items())
    if isinstance(p, DiffGt):
        return abs(clocks[p.t1] - clocks[p.t2]) > ev(p.bound)
    if isinstance(p, InTime):
        if gt is None:
            raise PropError("in-time needs a global clock")
        lo = ev(p.window.lower)
        hi = None if p.window.upper is None else ev(p.window.upper)
        return lo <= gt and (hi is None or gt <= hi)
    raise PropError(f"unknown property {p!r}")


# ---------------------------------------------------------------------------
# temporal formulas (full LTL AST; the symbolic checker accepts a fragment)

class LTL:
    pass


@dataclass(frozen=True)
class LAtom(LTL):
    prop: Prop

    def __str__(self) -> str:
        return f"({self.prop})"


@dataclass(frozen=True)
class LNot(LTL):
    arg: LTL

    def __str__(self) -> str:
        return f"~ {self.arg}"


@dataclass(frozen=True)
class LAnd(LTL):
    left: LTL
    right: LTL

    def __str__(self) -> str:
        return f"({self.left} /\\ {self.right})"


@dataclass(frozen=True)
class LOr(LTL):
    left: LTL
    right: LTL

    def __str__(self) -> str:
        return f"({self.left} \\/ {self.right})"


@dataclass(frozen=True)
class LNext(LTL):
    arg: LTL

    def __str__(self) -> str:
        return f"X {self.arg}"


@dataclass(frozen=True)
class LUntil(LTL):
    left: LTL
    right: LTL
    window: Optional[Interval] = None

    def __str__(self) -> str:
        w = f" {self.window}" if self.window is not None else ""
        return f"({self.left} U{w} {self.right})"


@dataclass(frozen=True)
class LRelease(LTL):
    left: LTL
    right: LTL

    def __str__(self) -> str:
        return f"({self.left} R {self.right})"


@dataclass(frozen=True)
class LEventually(LTL):
    arg: LTL
    window: Optional[Interval] = None

    def __str__(self) -> str:
        return f"<> {self.arg}" if self.window is None else f"<{self.window}> {self.arg}"


@dataclass(frozen=True)
class LAlways(LTL):
    arg: LTL
    window: Optional[Interval] = None

    def __str__(self) -> str:
        return f"[] {self.arg}" if self.window is None else f"[{self.window}] {self.arg}"


def limp(a: LTL, b: LTL) -> LTL:
    return LOr(LNot(a), b)


def as_prop(f: LTL) -> Optional[Prop]:
    """The state property denoted by a temporal-operator-free formula, else None."""
    if isinstance(f, LAtom):
        return f.prop
    if isinstance(f, LNot):
        a = as_prop(f.arg)
        return None if a is None else Not(a)
    if isinstance(f, (LAnd, LOr)):
        a, b = as_prop(f.left), as_prop(f.right)
        if a is None or b is None:
            return None
        return And(a, b) if isinstance(f, LAnd) else Or(a, b)
    return None


# symbolic fragment --------------------------------------------------------

@dataclass(frozen=True)
class Eventually:
    p: Prop
    window: Optional[Interval] = None


@dataclass(frozen=True)
class Always:
    p: Prop
    window: Optional[Interval] = None


@dataclass(frozen=True)
class Until:
    p: Prop
    q: Prop
    window: Optional[Interval] = None


TemporalFormula = Union[Eventually, Always, Until]


def to_fragment(f: LTL) -> TemporalFormula:
    """Classify an LTL formula into the non-nested fragment, or raise."""
    if isinstance(f, LEventually):
        p = as_prop(f.arg)
        if p is not None:
            return Eventually(p, f.window)
    if isinstance(f, LAlways):
        p = as_prop(f.arg)
        if p is not None:
            return Always(p, f.window)
    if isinstance(f, LUntil):
        p, q = as_prop(f.left), as_prop(f.right)
        if p is not None and q is not None:
            return Until(p, q, f.window)
    raise PropError(f"formula outside the non-nested fragment: {f}")


# ---------------------------------------------------------------------------
# parser

class PropParser(ExprParser):
    """Parser for properties and temporal formulas.

    ``places``/``transitions`` name the net's nodes; ``resolve`` maps
    parameter names to VarIds for the linear expressions.
    """

    def __init__(self, text: str, places: Sequence[str], transitions: Sequence[str],
                 resolve: Callable[[str], VarId]):
        super().__init__(text, resolve)
        self.places = set(places)
        self.transitions = set(transitions)

    def fail(self, msg: str):
        raise ParseError(msg, self.text, self.pos)

    # temporal layer -------------------------------------------------------
    def formula(self) -> LTL:
        left = self.disj()
        if self.take("->"):
            return limp(left, self.formula())
        return left

    def disj(self) -> LTL:
        f = self.conj_()
        while self.take("\\/") or self.take_word("or"):
            f = LOr(f, self.conj_())
        return f

    def conj_(self) -> LTL:
        f = self.until()
        while self.take("/\\") or self.take_word("and"):
            f = LAnd(f, self.until())
        return f

    def until(self) -> LTL:
        f = self.unary()
        if self.take_word("U"):
            window = None
            if self.peek("["):
                window = self.interval()
            return LUntil(f, self.until(), window)
        if self.take_word("R"):
            return LRelease(f, self.until())
        return f

    def unary(self) -> LTL:
        if self.take("~") or self.take_word("not"):
            return LNot(self.unary())
        if self.take("<>"):
            return LEventually(self.unary())
        if self.take("[]"):
            return LAlways(self.unary())
        if self.peek("<["):
            self.pos += 1
            w = self.interval()
            self.expect(">")
            return LEventually(self.unary(), w)
        if self.peek("[["):
            self.pos += 1
            w = self.interval()
            self.expect("]")
            return LAlways(self.unary(), w)
        if self.take_word("X"):
            return LNext(self.unary())
        if self.peek("("):
            save = self.pos
            self.pos += 1
            try:
                f = self.formula()
                self.expect(")")
                return f
            except ParseError:
                self.pos = save
        return LAtom(self.atom_prop())

    # atoms --------------------------------------------------------------
    def interval(self) -> Interval:
        self.expect("[")
        lo = self.expr()
        if not (self.take(",") or self.take(":")):
            self.fail("expected ',' in interval")
        if self.take_word("inf"):
            hi = None
        else:
            hi = self.expr()
        self.expect("]")
        return Interval(lo, hi)

    def prel(self) -> str:
        self.ws()
        for r in RELS:
            if self.text.startswith(r, self.pos):
                self.pos += len(r)
                return r
        self.fail("expected a relation")

    def name_in(self, pool, what: str) -> str:
        name = self.ident()
        if name is None or name not in pool:
            self.fail(f"unknown {what} {name!r}")
        self.pos += len(name)
        return name

    def atom_prop(self) -> Prop:
        if self.take_word("true"):
            return PTrue()
        if self.take_word("false"):
            return PFalse()
        if self.take("k-bounded"):
            self.expect("(")
            b = self.expr()
            self.expect(")")
            return KBounded(b)
        if self.take("diff>"):
            self.expect("(")
            t1 = self.name_in(self.transitions, "transition")
            self.expect(",")
            t2 = self.name_in(self.transitions, "transition")
            self.expect(",")
            b = self.expr()
            self.expect(")")
            return DiffGt(t1, t2, b)
        if self.take("in-time"):
            return InTime(self.interval())
        if self.take_word("reach"):
            self.expect("(")
            d: Dict[str, int] = {}
            while not self.take(")"):
                p = self.name_in(self.places, "place")
                if not (self.take("=") or self.take("|->")):
                    self.fail("expected '=' in reach(...)")
                n = self.number()
                if n is None or n.denominator != 1:
                    self.fail("expected a token count")
                d[p] = int(n)
                self.take(",")
                self.take(";")
            return Reach(Bag(d))
        if self.take_word("clock"):
            self.expect("(")
            t = self.name_in(self.transitions, "transition")
            self.expect(")")
            rel = self.prel()
            return ClockCmp(t, rel, self.expr())
        name = self.ident()
        if name is not None and name in self.places:
            self.pos += len(name)
            rel = self.prel()
            return PlaceCmp(name, rel, self.expr())
        self.fail("expected a property atom")


def _parser(text: str, net, extra: Sequence[VarId] = ()) -> PropParser:
    return PropParser(text, net.places, net.labels, net.resolver(extra))


def parse_ltl(text: str, net, extra: Sequence[VarId] = ()) -> LTL:
    p = _parser(text, net, extra)
    f = p.formula()
    if not p.at_end():
        p.fail("trailing input")
    return f


def parse_prop(text: str, net, extra: Sequence[VarId] = ()) -> Prop:
    f = parse_ltl(text, net, extra)
    p = as_prop(f)
    if p is None:
        raise ParseError(f"temporal operator in a state property: {text!r}")
    return p


def parse_temporal(text: str, net, extra: Sequence[VarId] = ()) -> TemporalFormula:
    return to_fragment(parse_ltl(text, net, extra))


def parse_interval(text: str, net, extra: Sequence[VarId] = ()) -> Interval:
    p = _parser(text, net, extra)
    w = p.interval()
    if not p.at_end():
        p.fail("trailing input")
    return w
