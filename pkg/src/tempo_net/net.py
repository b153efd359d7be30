"""Net data model, marking algebra and the text/JSON net formats."""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from .linarith import (Constraint, ExprParser, LinExpr, ParseError, VarId, VarKind, fmt_rat, implies,
                       is_sat, le, ge, mparam, parse_constraint, parse_expr, tparam)

log = logging.getLogger(__name__)


class NetError(ValueError):
    """Invalid net: syntax, undeclared symbol, or violated invariant."""

    def __init__(self, msg: str, line: int = 0, col: int = 0):
        self.line, self.col = line, col
        super().__init__(f"line {line}, column {col}: {msg}" if line else msg)


class Bag:
    """Finite multiset of places.  Values are ints (concrete) or LinExprs (symbolic)."""

    __slots__ = ("_d", "_h")

    def __init__(self, entries: Optional[Mapping[str, object]] = None):
        d = {}
        for p, n in (entries or {}).items():
            if isinstance(n, LinExpr):
                if n.is_const() and n.constant.denominator == 1:
                    n = int(n.constant)
                elif n.is_const():
                    n = n.constant
            if isinstance(n, int) and n < 0:
                raise ValueError(f"negative multiplicity for {p}")
            if n != 0 or isinstance(n, LinExpr):
                d[p] = n
        self._d = d
        self._h = None

    def __getitem__(self, p: str):
        return self._d.get(p, 0)

    def get(self, p: str, default=0):
        return self._d.get(p, default)

    def items(self):
        return self._d.items()

    def support(self) -> List[str]:
        return list(self._d)

    def is_ground(self) -> bool:
        return not any(isinstance(n, LinExpr) for n in self._d.values())

    def __add__(self, other: "Bag") -> "Bag":
        d = dict(self._d)
        for p, n in other.items():
            d[p] = d.get(p, 0) + n
        return Bag(d)

    def __sub__(self, other: "Bag") -> "Bag":
        d = dict(self._d)
        for p, n in other.items():
            v = d.get(p, 0) - n
            if isinstance(v, int) and v < 0:
                raise ValueError(f"bag underflow on place {p}")
            d[p] = v
        return Bag(d)

    def __le__(self, other: "Bag") -> bool:
        return all(other[p] >= n for p, n in self._d.items())

    def __eq__(self, other) -> bool:
        return isinstance(other, Bag) and self._d == other._d

    def __hash__(self) -> int:
        if self._h is None:
            self._h = hash(frozenset(self._d.items()))
        return self._h

    def __repr__(self) -> str:
        return f"Bag({self._d})"

    def __str__(self) -> str:
        if not self._d:
            return "none"
        return " ".join(p if n == 1 else f"{p}*{n}" for p, n in self._d.items())


def bag_leq(a: Bag, b: Bag) -> bool:
    return a <= b


def bag_add(a: Bag, b: Bag) -> Bag:
    return a + b


def bag_sub(a: Bag, b: Bag) -> Bag:
    return a - b


def _lin(n) -> LinExpr:
    return n if isinstance(n, LinExpr) else LinExpr.const(n)


def sym_bag_leq(a: Bag, b: Bag) -> Constraint:
    """Pointwise ``a <= b`` as a constraint (b may hold LinExprs)."""
    return Constraint(le(_lin(n), _lin(b[p])) for p, n in a.items())


@dataclass(frozen=True)
class Interval:
    lower: LinExpr
    upper: Optional[LinExpr]  # None is infinity

    def __str__(self) -> str:
        return f"[{self.lower}, {'inf' if self.upper is None else self.upper}]"


@dataclass(frozen=True)
class Transition:
    label: str
    pre: Bag
    post: Bag
    inhibit: Bag
    interval: Interval


def enabled(m: Bag, t: Transition) -> bool:
    return t.pre <= m


def inhibited(m: Bag, inh: Bag) -> bool:
    return any(n > 0 and m[p] >= n for p, n in inh.items())


def active(m: Bag, t: Transition) -> bool:
    return enabled(m, t) and not inhibited(m, t.inhibit)


def sym_active(m: Bag, t: Transition) -> Constraint:
    """Enabledness and non-inhibition as one conjunction."""
    atoms = [le(n, _lin(m[p])) for p, n in t.pre.items()]
    atoms += [le(_lin(m[p]) + 1, n) for p, n in t.inhibit.items() if n > 0]
    return Constraint(atoms)


def newly_enabled(t: Transition, m: Bag, fired: Transition) -> bool:
    inter = m - fired.pre
    after = inter + fired.post
    return t.pre <= after and (t.label == fired.label or not t.pre <= inter)


@dataclass(frozen=True)
class NetSpec:
    name: str
    places: Tuple[str, ...]
    time_params: Tuple[VarId, ...]
    mark_params: Tuple[VarId, ...]
    transitions: Tuple[Transition, ...]
    initial_marking: Bag
    k0: Constraint
    warnings: Tuple[str, ...] = field(default=(), compare=False)

    def transition(self, label: str) -> Transition:
        for t in self.transitions:
            if t.label == label:
                return t
        raise KeyError(label)

    @property
    def labels(self) -> Tuple[str, ...]:
        return tuple(t.label for t in self.transitions)

    def params(self) -> Tuple[VarId, ...]:
        return self.time_params + self.mark_params

    def resolver(self, extra: Sequence[VarId] = ()):
        table = {v.name: v for v in self.params()}
        table.update({v.name: v for v in extra})

        def resolve(name: str) -> VarId:
            return table[name]
        return resolve

    def is_ground(self) -> bool:
        return not self.time_params and not self.mark_params

    def with_k0(self, k0: Constraint) -> "NetSpec":
        return NetSpec(self.name, self.places, self.time_params, self.mark_params, self.transitions,
                       self.initial_marking, k0, self.warnings)

    def with_marking(self, m: Bag) -> "NetSpec":
        return NetSpec(self.name, self.places, self.time_params, self.mark_params, self.transitions,
                       m, self.k0, self.warnings)


# ---------------------------------------------------------------------------
# ground instances (used by the concrete semantics)

@dataclass(frozen=True)
class GroundNet:
    """A net with every parameter fixed; markings are tuples over ``places``."""
    spec: NetSpec
    places: Tuple[str, ...]
    labels: Tuple[str, ...]
    pre: Tuple[Tuple[int, ...], ...]
    post: Tuple[Tuple[int, ...], ...]
    inhibit: Tuple[Tuple[int, ...], ...]
    lower: Tuple[Fraction, ...]
    upper: Tuple[Optional[Fraction], ...]
    m0: Tuple[int, ...]

    def index(self, label: str) -> int:
        return self.labels.index(label)

    def enabled(self, m: Sequence[int], i: int) -> bool:
        return all(a <= b for a, b in zip(self.pre[i], m))

    def inhibited(self, m: Sequence[int], i: int) -> bool:
        return any(h > 0 and b >= h for h, b in zip(self.inhibit[i], m))

    def active(self, m: Sequence[int], i: int) -> bool:
        return self.enabled(m, i) and not self.inhibited(m, i)

    def bag(self, m: Sequence[int]) -> Bag:
        return Bag({p: n for p, n in zip(self.places, m) if n})


def instantiate(net: NetSpec, valuation: Mapping[str, object]) -> GroundNet:
    """Fix all parameters.  ``valuation`` maps parameter names to rationals/ints."""
    point: Dict[VarId, Fraction] = {}
    for v in net.params():
        if v.name not in valuation:
            raise NetError(f"no value for parameter {v.name}")
        point[v] = Fraction(valuation[v.name])
    for name in valuation:
        if name not in {v.name for v in net.params()}:
            raise NetError(f"unknown parameter {name}")
    if not net.k0.holds_at(point):
        raise NetError(f"valuation violates the initial constraint: {net.k0}")
    for v in net.mark_params:
        if point[v].denominator != 1:
            raise NetError(f"marking parameter {v.name} must be an integer")
    P = net.places

    def vec(b: Bag) -> Tuple[int, ...]:
        return tuple(int(b[p]) for p in P)

    m0 = []
    for p in P:
        n = net.initial_marking[p]
        m0.append(int(_lin(n).evaluate(point)))
    return GroundNet(
        spec=net, places=P, labels=net.labels,
        pre=tuple(vec(t.pre) for t in net.transitions),
        post=tuple(vec(t.post) for t in net.transitions),
        inhibit=tuple(vec(t.inhibit) for t in net.transitions),
        lower=tuple(t.interval.lower.evaluate(point) for t in net.transitions),
        upper=tuple(None if t.interval.upper is None else t.interval.upper.evaluate(point)
                    for t in net.transitions),
        m0=tuple(m0),
    )


# ---------------------------------------------------------------------------
# text format

def _bag_text(b: Bag) -> str:
    return str(b)


def format_net(net: NetSpec) -> str:
    out = [f"net {net.name}"]
    if net.time_params:
        out.append("param " + " ".join(v.name for v in net.time_params))
    if net.mark_params:
        out.append("intparam " + " ".join(v.name for v in net.mark_params))
    out.append("place " + " ".join(net.places))
    for t in net.transitions:
        line = f"trans {t.label} : {_bag_text(t.pre)} -> {_bag_text(t.post)}"
        if t.inhibit.support():
            line += f" inhibit {_bag_text(t.inhibit)}"
        line += f" in {t.interval}"
        out.append(line)
    m = [f"{p}={net.initial_marking[p]}" for p in net.places if net.initial_marking.get(p, 0) != 0]
    if m:
        out.append("marking " + " ".join(m))
    implied = _implied_atoms(net.time_params, net.mark_params)
    rest = [a for a in net.k0 if a not in implied]
    if rest:
        out.append("constraint " + " and ".join(str(a) for a in rest))
    return "\n".join(out) + "\n"


def _implied_atoms(tp, mp) -> set:
    return {ge(LinExpr.var(v), 0) for v in tuple(tp) + tuple(mp)}


_KEYWORDS = {"net", "param", "intparam", "place", "trans", "marking", "constraint", "inhibit", "in", "none", "inf"}


def _ident_ok(s: str) -> bool:
    return bool(s) and (s[0].isalpha() or s[0] == "_") and all(c.isalnum() or c in "_'." for c in s) \
        and s not in _KEYWORDS


def parse_net(text: str) -> NetSpec:
    name = None
    tps: List[VarId] = []
    mps: List[VarId] = []
    places: List[str] = []
    trans_raw: List[Tuple[int, str]] = []
    marking_raw: List[Tuple[int, str]] = []
    cons_raw: List[Tuple[int, str]] = []
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        indent = len(line) - len(line.lstrip())
        line = line.strip()
        kw, _, rest = line.partition(" ")
        rest = rest.strip()
        if kw == "net":
            if not _ident_ok(rest):
                raise NetError(f"bad net name {rest!r}", ln, indent + 5)
            name = rest
        elif kw in ("param", "intparam", "place"):
            for ident in rest.split():
                if not _ident_ok(ident):
                    raise NetError(f"bad identifier {ident!r}", ln, indent + line.find(ident) + 1)
                if kw == "param":
                    tps.append(tparam(ident))
                elif kw == "intparam":
                    mps.append(mparam(ident))
                else:
                    places.append(ident)
        elif kw == "trans":
            trans_raw.append((ln, rest))
        elif kw == "marking":
            marking_raw.append((ln, rest))
        elif kw == "constraint":
            cons_raw.append((ln, rest))
        else:
            raise NetError(f"unknown keyword {kw!r}", ln, indent + 1)
    if name is None:
        raise NetError("missing 'net <name>' line")
    names = [v.name for v in tps + mps]
    for group in (names, places):
        dup = {x for x in group if group.count(x) > 1}
        if dup:
            raise NetError(f"duplicate declaration: {sorted(dup)}")
    if set(names) & set(places):
        raise NetError(f"names used both as place and parameter: {sorted(set(names) & set(places))}")
    resolve_t = {v.name: v for v in tps}
    place_set = set(places)

    def rt(n: str) -> VarId:
        return resolve_t[n]

    def parse_bag(s: str, ln: int) -> Bag:
        s = s.strip()
        if s == "none" or not s:
            return Bag()
        d: Dict[str, int] = {}
        for item in s.split():
            p, _, mult = item.partition("*")
            if p not in place_set:
                raise NetError(f"undeclared place {p!r}", ln)
            try:
                k = int(mult) if mult else 1
            except ValueError:
                raise NetError(f"bad multiplicity in {item!r}", ln) from None
            if k < 0:
                raise NetError(f"negative multiplicity in {item!r}", ln)
            d[p] = d.get(p, 0) + k
        return Bag(d)

    transitions: List[Transition] = []
    for ln, rest in trans_raw:
        label, colon, body = rest.partition(":")
        label = label.strip()
        if not colon or not _ident_ok(label):
            raise NetError("expected 'trans <ident> : ...'", ln)
        if label in place_set or label in names:
            raise NetError(f"transition name {label!r} clashes with a place or parameter", ln)
        if " in " not in f" {body} ":
            raise NetError("missing 'in [l, u]' interval", ln)
        arcs, _, itv = body.rpartition(" in ")
        if "->" not in arcs:
            raise NetError("expected '<bag> -> <bag>'", ln)
        pre_s, _, post_s = arcs.partition("->")
        inh_s = ""
        if " inhibit " in f" {post_s} ":
            post_s, _, inh_s = f" {post_s} ".partition(" inhibit ")
        itv = itv.strip()
        if not (itv.startswith("[") and itv.endswith("]")) or "," not in itv:
            raise NetError(f"bad interval {itv!r}", ln)
        lo_s, _, hi_s = itv[1:-1].rpartition(",")
        try:
            lo = parse_expr(lo_s, rt)
            hi = None if hi_s.strip() == "inf" else parse_expr(hi_s, rt)
        except ParseError as e:
            raise NetError(f"in interval: {e}", ln) from None
        transitions.append(Transition(label, parse_bag(pre_s, ln), parse_bag(post_s, ln),
                                      parse_bag(inh_s, ln), Interval(lo, hi)))
    if not transitions:
        raise NetError("a net needs at least one transition")
    labels = [t.label for t in transitions]
    if len(set(labels)) != len(labels):
        raise NetError("duplicate transition label")
    mps_by = {v.name: v for v in mps}
    m0: Dict[str, object] = {}
    for ln, rest in marking_raw:
        for item in rest.split():
            p, eqs, val = item.partition("=")
            if not eqs or p not in place_set:
                raise NetError(f"bad marking entry {item!r}", ln)
            if val.isdigit():
                m0[p] = int(val)
            elif val in mps_by:
                m0[p] = LinExpr.var(mps_by[val])
            else:
                raise NetError(f"marking value must be a natural or an intparam: {val!r}", ln)
    all_params = {v.name: v for v in tps + mps}
    k0_atoms: List = []
    for ln, rest in cons_raw:
        try:
            k0_atoms.extend(parse_constraint(rest, all_params.__getitem__).atoms)
        except ParseError as e:
            raise NetError(str(e), ln) from None
    return build_net(name, places, tps, mps, transitions, Bag(m0), Constraint(k0_atoms))


def build_net(name: str, places: Sequence[str], tps: Sequence[VarId], mps: Sequence[VarId],
              transitions: Sequence[Transition], m0: Bag, k0: Constraint) -> NetSpec:
    """Validate and assemble a NetSpec, adding the implied K0 atoms."""
    declared = set(tps) | set(mps)
    for t in transitions:
        for e in (t.interval.lower, t.interval.upper):
            if e is not None and any(v not in declared or v.kind != VarKind.TIME_PARAM for v in e.vars()):
                raise NetError(f"interval of {t.label} uses an undeclared time parameter")
        for b in (t.pre, t.post, t.inhibit):
            for p in b.support():
                if p not in places:
                    raise NetError(f"transition {t.label} uses undeclared place {p}")
    for v in k0.vars():
        if v not in declared:
            raise NetError(f"constraint mentions undeclared symbol {v}")
    k0 = k0 & Constraint(_implied_atoms(tps, mps))
    if not is_sat(k0):
        raise NetError("initial constraint is unsatisfiable")
    warns: List[str] = []
    for t in transitions:
        if t.interval.upper is None:
            continue
        nonempty = le(t.interval.lower, t.interval.upper)
        if nonempty is True:
            continue
        if nonempty is False or not is_sat(k0 & nonempty):
            raise NetError(f"interval of {t.label} is empty under the initial constraint")
        if not implies(k0, Constraint.of(nonempty)):
            msg = f"interval of {t.label} may be empty; adding {nonempty} to the initial constraint"
            log.warning(msg)
            warns.append(msg)
            k0 = k0 & nonempty
    return NetSpec(name, tuple(places), tuple(tps), tuple(mps), tuple(transitions), m0, k0, tuple(warns))


def load_net(path: str) -> NetSpec:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    if path.endswith(".json"):
        return net_from_json(json.loads(text))
    return parse_net(text)


# ---------------------------------------------------------------------------
# JSON mirror

def net_to_json(net: NetSpec) -> dict:
    def bag(b: Bag):
        return {p: (n if isinstance(n, int) else str(n)) for p, n in b.items()}
    return {
        "name": net.name,
        "places": list(net.places),
        "time_params": [v.name for v in net.time_params],
        "mark_params": [v.name for v in net.mark_params],
        "transitions": [
            {"label": t.label, "pre": bag(t.pre), "post": bag(t.post), "inhibit": bag(t.inhibit),
             "interval": {"lower": str(t.interval.lower),
                          "upper": None if t.interval.upper is None else str(t.interval.upper)}}
            for t in net.transitions],
        "initial_marking": bag(net.initial_marking),
        "k0": [str(a) for a in net.k0],
    }


def net_from_json(d: dict) -> NetSpec:
    tps = [tparam(n) for n in d.get("time_params", [])]
    mps = [mparam(n) for n in d.get("mark_params", [])]
    table = {v.name: v for v in tps + mps}
    rt = {v.name: v for v in tps}

    def bag(x) -> Bag:
        out = {}
        for p, n in (x or {}).items():
            out[p] = n if isinstance(n, int) else parse_expr(str(n), table.__getitem__)
        return Bag(out)
    try:
        trans = [Transition(t["label"], bag(t.get("pre")), bag(t.get("post")), bag(t.get("inhibit")),
                            Interval(parse_expr(str(t["interval"]["lower"]), rt.__getitem__),
                                     None if t["interval"].get("upper") in (None, "inf")
                                     else parse_expr(str(t["interval"]["upper"]), rt.__getitem__)))
                 for t in d["transitions"]]
        k0 = Constraint(a for s in d.get("k0", []) for a in parse_constraint(s, table.__getitem__).atoms)
    except (KeyError, ParseError) as e:
        raise NetError(f"bad JSON net: {e}") from None
    if not trans:
        raise NetError("a net needs at least one transition")
    return build_net(d["name"], d["places"], tps, mps, trans, bag(d.get("initial_marking")), k0)


# ---------------------------------------------------------------------------
# bundled nets

def bundled_names() -> List[str]:
    from importlib import resources
    return sorted(p.name[:-4] for p in resources.files("tempo_net").joinpath("nets").iterdir()
                  if p.name.endswith(".tpn"))


def load_bundled(name: str) -> NetSpec:
    from importlib import resources
    ref = resources.files("tempo_net").joinpath("nets", f"{name}.tpn")
    if not ref.is_file():
        raise NetError(f"no bundled net named {name!r}")
    return parse_net(ref.read_text(encoding="utf-8"))


def resolve_net(ref: str) -> NetSpec:
    """Load ``ref`` as a path; a missing file whose stem names a bundled net
    loads the bundled copy instead."""
    import os
    if os.path.exists(ref):
        return load_net(ref)
    stem = os.path.splitext(os.path.basename(ref))[0]
    if stem in bundled_names():
        return load_bundled(stem)
    raise NetError(f"no such net file: {ref}")
