"""Exact linear arithmetic over the rationals.

Expressions, atoms, conjunctive constraints and DNF formulas, with
satisfiability, implication and existential elimination decided by
Fourier-Motzkin elimination.  No floating point is used anywhere.

Atoms are stored in a normalized integer form: ``sum(c_i * x_i) + k REL 0``
with integer coefficients whose gcd (including the constant) is 1.  This
makes syntactic deduplication effective and keeps the elimination rows
small.
"""
from __future__ import annotations

import enum
import functools
import math
from fractions import Fraction
from typing import Callable, Dict, Iterable, Iterator, List, Mapping, NamedTuple, Optional, Sequence, Tuple

Rat = Fraction


class VarKind(enum.IntEnum):
    TIME_PARAM = 0
    MARK_PARAM = 1
    CLOCK = 2
    DELTA = 3
    GLOBAL_TIME = 4
    NOW = 5


class VarId(NamedTuple):
    kind: VarKind
    name: str
    instance: int = 0

    @property
    def is_param(self) -> bool:
        return self.kind in (VarKind.TIME_PARAM, VarKind.MARK_PARAM)

    @property
    def is_int(self) -> bool:
        # Marking parameters and the Now-names of places range over naturals.
        return self.kind == VarKind.MARK_PARAM or (self.kind == VarKind.NOW and self.name.startswith("m:"))

    def __str__(self) -> str:
        k = self.kind
        if k in (VarKind.TIME_PARAM, VarKind.MARK_PARAM):
            return self.name
        if k == VarKind.DELTA:
            return f"T{self.instance}"
        if k == VarKind.GLOBAL_TIME:
            return "GT" if self.instance == 0 else f"GT{self.instance}"
        if k == VarKind.CLOCK:
            return f"c_{self.name}" + (f"#{self.instance}" if self.instance else "")
        # Now-variables: "m:p2" -> now_p2, "c:t1" -> now_c_t1, "gt" -> now_GT
        tag, _, base = self.name.partition(":")
        suffix = f"#{self.instance}" if self.instance else ""
        if tag == "m":
            return f"now_{base}{suffix}"
        if tag == "c":
            return f"now_c_{base}{suffix}"
        return f"now_{self.name}{suffix}"


def tparam(name: str) -> VarId:
    return VarId(VarKind.TIME_PARAM, name, 0)


def mparam(name: str) -> VarId:
    return VarId(VarKind.MARK_PARAM, name, 0)


def fmt_rat(q: Fraction) -> str:
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def _to_rat(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, (int, str)):
        return Fraction(v)
    raise TypeError(f"not an exact rational: {v!r}")


# ---------------------------------------------------------------------------
# expressions

class LinExpr:
    """``constant + sum(coeff * var)`` with exact rational coefficients."""

    __slots__ = ("constant", "terms", "_hash")

    def __init__(self, constant=0, terms: Optional[Mapping[VarId, Fraction]] = None):
        self.constant = _to_rat(constant)
        if terms:
            self.terms = {v: _to_rat(c) for v, c in terms.items() if c != 0}
        else:
            self.terms = {}
        self._hash = None

    @classmethod
    def _raw(cls, constant: Fraction, terms: Dict[VarId, Fraction]) -> "LinExpr":
        e = cls.__new__(cls)
        e.constant = constant
        e.terms = terms
        e._hash = None
        return e

    @classmethod
    def var(cls, v: VarId, coeff=1) -> "LinExpr":
        return cls._raw(Fraction(0), {v: _to_rat(coeff)})

    @classmethod
    def const(cls, c) -> "LinExpr":
        return cls._raw(_to_rat(c), {})

    def is_const(self) -> bool:
        return not self.terms

    def vars(self) -> Iterable[VarId]:
        return self.terms.keys()

    def coeff(self, v: VarId) -> Fraction:
        return self.terms.get(v, Fraction(0))

    def __add__(self, other) -> "LinExpr":
        if not isinstance(other, LinExpr):
            return LinExpr._raw(self.constant + _to_rat(other), self.terms)
        if not other.terms:
            return LinExpr._raw(self.constant + other.constant, self.terms)
        terms = dict(self.terms)
        for v, c in other.terms.items():
            s = terms.get(v, 0) + c
            if s:
                terms[v] = s
            else:
                terms.pop(v, None)
        return LinExpr._raw(self.constant + other.constant, terms)

    __radd__ = __add__

    def __neg__(self) -> "LinExpr":
        return LinExpr._raw(-self.constant, {v: -c for v, c in self.terms.items()})

    def __sub__(self, other) -> "LinExpr":
        if not isinstance(other, LinExpr):
            other = LinExpr.const(other)
        return self + (-other)

    def __rsub__(self, other) -> "LinExpr":
        return (-self) + other

    def __mul__(self, k) -> "LinExpr":
        k = _to_rat(k)
        if k == 0:
            return LinExpr._raw(Fraction(0), {})
        return LinExpr._raw(self.constant * k, {v: c * k for v, c in self.terms.items()})

    __rmul__ = __mul__

    def substitute(self, sub: Mapping[VarId, "LinExpr"]) -> "LinExpr":
        if not any(v in sub for v in self.terms):
            return self
        out = LinExpr._raw(self.constant, {})
        for v, c in self.terms.items():
            out = out + (sub[v] * c if v in sub else LinExpr._raw(Fraction(0), {v: c}))
        return out

    def evaluate(self, point: Mapping[VarId, Fraction]) -> Fraction:
        return self.constant + sum((c * point[v] for v, c in self.terms.items()), Fraction(0))

    def __eq__(self, other) -> bool:
        if not isinstance(other, LinExpr):
            return NotImplemented
        return self.constant == other.constant and self.terms == other.terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.constant, frozenset(self.terms.items())))
        return self._hash

    def __repr__(self) -> str:
        return f"LinExpr({self})"

    def __str__(self) -> str:
        return _fmt_side(sorted(self.terms.items()), self.constant, allow_neg=True)


def _fmt_term(v: VarId, c: Fraction) -> str:
    if c == 1:
        return str(v)
    return f"{fmt_rat(c)}*{v}"


def _fmt_side(items: Sequence[Tuple[VarId, Fraction]], const: Fraction, allow_neg: bool = False) -> str:
    parts: List[str] = []
    for v, c in items:
        if not parts:
            parts.append(("-" + _fmt_term(v, -c)) if c < 0 else _fmt_term(v, c))
        else:
            parts.append(("- " + _fmt_term(v, -c)) if c < 0 else ("+ " + _fmt_term(v, c)))
    if const != 0 or not parts:
        if not parts:
            parts.append(fmt_rat(const))
        else:
            parts.append(("- " + fmt_rat(-const)) if const < 0 else ("+ " + fmt_rat(const)))
    return " ".join(parts)


# ---------------------------------------------------------------------------
# atoms

class Rel(enum.IntEnum):
    LT = 0
    LE = 1
    EQ = 2


_REL_TXT = {Rel.LT: "<", Rel.LE: "<=", Rel.EQ: "="}


class Atom:
    """Normalized ``sum(coeffs) + const REL 0`` with integer data.

    Construct through :func:`make_atom` or the helpers ``lt/le/eq/ge/gt``;
    those fold constant atoms into ``True``/``False``.
    """

    __slots__ = ("coeffs", "const", "rel", "_hash")

    def __init__(self, coeffs: Tuple[Tuple[VarId, int], ...], const: int, rel: Rel):
        self.coeffs = coeffs
        self.const = const
        self.rel = rel
        self._hash = hash((coeffs, const, rel))

    @property
    def lhs(self) -> LinExpr:
        return LinExpr._raw(Fraction(self.const), {v: Fraction(c) for v, c in self.coeffs})

    def vars(self) -> Iterator[VarId]:
        return (v for v, _ in self.coeffs)

    def __eq__(self, other) -> bool:
        return (isinstance(other, Atom) and self._hash == other._hash and self.coeffs == other.coeffs
                and self.const == other.const and self.rel == other.rel)

    def __hash__(self) -> int:
        return self._hash

    def __lt__(self, other: "Atom") -> bool:
        return (self.coeffs, self.const, self.rel) < (other.coeffs, other.const, other.rel)

    def holds_at(self, point: Mapping[VarId, Fraction]) -> bool:
        val = self.const + sum(c * point[v] for v, c in self.coeffs)
        if self.rel == Rel.LT:
            return val < 0
        if self.rel == Rel.LE:
            return val <= 0
        return val == 0

    def negations(self) -> List["AtomOrBool"]:
        """Atoms whose disjunction is the negation of this one."""
        neg = tuple((v, -c) for v, c in self.coeffs)
        if self.rel == Rel.LT:
            return [_norm(neg, -self.const, Rel.LE)]
        if self.rel == Rel.LE:
            return [_norm(neg, -self.const, Rel.LT)]
        return [_norm(self.coeffs, self.const, Rel.LT), _norm(neg, -self.const, Rel.LT)]

    def substitute(self, sub: Mapping[VarId, LinExpr]) -> "AtomOrBool":
        return make_atom(self.lhs.substitute(sub), self.rel)

    def __repr__(self) -> str:
        return f"Atom({self})"

    def __str__(self) -> str:
        pos = [(v, Fraction(c)) for v, c in self.coeffs if c > 0]
        neg = [(v, Fraction(-c)) for v, c in self.coeffs if c < 0]
        lconst = Fraction(self.const) if self.const > 0 else Fraction(0)
        rconst = Fraction(-self.const) if self.const < 0 else Fraction(0)
        left = _fmt_side(pos, lconst) if (pos or lconst) else "0"
        right = _fmt_side(neg, rconst) if (neg or rconst) else "0"
        return f"{left} {_REL_TXT[self.rel]} {right}"


AtomOrBool = object  # Atom | bool, kept loose for 3.10 friendliness


def _norm(coeffs: Iterable[Tuple[VarId, int]], const: int, rel: Rel):
    """Normalize integer data into an Atom, or fold to a bool."""
    items = tuple(sorted((v, c) for v, c in coeffs if c))
    if not items:
        if rel == Rel.LT:
            return const < 0
        if rel == Rel.LE:
            return const <= 0
        return const == 0
    g = 0
    for _, c in items:
        g = math.gcd(g, c)
    if all(v.is_int for v, _ in items):
        # integer-valued variables: divide by the coefficient gcd and round the
        # constant, turning strict bounds into non-strict ones
        if rel == Rel.EQ:
            if const % g:
                return False
        else:
            if rel == Rel.LT:
                # sum < -const  <=>  sum <= -const - 1 over the integers
                const += 1
                rel = Rel.LE
            # sum/g <= -const/g  <=>  sum/g <= floor(-const/g)
            const = -((-const) // g)
            items = tuple((v, c // g) for v, c in items)
            g = 1
    g = math.gcd(g, abs(const))
    if g > 1:
        items = tuple((v, c // g) for v, c in items)
        const //= g
    if rel == Rel.EQ and items[0][1] < 0:
        items = tuple((v, -c) for v, c in items)
        const = -const
    return Atom(items, const, rel)


def make_atom(lhs: LinExpr, rel: Rel):
    """Normalize ``lhs REL 0``; constant atoms fold to True/False."""
    dens = [c.denominator for c in lhs.terms.values()]
    dens.append(lhs.constant.denominator)
    m = 1
    for d in dens:
        m = m * d // math.gcd(m, d)
    coeffs = [(v, int(c * m)) for v, c in lhs.terms.items()]
    return _norm(coeffs, int(lhs.constant * m), rel)


def _as_expr(x) -> LinExpr:
    return x if isinstance(x, LinExpr) else LinExpr.const(x)


def lt(a, b):
    return make_atom(_as_expr(a) - _as_expr(b), Rel.LT)


def le(a, b):
    return make_atom(_as_expr(a) - _as_expr(b), Rel.LE)


def eq(a, b):
    return make_atom(_as_expr(a) - _as_expr(b), Rel.EQ)


def gt(a, b):
    return lt(b, a)


def ge(a, b):
    return le(b, a)


def compare(a, op: str, b):
    return {"<": lt, "<=": le, "=": eq, "==": eq, ">=": ge, ">": gt}[op](a, b)


# ---------------------------------------------------------------------------
# constraints and formulas

class Constraint:
    """Conjunction of atoms.  ``Constraint.TRUE`` is the empty set."""

    __slots__ = ("atoms", "is_false", "_hash")
    TRUE: "Constraint"
    FALSE: "Constraint"

    def __init__(self, atoms: Iterable = (), is_false: bool = False):
        s = set()
        if not is_false:
            for a in atoms:
                if a is True:
                    continue
                if a is False:
                    is_false = True
                    break
                s.add(a)
        self.is_false = is_false
        self.atoms = frozenset() if is_false else frozenset(s)
        self._hash = None

    @classmethod
    def of(cls, *atoms) -> "Constraint":
        return cls(atoms)

    def is_true(self) -> bool:
        return not self.is_false and not self.atoms

    def vars(self) -> set:
        out = set()
        for a in self.atoms:
            out.update(a.vars())
        return out

    def __and__(self, other) -> "Constraint":
        if isinstance(other, Constraint):
            if self.is_false or other.is_false:
                return Constraint.FALSE
            if not other.atoms:
                return self
            if not self.atoms:
                return other
            return Constraint(self.atoms | other.atoms)
        if other is True:
            return self
        if other is False:
            return Constraint.FALSE
        if isinstance(other, Atom):
            if self.is_false:
                return self
            return Constraint(self.atoms | {other})
        return self & Constraint(other)

    def substitute(self, sub: Mapping[VarId, LinExpr]) -> "Constraint":
        if self.is_false:
            return self
        return Constraint(a.substitute(sub) for a in self.atoms)

    def holds_at(self, point: Mapping[VarId, Fraction]) -> bool:
        return not self.is_false and all(a.holds_at(point) for a in self.atoms)

    def __eq__(self, other) -> bool:
        return isinstance(other, Constraint) and self.is_false == other.is_false and self.atoms == other.atoms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.is_false, self.atoms))
        return self._hash

    def __iter__(self):
        return iter(sorted(self.atoms))

    def __len__(self) -> int:
        return len(self.atoms)

    def __repr__(self) -> str:
        return f"Constraint({self})"

    def __str__(self) -> str:
        if self.is_false:
            return "false"
        if not self.atoms:
            return "true"
        return " and ".join(sorted(str(a) for a in self.atoms))


Constraint.TRUE = Constraint()
Constraint.FALSE = Constraint(is_false=True)


class Formula:
    """Disjunction of constraints; the empty list is FALSE."""

    __slots__ = ("disjuncts",)

    def __init__(self, disjuncts: Iterable[Constraint] = ()):
        self.disjuncts: Tuple[Constraint, ...] = tuple(d for d in disjuncts if not d.is_false)

    @classmethod
    def true(cls) -> "Formula":
        return cls([Constraint.TRUE])

    @classmethod
    def false(cls) -> "Formula":
        return cls([])

    def is_false(self) -> bool:
        return not self.disjuncts

    def __or__(self, other: "Formula") -> "Formula":
        return Formula(self.disjuncts + other.disjuncts)

    def conj(self, c) -> "Formula":
        """Distribute a Constraint or Formula over the disjuncts."""
        if isinstance(c, Formula):
            return Formula(d & e for d in self.disjuncts for e in c.disjuncts)
        return Formula(d & c for d in self.disjuncts)

    def pruned(self) -> "Formula":
        return Formula(simplify(d) for d in self.disjuncts if is_sat(d))

    def holds_at(self, point) -> bool:
        return any(d.holds_at(point) for d in self.disjuncts)

    def __iter__(self):
        return iter(self.disjuncts)

    def __len__(self) -> int:
        return len(self.disjuncts)

    def __repr__(self) -> str:
        return f"Formula({self})"

    def __str__(self) -> str:
        if not self.disjuncts:
            return "false"
        if len(self.disjuncts) == 1:
            return str(self.disjuncts[0])
        return " or ".join(f"({d})" for d in self.disjuncts)


# ---------------------------------------------------------------------------
# Fourier-Motzkin elimination on integer rows

class _Row:
    # hist: bitmask of the input rows this one is a combination of
    __slots__ = ("co", "k", "strict", "hist")

    def __init__(self, co: Dict[VarId, int], k: int, strict: bool, hist: int = 0):
        self.co = co
        self.k = k
        self.strict = strict
        self.hist = hist


def _row_key(co: Dict[VarId, int]):
    return frozenset(co.items())


def _normalize_row(co: Dict[VarId, int], k: int, strict: bool):
    """Return (co, k, strict) with gcd-reduced data, or a bool for constant rows."""
    if not co:
        return (k < 0) if strict else (k <= 0)
    g = 0
    for c in co.values():
        g = math.gcd(g, c)
    if all(v.is_int for v in co):
        if strict:
            k += 1
            strict = False
        k = -((-k) // g)
        co = {v: c // g for v, c in co.items()}
    else:
        g = math.gcd(g, abs(k))
        if g > 1:
            co = {v: c // g for v, c in co.items()}
            k //= g
    return co, k, strict


class _System:
    """Working set of inequality rows with parallel-bound pruning.

    Rows with the same coefficient vector keep only the tightest constant,
    which is where most of the FME blowup is absorbed.
    """

    __slots__ = ("rows", "unsat")

    def __init__(self):
        self.rows: Dict[frozenset, _Row] = {}
        self.unsat = False

    def add(self, co: Dict[VarId, int], k: int, strict: bool, hist: int = 0) -> None:
        r = _normalize_row(co, k, strict)
        if r is True:
            return
        if r is False:
            self.unsat = True
            return
        co, k, strict = r
        key = _row_key(co)
        old = self.rows.get(key)
        if old is None:
            self.rows[key] = _Row(co, k, strict, hist)
        elif k > old.k or (k == old.k and strict and not old.strict):
            # larger constant = tighter bound for  sum + k <= 0
            self.rows[key] = _Row(co, k, strict, hist)
        # opposite-direction parallel rows are caught during elimination


def _substitute_eq(eqs: List[Tuple[Dict[VarId, int], int]],
                   ineqs: List[Tuple[Dict[VarId, int], int, bool]],
                   eligible: Callable[[VarId], bool]):
    """Gaussian substitution of equalities on eligible variables.

    Returns (remaining_eqs, ineqs), or None on a contradiction.  Remaining
    equalities mention no eligible variable.
    """
    pending = list(eqs)
    kept: List[Tuple[Dict[VarId, int], int]] = []
    while pending:
        co, k = pending.pop()
        if not co:
            if k != 0:
                return None
            continue
        cands = [v for v in co if eligible(v)]
        if not cands:
            kept.append((co, k))
            continue
        v = min(cands, key=lambda x: (abs(co[x]), x))
        a = co[v]
        s, sign = abs(a), (1 if a > 0 else -1)

        def sub(oco: Dict[VarId, int], ok: int):
            # s*row - sign*b*eq cancels v and keeps the row direction (s > 0)
            b = oco.get(v, 0)
            if not b:
                return oco, ok
            nco = {x: c * s for x, c in oco.items() if x != v}
            for x, c in co.items():
                if x == v:
                    continue
                t = nco.get(x, 0) - sign * b * c
                if t:
                    nco[x] = t
                else:
                    nco.pop(x, None)
            return nco, ok * s - sign * b * k

        pending = [sub(oc, ok) for oc, ok in pending]
        ineqs = [sub(oc, ok) + (st,) for oc, ok, st in ineqs]
    return kept, ineqs


def _split(c: Constraint):
    eqs: List[Tuple[Dict[VarId, int], int]] = []
    ineqs: List[Tuple[Dict[VarId, int], int, bool]] = []
    for a in c.atoms:
        co = dict(a.coeffs)
        if a.rel == Rel.EQ:
            eqs.append((co, a.const))
        else:
            ineqs.append((co, a.const, a.rel == Rel.LT))
    return eqs, ineqs


def _fme(system: _System, elim: Callable[[VarId], bool], row_limit: Optional[int] = None) -> None:
    """Eliminate every eligible variable from the system in place.

    Chernikov's rule drops a combined row once it draws on more input rows
    than eliminated variables plus one: such a row is implied by the others.
    Rows over integer variables only are exempt, since tightening can make
    them stronger than the combination they came from.

    Raises _Blowup when a step would leave more than ``row_limit`` rows.
    """
    done = 0
    while not system.unsat:
        counts: Dict[VarId, List[int]] = {}
        for r in system.rows.values():
            for v, c in r.co.items():
                if elim(v):
                    pn = counts.get(v)
                    if pn is None:
                        pn = counts[v] = [0, 0]
                    pn[0 if c > 0 else 1] += 1
        if not counts:
            return
        # fewest occurrences first; ties broken by the size of the cross product
        v = min(counts, key=lambda x: (counts[x][0] + counts[x][1], counts[x][0] * counts[x][1], x))
        pos, neg, rest = [], [], []
        for r in system.rows.values():
            c = r.co.get(v, 0)
            if c > 0:
                pos.append(r)
            elif c < 0:
                neg.append(r)
            else:
                rest.append(r)
        nxt = _System()
        for r in rest:
            nxt.rows[_row_key(r.co)] = r
        done += 1
        for p in pos:
            a = p.co[v]
            for n in neg:
                b = -n.co[v]
                co = {x: c * b for x, c in p.co.items() if x != v}
                for x, c in n.co.items():
                    if x == v:
                        continue
                    s = co.get(x, 0) + c * a
                    if s:
                        co[x] = s
                    else:
                        co.pop(x, None)
                h = p.hist | n.hist
                if h.bit_count() > done + 1 and not all(x.is_int for x in co):
                    continue
                nxt.add(co, p.k * b + n.k * a, p.strict or n.strict, h)
                if nxt.unsat:
                    system.unsat = True
                    return
            if row_limit is not None and len(nxt.rows) > row_limit:
                raise _Blowup
        system.rows = nxt.rows
        system.unsat = nxt.unsat


def _build(c: Constraint, elim: Callable[[VarId], bool]):
    """Substitute away eligible equalities, load inequalities into a _System."""
    eqs, ineqs = _split(c)
    r = _substitute_eq(eqs, ineqs, elim)
    if r is None:
        return None, None
    eqs, ineqs = r
    sys_ = _System()
    for i, (co, k, st) in enumerate(ineqs):
        sys_.add(co, k, st, 1 << i)
        if sys_.unsat:
            return None, None
    return eqs, sys_


class _Blowup(Exception):
    pass


# Past this many live rows, is_sat hands the question to the simplex check.
SAT_ROW_LIMIT = 300


def is_sat(c: Constraint) -> bool:
    """Satisfiability over the rationals by complete Fourier-Motzkin elimination.

    When elimination blows up, an exact simplex run settles the rational
    question; systems with integer variables that are rationally feasible
    still go through full elimination so its integer tightening applies.
    """
    if c.is_false:
        return False
    if not c.atoms:
        return True
    eqs, sys_ = _build(c, lambda v: True)
    if sys_ is None:
        return False
    saved = dict(sys_.rows)
    # equalities left over can only be constant (all vars eligible)
    try:
        _fme(sys_, lambda v: True, SAT_ROW_LIMIT)
    except _Blowup:
        if not _simplex_feasible(*_split(c)):
            return False
        if not any(v.is_int for v in c.vars()):
            return True
        sys_.rows, sys_.unsat = saved, False
        _fme(sys_, lambda v: True)
    return not sys_.unsat


def _simplex_feasible(eqs, ineqs) -> bool:
    """Exact two-phase simplex (Bland's rule) on ``eqs``/``ineqs`` as produced
    by :func:`_split`.  Strict rows share a slack ``eps`` that is maximised
    in the second phase; the system is feasible iff it can be positive.

    Rows are kept integral (fraction-free pivoting, gcd-reduced), the value
    of a basic variable being ``rhs / coefficient``.
    """
    vs = sorted({v for co, *_ in eqs + ineqs for v in co})
    col = {v: i for i, v in enumerate(vs)}
    nx = 2 * len(vs)
    strict = any(st for _, _, st in ineqs)
    eps = nx
    ne, ni = len(eqs), len(ineqs)
    n_slack = ni + (1 if strict else 0)
    width = nx + 1 + n_slack
    rows: List[List[int]] = []

    def base(co):
        r = [0] * (width + 1)
        for v, q in co.items():
            r[2 * col[v]] = q
            r[2 * col[v] + 1] = -q
        return r

    for co, k in eqs:
        r = base(co)
        r[-1] = -k
        rows.append(r)
    for i, (co, k, st) in enumerate(ineqs):
        r = base(co)
        if st:
            r[eps] = 1
        r[nx + 1 + i] = 1
        r[-1] = -k
        rows.append(r)
    if strict:
        r = [0] * (width + 1)
        r[eps] = r[width - 1] = r[-1] = 1
        rows.append(r)
    m = len(rows)
    # phase one: rows with a slack and a non-negative right-hand side start
    # with that slack basic, the rest get an artificial column
    need = [i for i in range(m) if i < ne or rows[i][-1] < 0]
    n_art = len(need)
    T: List[List[int]] = []
    basis: List[int] = []
    for i, r in enumerate(rows):
        sign = -1 if r[-1] < 0 else 1
        art = [0] * n_art
        if i in need:
            art[need.index(i)] = 1
            basis.append(width + need.index(i))
        else:
            basis.append(nx + 1 + (i - ne) if i < ne + ni else width - 1)
        T.append([x * sign for x in r[:-1]] + art + [r[-1] * sign])
    if n_art:
        z = [0] * width + [1] * n_art + [0, 0]   # maximise -sum(art); z column then rhs
        z[-2] = 1
        if _maximise(T, basis, z) < 0:
            return False
    if not strict:
        return True
    # drive remaining artificials out, dropping redundant rows
    keep = []
    for i, b in enumerate(basis):
        if b >= width:
            j = next((j for j in range(width) if T[i][j] != 0), None)
            if j is None:
                continue
            if T[i][j] < 0:
                T[i] = [-x for x in T[i]]
            _pivot(T, basis, i, j, None)
        keep.append(i)
    T = [T[i][:width] + [T[i][-1]] for i in keep]
    basis = [basis[i] for i in keep]
    z = [0] * width + [1, 0]
    z[eps] = -1
    return _maximise(T, basis, z) > 0


def _pivot(T, basis, r, j, z) -> None:
    p = T[r][j]
    for row in T if z is None else T + [z]:
        f = row[j]
        if row is T[r] or not f:
            continue
        new = [a * p - f * b for a, b in zip(row, T[r])]
        g = 0
        for x in new:
            g = math.gcd(g, x)
        if g > 1:
            new = [x // g for x in new]
        row[:] = new
    basis[r] = j


def _maximise(T, basis, z) -> Fraction:
    """Run the simplex on tableau ``T`` with objective row ``z``.

    ``z`` holds the negated costs, then the coefficient of the objective
    itself, then the right-hand side.  Returns the optimum.
    """
    n = len(z) - 2
    # price out the basic columns
    for i, b in enumerate(basis):
        f = z[b]
        if f:
            p = T[i][b]
            z[:] = [a * p - f * c for a, c in zip(z[:n], T[i][:n])] + [z[n] * p, z[n + 1] * p - f * T[i][-1]]
    while True:
        enter = next((j for j in range(n) if z[j] < 0 and j not in basis), None)
        if enter is None:
            return Fraction(z[-1], z[-2])
        best = None
        for i in range(len(T)):
            a = T[i][enter]
            if a > 0:
                if best is None:
                    best = i
                    continue
                lhs, rhs_ = T[i][-1] * T[best][enter], T[best][-1] * a
                if lhs < rhs_ or (lhs == rhs_ and basis[i] < basis[best]):
                    best = i
        if best is None:
            # only eps could grow without bound, and it is capped
            return Fraction(1)
        _pivot_z(T, basis, best, enter, z)


def _pivot_z(T, basis, r, j, z) -> None:
    p = T[r][j]
    n = len(z) - 2
    f = z[j]
    if f:
        row = T[r]
        z[:] = [a * p - f * c for a, c in zip(z[:n], row[:n])] + [z[n] * p, z[n + 1] * p - f * row[-1]]
        g = 0
        for x in z:
            g = math.gcd(g, x)
        if g > 1:
            z[:] = [x // g for x in z]
    _pivot(T, basis, r, j, None)


def _to_constraint(eqs, sys_: _System) -> Constraint:
    atoms = []
    for co, k in eqs:
        atoms.append(_norm(co.items(), k, Rel.EQ))
    for r in sys_.rows.values():
        atoms.append(_norm(r.co.items(), r.k, Rel.LT if r.strict else Rel.LE))
    return Constraint(atoms)


def eliminate(vars_: Iterable[VarId], c: Constraint) -> Constraint:
    """A simplified constraint equivalent to ``exists vars_. c``."""
    vs = frozenset(vars_)
    if c.is_false:
        return c
    if not vs or not (c.vars() & vs):
        return simplify(c)
    elim = vs.__contains__
    eqs, sys_ = _build(c, elim)
    if sys_ is None:
        return Constraint.FALSE
    saved = dict(sys_.rows)
    try:
        _fme(sys_, elim, SAT_ROW_LIMIT)
    except _Blowup:
        # large projections are common for unsatisfiable input; rule that out first
        if not is_sat(c):
            return Constraint.FALSE
        sys_.rows, sys_.unsat = saved, False
        _fme(sys_, elim)
    if sys_.unsat:
        return Constraint.FALSE
    return simplify(_to_constraint(eqs, sys_))


def find_model(c: Constraint, limit: int = 4000) -> Optional[Dict[VarId, Fraction]]:
    """Some rational point satisfying ``c`` (integral on integer variables when
    that is easy), or None when ``c`` is unsatisfiable or the search gives up.

    Runs elimination while remembering each stage, then back-substitutes,
    picking the midpoint of the admissible range for every variable.
    """
    if c.is_false:
        return None
    eqs, ineqs = _split(c)
    defs: List[Tuple[VarId, Dict[VarId, int], int]] = []
    pending = list(eqs)
    while pending:
        co, k = pending.pop()
        if not co:
            if k != 0:
                return None
            continue
        v = min(co, key=lambda x: (abs(co[x]), x))
        defs.append((v, co, k))
        a = co[v]

        def sub(oco, ok, v=v, co=co, k=k, a=a):
            b = oco.get(v, 0)
            if not b:
                return oco, ok
            s, sign = abs(a), (1 if a > 0 else -1)
            nco = {x: q * s for x, q in oco.items() if x != v}
            for x, q in co.items():
                if x == v:
                    continue
                t = nco.get(x, 0) - sign * b * q
                if t:
                    nco[x] = t
                else:
                    nco.pop(x, None)
            return nco, ok * s - sign * b * k

        pending = [sub(oc, ok) for oc, ok in pending]
        ineqs = [sub(oc, ok) + (st,) for oc, ok, st in ineqs]
    rows = []
    for co, k, st in ineqs:
        if not co:
            if (k >= 0) if st else (k > 0):
                return None
            continue
        rows.append((co, k, st))
    stages: List[Tuple[VarId, list]] = []
    while True:
        counts: Dict[VarId, List[int]] = {}
        for co, _, _ in rows:
            for v, q in co.items():
                counts.setdefault(v, [0, 0])[0 if q > 0 else 1] += 1
        if not counts:
            break
        v = min(counts, key=lambda x: (counts[x][0] * counts[x][1], x))
        with_v = [r for r in rows if v in r[0]]
        stages.append((v, with_v))
        nxt: Dict[frozenset, Tuple] = {}
        for r in rows:
            if v not in r[0]:
                key = _row_key(r[0])
                old = nxt.get(key)
                if old is None or r[1] > old[1] or (r[1] == old[1] and r[2] and not old[2]):
                    nxt[key] = r
        pos = [r for r in with_v if r[0][v] > 0]
        neg = [r for r in with_v if r[0][v] < 0]
        for pco, pk, pst in pos:
            a = pco[v]
            for nco_, nk, nst in neg:
                b = -nco_[v]
                co = {x: q * b for x, q in pco.items() if x != v}
                for x, q in nco_.items():
                    if x == v:
                        continue
                    t = co.get(x, 0) + q * a
                    if t:
                        co[x] = t
                    else:
                        co.pop(x, None)
                k = pk * b + nk * a
                st = pst or nst
                if not co:
                    if (k >= 0) if st else (k > 0):
                        return None
                    continue
                key = _row_key(co)
                old = nxt.get(key)
                if old is None or k > old[1] or (k == old[1] and st and not old[2]):
                    nxt[key] = (co, k, st)
        rows = list(nxt.values())
        if len(rows) > limit:
            return None
    point: Dict[VarId, Fraction] = {}
    # variables that only ever shared one-sided rows were dropped without a
    # stage of their own; any value works for them
    staged = {v for v, _ in stages}
    for _, with_v in stages:
        for co, _, _ in with_v:
            for x in co:
                if x not in staged:
                    point.setdefault(x, Fraction(0))
    for v, with_v in reversed(stages):
        lo = hi = None
        lo_s = hi_s = False
        for co, k, st in with_v:
            a = co[v]
            rest = Fraction(k) + sum((q * point[x] for x, q in co.items() if x != v), Fraction(0))
            bound = -rest / a
            if a > 0:
                if hi is None or bound < hi or (bound == hi and st):
                    hi, hi_s = bound, st
            else:
                if lo is None or bound > lo or (bound == lo and st):
                    lo, lo_s = bound, st
        if lo is not None and hi is not None:
            val = (lo + hi) / 2
        elif lo is not None:
            val = lo + 1
        elif hi is not None:
            val = hi - 1
        else:
            val = Fraction(0)
        if v.is_int and val.denominator != 1:
            cand = Fraction(math.floor(val))
            for w in (cand, cand + 1):
                if (lo is None or w > lo or (w == lo and not lo_s)) and (hi is None or w < hi or (w == hi and not hi_s)):
                    val = w
                    break
        point[v] = val
    for v, co, k in reversed(defs):
        a = co[v]
        rest = Fraction(k) + sum((q * point.get(x, Fraction(0)) for x, q in co.items() if x != v), Fraction(0))
        point[v] = -rest / a
    for v in c.vars():
        point.setdefault(v, Fraction(0))
    return point if c.holds_at(point) else None


def _implies_atom(c: Constraint, a: Atom) -> bool:
    for n in a.negations():
        if n is False:
            continue
        if n is True:
            if is_sat(c):
                return False
            continue
        if is_sat(c & n):
            return False
    return True


def implies(c: Constraint, d: Constraint) -> bool:
    """Validity of ``c => d``."""
    if c.is_false:
        return True
    if d.is_false:
        return not is_sat(c)
    for a in d.atoms:
        if a in c.atoms:
            continue
        if not _implies_atom(c, a):
            return False
    return True


def equivalent(c: Constraint, d: Constraint) -> bool:
    return implies(c, d) and implies(d, c)


def _pin(c: Constraint, pins: Mapping[VarId, Fraction]) -> Constraint:
    """Substitute constant values for some variables (integer fast path)."""
    if c.is_false:
        return c
    out = []
    changed = False
    for a in c.atoms:
        if not any(v in pins for v, _ in a.coeffs):
            out.append(a)
            continue
        changed = True
        den = 1
        for v, _ in a.coeffs:
            if v in pins:
                den = den * pins[v].denominator // math.gcd(den, pins[v].denominator)
        k = a.const * den
        co = []
        for v, q in a.coeffs:
            if v in pins:
                k += int(q * pins[v] * den)
            else:
                co.append((v, q * den))
        r = _norm(co, k, a.rel)
        if r is False:
            return Constraint.FALSE
        out.append(r)
    return Constraint(out) if changed else c


@functools.lru_cache(maxsize=65536)
def _box(c: Constraint) -> Dict[VarId, Tuple]:
    """Per-variable bounds read off the single-variable atoms of ``c``.

    Each entry is (lo, lo_strict, hi, hi_strict) with None for unbounded.
    The box contains every model of ``c``.
    """
    out: Dict[VarId, list] = {}
    for a in c.atoms:
        if len(a.coeffs) != 1:
            continue
        v, k = a.coeffs[0]
        val = Fraction(-a.const, k)
        b = out.setdefault(v, [None, False, None, False])
        strict = a.rel == Rel.LT
        upper = a.rel == Rel.EQ or k > 0
        lower = a.rel == Rel.EQ or k < 0
        if upper and (b[2] is None or val < b[2] or (val == b[2] and strict)):
            b[2], b[3] = val, strict
        if lower and (b[0] is None or val > b[0] or (val == b[0] and strict)):
            b[0], b[1] = val, strict
    return {v: tuple(b) for v, b in out.items()}


def _boxes_disjoint(x: Dict[VarId, Tuple], y: Dict[VarId, Tuple]) -> bool:
    if len(y) < len(x):
        x, y = y, x
    for v, (lo1, ls1, hi1, hs1) in x.items():
        b = y.get(v)
        if b is None:
            continue
        lo2, ls2, hi2, hs2 = b
        for lo, ls, hi, hs in ((lo1, ls1, hi2, hs2), (lo2, ls2, hi1, hs1)):
            if lo is not None and hi is not None and (lo > hi or (lo == hi and (ls or hs))):
                return True
    return False


def implies_formula(c: Constraint, f: Formula) -> bool:
    """Validity of ``c => (d1 or d2 or ...)``.

    Fast path: a single disjunct already implied.  Otherwise decide
    ``c and not d1 and not d2 ...`` by branching on the negated atoms of each
    disjunct, pruning unsatisfiable branches as early as possible.
    """
    if not is_sat(c):
        return True
    bc = _box(c)
    ds = [d for d in f.disjuncts if not _boxes_disjoint(bc, _box(d))]
    pins = {a.coeffs[0][0]: Fraction(-a.const, a.coeffs[0][1])
            for a in c.atoms if a.rel == Rel.EQ and len(a.coeffs) == 1}
    if pins:
        # variables fixed by c can be replaced by their values everywhere
        c = _pin(c, pins)
        ds = [e for e in (_pin(d, pins) for d in ds) if not e.is_false]
    for d in ds:
        if implies(c, d):
            return True
    if len(ds) <= 1:
        return False
    # a point of c outside every disjunct settles the question quickly
    pt = find_model(c)
    if (pt is not None and all(not v.is_int or q.denominator == 1 for v, q in pt.items())
            and not any(d.vars() - pt.keys() or d.holds_at(pt) for d in ds)):
        return False
    # only disjuncts that overlap c matter
    ds = [d for d in ds if is_sat(c & d)]

    def refute(cur: Constraint, i: int) -> bool:
        # True iff cur and not(ds[i]) and ... is unsatisfiable
        if i == len(ds):
            return False
        d = ds[i]
        if not is_sat(cur & d):
            return refute(cur, i + 1)
        for a in d.atoms:
            for n in a.negations():
                if n is False:
                    continue
                nxt = cur if n is True else cur & n
                if is_sat(nxt) and not refute(nxt, i + 1):
                    return False
        return True

    return refute(c, 0)


def formula_implies(f: Formula, g: Formula) -> bool:
    return all(implies_formula(d, g) for d in f.disjuncts)


def formula_equivalent(f: Formula, g: Formula) -> bool:
    return formula_implies(f, g) and formula_implies(g, f)


def negate(f: Formula) -> Formula:
    """DNF of ``not f``; unsatisfiable disjuncts are pruned as they appear."""
    acc: List[Constraint] = [Constraint.TRUE]
    for d in f.disjuncts:
        if d.is_true():
            return Formula.false()
        nxt: List[Constraint] = []
        seen = set()
        for base in acc:
            for a in sorted(d.atoms):
                for n in a.negations():
                    if n is False:
                        continue
                    cand = base if n is True else base & n
                    if cand in seen:
                        continue
                    seen.add(cand)
                    if is_sat(cand):
                        nxt.append(cand)
        acc = _drop_subsumed(nxt)
        if not acc:
            return Formula.false()
    return Formula(simplify(c) for c in acc)


def _drop_subsumed(cs: List[Constraint]) -> List[Constraint]:
    # cheap syntactic pruning: a disjunct whose atoms are a superset of another's is redundant
    out: List[Constraint] = []
    for c in sorted(cs, key=len):
        if any(o.atoms <= c.atoms for o in out):
            continue
        out.append(c)
    return out


def simplify(c: Constraint) -> Constraint:
    """Drop duplicates and atoms implied by the rest; FALSE if unsatisfiable."""
    if c.is_false or not c.atoms:
        return c
    if not is_sat(c):
        return Constraint.FALSE
    # parallel bounds: keep the tightest per (coefficients) direction
    best: Dict[Tuple, Atom] = {}
    others: List[Atom] = []
    for a in c.atoms:
        if a.rel == Rel.EQ:
            others.append(a)
            continue
        key = a.coeffs
        o = best.get(key)
        if o is None or a.const > o.const or (a.const == o.const and a.rel == Rel.LT):
            best[key] = a
    atoms = sorted(others + list(best.values()), key=lambda a: (-len(a.coeffs), a))
    kept = set(atoms)
    for a in atoms:
        rest = Constraint(kept - {a})
        if _implies_atom(rest, a):
            kept.discard(a)
    return Constraint(kept)


def project(keep: Callable[[VarId], bool], c: Constraint) -> Constraint:
    """Eliminate every variable not selected by ``keep``."""
    return eliminate([v for v in c.vars() if not keep(v)], c)


def params_only(c: Constraint) -> Constraint:
    return project(lambda v: v.is_param, c)


# ---------------------------------------------------------------------------
# text syntax

class ParseError(ValueError):
    def __init__(self, msg: str, text: str = "", pos: int = 0):
        self.pos = pos
        self.text = text
        super().__init__(f"{msg} at column {pos + 1}" if text else msg)


_RELS = ("<=", ">=", "==", "<", ">", "=")


class ExprParser:
    """Recursive-descent parser for linear expressions.

    ``resolve`` maps identifiers to VarIds (raising KeyError when unknown).
    Products and divisions are allowed as long as one side is constant.
    """

    def __init__(self, text: str, resolve: Callable[[str], VarId], pos: int = 0):
        self.text = text
        self.pos = pos
        self.resolve = resolve

    # tokens -------------------------------------------------------------
    def ws(self) -> None:
        t = self.text
        while self.pos < len(t) and t[self.pos].isspace():
            self.pos += 1

    def peek(self, s: str) -> bool:
        self.ws()
        return self.text.startswith(s, self.pos)

    def take(self, s: str) -> bool:
        if self.peek(s):
            self.pos += len(s)
            return True
        return False

    def expect(self, s: str) -> None:
        if not self.take(s):
            raise ParseError(f"expected {s!r}", self.text, self.pos)

    def ident(self) -> Optional[str]:
        self.ws()
        t, i = self.text, self.pos
        if i < len(t) and (t[i].isalpha() or t[i] == "_"):
            j = i + 1
            while j < len(t) and (t[j].isalnum() or t[j] in "_'."):
                j += 1
            return t[i:j]
        return None

    def number(self) -> Optional[Fraction]:
        self.ws()
        t, i = self.text, self.pos
        j = i
        while j < len(t) and t[j].isdigit():
            j += 1
        if j == i:
            return None
        if j < len(t) and t[j] == "." and j + 1 < len(t) and t[j + 1].isdigit():
            j += 1
            while j < len(t) and t[j].isdigit():
                j += 1
        self.pos = j
        return Fraction(t[i:j])

    def at_end(self) -> bool:
        self.ws()
        return self.pos >= len(self.text)

    # grammar ------------------------------------------------------------
    def expr(self) -> LinExpr:
        e = self.term()
        while True:
            if self.take("+"):
                e = e + self.term()
            elif self.peek("-") and not self.peek("->"):
                self.pos += 1
                e = e - self.term()
            else:
                return e

    def term(self) -> LinExpr:
        e = self.factor()
        while True:
            if self.take("*"):
                f = self.factor()
                if e.is_const():
                    e = f * e.constant
                elif f.is_const():
                    e = e * f.constant
                else:
                    raise ParseError("non-linear product", self.text, self.pos)
            elif self.peek("/"):
                self.pos += 1
                f = self.factor()
                if not f.is_const() or f.constant == 0:
                    raise ParseError("division by a non-constant or zero", self.text, self.pos)
                e = e * (1 / f.constant)
            else:
                return e

    def factor(self) -> LinExpr:
        if self.take("-"):
            return -self.factor()
        if self.take("+"):
            return self.factor()
        if self.take("("):
            e = self.expr()
            self.expect(")")
            return e
        n = self.number()
        if n is not None:
            return LinExpr.const(n)
        start = self.pos
        name = self.ident()
        if name is None:
            raise ParseError("expected a number or identifier", self.text, self.pos)
        self.pos += len(name)
        try:
            v = self.resolve(name)
        except KeyError:
            raise ParseError(f"unknown identifier {name!r}", self.text, start) from None
        return LinExpr.var(v)

    def rel(self) -> str:
        self.ws()
        for r in _RELS:
            if self.text.startswith(r, self.pos):
                self.pos += len(r)
                return r
        raise ParseError("expected a relation", self.text, self.pos)

    def atom(self):
        lhs = self.expr()
        op = self.rel()
        rhs = self.expr()
        return compare(lhs, op, rhs)

    def constraint(self) -> Constraint:
        atoms = [self.atom()]
        while self.take_word("and"):
            atoms.append(self.atom())
        return Constraint(atoms)

    def take_word(self, w: str) -> bool:
        self.ws()
        t, i = self.text, self.pos
        if t.startswith(w, i) and (i + len(w) == len(t) or not (t[i + len(w)].isalnum() or t[i + len(w)] == "_")):
            self.pos += len(w)
            return True
        return False


def default_resolver(name: str) -> VarId:
    return tparam(name)


def parse_expr(text: str, resolve: Callable[[str], VarId] = default_resolver) -> LinExpr:
    p = ExprParser(text, resolve)
    e = p.expr()
    if not p.at_end():
        raise ParseError("trailing input", text, p.pos)
    return e


def parse_constraint(text: str, resolve: Callable[[str], VarId] = default_resolver) -> Constraint:
    text = text.strip()
    if text == "true":
        return Constraint.TRUE
    if text == "false":
        return Constraint.FALSE
    p = ExprParser(text, resolve)
    c = p.constraint()
    if not p.at_end():
        raise ParseError("trailing input", text, p.pos)
    return c


def parse_formula(text: str, resolve: Callable[[str], VarId] = default_resolver) -> Formula:
    parts = [s.strip() for s in text.split(" or ")]
    out = []
    for s in parts:
        if s.startswith("(") and s.endswith(")"):
            s = s[1:-1]
        out.append(parse_constraint(s, resolve))
    return Formula(out)


def parse_rat(text: str) -> Fraction:
    text = text.strip()
    try:
        return Fraction(text)
    except ValueError:
        raise ParseError(f"not a rational literal: {text!r}") from None
