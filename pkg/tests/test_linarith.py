from __future__ import annotations

import itertools
from fractions import Fraction

import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st
from scipy.optimize import linprog

from tempo_net.linarith import (Constraint, Formula, LinExpr, ParseError, eliminate, eq, equivalent,
                                find_model, formula_equivalent, formula_implies, ge, gt, implies,
                                implies_formula, is_sat, le, lt, mparam, negate, parse_constraint,
                                parse_formula, simplify, tparam)

X = [tparam(f"x{i}") for i in range(6)]
a, b, c = (tparam(n) for n in "abc")
A, B, C = (LinExpr.var(v) for v in (a, b, c))


def P(text: str) -> Constraint:
    return parse_constraint(text)


# ---------------------------------------------------------------------------
# unit checks

def test_atoms_normalise_to_integer_coefficients():
    assert le(A * Fraction(1, 2), Fraction(3, 2)) == le(A, 3)
    assert ge(A, B) == le(B, A)
    assert lt(A + 1, A + 2) is True
    assert gt(LinExpr.const(1), 2) is False


def test_simple_sat_and_unsat():
    assert is_sat(P("0 <= a and a < 4"))
    assert not is_sat(P("a < 1 and 1 < a"))
    assert not is_sat(P("a <= 1 and 1 < a"))
    assert is_sat(P("a <= 1 and 1 <= a"))


def test_eliminate_chain():
    got = eliminate([b], P("a <= b and b < c"))
    assert equivalent(got, P("a < c"))


def test_eliminate_with_equality():
    got = eliminate([b], P("b = 2*a and b <= 6 and 0 <= a"))
    assert equivalent(got, P("0 <= a and a <= 3"))


def test_strict_bounds_survive_elimination():
    got = eliminate([b], P("a < b and b <= 3"))
    assert equivalent(got, P("a < 3"))
    assert not implies(got, P("a <= 2"))


def test_integer_tightening_on_marking_params():
    x = mparam("x")
    X_ = LinExpr.var(x)
    # 0 < x < 1 has no integer solution
    assert not is_sat(Constraint.of(gt(X_, 0), lt(X_, 1)))
    # same bounds on a time parameter are fine
    assert is_sat(Constraint.of(gt(A, 0), lt(A, 1)))


def test_implies_and_equivalence():
    assert implies(P("0 <= a and a < 2"), P("a < 4"))
    assert not implies(P("a < 4"), P("a < 2"))
    assert implies(Constraint.FALSE, P("a < 0"))
    assert equivalent(P("a <= 2 and 2 <= a"), P("a = 2"))


def test_implies_formula_needs_case_split():
    c = P("0 <= a and a <= 4")
    f = parse_formula("a <= 2 or 2 <= a")
    assert implies_formula(c, f)
    g = parse_formula("a < 2 or 2 < a")
    assert not implies_formula(c, g)


def test_negate_is_complement():
    f = parse_formula("0 <= a and a < 4")
    n = negate(f)
    assert formula_equivalent(n, parse_formula("a < 0 or 4 <= a"))
    assert negate(Formula.true()).is_false()
    assert formula_equivalent(negate(Formula.false()), Formula.true())


def test_formula_implies():
    assert formula_implies(parse_formula("a = 1 or a = 2"), parse_formula("1 <= a and a <= 2"))


def test_simplify_drops_redundant_atoms():
    s = simplify(P("a <= 3 and a <= 5 and 0 <= a"))
    assert s == P("a <= 3 and 0 <= a")
    assert simplify(P("a < 0 and 0 < a")).is_false


def test_parse_roundtrip_and_errors():
    c = P("2*a + b <= 3 and a - b < 1/2")
    assert P(str(c)) == c
    with pytest.raises(ParseError):
        P("a <=")
    with pytest.raises(ParseError):
        P("a * b <= 1")


def test_find_model_points_satisfy():
    cases = ("0 <= a and a < 4", "a = 2*b and b < c and c <= 1", "a + b = 3 and a - b = 1",
             # parallel lower bounds on a: the tighter one must survive
             "0 <= a and 10 <= a and a <= 10 and 0 <= b and b <= 20 and a + b <= c and 30 <= c and c <= 70")
    for text in cases:
        m = find_model(P(text))
        assert m is not None and P(text).holds_at(m)
    assert find_model(P("a < 0 and 0 < a")) is None


# ---------------------------------------------------------------------------
# randomized oracle: elimination against point sampling and an LP

coef = st.integers(-3, 3)


@st.composite
def systems(draw):
    n = draw(st.integers(1, 6))
    vs = X[:n]
    atoms = []
    for _ in range(draw(st.integers(1, 12))):
        co = [draw(coef) for _ in vs]
        if not any(co):
            co[0] = 1
        e = sum((LinExpr.var(v, k) for v, k in zip(vs, co)), LinExpr.const(0))
        rel = draw(st.sampled_from([le, lt, eq, le, le]))
        atoms.append(rel(e, draw(st.integers(-6, 6))))
    elim = [v for v in vs if draw(st.booleans())]
    return n, Constraint(atoms), elim


def _lp_extension(c: Constraint, fixed: dict, free) -> bool:
    """Whether ``c`` has a solution agreeing with ``fixed``: LP maximising a slack
    shared by the strict rows (scipy, independent of the package)."""
    free = list(free)
    idx = {v: i for i, v in enumerate(free)}
    nv = len(free) + 1  # last column: slack
    A_ub, b_ub, A_eq, b_eq = [], [], [], []
    for at in c.atoms:
        row = [0.0] * nv
        lhs = at.lhs
        const = float(lhs.constant)
        for v, q in lhs.terms.items():
            if v in idx:
                row[idx[v]] += float(q)
            else:
                const += float(q * fixed[v])
        # atom is ``lhs REL 0``; see Atom.lhs
        rel = at.rel.name
        if rel == "EQ":
            A_eq.append(row)
            b_eq.append(-const)
        else:
            if rel == "LT":
                row[-1] = 1.0
            A_ub.append(row)
            b_ub.append(-const)
    obj = [0.0] * nv
    obj[-1] = -1.0
    bounds = [(None, None)] * len(free) + [(0, 1)]
    r = linprog(obj, A_ub=A_ub or None, b_ub=b_ub or None, A_eq=A_eq or None, b_eq=b_eq or None,
                bounds=bounds, method="highs")
    if r.status != 0:
        return False
    strict = any(at.rel.name == "LT" for at in c.atoms)
    return (not strict) or r.x[-1] > 1e-7


GRID = [Fraction(k, 2) for k in range(-8, 9)]


@settings(max_examples=1000, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(systems(), st.randoms(use_true_random=False))
def test_projection_point_oracle(sys_, rnd):
    n, c, elim = sys_
    proj = eliminate(elim, c)
    assert not (proj.vars() & set(elim))
    keep = [v for v in X[:n] if v not in elim]
    for _ in range(12):
        pt = {v: rnd.choice(GRID) for v in X[:n]}
        # soundness: a model of c restricts to a model of the projection
        if c.holds_at(pt):
            assert proj.holds_at(pt)
        # exactness: the projection holds iff some extension exists
        q = {v: pt[v] for v in keep}
        ext = _lp_extension(c, q, elim)
        full = dict(q)
        full.update({v: Fraction(0) for v in elim})
        assert proj.holds_at(full) == ext, (str(c), str(proj), q)
    # satisfiability agrees with the LP too
    assert is_sat(c) == _lp_extension(c, {}, X[:n])


@settings(max_examples=300, deadline=None)
@given(systems())
def test_find_model_agrees_with_is_sat(sys_):
    _, c, _ = sys_
    m = find_model(c)
    # the row limit is never reached at this size, so None means unsatisfiable
    assert (m is not None) == is_sat(c)
    if m is not None:
        assert c.holds_at(m)


@settings(max_examples=200, deadline=None)
@given(systems(), systems())
def test_implies_matches_sampling(s1, s2):
    _, c1, _ = s1
    _, c2, _ = s2
    if implies(c1, c2):
        for pt in itertools.islice(itertools.product([-2, 0, 1, 3], repeat=6), 0, 4096, 13):
            p = {v: Fraction(x) for v, x in zip(X, pt)}
            if c1.holds_at(p):
                assert c2.holds_at(p)


@settings(max_examples=200, deadline=None)
@given(systems())
def test_negation_partitions_points(s):
    _, c, _ = s
    f = Formula([c])
    n = negate(f)
    for pt in itertools.islice(itertools.product([-2, 0, 1, 3], repeat=6), 0, 4096, 29):
        p = {v: Fraction(x) for v, x in zip(X, pt)}
        assert f.holds_at(p) != n.holds_at(p)


@settings(max_examples=300, deadline=None)
@given(systems())
def test_simplex_fallback_matches_lp(s):
    from tempo_net.linarith import _simplex_feasible, _split
    n, c, _ = s
    assert _simplex_feasible(*_split(c)) == _lp_extension(c, {}, X[:n])
