"""LTL to generalized Buchi automata (tableau construction) and emptiness
checking of the product with an explicit graph."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Callable, Dict, FrozenSet, Hashable, List, Optional, Sequence, Set, Tuple

from .props import (LAlways, LAnd, LAtom, LEventually, LNext, LNot, LOr, LRelease, LTL, LUntil, And, InTime, Not,
                    PFalse, PTrue, Prop)

# NNF nodes as tuples: ("lit", prop, positive) | ("true",) | ("false",) | ("and", a, b) | ("or", a, b)
# | ("X", a) | ("U", a, b) | ("R", a, b)
TRUE = ("true",)
FALSE = ("false",)


def _timed(p: LTL, window) -> LTL:
    return p if window is None else LAnd(p, LAtom(InTime(window)))


def nnf(f: LTL, positive: bool = True):
    if isinstance(f, LAtom):
        if isinstance(f.prop, PTrue):
            return TRUE if positive else FALSE
        if isinstance(f.prop, PFalse):
            return FALSE if positive else TRUE
        return ("lit", f.prop, positive)
    if isinstance(f, LNot):
        return nnf(f.arg, not positive)
    if isinstance(f, LAnd):
        return ("and" if positive else "or", nnf(f.left, positive), nnf(f.right, positive))
    if isinstance(f, LOr):
        return ("or" if positive else "and", nnf(f.left, positive), nnf(f.right, positive))
    if isinstance(f, LNext):
        return ("X", nnf(f.arg, positive))
    if isinstance(f, LUntil):
        right = _timed(f.right, f.window)
        if positive:
            return ("U", nnf(f.left, True), nnf(right, True))
        return ("R", nnf(f.left, False), nnf(right, False))
    if isinstance(f, LRelease):
        if positive:
            return ("R", nnf(f.left, True), nnf(f.right, True))
        return ("U", nnf(f.left, False), nnf(f.right, False))
    if isinstance(f, LEventually):
        return nnf(LUntil(LAtom(PTrue()), _timed(f.arg, f.window)), positive)
    if isinstance(f, LAlways):
        # [I] p  =  not <I> not p
        return nnf(LNot(LEventually(LNot(f.arg), f.window)), positive)
    raise TypeError(f"not an LTL formula: {f!r}")


@dataclass
class _Node:
    ident: int
    incoming: Set[int]
    new: List
    old: Set
    nxt: Set


@dataclass
class Automaton:
    """Generalized Buchi automaton whose states carry literal sets."""
    nodes: Dict[int, Tuple[FrozenSet, FrozenSet]]   # id -> (old, incoming)
    accepting: List[FrozenSet[int]]
    INIT: int = 0


def _is_literal(f) -> bool:
    return f[0] in ("lit", "true", "false")


def _neg_lit(f):
    return ("lit", f[1], not f[2])


def build_automaton(formula) -> Automaton:
    """Tableau construction (Gerth, Peled, Vardi, Wolper style)."""
    counter = [1]
    done: List[_Node] = []

    def fresh() -> int:
        counter[0] += 1
        return counter[0]

    stack = [_Node(fresh(), {0}, [formula], set(), set())]
    while stack:
        node = stack.pop()
        if not node.new:
            for nd in done:
                if nd.old == node.old and nd.nxt == node.nxt:
                    nd.incoming |= node.incoming
                    break
            else:
                done.append(node)
                stack.append(_Node(fresh(), {node.ident}, list(node.nxt), set(), set()))
            continue
        eta = node.new.pop()
        if eta in node.old:
            stack.append(node)
            continue
        if _is_literal(eta):
            if eta == FALSE or (eta[0] == "lit" and _neg_lit(eta) in node.old):
                continue
            node.old.add(eta)
            stack.append(node)
            continue
        op = eta[0]
        if op == "and":
            node.old.add(eta)
            node.new.extend(x for x in (eta[1], eta[2]) if x not in node.old)
            stack.append(node)
        elif op == "X":
            node.old.add(eta)
            node.nxt.add(eta[1])
            stack.append(node)
        else:
            if op == "or":
                n1_new, n1_next, n2_new = [eta[1]], set(), [eta[2]]
            elif op == "U":
                n1_new, n1_next, n2_new = [eta[1]], {eta}, [eta[2]]
            else:  # R
                n1_new, n1_next, n2_new = [eta[2]], {eta}, [eta[1], eta[2]]
            old2 = node.old | {eta}
            n1 = _Node(fresh(), set(node.incoming), node.new + [x for x in n1_new if x not in old2],
                       set(old2), node.nxt | n1_next)
            n2 = _Node(fresh(), set(node.incoming), node.new + [x for x in n2_new if x not in old2],
                       set(old2), set(node.nxt))
            stack.append(n1)
            stack.append(n2)
    untils = set()

    def collect(f):
        if f[0] == "U":
            untils.add(f)
        for x in f[1:]:
            if isinstance(x, tuple):
                collect(x)
    collect(formula)
    for nd in done:
        for f in nd.old:
            if isinstance(f, tuple):
                collect(f)
    nodes = {nd.ident: (frozenset(f for f in nd.old if f[0] == "lit"), frozenset(nd.incoming)) for nd in done}
    full_old = {nd.ident: nd.old for nd in done}
    acc = [frozenset(i for i, old in full_old.items() if u not in old or u[2] in old) for u in sorted(untils, key=repr)]
    return Automaton(nodes, acc)


def check_graph(s0: Hashable, succ: Callable[[Hashable], Sequence[Hashable]],
                label: Callable[[Prop, Hashable], bool], formula: LTL):
    """Return (holds, prefix, cycle); prefix/cycle form a counterexample lasso."""
    aut = build_automaton(nnf(LNot(formula)))
    cache: Dict[Tuple[Prop, Hashable], bool] = {}

    def sat(s, lits) -> bool:
        for _, p, pos in lits:
            k = (p, s)
            v = cache.get(k)
            if v is None:
                v = cache[k] = label(p, s)
            if v != pos:
                return False
        return True

    succ_nodes: Dict[int, List[int]] = {i: [] for i in aut.nodes}
    init_nodes = []
    for j, (_, inc) in aut.nodes.items():
        for i in inc:
            if i == aut.INIT:
                init_nodes.append(j)
            elif i in succ_nodes:
                succ_nodes[i].append(j)

    def psucc(x):
        s, n = x
        out = []
        for s2 in succ(s):
            for n2 in succ_nodes[n]:
                if sat(s2, aut.nodes[n2][0]):
                    out.append((s2, n2))
        return out

    starts = [(s0, n) for n in init_nodes if sat(s0, aut.nodes[n][0])]
    # iterative Tarjan over the reachable product
    index: Dict = {}
    low: Dict = {}
    on_stack: Set = set()
    stk: List = []
    edges: Dict = {}
    counter = 0
    found = None
    for root in starts:
        if root in index:
            continue
        work = [(root, 0)]
        index[root] = low[root] = counter
        counter += 1
        stk.append(root)
        on_stack.add(root)
        edges[root] = psucc(root)
        while work and found is None:
            v, i = work[-1]
            es = edges[v]
            if i < len(es):
                work[-1] = (v, i + 1)
                w = es[i]
                if w not in index:
                    index[w] = low[w] = counter
                    counter += 1
                    stk.append(w)
                    on_stack.add(w)
                    edges[w] = psucc(w)
                    work.append((w, 0))
                elif w in on_stack:
                    low[v] = min(low[v], index[w])
            else:
                work.pop()
                if work:
                    u = work[-1][0]
                    low[u] = min(low[u], low[v])
                if low[v] == index[v]:
                    comp = []
                    while True:
                        w = stk.pop()
                        on_stack.discard(w)
                        comp.append(w)
                        if w == v:
                            break
                    cs = set(comp)
                    nontrivial = len(comp) > 1 or v in edges[v]
                    if nontrivial and all(any(x[1] in F for x in comp) for F in aut.accepting):
                        found = cs
        if found is not None:
            break
    if found is None:
        return True, [], []
    # lasso: BFS prefix to the component, then a cycle through every acceptance set
    parent = {r: None for r in starts}
    q = deque(starts)
    target = None
    while q:
        x = q.popleft()
        if x in found:
            target = x
            break
        for y in edges.get(x, ()):
            if y not in parent:
                parent[y] = x
                q.append(y)
    prefix = []
    x = target
    while x is not None:
        prefix.append(x)
        x = parent[x]
    prefix.reverse()

    def bfs_in(src, goal):
        par = {src: None}
        dq = deque([src])
        while dq:
            a = dq.popleft()
            for b in edges[a]:
                if b not in found:
                    continue
                if goal(b):
                    path = [b]
                    x = a
                    while x is not None and x != src:
                        path.append(x)
                        x = par[x]
                    return path[::-1]
                if b in par:
                    continue
                par[b] = a
                dq.append(b)
        return []

    cycle = [target]
    cur = target
    for F in aut.accepting:
        if cur[1] in F and cur is not target:
            continue
        seg = bfs_in(cur, lambda b, F=F: b[1] in F)
        cycle += seg
        cur = cycle[-1]
    seg = bfs_in(cur, lambda b: b == target)
    cycle += seg
    return False, [x[0] for x in prefix], [x[0] for x in cycle]
