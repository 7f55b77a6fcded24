"""LTL model checking over explored transition systems.

``ltl_check`` translates the negated formula into a generalized Büchi
automaton with the on-the-fly tableau of Gerth, Peled, Vardi and Wolper,
degeneralizes it with a round-robin counter, and searches the product with
the transition system for an accepting cycle by nested depth-first search.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Mapping, Sequence, Union

from ..conditions import graph_satisfies
from ..errors import NotCompleted
from ..graph import Graph
from ..statespace import LTS, Lasso
from .formulas import (
    Atom, Formula, Globally, Next, TAnd, TImplies, TNot, TOr, Until, WeakUntil, atoms, is_ltl,
)
from .verdict import Verdict, holds, unknown, violated

# -- semantics on a single lasso ---------------------------------------------


def eval_ltl_on_lasso(lasso: Lasso, graphs: Union[Sequence[Graph], Mapping[int, Graph]],
                      phi: Formula) -> bool:
    """Truth of ``phi`` at position 0 of the infinite word the lasso denotes."""
    positions = lasso.prefix + lasso.loop
    n = len(positions)
    loop_start = len(lasso.prefix)
    nxt = [i + 1 if i + 1 < n else loop_start for i in range(n)]
    atom_cache: dict[tuple[int, Atom], bool] = {}
    memo: dict[Formula, list[bool]] = {}

    def at(state: int, a: Atom) -> bool:
        key = (state, a)
        if key not in atom_cache:
            atom_cache[key] = graph_satisfies(graphs[state], a.constraint)
        return atom_cache[key]

    def until(a: list[bool], b: list[bool]) -> list[bool]:
        res = list(b)
        changed = True
        while changed:
            changed = False
            for i in range(n):
                if not res[i] and a[i] and res[nxt[i]]:
                    res[i] = changed = True
        return res

    def globally(a: list[bool]) -> list[bool]:
        res = list(a)
        changed = True
        while changed:
            changed = False
            for i in range(n):
                if res[i] and not res[nxt[i]]:
                    res[i] = False
                    changed = True
        return res

    def val(f: Formula) -> list[bool]:
        if f in memo:
            return memo[f]
        if isinstance(f, Atom):
            out = [at(s, f) for s in positions]
        elif isinstance(f, TNot):
            out = [not x for x in val(f.operand)]
        elif isinstance(f, TAnd):
            parts = [val(g) for g in f.operands]
            out = [all(p[i] for p in parts) for i in range(n)]
        elif isinstance(f, TOr):
            parts = [val(g) for g in f.operands]
            out = [any(p[i] for p in parts) for i in range(n)]
        elif isinstance(f, TImplies):
            a, b = val(f.left), val(f.right)
            out = [(not x) or y for x, y in zip(a, b)]
        elif isinstance(f, Next):
            a = val(f.operand)
            out = [a[nxt[i]] for i in range(n)]
        elif isinstance(f, Globally):
            out = globally(val(f.operand))
        elif isinstance(f, Until):
            out = until(val(f.left), val(f.right))
        elif isinstance(f, WeakUntil):
            u = until(val(f.left), val(f.right))
            g = globally(val(f.left))
            out = [x or y for x, y in zip(u, g)]
        else:
            raise TypeError(f"not an LTL formula: {f!r}")
        memo[f] = out
        return out

    return val(phi)[0]


def lassos(lts: LTS, max_len: int) -> Iterator[Lasso]:
    """Every lasso from an initial state with ``len(prefix) + len(loop) <= max_len``."""
    succ = lts.succ
    for s0 in lts.initial:
        stack = [(s0,)]
        while stack:
            path = stack.pop()
            last = path[-1]
            for t in succ[last]:
                for j, u in enumerate(path):
                    if u == t:
                        yield Lasso(path[:j], path[j:])
            if len(path) < max_len:
                for t in reversed(succ[last]):
                    stack.append(path + (t,))


def ltl_holds_on_all_lassos(lts: LTS, phi: Formula, max_len: int) -> bool:
    """Exhaustive-lasso reference check (small systems only)."""
    return all(eval_ltl_on_lasso(l, lts.states, phi) for l in lassos(lts, max_len))


# -- negation normal form ---------------------------------------------------
# ('ap', i) ('nap', i) ('true',) ('false',) ('and', a, b) ('or', a, b)
# ('X', a) ('U', a, b) ('R', a, b)

TRUE_N = ("true",)
FALSE_N = ("false",)


def _fold(op: str, items: list, unit: tuple) -> tuple:
    if not items:
        return unit
    out = items[-1]
    for x in reversed(items[:-1]):
        out = (op, x, out)
    return out


def to_nnf(f: Formula, index: dict[Atom, int], negate: bool = False) -> tuple:
    if isinstance(f, Atom):
        i = index.setdefault(f, len(index))
        return ("nap", i) if negate else ("ap", i)
    if isinstance(f, TNot):
        return to_nnf(f.operand, index, not negate)
    if isinstance(f, TAnd):
        parts = [to_nnf(g, index, negate) for g in f.operands]
        return _fold("or", parts, FALSE_N) if negate else _fold("and", parts, TRUE_N)
    if isinstance(f, TOr):
        parts = [to_nnf(g, index, negate) for g in f.operands]
        return _fold("and", parts, TRUE_N) if negate else _fold("or", parts, FALSE_N)
    if isinstance(f, TImplies):
        a = to_nnf(f.left, index, not negate)
        b = to_nnf(f.right, index, negate)
        return ("and", a, b) if negate else ("or", a, b)
    if isinstance(f, Next):
        return ("X", to_nnf(f.operand, index, negate))
    if isinstance(f, Globally):
        a = to_nnf(f.operand, index, negate)
        # G a = false R a ; !G a = true U !a
        return ("U", TRUE_N, a) if negate else ("R", FALSE_N, a)
    if isinstance(f, Until):
        a = to_nnf(f.left, index, negate)
        b = to_nnf(f.right, index, negate)
        return ("R", a, b) if negate else ("U", a, b)
    if isinstance(f, WeakUntil):
        # a W b := (a U b) | G a
        return to_nnf(TOr((Until(f.left, f.right), Globally(f.left))), index, negate)
    raise TypeError(f"not an LTL formula: {f!r}")


def _negate_literal(x: tuple) -> tuple:
    if x == TRUE_N:
        return FALSE_N
    if x == FALSE_N:
        return TRUE_N
    return ("nap" if x[0] == "ap" else "ap", x[1])


# -- tableau ------------------------------------------------------------------

INIT = -1


@dataclass
class TableauNode:
    ident: int
    incoming: set = field(default_factory=set)
    old: frozenset = frozenset()
    next: frozenset = frozenset()

    def literals(self) -> tuple[set[int], set[int]]:
        pos = {x[1] for x in self.old if x[0] == "ap"}
        neg = {x[1] for x in self.old if x[0] == "nap"}
        return pos, neg


@dataclass
class Buchi:
    """Generalized Büchi automaton produced by the tableau."""

    nodes: list[TableauNode]
    acceptance: list[frozenset[int]]  # one set of node idents per until-subformula


def build_buchi(phi: tuple) -> Buchi:
    nodes: list[TableauNode] = []
    counter = [0]

    def fresh() -> int:
        counter[0] += 1
        return counter[0] - 1

    # work item: (incoming, new, old, next)
    work = [({INIT}, frozenset([phi]), frozenset(), frozenset())]
    while work:
        incoming, new, old, nxt = work.pop()
        if not new:
            for nd in nodes:
                if nd.old == old and nd.next == nxt:
                    nd.incoming |= incoming
                    break
            else:
                node = TableauNode(fresh(), set(incoming), old, nxt)
                nodes.append(node)
                work.append(({node.ident}, nxt, frozenset(), frozenset()))
            continue
        eta = min(new, key=repr)
        new = new - {eta}
        kind = eta[0]
        if eta in old:
            work.append((incoming, new, old, nxt))
        elif kind in ("ap", "nap", "true", "false"):
            if eta == FALSE_N or _negate_literal(eta) in old:
                continue
            work.append((incoming, new, old | {eta}, nxt))
        elif kind == "and":
            work.append((incoming, new | ({eta[1], eta[2]} - old), old | {eta}, nxt))
        elif kind == "X":
            work.append((incoming, new, old | {eta}, nxt | {eta[1]}))
        elif kind == "or":
            work.append((incoming, new | ({eta[1]} - old), old | {eta}, nxt))
            work.append((incoming, new | ({eta[2]} - old), old | {eta}, nxt))
        elif kind == "U":
            work.append((incoming, new | ({eta[1]} - old), old | {eta}, nxt | {eta}))
            work.append((incoming, new | ({eta[2]} - old), old | {eta}, nxt))
        elif kind == "R":
            work.append((incoming, new | ({eta[2]} - old), old | {eta}, nxt | {eta}))
            work.append((incoming, new | ({eta[1], eta[2]} - old), old | {eta}, nxt))
        else:
            raise ValueError(f"unexpected NNF node {eta!r}")

    untils = sorted({x for nd in nodes for x in nd.old if x[0] == "U"}, key=repr)
    acceptance = [
        frozenset(nd.ident for nd in nodes if u not in nd.old or u[2] in nd.old)
        for u in untils
    ]
    return Buchi(nodes, acceptance)


# -- product and nested DFS -------------------------------------------------


def _require_total(lts: LTS) -> None:
    for i in range(len(lts.states)):
        if lts.expanded[i] and not lts.out[i]:
            raise NotCompleted(f"state {i} has no successor; complete the LTS first")


class _Product:
    def __init__(self, lts: LTS, buchi: Buchi, atom_index: dict[Atom, int]):
        self.lts = lts
        self.nodes = {nd.ident: nd for nd in buchi.nodes}
        self.acc = buchi.acceptance
        self.k = len(buchi.acceptance)
        by_atom = sorted(atom_index.items(), key=lambda kv: kv[1])
        self.table = [
            frozenset(i for a, i in by_atom if graph_satisfies(g, a.constraint))
            for g in lts.states
        ]
        self.lits = {nd.ident: nd.literals() for nd in buchi.nodes}
        self.after: dict[int, list[int]] = {nd.ident: [] for nd in buchi.nodes}
        self.initial_nodes = []
        for nd in sorted(buchi.nodes, key=lambda n: n.ident):
            for src in sorted(nd.incoming):
                if src == INIT:
                    self.initial_nodes.append(nd.ident)
                else:
                    self.after[src].append(nd.ident)

    def fits(self, s: int, node: int) -> bool:
        pos, neg = self.lits[node]
        true_here = self.table[s]
        return pos <= true_here and not (neg & true_here)

    def initial(self) -> list[tuple]:
        return [(s, n, 0) for s in self.lts.initial for n in self.initial_nodes if self.fits(s, n)]

    def post(self, state: tuple) -> list[tuple]:
        s, n, i = state
        j = (i + 1) % self.k if self.k and n in self.acc[i] else i
        return [(t, m, j) for t in self.lts.succ[s] for m in self.after[n] if self.fits(t, m)]

    def accepting(self, state: tuple) -> bool:
        s, n, i = state
        return self.k == 0 or (i == 0 and n in self.acc[0])


def _nested_dfs(prod: _Product):
    """Return (stack_prefix, cycle) of product states or None."""
    cyan: set = set()
    blue: set = set()
    red: set = set()

    for root in prod.initial():
        if root in blue or root in cyan:
            continue
        stack = [root]
        iters = [iter(prod.post(root))]
        cyan.add(root)
        while stack:
            s = stack[-1]
            advanced = False
            for t in iters[-1]:
                if t in cyan and (prod.accepting(s) or prod.accepting(t)):
                    j = stack.index(t)
                    return stack[:j], stack[j:]
                if t not in cyan and t not in blue:
                    stack.append(t)
                    iters.append(iter(prod.post(t)))
                    cyan.add(t)
                    advanced = True
                    break
            if advanced:
                continue
            if prod.accepting(s):
                found = _red_search(prod, s, cyan, red)
                if found is not None:
                    j = stack.index(found[-1])
                    # loop: stack from the hit state to the seed, then the red path back
                    return stack[:j], stack[j:] + found[1:-1]
            stack.pop()
            iters.pop()
            cyan.discard(s)
            blue.add(s)
    return None


def _red_search(prod: _Product, seed: tuple, cyan: set, red: set):
    path = [seed]
    iters = [iter(prod.post(seed))]
    red.add(seed)
    while path:
        advanced = False
        for t in iters[-1]:
            if t in cyan:
                return path + [t]
            if t not in red:
                red.add(t)
                path.append(t)
                iters.append(iter(prod.post(t)))
                advanced = True
                break
        if not advanced:
            path.pop()
            iters.pop()
    return None


def find_violation(lts: LTS, phi: Formula):
    """Lasso of LTS states along which ``phi`` fails, or None."""
    index: dict[Atom, int] = {}
    for a in atoms(phi):
        index.setdefault(a, len(index))
    buchi = build_buchi(to_nnf(phi, index, negate=True))
    prod = _Product(lts, buchi, index)
    found = _nested_dfs(prod)
    if found is None:
        return None
    prefix, loop = found
    return Lasso(tuple(p[0] for p in prefix), tuple(p[0] for p in loop))


def ltl_check(lts: LTS, phi: Formula) -> Verdict:
    if not is_ltl(phi):
        raise ValueError("ltl_check needs an LTL formula")
    _require_total(lts)
    lasso = find_violation(lts, phi)
    if lasso is not None:
        return violated(lasso, "accepting cycle in the product with the negated formula")
    if not lts.complete:
        return unknown("no counterexample in the explored region; exploration was truncated: "
                       + "; ".join(lts.notes))
    return holds()
