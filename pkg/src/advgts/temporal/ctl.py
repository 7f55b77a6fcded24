"""CTL model checking by fixpoint labeling, plus a path-search reference evaluator.

Labeling is three-valued so that truncated systems give sound answers:
every subformula gets a ``lower`` set (states where it certainly holds) and
an ``upper`` set (states where it may hold).  An unexpanded state has
unknown extra successors, so it may satisfy any EX formula.
"""
from __future__ import annotations

from typing import Optional

from ..conditions import graph_satisfies
from ..errors import NotCompleted, OracleTooLarge
from ..statespace import LTS
from .formulas import (
    AG, AU, AW, AX, EG, EU, EW, EX, Atom, Formula, TAnd, TImplies, TNot, TOr, is_ctl,
)
from .verdict import Path, Verdict, holds, unknown, violated

ORACLE_LIMIT = 200

# core syntax: ('true',) ('ap', Atom) ('not', f) ('and', f, g) ('or', f, g) ('EX', f) ('EU', f, g) ('EG', f)


def to_core(f: Formula) -> tuple:
    if isinstance(f, Atom):
        return ("ap", f)
    if isinstance(f, TNot):
        return ("not", to_core(f.operand))
    if isinstance(f, (TAnd, TOr)):
        op = "and" if isinstance(f, TAnd) else "or"
        parts = [to_core(g) for g in f.operands]
        if not parts:
            return ("true",) if op == "and" else ("not", ("true",))
        out = parts[-1]
        for p in reversed(parts[:-1]):
            out = (op, p, out)
        return out
    if isinstance(f, TImplies):
        return ("or", ("not", to_core(f.left)), to_core(f.right))
    if isinstance(f, EX):
        return ("EX", to_core(f.operand))
    if isinstance(f, AX):
        return ("not", ("EX", ("not", to_core(f.operand))))
    if isinstance(f, EG):
        return ("EG", to_core(f.operand))
    if isinstance(f, AG):
        return ("not", ("EU", ("true",), ("not", to_core(f.operand))))
    if isinstance(f, EU):
        return ("EU", to_core(f.left), to_core(f.right))
    if isinstance(f, EW):
        a, b = to_core(f.left), to_core(f.right)
        return ("or", ("EU", a, b), ("EG", a))
    if isinstance(f, (AU, AW)):
        a, b = to_core(f.left), to_core(f.right)
        na, nb = ("not", a), ("not", b)
        bad = ("EU", nb, ("and", na, nb))
        if isinstance(f, AU):
            bad = ("or", bad, ("EG", nb))
        return ("not", bad)
    raise TypeError(f"not a CTL formula: {f!r}")


class _Labeling:
    def __init__(self, lts: LTS):
        self.lts = lts
        self.n = len(lts.states)
        self.all = frozenset(range(self.n))
        self.open = frozenset(i for i in range(self.n) if not lts.expanded[i])
        self.sets: dict[tuple, tuple[frozenset, frozenset]] = {}
        # ranks of EU lower-set states, used to walk witnesses towards the goal
        self.rank: dict[tuple, dict[int, int]] = {}

    def pre_exists(self, target: frozenset, with_open: bool) -> set:
        out = {p for t in target for p in self.lts.pred[t]}
        if with_open:
            out |= self.open
        return out

    def eu(self, a: frozenset, b: frozenset, with_open: bool, key=None) -> frozenset:
        rank = {s: 0 for s in b}
        frontier = set(b)
        level = 0
        while frontier:
            level += 1
            new = set()
            for t in frontier:
                for p in self.lts.pred[t]:
                    if p in a and p not in rank:
                        rank[p] = level
                        new.add(p)
            frontier = new
        res = set(rank)
        if with_open:
            # open states in a may reach b through unknown successors
            extra = (a & self.open) - res
            if extra:
                res = set(self.eu(a, b | extra, False))
        if key is not None:
            self.rank[key] = rank
        return frozenset(res)

    def eg(self, a: frozenset, with_open: bool) -> frozenset:
        z = set(a)
        changed = True
        while changed:
            changed = False
            for s in list(z):
                if with_open and s in self.open:
                    continue
                if not any(t in z for t in self.lts.succ[s]):
                    z.discard(s)
                    changed = True
        return frozenset(z)

    def label(self, f: tuple) -> tuple[frozenset, frozenset]:
        if f in self.sets:
            return self.sets[f]
        kind = f[0]
        if kind == "true":
            res = (self.all, self.all)
        elif kind == "ap":
            sat = frozenset(i for i, g in enumerate(self.lts.states)
                            if graph_satisfies(g, f[1].constraint))
            res = (sat, sat)
        elif kind == "not":
            lo, up = self.label(f[1])
            res = (self.all - up, self.all - lo)
        elif kind in ("and", "or"):
            (l1, u1), (l2, u2) = self.label(f[1]), self.label(f[2])
            res = (l1 & l2, u1 & u2) if kind == "and" else (l1 | l2, u1 | u2)
        elif kind == "EX":
            lo, up = self.label(f[1])
            res = (frozenset(self.pre_exists(lo, False)), frozenset(self.pre_exists(up, True)))
        elif kind == "EU":
            (l1, u1), (l2, u2) = self.label(f[1]), self.label(f[2])
            res = (self.eu(l1, l2, False, key=f), self.eu(u1, u2, True))
        elif kind == "EG":
            lo, up = self.label(f[1])
            res = (self.eg(lo, False), self.eg(up, True))
        else:
            raise ValueError(f"unexpected core node {f!r}")
        self.sets[f] = res
        return res

    def lower(self, f):
        return self.label(f)[0]

    def upper(self, f):
        return self.label(f)[1]

    # witnesses: a refutation starts at s with s outside upper(f);
    # a confirmation starts at s with s inside lower(f)

    def refute(self, s: int, f: tuple) -> list[int]:
        kind = f[0]
        if kind == "not":
            return self.confirm(s, f[1])
        if kind == "and":
            return self.refute(s, f[1] if s not in self.upper(f[1]) else f[2])
        if kind == "or":
            # both disjuncts fail at s; follow the one with the longer evidence
            return max(self.refute(s, f[1]), self.refute(s, f[2]), key=len)
        return [s]

    def confirm(self, s: int, f: tuple) -> list[int]:
        kind = f[0]
        if kind == "not":
            return self.refute(s, f[1])
        if kind == "and":
            return max(self.confirm(s, f[1]), self.confirm(s, f[2]), key=len)
        if kind == "or":
            return self.confirm(s, f[1] if s in self.lower(f[1]) else f[2])
        if kind == "EX":
            for t in self.lts.succ[s]:
                if t in self.lower(f[1]):
                    return [s] + self.confirm(t, f[1])
        if kind == "EU":
            rank = self.rank[f]
            path = [s]
            while rank[path[-1]] > 0:
                cur = path[-1]
                path.append(min((t for t in self.lts.succ[cur] if rank.get(t, -1) == rank[cur] - 1)))
            return path[:-1] + self.confirm(path[-1], f[2])
        if kind == "EG":
            inside = self.lower(f)
            path = [s]
            seen = {s}
            while True:
                t = min(t for t in self.lts.succ[path[-1]] if t in inside)
                path.append(t)
                if t in seen:
                    return path
                seen.add(t)
        return [s]


def _require_total(lts: LTS) -> None:
    for i in range(len(lts.states)):
        if lts.expanded[i] and not lts.out[i]:
            raise NotCompleted(f"state {i} has no successor; complete the LTS first")


def ctl_label(lts: LTS, theta: Formula) -> tuple[frozenset, frozenset]:
    """(certainly-true, possibly-true) state sets of ``theta``."""
    return _Labeling(lts).label(to_core(theta))


def ctl_check(lts: LTS, theta: Formula) -> Verdict:
    if not is_ctl(theta):
        raise ValueError("ctl_check needs a CTL formula")
    _require_total(lts)
    lab = _Labeling(lts)
    core = to_core(theta)
    lower, upper = lab.label(core)
    for s in lts.initial:
        if s not in upper:
            return violated(Path(tuple(lab.refute(s, core))), f"initial state {s} refutes the formula")
    if not lts.complete:
        return unknown("exploration was truncated: " + "; ".join(lts.notes))
    assert all(s in lower for s in lts.initial)
    return holds()


# -- reference evaluator ------------------------------------------------------


def eval_ctl_naive(lts: LTS, state: int, theta: Formula, _memo: Optional[dict] = None) -> bool:
    """Recursive evaluation by explicit path search; small complete systems only."""
    if len(lts.states) > ORACLE_LIMIT:
        raise OracleTooLarge(f"{len(lts.states)} states exceed the oracle limit {ORACLE_LIMIT}")
    memo = {} if _memo is None else _memo

    def ev(s: int, f: Formula) -> bool:
        key = (s, f)
        if key not in memo:
            memo[key] = _eval(s, f)
        return memo[key]

    def reach_via(s: int, through, goal) -> bool:
        """Some path from s stays in ``through`` until it hits ``goal``."""
        seen = set()
        stack = [s]
        while stack:
            u = stack.pop()
            if u in seen:
                continue
            seen.add(u)
            if goal(u):
                return True
            if through(u):
                stack.extend(lts.succ[u])
        return False

    def cycle_within(s: int, inside) -> bool:
        """Some infinite path from s stays inside."""
        if not inside(s):
            return False
        on_stack: set[int] = set()
        done: set[int] = set()

        def dfs(u: int) -> bool:
            on_stack.add(u)
            for t in lts.succ[u]:
                if not inside(t) or t in done:
                    continue
                if t in on_stack or dfs(t):
                    return True
            on_stack.discard(u)
            done.add(u)
            return False

        return dfs(s)

    def _eval(s: int, f: Formula) -> bool:
        if isinstance(f, Atom):
            return graph_satisfies(lts.states[s], f.constraint)
        if isinstance(f, TNot):
            return not ev(s, f.operand)
        if isinstance(f, TAnd):
            return all(ev(s, g) for g in f.operands)
        if isinstance(f, TOr):
            return any(ev(s, g) for g in f.operands)
        if isinstance(f, TImplies):
            return (not ev(s, f.left)) or ev(s, f.right)
        if isinstance(f, EX):
            return any(ev(t, f.operand) for t in lts.succ[s])
        if isinstance(f, AX):
            return all(ev(t, f.operand) for t in lts.succ[s])
        if isinstance(f, AG):
            return not reach_via(s, lambda u: True, lambda u: not ev(u, f.operand))
        if isinstance(f, EG):
            return cycle_within(s, lambda u: ev(u, f.operand))
        a, b = f.left, f.right
        strict = lambda u: ev(u, b)  # noqa: E731
        if isinstance(f, EU):
            return reach_via(s, lambda u: ev(u, a), strict)
        if isinstance(f, EW):
            return reach_via(s, lambda u: ev(u, a), strict) or cycle_within(s, lambda u: ev(u, a))
        # universal forms fail on a path that leaves a before b, or (for AU) never meets b
        leaves = reach_via(s, lambda u: ev(u, a) and not ev(u, b),
                           lambda u: not ev(u, a) and not ev(u, b))
        if isinstance(f, AW):
            return not leaves
        if isinstance(f, AU):
            return not leaves and not cycle_within(s, lambda u: not ev(u, b))
        raise TypeError(f"not a CTL formula: {f!r}")

    return ev(state, theta)
