"""LTL and CTL formulas whose atoms are graph constraints."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from ..conditions import TRUE, Condition, exists_graph
from ..graph import ENV, SYS, Graph


class Formula:
    pass


@dataclass(frozen=True)
class Atom(Formula):
    constraint: Condition
    name: str = field(default="", compare=False)


@dataclass(frozen=True)
class TNot(Formula):
    operand: Formula


@dataclass(frozen=True)
class TAnd(Formula):
    operands: tuple[Formula, ...]


@dataclass(frozen=True)
class TOr(Formula):
    operands: tuple[Formula, ...]


@dataclass(frozen=True)
class TImplies(Formula):
    left: Formula
    right: Formula


# linear-time operators


@dataclass(frozen=True)
class Next(Formula):
    operand: Formula


@dataclass(frozen=True)
class Globally(Formula):
    operand: Formula


@dataclass(frozen=True)
class Until(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class WeakUntil(Formula):
    left: Formula
    right: Formula


# branching-time operators


@dataclass(frozen=True)
class AX(Formula):
    operand: Formula


@dataclass(frozen=True)
class EX(Formula):
    operand: Formula


@dataclass(frozen=True)
class AG(Formula):
    operand: Formula


@dataclass(frozen=True)
class EG(Formula):
    operand: Formula


@dataclass(frozen=True)
class AU(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class EU(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class AW(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class EW(Formula):
    left: Formula
    right: Formula


LTL_TEMPORAL = (Next, Globally, Until, WeakUntil)
CTL_TEMPORAL = (AX, EX, AG, EG, AU, EU, AW, EW)
BOOLEAN = (Atom, TNot, TAnd, TOr, TImplies)
UNARY = (TNot, Next, Globally, AX, EX, AG, EG)
BINARY = (TImplies, Until, WeakUntil, AU, EU, AW, EW)

TT = Atom(TRUE, "true")
# the last applied rule was a system / environment rule
S_ATOM = Atom(exists_graph(Graph((SYS,))), "s")
E_ATOM = Atom(exists_graph(Graph((ENV,))), "e")


def atom(c: Condition, name: str = "") -> Atom:
    return Atom(c, name)


def conj(*fs: Formula) -> Formula:
    return fs[0] if len(fs) == 1 else TAnd(tuple(fs))


def disj(*fs: Formula) -> Formula:
    return fs[0] if len(fs) == 1 else TOr(tuple(fs))


def children(f: Formula) -> tuple[Formula, ...]:
    if isinstance(f, Atom):
        return ()
    if isinstance(f, (TAnd, TOr)):
        return f.operands
    if isinstance(f, UNARY):
        return (f.operand,)
    return (f.left, f.right)


def subformulas(f: Formula) -> list[Formula]:
    """Post-order, without duplicates."""
    seen: dict[Formula, None] = {}

    def walk(g: Formula) -> None:
        for c in children(g):
            walk(c)
        seen.setdefault(g, None)

    walk(f)
    return list(seen)


def atoms(f: Formula) -> list[Atom]:
    return [g for g in subformulas(f) if isinstance(g, Atom)]


def is_ltl(f: Formula) -> bool:
    return not any(isinstance(g, CTL_TEMPORAL) for g in subformulas(f))


def is_ctl(f: Formula) -> bool:
    return not any(isinstance(g, LTL_TEMPORAL) for g in subformulas(f))


def nest(op, f: Formula, times: int) -> Formula:
    """``op`` applied ``times`` times; zero times is the formula itself."""
    for _ in range(times):
        f = op(f)
    return f


_PREFIX = {TNot: "!", Next: "X ", Globally: "G ", AX: "AX ", EX: "EX ", AG: "AG ", EG: "EG "}
_INFIX = {Until: "U", WeakUntil: "W"}
_PATH = {AU: ("A", "U"), EU: ("E", "U"), AW: ("A", "W"), EW: ("E", "W")}


def to_text(f: Formula, names: Optional[dict] = None) -> str:
    """Render in the model language's formula syntax (fully parenthesized)."""
    if isinstance(f, Atom):
        if f.name:
            return f.name
        if names and f.constraint in names:
            return names[f.constraint]
        return f"<{f.constraint!r}>"
    if isinstance(f, tuple(_PREFIX)):
        return f"{_PREFIX[type(f)]}{_wrap(f.operand, names)}"
    if isinstance(f, TAnd):
        return " & ".join(_wrap(g, names) for g in f.operands) if f.operands else "true"
    if isinstance(f, TOr):
        return " | ".join(_wrap(g, names) for g in f.operands) if f.operands else "false"
    if isinstance(f, TImplies):
        return f"{_wrap(f.left, names)} -> {_wrap(f.right, names)}"
    if isinstance(f, tuple(_INFIX)):
        return f"{_wrap(f.left, names)} {_INFIX[type(f)]} {_wrap(f.right, names)}"
    q, op = _PATH[type(f)]
    return f"{q}[{to_text(f.left, names)} {op} {to_text(f.right, names)}]"


def _wrap(f: Formula, names) -> str:
    text = to_text(f, names)
    if isinstance(f, (Atom, AU, EU, AW, EW)) or isinstance(f, tuple(_PREFIX)):
        return text
    return f"({text})"

