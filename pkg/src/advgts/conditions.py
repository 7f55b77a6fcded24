"""Nested graph conditions and their satisfaction semantics."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Union

from .errors import ContextMismatch
from .graph import EMPTY, Graph, Morphism, empty_morphism, extend_morphisms


class Condition:
    """Base of the condition tree. Subclasses are immutable."""

    def __invert__(self) -> "Condition":
        return Not(self)

    def __and__(self, other: "Condition") -> "Condition":
        return And((self, other))

    def __or__(self, other: "Condition") -> "Condition":
        return Or(self, other)


@dataclass(frozen=True)
class TrueCond(Condition):
    def __repr__(self):
        return "true"


TRUE = TrueCond()


@dataclass(frozen=True)
class Exists(Condition):
    extension: Morphism
    nested: Condition = TRUE

    def __post_init__(self):
        if not self.extension.is_injective():
            raise ValueError("extension morphism must be injective")

    def __repr__(self):
        return f"∃({self.extension.codomain!r}, {self.nested!r})"


@dataclass(frozen=True)
class Not(Condition):
    operand: Condition

    def __repr__(self):
        return f"¬{self.operand!r}"


@dataclass(frozen=True)
class And(Condition):
    operands: tuple[Condition, ...] = ()

    def __repr__(self):
        return "(" + " ∧ ".join(map(repr, self.operands)) + ")" if self.operands else "true"


FALSE = Not(TRUE)


def Or(*operands: Condition) -> Condition:
    return Not(And(tuple(Not(c) for c in operands)))


def Implies(a: Condition, b: Condition) -> Condition:
    return Or(Not(a), b)


def Forall(extension: Morphism, nested: Condition = TRUE) -> Condition:
    return Not(Exists(extension, Not(nested)))


Constraint = Condition
CondLike = Union[Condition, bool]


def _check_context(p: Morphism, cond: Condition) -> None:
    # Exists nodes carry their context; walk until one is found on each branch
    if isinstance(cond, Exists):
        if not cond.extension.domain.same_structure(p.domain):
            raise ContextMismatch(
                f"condition over {cond.extension.domain!r} applied to morphism from {p.domain!r}"
            )
    elif isinstance(cond, Not):
        _check_context(p, cond.operand)
    elif isinstance(cond, And):
        for c in cond.operands:
            _check_context(p, c)


def morphism_satisfies(p: Morphism, cond: Condition) -> bool:
    """Decide ``p |= cond`` for an injective morphism ``p: P -> G``."""
    _check_context(p, cond)
    return _sat(p, cond)


def _sat(p: Morphism, cond: Condition) -> bool:
    if isinstance(cond, TrueCond):
        return True
    if isinstance(cond, Not):
        return not _sat(p, cond.operand)
    if isinstance(cond, And):
        return all(_sat(p, c) for c in cond.operands)
    if isinstance(cond, Exists):
        a = cond.extension
        node_fixed = {a.node_map[v]: p.node_map[v] for v in range(a.domain.num_nodes)}
        edge_fixed = {a.edge_map[e]: p.edge_map[e] for e in range(a.domain.num_edges)}
        for q in extend_morphisms(a.codomain, p.codomain, node_fixed, edge_fixed):
            if _sat(q, cond.nested):
                return True
        return False
    raise TypeError(f"not a condition: {cond!r}")


def graph_satisfies(g: Graph, cond: Condition) -> bool:
    return morphism_satisfies(empty_morphism(g), cond)


def is_constraint(cond: Condition) -> bool:
    try:
        _check_context(empty_morphism(EMPTY), cond)
    except ContextMismatch:
        return False
    return True


def exists_graph(g: Graph, nested: Condition = TRUE) -> Exists:
    """The constraint ``∃(∅ -> g, nested)``."""
    return Exists(Morphism(EMPTY, g, (), ()), nested)


def add_isolated(cond: Condition, label: str) -> Condition:
    """Carry a condition over ``P`` to one over ``P + (label)``.

    Every context graph in the tree gains the same isolated node as its last
    node, and every extension maps it identically. Used to move rule
    application conditions onto tag-enriched left-hand sides.
    """
    if isinstance(cond, TrueCond):
        return cond
    if isinstance(cond, Not):
        return Not(add_isolated(cond.operand, label))
    if isinstance(cond, And):
        return And(tuple(add_isolated(c, label) for c in cond.operands))
    if isinstance(cond, Exists):
        a = cond.extension
        dom = _with_node(a.domain, label)
        cod = _with_node(a.codomain, label)
        ext = Morphism(dom, cod, a.node_map + (cod.num_nodes - 1,), a.edge_map)
        return Exists(ext, add_isolated(cond.nested, label))
    raise TypeError(f"not a condition: {cond!r}")


def _with_node(g: Graph, label: str) -> Graph:
    names = None if g.node_names is None else g.node_names + (f"@{label}",)
    return Graph(g.node_labels + (label,), g.edges, names, g.edge_names)


def condition_labels(cond: Condition) -> set[str]:
    if isinstance(cond, Exists):
        return cond.extension.codomain.labels() | condition_labels(cond.nested)
    if isinstance(cond, Not):
        return condition_labels(cond.operand)
    if isinstance(cond, And):
        out: set[str] = set()
        for c in cond.operands:
            out |= condition_labels(c)
        return out
    return set()
