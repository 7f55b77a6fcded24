"""Double-pushout rule application with application conditions."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .conditions import TRUE, Condition, morphism_satisfies
from .errors import ApplicationConditionViolated, DanglingEdge, MatchInvalid
from .graph import EMPTY, Graph, Morphism, enumerate_injective_morphisms

SYSTEM = "system"
ENVIRONMENT = "environment"
SKIP = "skip"


@dataclass(frozen=True)
class PlainRule:
    """A span ``left <- interface -> right`` of injective morphisms."""

    name: str
    left: Graph
    interface: Graph
    right: Graph
    k_to_l: Morphism
    k_to_r: Morphism

    def __post_init__(self):
        for m, cod in ((self.k_to_l, self.left), (self.k_to_r, self.right)):
            if not (m.is_valid() and m.is_injective()):
                raise ValueError(f"rule {self.name}: span morphism is not an injective morphism")
            if m.domain != self.interface or m.codomain != cod:
                raise ValueError(f"rule {self.name}: span morphism has the wrong ends")

    def deleted_nodes(self) -> list[int]:
        kept = set(self.k_to_l.node_map)
        return [v for v in range(self.left.num_nodes) if v not in kept]

    def deleted_edges(self) -> list[int]:
        kept = set(self.k_to_l.edge_map)
        return [e for e in range(self.left.num_edges) if e not in kept]


@dataclass(frozen=True)
class Rule:
    plain: PlainRule
    ac: Condition = TRUE
    role: str = SYSTEM
    origin: str = ""  # name of the underlying rule for enriched/annotated rules

    @property
    def name(self) -> str:
        return self.plain.name

    @property
    def base_name(self) -> str:
        return self.origin or self.plain.name


@dataclass(frozen=True)
class TransformationStep:
    rule_name: str
    match_index: int
    before: Graph
    after: Graph
    role: str = SYSTEM
    origin: str = field(default="", compare=False)


def _identity(g: Graph) -> Morphism:
    return Morphism(g, g, tuple(range(g.num_nodes)), tuple(range(g.num_edges)))


def make_plain_rule(name: str, left: Graph, right: Graph) -> PlainRule:
    """Span from named graphs: the interface is the name intersection.

    Both graphs must carry node and edge names. Shared nodes must agree on
    label; shared edges on label and (named) endpoints.
    """
    if left.node_names is None or right.node_names is None:
        raise ValueError("make_plain_rule needs named graphs")
    lnames = {n: i for i, n in enumerate(left.node_names)}
    rnames = {n: i for i, n in enumerate(right.node_names)}
    k_nodes = [n for n in left.node_names if n in rnames]
    for n in k_nodes:
        if left.node_labels[lnames[n]] != right.node_labels[rnames[n]]:
            raise ValueError(f"rule {name}: node {n} changes label")
    kidx = {n: i for i, n in enumerate(k_nodes)}
    le = {n: i for i, n in enumerate(left.edge_names or ())}
    re_ = {n: i for i, n in enumerate(right.edge_names or ())}
    k_edges = []
    for n in left.edge_names or ():
        if n not in re_:
            continue
        ls, lt, llab = left.edges[le[n]]
        rs, rt, rlab = right.edges[re_[n]]
        same = (
            llab == rlab
            and left.node_names[ls] == right.node_names[rs]
            and left.node_names[lt] == right.node_names[rt]
        )
        if not same:
            raise ValueError(f"rule {name}: edge {n} differs between left and right")
        k_edges.append(n)
    interface = Graph(
        tuple(left.node_labels[lnames[n]] for n in k_nodes),
        tuple(
            (kidx[left.node_names[left.edges[le[n]][0]]],
             kidx[left.node_names[left.edges[le[n]][1]]],
             left.edges[le[n]][2])
            for n in k_edges
        ),
        tuple(k_nodes),
        tuple(k_edges),
    )
    k_to_l = Morphism(interface, left, tuple(lnames[n] for n in k_nodes), tuple(le[n] for n in k_edges))
    k_to_r = Morphism(interface, right, tuple(rnames[n] for n in k_nodes), tuple(re_[n] for n in k_edges))
    return PlainRule(name, left, interface, right, k_to_l, k_to_r)


SKIP_PLAIN = PlainRule("Skip", EMPTY, EMPTY, EMPTY, _identity(EMPTY), _identity(EMPTY))


def invert(p: PlainRule) -> PlainRule:
    return PlainRule(p.name, p.right, p.interface, p.left, p.k_to_r, p.k_to_l)


def _validate_match(r: Rule, g: Graph, m: Morphism) -> None:
    if not m.domain.same_structure(r.plain.left) or m.codomain != g:
        raise MatchInvalid(f"match of {r.name} has the wrong domain or codomain")
    if not (m.is_valid() and m.is_injective()):
        raise MatchInvalid(f"match of {r.name} is not an injective morphism")


def _dangles(r: Rule, g: Graph, m: Morphism) -> bool:
    doomed = {m.node_map[v] for v in r.plain.deleted_nodes()}
    if not doomed:
        return False
    image = set(m.edge_map)
    return any(
        (s in doomed or t in doomed) and e not in image for e, (s, t, _) in enumerate(g.edges)
    )


def apply_with_comatch(r: Rule, g: Graph, m: Morphism) -> tuple[Graph, Morphism]:
    """Apply ``r`` at ``m``; return the result and the comatch ``R -> H``."""
    _validate_match(r, g, m)
    if not morphism_satisfies(m, r.ac):
        raise ApplicationConditionViolated(f"{r.name} at {m.node_map}")
    if _dangles(r, g, m):
        raise DanglingEdge(f"{r.name} at {m.node_map}")
    return _pushouts(r.plain, g, m)


def apply_at(r: Rule, g: Graph, m: Morphism) -> Graph:
    return apply_with_comatch(r, g, m)[0]


def _pushouts(p: PlainRule, g: Graph, m: Morphism) -> tuple[Graph, Morphism]:
    del_nodes = {m.node_map[v] for v in p.deleted_nodes()}
    del_edges = {m.edge_map[e] for e in p.deleted_edges()}
    # context graph D, renumbered densely in host order
    keep_nodes = [v for v in range(g.num_nodes) if v not in del_nodes]
    d_index = {v: i for i, v in enumerate(keep_nodes)}
    labels = [g.node_labels[v] for v in keep_nodes]
    keep_edges = [e for e in range(g.num_edges) if e not in del_edges]
    edges = [(d_index[g.edges[e][0]], d_index[g.edges[e][1]], g.edges[e][2]) for e in keep_edges]
    e_index = {e: i for i, e in enumerate(keep_edges)}

    # glue R along K
    r_from_k_node = {rv: kv for kv, rv in enumerate(p.k_to_r.node_map)}
    r_from_k_edge = {re_: ke for ke, re_ in enumerate(p.k_to_r.edge_map)}
    node_img = []
    for rv in range(p.right.num_nodes):
        if rv in r_from_k_node:
            lv = p.k_to_l.node_map[r_from_k_node[rv]]
            node_img.append(d_index[m.node_map[lv]])
        else:
            node_img.append(len(labels))
            labels.append(p.right.node_labels[rv])
    edge_img = []
    for re_, (s, t, lab) in enumerate(p.right.edges):
        if re_ in r_from_k_edge:
            le = p.k_to_l.edge_map[r_from_k_edge[re_]]
            edge_img.append(e_index[m.edge_map[le]])
        else:
            edge_img.append(len(edges))
            edges.append((node_img[s], node_img[t], lab))
    h = Graph(tuple(labels), tuple(edges))
    return h, Morphism(p.right, h, tuple(node_img), tuple(edge_img))


def valid_matches(r: Rule, g: Graph) -> list[tuple[int, Morphism]]:
    """Indexed matches of ``r`` in ``g`` at which the rule is applicable.

    Indices refer to positions in ``enumerate_injective_morphisms(L, g)``.
    """
    out = []
    for i, m in enumerate(enumerate_injective_morphisms(r.plain.left, g)):
        if _dangles(r, g, m):
            continue
        if not morphism_satisfies(m, r.ac):
            continue
        out.append((i, m))
    return out


def match_at(r: Rule, g: Graph, index: int) -> Morphism:
    matches = enumerate_injective_morphisms(r.plain.left, g)
    if not 0 <= index < len(matches):
        raise MatchInvalid(f"{r.name} has no match #{index}")
    return matches[index]


def direct_transformations(rules: Iterable[Rule], g: Graph) -> list[TransformationStep]:
    steps = []
    for r in rules:
        for i, m in valid_matches(r, g):
            h, _ = _pushouts(r.plain, g, m)
            steps.append(TransformationStep(r.name, i, g, h, r.role, r.base_name))
    return steps


def is_applicable(r: Rule, g: Graph) -> bool:
    return bool(valid_matches(r, g))


def is_deadlocked(rules: Sequence[Rule], g: Graph) -> bool:
    return not any(is_applicable(r, g) for r in rules)


def find_rule(rules: Iterable[Rule], name: str) -> Optional[Rule]:
    for r in rules:
        if r.name == name:
            return r
    return None
