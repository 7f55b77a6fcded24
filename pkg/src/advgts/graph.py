"""Labeled directed multigraphs, injective morphisms and canonical forms.

Node and edge ids are dense integers local to a graph: nodes are
``0..len(node_labels)-1`` and edge ``i`` is ``edges[i] = (src, tgt, label)``.
Optional node/edge names are carried for graphs that come from the model
language; they play no role in matching or canonicalization.
"""
from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass
from functools import lru_cache
from itertools import permutations, product
from typing import Collection, Iterator, Mapping, Optional, Sequence

from .errors import AmbiguousTag, DuplicateTag

TOP = "⊤"
SYS = "sys"
ENV = "env"
MARKINGS = frozenset({TOP, SYS, ENV})

Edge = tuple[int, int, str]


@dataclass(frozen=True)
class Graph:
    node_labels: tuple[str, ...] = ()
    edges: tuple[Edge, ...] = ()
    node_names: Optional[tuple[str, ...]] = None
    edge_names: Optional[tuple[str, ...]] = None

    def __post_init__(self):
        n = len(self.node_labels)
        for s, t, _ in self.edges:
            if not (0 <= s < n and 0 <= t < n):
                raise ValueError(f"edge endpoint out of range in {self.edges}")
        if self.node_names is not None and len(self.node_names) != n:
            raise ValueError("node_names length mismatch")
        if self.edge_names is not None and len(self.edge_names) != len(self.edges):
            raise ValueError("edge_names length mismatch")

    @property
    def num_nodes(self) -> int:
        return len(self.node_labels)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @property
    def size(self) -> int:
        return len(self.node_labels) + len(self.edges)

    def structure(self) -> tuple:
        """Everything but the names."""
        return (self.node_labels, self.edges)

    def same_structure(self, other: "Graph") -> bool:
        return self.structure() == other.structure()

    def labels(self) -> set[str]:
        return set(self.node_labels) | {lab for _, _, lab in self.edges}

    def isolated_nodes(self) -> list[int]:
        touched = {s for s, _, _ in self.edges} | {t for _, t, _ in self.edges}
        return [v for v in range(self.num_nodes) if v not in touched]

    def unnamed(self) -> "Graph":
        return Graph(self.node_labels, self.edges)

    def node_name(self, v: int) -> str:
        return self.node_names[v] if self.node_names else f"n{v}"

    def edge_name(self, e: int) -> str:
        return self.edge_names[e] if self.edge_names else f"e{e}"

    def __repr__(self):
        nodes = ", ".join(f"{i}:{lab}" for i, lab in enumerate(self.node_labels))
        edges = ", ".join(f"{s}-{lab}->{t}" for s, t, lab in self.edges)
        return f"Graph([{nodes}] [{edges}])"


EMPTY = Graph()


def disjoint_union(g: Graph, h: Graph) -> Graph:
    off = g.num_nodes
    names = None
    enames = None
    if g.node_names is not None and h.node_names is not None:
        names = g.node_names + h.node_names
    if g.edge_names is not None and h.edge_names is not None:
        enames = g.edge_names + h.edge_names
    return Graph(
        g.node_labels + h.node_labels,
        g.edges + tuple((s + off, t + off, lab) for s, t, lab in h.edges),
        names,
        enames,
    )


@dataclass(frozen=True)
class Morphism:
    domain: Graph
    codomain: Graph
    node_map: tuple[int, ...]
    edge_map: tuple[int, ...]

    def is_injective(self) -> bool:
        return (len(set(self.node_map)) == len(self.node_map)
                and len(set(self.edge_map)) == len(self.edge_map))

    def is_valid(self) -> bool:
        """Structure- and label-preserving, with total maps into the codomain."""
        d, c = self.domain, self.codomain
        if len(self.node_map) != d.num_nodes or len(self.edge_map) != d.num_edges:
            return False
        for v, w in enumerate(self.node_map):
            if not 0 <= w < c.num_nodes or c.node_labels[w] != d.node_labels[v]:
                return False
        for e, f in enumerate(self.edge_map):
            if not 0 <= f < c.num_edges:
                return False
            s, t, lab = d.edges[e]
            if c.edges[f] != (self.node_map[s], self.node_map[t], lab):
                return False
        return True

    def compose(self, first: "Morphism") -> "Morphism":
        """``self ∘ first``."""
        return Morphism(
            first.domain,
            self.codomain,
            tuple(self.node_map[v] for v in first.node_map),
            tuple(self.edge_map[e] for e in first.edge_map),
        )

    def sort_key(self) -> tuple:
        return (self.node_map, self.edge_map)


def empty_morphism(host: Graph) -> Morphism:
    return Morphism(EMPTY, host, (), ())


def inclusion(sub: Graph, sup: Graph) -> Morphism:
    """Identity-on-ids morphism from a prefix graph ``sub`` into ``sup``."""
    return Morphism(sub, sup, tuple(range(sub.num_nodes)), tuple(range(sub.num_edges)))


# -- matching ---------------------------------------------------------------


def _edge_index(g: Graph) -> dict[tuple[int, int, str], list[int]]:
    idx: dict[tuple[int, int, str], list[int]] = defaultdict(list)
    for i, e in enumerate(g.edges):
        idx[e].append(i)
    return idx


def _node_order(pattern: Graph, fixed: Collection[int]) -> list[int]:
    adj: dict[int, set[int]] = defaultdict(set)
    for s, t, _ in pattern.edges:
        adj[s].add(t)
        adj[t].add(s)
    placed = set(fixed)
    order: list[int] = []
    remaining = [v for v in range(pattern.num_nodes) if v not in placed]
    while remaining:
        nxt = next((v for v in remaining if adj[v] & placed), remaining[0])
        order.append(nxt)
        placed.add(nxt)
        remaining.remove(nxt)
    return order


def extend_morphisms(
    pattern: Graph,
    host: Graph,
    node_fixed: Optional[Mapping[int, int]] = None,
    edge_fixed: Optional[Mapping[int, int]] = None,
) -> list[Morphism]:
    """All injective morphisms ``pattern -> host`` agreeing with the partial maps.

    The result is sorted by (node image, edge image).
    """
    node_fixed = dict(node_fixed or {})
    edge_fixed = dict(edge_fixed or {})
    if len(set(node_fixed.values())) != len(node_fixed):
        return []
    if len(set(edge_fixed.values())) != len(edge_fixed):
        return []
    for v, w in node_fixed.items():
        if not 0 <= w < host.num_nodes or host.node_labels[w] != pattern.node_labels[v]:
            return []

    host_idx = _edge_index(host)
    pat_count = Counter(pattern.edges)
    host_count = {k: len(v) for k, v in host_idx.items()}
    by_label: dict[str, list[int]] = defaultdict(list)
    for w, lab in enumerate(host.node_labels):
        by_label[lab].append(w)

    # pattern edge multiplicities between ordered node pairs, per label
    pair_labels: dict[tuple[int, int], Counter] = defaultdict(Counter)
    for (s, t, lab), k in pat_count.items():
        pair_labels[(s, t)][lab] += k

    def compatible(v: int, w: int, assign: dict[int, int]) -> bool:
        for (s, t), labs in pair_labels.items():
            if s == v and t == v:
                pairs = [(w, w)]
            elif s == v and t in assign:
                pairs = [(w, assign[t])]
            elif t == v and s in assign:
                pairs = [(assign[s], w)]
            else:
                continue
            for lab, k in labs.items():
                if host_count.get((pairs[0][0], pairs[0][1], lab), 0) < k:
                    return False
        return True

    for v, w in node_fixed.items():
        if not compatible(v, w, {u: x for u, x in node_fixed.items() if u != v}):
            return []

    order = _node_order(pattern, node_fixed.keys())
    results: list[Morphism] = []
    assign = dict(node_fixed)
    used = set(node_fixed.values())

    def edges_for(nmap: tuple[int, ...]) -> Iterator[tuple[int, ...]]:
        for e, f in edge_fixed.items():
            s, t, lab = pattern.edges[e]
            if not 0 <= f < host.num_edges or host.edges[f] != (nmap[s], nmap[t], lab):
                return
        taken = set(edge_fixed.values())
        groups: dict[tuple[int, int, str], list[int]] = defaultdict(list)
        for e, (s, t, lab) in enumerate(pattern.edges):
            if e not in edge_fixed:
                groups[(nmap[s], nmap[t], lab)].append(e)
        keys = sorted(groups, key=lambda k: groups[k][0])
        choices = []
        for k in keys:
            avail = [f for f in host_idx.get(k, []) if f not in taken]
            if len(avail) < len(groups[k]):
                return
            choices.append(list(permutations(avail, len(groups[k]))))
        for combo in product(*choices):
            emap = dict(edge_fixed)
            for k, images in zip(keys, combo):
                for e, f in zip(groups[k], images):
                    emap[e] = f
            yield tuple(emap[e] for e in range(pattern.num_edges))

    def backtrack(i: int) -> None:
        if i == len(order):
            nmap = tuple(assign[v] for v in range(pattern.num_nodes))
            for emap in edges_for(nmap):
                results.append(Morphism(pattern, host, nmap, emap))
            return
        v = order[i]
        for w in by_label.get(pattern.node_labels[v], []):
            if w in used or not compatible(v, w, assign):
                continue
            assign[v] = w
            used.add(w)
            backtrack(i + 1)
            del assign[v]
            used.discard(w)

    backtrack(0)
    results.sort(key=Morphism.sort_key)
    return results


def enumerate_injective_morphisms(pattern: Graph, host: Graph) -> list[Morphism]:
    return extend_morphisms(pattern, host)


# -- canonical form ---------------------------------------------------------


def _refine(g: Graph, colors: list[int]) -> list[int]:
    out_adj: list[list[tuple[str, int]]] = [[] for _ in g.node_labels]
    in_adj: list[list[tuple[str, int]]] = [[] for _ in g.node_labels]
    for s, t, lab in g.edges:
        out_adj[s].append((lab, t))
        in_adj[t].append((lab, s))
    n_classes = len(set(colors))
    while True:
        sigs = [
            (
                colors[v],
                tuple(sorted((lab, colors[t]) for lab, t in out_adj[v])),
                tuple(sorted((lab, colors[s]) for lab, s in in_adj[v])),
            )
            for v in range(g.num_nodes)
        ]
        ranks = {sig: r for r, sig in enumerate(sorted(set(sigs)))}
        colors = [ranks[sig] for sig in sigs]
        if len(ranks) == n_classes:
            return colors
        n_classes = len(ranks)


def _swap_is_automorphism(edge_counts: Counter, u: int, v: int) -> bool:
    def sw(x: int) -> int:
        return v if x == u else u if x == v else x

    swapped = Counter({(sw(s), sw(t), lab): k for (s, t, lab), k in edge_counts.items()})
    return swapped == edge_counts


@lru_cache(maxsize=65536)
def canonical_form(g: Graph) -> tuple[Graph, tuple[int, ...]]:
    """Return the canonical representative of ``g`` and the node permutation.

    ``perm[v]`` is the position of node ``v`` of ``g`` in the representative.
    Individualization/refinement with a minimum-encoding search; transpositions
    that are automorphisms of the colored graph are pruned.
    """
    labels_sorted = sorted(set(g.node_labels))
    init = [labels_sorted.index(lab) for lab in g.node_labels]
    edge_counts = Counter(g.edges)
    best: list = [None, None]

    def encode(colors: list[int]) -> tuple:
        pos = colors
        inv = sorted(range(g.num_nodes), key=lambda v: pos[v])
        node_part = tuple(g.node_labels[v] for v in inv)
        edge_part = tuple(sorted((pos[s], pos[t], lab) for s, t, lab in g.edges))
        return (node_part, edge_part)

    def search(colors: list[int]) -> None:
        colors = _refine(g, colors)
        cells: dict[int, list[int]] = defaultdict(list)
        for v, c in enumerate(colors):
            cells[c].append(v)
        target = next((cells[c] for c in sorted(cells) if len(cells[c]) > 1), None)
        if target is None:
            enc = encode(colors)
            if best[0] is None or enc < best[0]:
                best[0] = enc
                best[1] = tuple(colors)
            return
        tried: list[int] = []
        for v in target:
            if any(_swap_is_automorphism(edge_counts, u, v) for u in tried):
                continue
            tried.append(v)
            search([2 * c + (0 if w == v else 1) for w, c in enumerate(colors)])

    if g.num_nodes == 0:
        canon = Graph((), ())
        return canon, ()
    search(init)
    node_part, edge_part = best[0]
    return Graph(node_part, edge_part), best[1]


def canonicalize(g: Graph) -> Graph:
    return canonical_form(g.unnamed())[0]


def canonical_key(g: Graph) -> bytes:
    canon = canonicalize(g)
    return repr((canon.node_labels, canon.edges)).encode("utf-8")


def relabel_nodes(g: Graph, perm: Sequence[int]) -> Graph:
    """Apply a node permutation (old id -> new id); edges keep their order."""
    labels = [""] * g.num_nodes
    for v, p in enumerate(perm):
        labels[p] = g.node_labels[v]
    return Graph(tuple(labels), tuple((perm[s], perm[t], lab) for s, t, lab in g.edges))


def is_isomorphic(g: Graph, h: Graph) -> bool:
    return canonical_key(g) == canonical_key(h)


# -- tag nodes --------------------------------------------------------------


def _tags(g: Graph, namespace: Collection[str]) -> list[int]:
    return [v for v in g.isolated_nodes() if g.node_labels[v] in namespace]


def attach_tag(g: Graph, label: str, namespace: Optional[Collection[str]] = None) -> Graph:
    """Disjoint union of ``g`` and one isolated node labeled ``label``.

    ``namespace`` is the label set within which at most one tag may exist;
    it defaults to the markings for marking labels and to ``{label}`` otherwise.
    """
    if namespace is None:
        namespace = MARKINGS if label in MARKINGS else frozenset({label})
    if label not in namespace:
        raise ValueError(f"tag {label!r} is not in its namespace")
    if _tags(g, namespace):
        raise DuplicateTag(f"graph already carries a tag from {sorted(namespace)}")
    names = None if g.node_names is None else g.node_names + (f"@{label}",)
    return Graph(g.node_labels + (label,), g.edges, names, g.edge_names)


def read_tag(g: Graph, namespace: Collection[str]) -> Optional[str]:
    found = _tags(g, namespace)
    if len(found) > 1:
        raise AmbiguousTag(f"{len(found)} tags from {sorted(namespace)}")
    return g.node_labels[found[0]] if found else None


def strip_tags(g: Graph, namespace: Collection[str]) -> Graph:
    """Remove every isolated node whose label lies in ``namespace``."""
    drop = set(_tags(g, namespace))
    keep = [v for v in range(g.num_nodes) if v not in drop]
    new = {v: i for i, v in enumerate(keep)}
    return Graph(
        tuple(g.node_labels[v] for v in keep),
        tuple((new[s], new[t], lab) for s, t, lab in g.edges),
    )
