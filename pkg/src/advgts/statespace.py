"""Bounded exploration of a rule set into a transition system over isomorphism classes."""
from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, replace
from functools import cached_property
from typing import Collection, Optional, Sequence

from .errors import MissingTag
from .graph import MARKINGS, Graph, canonical_key, canonicalize, read_tag, strip_tags
from .rewrite import SKIP, Rule, TransformationStep, direct_transformations, is_deadlocked

log = logging.getLogger(__name__)

SKIP_RULE = "Skip"


@dataclass(frozen=True)
class ExplorationLimits:
    max_states: int = 20000
    max_depth: int = 10000
    max_graph_size: int = 200

    def __post_init__(self):
        if min(self.max_states, self.max_depth, self.max_graph_size) <= 0:
            raise ValueError("exploration limits must be positive")


@dataclass(frozen=True)
class Transition:
    src: int
    dst: int
    rule: str
    role: str
    match_index: int = -1
    origin: str = ""

    @property
    def base_rule(self) -> str:
        return self.origin or self.rule


@dataclass(frozen=True)
class LTS:
    """Explored transition system.

    ``expanded[i]`` is False when state ``i`` was cut off by a limit; its
    recorded transitions are genuine but possibly not all of them.
    """

    states: tuple[Graph, ...]
    keys: tuple[bytes, ...]
    initial: tuple[int, ...]
    transitions: tuple[Transition, ...]
    complete: bool
    expanded: tuple[bool, ...]
    notes: tuple[str, ...] = ()

    @cached_property
    def out(self) -> tuple[tuple[Transition, ...], ...]:
        buckets: list[list[Transition]] = [[] for _ in self.states]
        for t in self.transitions:
            buckets[t.src].append(t)
        return tuple(tuple(b) for b in buckets)

    @cached_property
    def succ(self) -> tuple[tuple[int, ...], ...]:
        return tuple(tuple(dict.fromkeys(t.dst for t in ts)) for ts in self.out)

    @cached_property
    def pred(self) -> tuple[tuple[int, ...], ...]:
        buckets: list[dict[int, None]] = [{} for _ in self.states]
        for t in self.transitions:
            buckets[t.dst][t.src] = None
        return tuple(tuple(b) for b in buckets)

    def __len__(self) -> int:
        return len(self.states)

    def index_of(self, g: Graph) -> Optional[int]:
        key = canonical_key(g)
        try:
            return self.keys.index(key)
        except ValueError:
            return None

    def transition(self, src: int, dst: int) -> Transition:
        for t in self.out[src]:
            if t.dst == dst:
                return t
        raise KeyError(f"no transition {src} -> {dst}")

    def is_total(self) -> bool:
        return all(self.out[i] for i in range(len(self.states)) if self.expanded[i])


@dataclass(frozen=True)
class Lasso:
    prefix: tuple[int, ...]
    loop: tuple[int, ...]

    def __post_init__(self):
        if not self.loop:
            raise ValueError("lasso loop must be nonempty")

    def states(self) -> tuple[int, ...]:
        """Prefix, loop, and the closing return to the loop head."""
        return self.prefix + self.loop + (self.loop[0],)

    def well_formed(self, lts: LTS) -> bool:
        path = self.states()
        return all(b in lts.succ[a] for a, b in zip(path, path[1:]))


def explore(rules: Sequence[Rule], inits: Sequence[Graph],
            limits: ExplorationLimits = ExplorationLimits()) -> LTS:
    """Breadth-first exploration from the canonicalized initial graphs."""
    states: list[Graph] = []
    keys: list[bytes] = []
    index: dict[bytes, int] = {}
    depth: list[int] = []
    expanded: list[bool] = []
    initial: list[int] = []
    transitions: dict[tuple, Transition] = {}
    notes: list[str] = []
    queue: deque[int] = deque()

    def add(g: Graph, d: int) -> int:
        key = canonical_key(g)
        states.append(canonicalize(g))
        keys.append(key)
        index[key] = len(states) - 1
        depth.append(d)
        expanded.append(True)
        queue.append(len(states) - 1)
        return len(states) - 1

    for g in inits:
        key = canonical_key(g)
        i = index[key] if key in index else add(g, 0)
        if i not in initial:
            initial.append(i)

    complete = True
    while queue:
        i = queue.popleft()
        g = states[i]
        if depth[i] >= limits.max_depth:
            if not is_deadlocked(rules, g):
                expanded[i] = False
                complete = False
                notes.append(f"depth limit {limits.max_depth} reached")
            continue
        for step in direct_transformations(rules, g):
            h = step.after
            if h.size > limits.max_graph_size:
                expanded[i] = False
                complete = False
                notes.append(f"graph size limit {limits.max_graph_size} exceeded")
                continue
            key = canonical_key(h)
            j = index.get(key)
            if j is None:
                if len(states) >= limits.max_states:
                    expanded[i] = False
                    complete = False
                    notes.append(f"state limit {limits.max_states} reached")
                    continue
                j = add(h, depth[i] + 1)
            label = (i, step.rule_name, step.role, j)
            if label not in transitions:
                transitions[label] = Transition(i, j, step.rule_name, step.role,
                                                step.match_index, step.origin)
    if not complete:
        log.info("exploration truncated after %d states", len(states))
    return LTS(tuple(states), tuple(keys), tuple(initial), tuple(transitions.values()),
               complete, tuple(expanded), tuple(dict.fromkeys(notes)))


def complete_lts(lts: LTS) -> LTS:
    """Add a Skip self-loop at every expanded state without successors."""
    extra = tuple(
        Transition(i, i, SKIP_RULE, SKIP)
        for i in range(len(lts.states))
        if lts.expanded[i] and not lts.out[i]
    )
    if not extra:
        return lts
    return replace(lts, transitions=lts.transitions + extra)


@dataclass(frozen=True)
class ProjectedTrace:
    graphs: tuple[Graph, ...]
    rules: tuple[str, ...]
    run: tuple[str, ...]
    markings: tuple[str, ...] = ()


def project_trace(trace: Sequence[TransformationStep], q_states: Collection[str],
                  initial: Optional[Graph] = None) -> ProjectedTrace:
    """Split a joint/annotated trace into Λ-graphs, automaton run and markings."""
    if trace:
        graphs = [trace[0].before] + [s.after for s in trace]
    elif initial is not None:
        graphs = [initial]
    else:
        return ProjectedTrace((), (), ())
    run = []
    marks = []
    annotated = read_tag(graphs[0], MARKINGS) is not None
    for g in graphs:
        q = read_tag(g, q_states)
        if q is None:
            raise MissingTag(f"no automaton state tag in {g!r}")
        run.append(q)
        if annotated:
            mk = read_tag(g, MARKINGS)
            if mk is None:
                raise MissingTag(f"no marking tag in {g!r}")
            marks.append(mk)
    plain = tuple(strip_tags(strip_tags(g, q_states), MARKINGS) for g in graphs)
    return ProjectedTrace(plain, tuple(s.origin or s.rule_name for s in trace),
                          tuple(run), tuple(marks))
