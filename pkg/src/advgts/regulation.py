"""Regulation automata and the joint / annotated joint rule sets they induce."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .conditions import add_isolated
from .errors import UnknownRuleName
from .graph import ENV, MARKINGS, SYS, TOP, Morphism, attach_tag
from .rewrite import ENVIRONMENT, SYSTEM, PlainRule, Rule

MARKING_ORDER = (TOP, SYS, ENV)
ROLE_MARKING = {SYSTEM: SYS, ENVIRONMENT: ENV}


@dataclass(frozen=True)
class RegulationAutomaton:
    """``select[i]`` is the rule-name set of transition ``delta[i]``."""

    name: str
    states: tuple[str, ...]
    start: str
    delta: tuple[tuple[str, str], ...]
    select: tuple[frozenset[str], ...]

    def __post_init__(self):
        if self.start not in self.states:
            raise ValueError(f"start state {self.start!r} not among the states")
        if len(self.delta) != len(self.select):
            raise ValueError("select must be total on delta")
        if len(set(self.delta)) != len(self.delta):
            raise ValueError("duplicate transition in delta")
        for q, q2 in self.delta:
            if q not in self.states or q2 not in self.states:
                raise ValueError(f"transition {q}->{q2} leaves the state set")

    @classmethod
    def build(cls, name: str, states: Sequence[str], start: str,
              transitions: Mapping[tuple[str, str], Iterable[str]]) -> "RegulationAutomaton":
        delta = tuple(transitions)
        return cls(name, tuple(states), start, delta,
                   tuple(frozenset(transitions[t]) for t in delta))

    def selection(self, q: str, q2: str) -> frozenset[str]:
        return self.select[self.delta.index((q, q2))]

    def transitions(self) -> list[tuple[str, str, frozenset[str]]]:
        return [(q, q2, sel) for (q, q2), sel in zip(self.delta, self.select)]


def _reachable(start: str, edges: Iterable[tuple[str, str]]) -> set[str]:
    succ: dict[str, list[str]] = {}
    for q, q2 in edges:
        succ.setdefault(q, []).append(q2)
    seen = {start}
    todo = deque([start])
    while todo:
        q = todo.popleft()
        for q2 in succ.get(q, []):
            if q2 not in seen:
                seen.add(q2)
                todo.append(q2)
    return seen


def is_proper(a: RegulationAutomaton) -> bool:
    if any(not sel for sel in a.select):
        return False
    # delta^+(q0) must cover Q \ {q0}
    plus = set()
    for q, q2 in a.delta:
        if q == a.start:
            plus |= _reachable(q2, a.delta)
    return set(a.states) - {a.start} <= plus


def properize(a: RegulationAutomaton) -> RegulationAutomaton:
    live = [(t, sel) for t, sel in zip(a.delta, a.select) if sel]
    keep = _reachable(a.start, [t for t, _ in live])
    states = tuple(q for q in a.states if q in keep)
    kept = [(t, sel) for t, sel in live if t[0] in keep and t[1] in keep]
    return RegulationAutomaton(a.name, states, a.start,
                               tuple(t for t, _ in kept), tuple(sel for _, sel in kept))


@dataclass(frozen=True)
class JointModel:
    system: tuple[Rule, ...]
    environment: tuple[Rule, ...]
    automaton: RegulationAutomaton

    def __post_init__(self):
        s_names = [r.name for r in self.system]
        e_names = [r.name for r in self.environment]
        if set(s_names) & set(e_names):
            raise ValueError(f"system and environment share rule names {set(s_names) & set(e_names)}")
        if len(set(s_names + e_names)) != len(s_names) + len(e_names):
            raise ValueError("duplicate rule names")
        known = set(s_names) | set(e_names)
        for sel in self.automaton.select:
            for n in sel:
                if n not in known:
                    raise UnknownRuleName(f"automaton {self.automaton.name} selects unknown rule {n!r}")

    @property
    def rules(self) -> tuple[Rule, ...]:
        return self.system + self.environment

    def rule(self, name: str) -> Rule:
        for r in self.rules:
            if r.name == name:
                return r
        raise UnknownRuleName(f"unknown rule {name!r}")

    def marking(self, name: str) -> str:
        return SYS if any(r.name == name for r in self.system) else ENV

    def with_automaton(self, a: RegulationAutomaton) -> "JointModel":
        return JointModel(self.system, self.environment, a)


def _tagged(p: PlainRule, name: str, pre: str, post: str, namespace) -> PlainRule:
    left = attach_tag(p.left, pre, namespace)
    right = attach_tag(p.right, post, namespace)
    k = p.interface
    return PlainRule(
        name, left, k, right,
        Morphism(k, left, p.k_to_l.node_map, p.k_to_l.edge_map),
        Morphism(k, right, p.k_to_r.node_map, p.k_to_r.edge_map),
    )


def enriched_name(rule: str, q: str, q2: str) -> str:
    return f"{rule}[{q}->{q2}]"


def _enrich(m: JointModel, properize_first: bool = True) -> list[tuple[Rule, str, str]]:
    a = properize(m.automaton) if properize_first else m.automaton
    q_space = frozenset(m.automaton.states)
    out = []
    for r in m.rules:
        for q, q2, sel in a.transitions():
            if r.name not in sel:
                continue
            plain = _tagged(r.plain, enriched_name(r.name, q, q2), q, q2, q_space)
            out.append((Rule(plain, add_isolated(r.ac, q), r.role, r.name), q, q2))
    return out


def build_joint(m: JointModel, properize_first: bool = True) -> list[Rule]:
    """Enriched rules ``<<L,q> => <R,q'>, ac>`` for every selected transition.

    The automaton is properized first unless told otherwise (which only
    matters for comparing the two); rule order follows rule declaration
    order (system before environment), then transition order.
    """
    return [r for r, _, _ in _enrich(m, properize_first)]


def _q_pre(a: RegulationAutomaton, rule: str) -> set[str]:
    return {q for q, _, sel in a.transitions() if rule in sel}


def _q_post(a: RegulationAutomaton, rule: str) -> set[str]:
    return {q2 for _, q2, sel in a.transitions() if rule in sel}


def premarkings(rule: str, m: JointModel) -> list[str]:
    m.rule(rule)
    a = m.automaton
    pre = _q_pre(a, rule)
    marks = set()
    for q in pre:
        for r2 in m.rules:
            if q in _q_post(a, r2.name):
                marks.add(m.marking(r2.name))
    if a.start in pre:
        marks.add(TOP)
    return [x for x in MARKING_ORDER if x in marks]


def build_annotated(m: JointModel) -> list[Rule]:
    """Marked rules ``<<L,q,mk> => <R,q',mk'>, ac>`` for each premarking ``mk``."""
    proper = m.with_automaton(properize(m.automaton))
    out = []
    for r, q, q2 in _enrich(m):
        target = ROLE_MARKING[r.role]
        for mk in premarkings(r.origin, proper):
            name = f"{r.origin}[{q}->{q2},{mk}]"
            plain = _tagged(r.plain, name, mk, target, MARKINGS)
            out.append(Rule(plain, add_isolated(r.ac, mk), r.role, r.origin))
    return out


def initial_joint(g, a: RegulationAutomaton):
    return attach_tag(g, a.start, frozenset(a.states))


def initial_annotated(g, a: RegulationAutomaton):
    return attach_tag(initial_joint(g, a), TOP, MARKINGS)
