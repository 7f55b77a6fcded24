"""Correctness of joint systems under adverse conditions.

Each notion is checked two ways: directly on the explored joint system, and
by reduction to LTL/CTL model checking on the explored annotated system.
All checks quantify over the supplied initial graphs only.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Optional, Sequence

from .conditions import Condition, graph_satisfies
from .graph import ENV as ENV_MARK, MARKINGS, SYS as SYS_MARK, Graph, is_isomorphic, read_tag, strip_tags
from .regulation import JointModel, build_annotated, build_joint, initial_annotated, initial_joint
from .rewrite import (
    ENVIRONMENT, SKIP, SYSTEM, Rule, apply_at, direct_transformations, find_rule, is_deadlocked,
    valid_matches,
)
from .statespace import LTS, ExplorationLimits, Lasso, Transition, complete_lts, explore
from .temporal.ctl import ctl_check
from .temporal.formulas import (
    AG, AW, AX, E_ATOM, EX, S_ATOM, Atom, Formula, Globally, Next, TAnd, TImplies, WeakUntil,
    disj, nest,
)
from .temporal.ltl import eval_ltl_on_lasso, ltl_check
from .temporal.verdict import Path, Verdict, combine, holds, unknown, violated

PLAIN = "plain"
K_STEP = "k-step"
LAST_MINUTE = "last-minute"
WEAK_K_STEP = "weak-k-step"
KINDS = (PLAIN, K_STEP, LAST_MINUTE, WEAK_K_STEP)
METHODS = ("direct", "reduction", "both")

INIT_FAMILY_NOTE = ("verdict quantifies over the supplied initial graphs only, "
                    "not over every graph satisfying the precondition")


@dataclass(frozen=True)
class CorrectnessQuery:
    model: JointModel
    pre: Condition
    post: Condition
    kind: str
    inits: tuple[Graph, ...]
    k: int = 0
    limits: ExplorationLimits = ExplorationLimits()
    method: str = "direct"
    # last-minute only: check the simpler condition (R') instead of (R)
    last_minute_simple: bool = True
    pre_name: str = "c"
    post_name: str = "d"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown correctness kind {self.kind!r}")
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        if self.k < 0:
            raise ValueError("k must be non-negative")
        if self.kind == PLAIN and self.method != "direct":
            raise ValueError("plain correctness has no temporal reduction; use method=direct")
        if not self.inits:
            raise ValueError("at least one initial graph is required")


@dataclass(frozen=True)
class TraceStep:
    """One state of a decoded counterexample and the rule that produced it."""

    rule: str  # rule instance name; empty for the first state
    origin: str
    role: str  # system, environment, skip, or "init"
    state: Graph  # full state graph including tags
    graph: Graph  # the object graph with tags removed
    automaton_state: Optional[str]
    marking: Optional[str]


@dataclass(frozen=True)
class Counterexample:
    source: str  # "system", "joint" or "annotated"
    claim: str  # which condition the trace refutes
    steps: tuple[TraceStep, ...]
    violation_at: int
    loop_start: Optional[int] = None


@dataclass(frozen=True)
class MethodResult:
    verdict: Verdict
    states: int
    complete: bool
    counterexample: Optional[Counterexample] = None


@dataclass(frozen=True)
class CorrectnessReport:
    kind: str
    k: int
    method: str
    verdict: Verdict
    methods: dict[str, MethodResult]
    counterexample: Optional[Counterexample]
    agreement: Optional[bool]
    states: int
    complete: bool
    notes: tuple[str, ...] = field(default_factory=tuple)


# -- LTS path helpers --------------------------------------------------------


def _bfs(lts: LTS, roots: Iterable[int], allow: Callable[[Transition], bool] = lambda t: True):
    parent: dict[int, Optional[Transition]] = {}
    queue = deque()
    for r in roots:
        if r not in parent:
            parent[r] = None
            queue.append(r)
    while queue:
        s = queue.popleft()
        for t in lts.out[s]:
            if t.dst not in parent and allow(t):
                parent[t.dst] = t
                queue.append(t.dst)
    return parent


def _path_to(parent, s: int) -> list[Transition]:
    path = []
    while parent[s] is not None:
        t = parent[s]
        path.append(t)
        s = t.src
    return path[::-1]


def _sat_table(lts: LTS, cond: Condition) -> list[bool]:
    return [graph_satisfies(g, cond) for g in lts.states]


def _states_of(start: int, transitions: Sequence[Transition]) -> list[int]:
    return [start] + [t.dst for t in transitions]


def _decode(lts: LTS, start: int, transitions: Sequence[Transition], q_states,
            source: str, claim: str, violation_at: int,
            loop_start: Optional[int] = None) -> Counterexample:
    steps = []
    for i, s in enumerate(_states_of(start, transitions)):
        g = lts.states[s]
        t = transitions[i - 1] if i else None
        steps.append(TraceStep(
            rule=t.rule if t else "",
            origin=t.base_rule if t else "",
            role=t.role if t else "init",
            state=g,
            graph=strip_tags(strip_tags(g, q_states), MARKINGS),
            automaton_state=read_tag(g, q_states),
            marking=read_tag(g, MARKINGS),
        ))
    return Counterexample(source, claim, tuple(steps), violation_at, loop_start)


def _pre_inits(q: CorrectnessQuery) -> list[Graph]:
    return [g for g in q.inits if graph_satisfies(g, q.pre)]


# -- system correctness -----------------------------------------------------


def _system_correct(rules: Sequence[Rule], c: Condition, d: Condition, inits: Sequence[Graph],
                    limits: ExplorationLimits):
    lts = explore(rules, [g for g in inits if graph_satisfies(g, c)], limits)
    ok = _sat_table(lts, d)
    parent = _bfs(lts, lts.initial)
    for t in sorted(lts.transitions, key=lambda t: (len(_path_to(parent, t.src)), t.src, t.dst)):
        if not ok[t.dst]:
            path = _path_to(parent, t.src) + [t]
            start = path[0].src
            return violated(Path(tuple(_states_of(start, path))),
                            f"state {t.dst} is derived and violates the postcondition"), lts, (start, path)
    if not lts.complete:
        return unknown("no violation in the explored region; " + "; ".join(lts.notes)), lts, None
    return holds(), lts, None


def check_system_correct(rules: Sequence[Rule], c: Condition, d: Condition,
                         inits: Sequence[Graph],
                         limits: ExplorationLimits = ExplorationLimits()) -> Verdict:
    """Every graph derived in at least one step from a ``c``-graph satisfies ``d``."""
    return _system_correct(rules, c, d, inits, limits)[0]


# -- direct recovery checks on the joint system -----------------------------


class _JointSpace:
    def __init__(self, q: CorrectnessQuery):
        a = q.model.automaton
        self.q_states = frozenset(a.states)
        self.rules = build_joint(q.model)
        inits = [initial_joint(g, a) for g in _pre_inits(q)]
        self.lts = complete_lts(explore(self.rules, inits, q.limits))
        self.d = _sat_table(self.lts, q.post)
        self.reach = _bfs(self.lts, self.lts.initial)
        # (H -> M) environment steps out of reachable states
        self.env_steps = [t for t in self.lts.transitions
                          if t.role == ENVIRONMENT and t.src in self.reach]
        self.open = {i for i, e in enumerate(self.lts.expanded) if not e}

    def decode(self, transitions, claim, violation_at) -> Counterexample:
        start = transitions[0].src if transitions else self.lts.initial[0]
        return _decode(self.lts, start, transitions, self.q_states, "joint", claim, violation_at)

    def status_if_clean(self, what: str) -> Verdict:
        if not self.lts.complete:
            return unknown(f"no {what} violation in the explored region; " + "; ".join(self.lts.notes))
        return holds()


def _recovery_k(space: _JointSpace, k: int):
    """(R^k): no path of k steps after an environment step avoids the postcondition."""
    lts, d = space.lts, space.d
    # avoid[j][s]: some path s = s_0 .. s_j with every s_i violating d
    avoid = [[not x for x in d]]
    for _ in range(k):
        prev = avoid[-1]
        avoid.append([not d[s] and any(prev[t] for t in lts.succ[s]) for s in range(len(lts))])
    for env in space.env_steps:
        m = env.dst
        if avoid[k][m]:
            path = _path_to(space.reach, env.src) + [env]
            cur = m
            for j in range(k, 0, -1):
                t = next(t for t in lts.out[cur] if avoid[j - 1][t.dst])
                path.append(t)
                cur = t.dst
            at = len(path) - k
            cx = space.decode(path, f"recovery within {k} step(s)", at)
            return violated(Path(tuple(_states_of(path[0].src, path))),
                            f"after the environment step into state {m}, a {k}-step "
                            "continuation never satisfies the postcondition"), cx
    return space.status_if_clean("recovery"), None


def _recovery_last_minute(space: _JointSpace, simple: bool):
    """(R') when ``simple``, else the original (R)."""
    lts, d = space.lts, space.d
    if simple:
        candidates = [(t, _path_to(space.reach, t.src) + [t]) for t in lts.transitions
                      if t.role == SYSTEM and t.src in space.reach]
    else:
        # states entered by a system step on a system-only run after an environment step
        parent: dict[int, Optional[Transition]] = {}
        queue = deque()
        for env in space.env_steps:
            if env.dst not in parent:
                parent[env.dst] = None
                queue.append(env.dst)
        entered: dict[int, Transition] = {}
        while queue:
            s = queue.popleft()
            for t in lts.out[s]:
                if t.role == SYSTEM and t.dst not in entered:
                    entered[t.dst] = t
                    parent.setdefault(t.dst, t)
                    queue.append(t.dst)
        candidates = []
        for h in sorted(entered):
            segment = _path_to(parent, entered[h].src) + [entered[h]]
            env = next(e for e in space.env_steps if e.dst == segment[0].src)
            candidates.append((entered[h], _path_to(space.reach, env.src) + [env] + segment))
    for t, path in candidates:
        h = t.dst
        if d[h]:
            continue
        env_out = [e for e in lts.out[h] if e.role == ENVIRONMENT]
        if not env_out:
            continue
        path = path + [env_out[0]]
        cx = space.decode(path, "postcondition before the next environment step", len(path) - 1)
        return violated(Path(tuple(_states_of(path[0].src, path))),
                        f"state {h} precedes an environment step and violates the postcondition"), cx
    return space.status_if_clean("last-minute"), None


def _recovery_weak(space: _JointSpace, k: int):
    """(R^k_w): some state within k steps after each environment step satisfies d."""
    lts, d = space.lts, space.d
    # maybe[j][s]: a d-state may be reachable within j steps (open states are optimistic)
    maybe = [list(d)]
    for _ in range(k):
        prev = maybe[-1]
        maybe.append([d[s] or s in space.open or any(prev[t] for t in lts.succ[s])
                      for s in range(len(lts))])
    for env in space.env_steps:
        if not maybe[k][env.dst]:
            path = _path_to(space.reach, env.src) + [env]
            cx = space.decode(path, f"weak recovery within {k} step(s)", len(path))
            return violated(Path(tuple(_states_of(path[0].src, path))),
                            f"no state within {k} step(s) of state {env.dst} satisfies the postcondition"), cx
    return space.status_if_clean("weak recovery"), None


def _direct(q: CorrectnessQuery) -> MethodResult:
    a = q.model.automaton
    q_states = frozenset(a.states)
    if q.kind == PLAIN:
        inits = [initial_joint(g, a) for g in q.inits]
        v, lts, raw = _system_correct(build_joint(q.model), q.pre, q.post, inits, q.limits)
        cx = None
        if raw:
            start, path = raw
            cx = _decode(lts, start, path, q_states, "joint", "system correctness", len(path))
        return MethodResult(v, len(lts), lts.complete, cx)

    system_rules = [r for r in build_joint(q.model) if r.role == SYSTEM]
    inits = [initial_joint(g, a) for g in q.inits]
    s_verdict, s_lts, raw = _system_correct(system_rules, q.pre, q.post, inits, q.limits)
    if raw:
        start, path = raw
        cx = _decode(s_lts, start, path, q_states, "system", "system correctness", len(path))
        return MethodResult(s_verdict, len(s_lts), s_lts.complete, cx)

    space = _JointSpace(q)
    if q.kind == K_STEP:
        r_verdict, cx = _recovery_k(space, q.k)
    elif q.kind == LAST_MINUTE:
        r_verdict, cx = _recovery_last_minute(space, q.last_minute_simple)
    else:
        r_verdict, cx = _recovery_weak(space, q.k)
    verdict = combine(s_verdict, r_verdict)
    return MethodResult(verdict, len(space.lts), s_lts.complete and space.lts.complete, cx)


# -- reduction to temporal logic -----------------------------------------------


def build_formula(kind: str, c: Condition, d: Condition, k: int = 0,
                  names: tuple[str, str] = ("c", "d")) -> Formula:
    pre, post = Atom(c, names[0]), Atom(d, names[1])
    if kind == K_STEP:
        pcs = TImplies(pre, Next(WeakUntil(TAnd((S_ATOM, post)), E_ATOM)))
        recovery = disj(*[nest(Next, post, j) for j in range(k + 1)])
        ksc = TImplies(pre, Next(Globally(TImplies(E_ATOM, recovery))))
        return TAnd((pcs, ksc))
    if kind == LAST_MINUTE:
        pcs = TImplies(pre, Next(WeakUntil(TAnd((S_ATOM, post)), E_ATOM)))
        gr = TImplies(pre, Globally(TImplies(TAnd((S_ATOM, Next(E_ATOM))), post)))
        return TAnd((pcs, gr))
    if kind == WEAK_K_STEP:
        pcs = TImplies(pre, AX(AW(TAnd((S_ATOM, post)), E_ATOM)))
        recovery = disj(*[nest(EX, post, j) for j in range(k + 1)])
        kwc = TImplies(pre, AX(AG(TImplies(E_ATOM, recovery))))
        return TAnd((pcs, kwc))
    raise ValueError(f"no temporal formula for kind {kind!r}")


def annotated_lts(q: CorrectnessQuery) -> LTS:
    a = q.model.automaton
    inits = [initial_annotated(g, a) for g in _pre_inits(q)]
    return complete_lts(explore(build_annotated(q.model), inits, q.limits))


def _reduction(q: CorrectnessQuery) -> MethodResult:
    phi = build_formula(q.kind, q.pre, q.post, q.k, (q.pre_name, q.post_name))
    lts = annotated_lts(q)
    q_states = frozenset(q.model.automaton.states)
    verdict = (ctl_check if q.kind == WEAK_K_STEP else ltl_check)(lts, phi)
    cx = None
    w = verdict.witness
    if isinstance(w, Lasso):
        states = w.states()
        path = [lts.transition(a, b) for a, b in zip(states, states[1:])]
        cx = _decode(lts, states[0], path, q_states, "annotated", "LTL formula", 0,
                     loop_start=len(w.prefix))
    elif isinstance(w, Path):
        path = [lts.transition(a, b) for a, b in zip(w.states, w.states[1:])]
        cx = _decode(lts, w.states[0], path, q_states, "annotated", "CTL formula", 0)
    return MethodResult(verdict, len(lts), lts.complete, cx)


def check_via_reduction(q: CorrectnessQuery) -> CorrectnessReport:
    return check(replace(q, method="reduction"))


def check_k_step(q: CorrectnessQuery) -> CorrectnessReport:
    if q.kind != K_STEP:
        raise ValueError("check_k_step needs kind k-step")
    return check(q)


def check_last_minute(q: CorrectnessQuery) -> CorrectnessReport:
    if q.kind != LAST_MINUTE:
        raise ValueError("check_last_minute needs kind last-minute")
    return check(q)


def check_weak_k_step(q: CorrectnessQuery) -> CorrectnessReport:
    if q.kind != WEAK_K_STEP:
        raise ValueError("check_weak_k_step needs kind weak-k-step")
    return check(q)


def check(q: CorrectnessQuery) -> CorrectnessReport:
    """Run the query's method(s) and assemble a report."""
    results: dict[str, MethodResult] = {}
    if q.method in ("direct", "both"):
        results["direct"] = _direct(q)
    if q.method in ("reduction", "both"):
        results["reduction"] = _reduction(q)
    notes = [INIT_FAMILY_NOTE]
    if not _pre_inits(q):
        notes.append("no initial graph satisfies the precondition; the claim holds vacuously")
    agreement = None
    if q.method == "both":
        a, b = results["direct"].verdict.status, results["reduction"].verdict.status
        agreement = a == b
        if not agreement:
            notes.append(f"methods disagree: direct {a.value}, reduction {b.value}")
    verdict = combine(*(r.verdict for r in results.values()))
    primary = next(iter(results.values()))
    cx = next((r.counterexample for r in results.values() if r.verdict.violated), None)
    return CorrectnessReport(
        kind=q.kind, k=q.k, method=q.method, verdict=verdict, methods=results,
        counterexample=cx, agreement=agreement, states=primary.states,
        complete=all(r.complete for r in results.values()), notes=tuple(notes),
    )


# -- witness replay ------------------------------------------------------------


def rules_for(source: str, model: JointModel) -> list[Rule]:
    if source == "annotated":
        return build_annotated(model)
    joint = build_joint(model)
    return [r for r in joint if r.role == SYSTEM] if source == "system" else joint


def replays(cx: Counterexample, model: JointModel) -> bool:
    """Each step of the trace is reproduced by applying its rule in the engine."""
    rules = rules_for(cx.source, model)
    for before, after in zip(cx.steps, cx.steps[1:]):
        if after.role == SKIP:
            if not (is_deadlocked(rules, before.state) and is_isomorphic(before.state, after.state)):
                return False
            continue
        rule = find_rule(rules, after.rule)
        if rule is None or rule.role != after.role:
            return False
        if not any(is_isomorphic(apply_at(rule, before.state, m), after.state)
                   for _, m in valid_matches(rule, before.state)):
            return False
    return True


def _reachable_within(rules: Sequence[Rule], g: Graph, k: int) -> list[Graph]:
    layer, seen = [g], [g]
    for _ in range(k):
        nxt = []
        for h in layer:
            for step in direct_transformations(rules, h):
                if not any(is_isomorphic(step.after, x) for x in seen):
                    seen.append(step.after)
                    nxt.append(step.after)
        layer = nxt
    return seen


def witness_refutes(report: CorrectnessReport, query: CorrectnessQuery) -> bool:
    """The counterexample replays and visibly breaks the condition it names."""
    cx = report.counterexample
    if cx is None or not replays(cx, query.model):
        return False
    steps = cx.steps
    if not graph_satisfies(steps[0].state, query.pre):
        return False
    d = [graph_satisfies(s.state, query.post) for s in steps]
    i = cx.violation_at
    if cx.claim == "LTL formula":
        phi = build_formula(query.kind, query.pre, query.post, query.k)
        graphs = [s.state for s in steps[:-1]]
        lasso = Lasso(tuple(range(cx.loop_start)), tuple(range(cx.loop_start, len(graphs))))
        return not eval_ltl_on_lasso(lasso, graphs, phi)
    if cx.claim == "CTL formula":
        # either a run leaves (s and d) before any environment step, or it
        # reaches an environment-marked state with no d-state within k steps
        last = steps[-1]
        if len(steps) > 1 and all(s.marking != ENV_MARK for s in steps[1:]):
            if not (last.marking == SYS_MARK and d[-1]):
                return True
        if last.marking == ENV_MARK:
            reach = _reachable_within(rules_for("annotated", query.model), last.state, query.k)
            return not any(graph_satisfies(h, query.post) for h in reach)
        return False
    if cx.source == "system" or cx.claim == "system correctness":
        roles = {s.role for s in steps[1:]}
        return not d[-1] and (cx.source != "system" or roles <= {SYSTEM})
    if cx.claim.startswith("recovery within"):
        return steps[i].role == ENVIRONMENT and not any(d[i:]) and len(steps) - i == query.k + 1
    if cx.claim.startswith("weak recovery"):
        m = steps[-1]
        rules = build_joint(query.model)
        return m.role == ENVIRONMENT and not any(
            graph_satisfies(h, query.post) for h in _reachable_within(rules, m.state, query.k))
    if cx.claim.startswith("postcondition before"):
        return (steps[-1].role == ENVIRONMENT and steps[-2].role == SYSTEM and not d[-2])
    return False
