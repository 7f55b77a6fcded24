import pytest

from advgts.graph import MARKINGS, TOP, Graph, canonical_key, canonicalize, is_isomorphic
from advgts.regulation import build_annotated, build_joint, initial_annotated, initial_joint
from advgts.rewrite import SKIP, direct_transformations, find_rule, valid_matches
from advgts.statespace import (
    LTS, ExplorationLimits, Transition, complete_lts, explore, project_trace,
)
from oracles import brute_isomorphic, brute_steps

CAPPED_JOINT_STATES = 4
CAPPED_ANNOTATED_STATES = 5


def brute_state_count(rules, init) -> int:
    seen, todo = [init], [init]
    while todo:
        g = todo.pop()
        for _, h in brute_steps(rules, g):
            if not any(brute_isomorphic(h, x) for x in seen):
                seen.append(h)
                todo.append(h)
    return len(seen)


def joint_lts(model, **limits):
    m = model.joint_model()
    return explore(build_joint(m), [initial_joint(model.graph("G0"), m.automaton)],
                   ExplorationLimits(**limits))


def test_no_rules_gives_a_single_state():
    lts = explore([], [Graph(("a",))])
    assert len(lts) == 1 and lts.transitions == () and lts.complete


def test_capped_tns_state_count_matches_brute_force(capped):
    lts = joint_lts(capped)
    assert lts.complete
    m = capped.joint_model()
    assert len(lts) == brute_state_count(build_joint(m), initial_joint(capped.graph("G0"), m.automaton))
    assert len(lts) == CAPPED_JOINT_STATES


def test_capped_tns_annotated_state_count(capped):
    m = capped.joint_model()
    init = initial_annotated(capped.graph("G0"), m.automaton)
    lts = explore(build_annotated(m), [init])
    assert lts.complete
    assert len(lts) == brute_state_count(build_annotated(m), init) == CAPPED_ANNOTATED_STATES


def test_state_bound_truncates(capped):
    lts = joint_lts(capped, max_states=1)
    assert not lts.complete and len(lts) == 1 and not lts.expanded[0]
    assert any("state limit" in n for n in lts.notes)


def test_depth_bound_truncates_the_uncapped_model(tns):
    lts = joint_lts(tns, max_depth=3)
    assert not lts.complete


def test_graph_size_bound(tns):
    lts = joint_lts(tns, max_graph_size=6)
    assert not lts.complete and any("size" in n for n in lts.notes)


def test_limits_must_be_positive():
    with pytest.raises(ValueError):
        ExplorationLimits(max_states=0)


def test_exploration_is_deterministic(tns_b):
    a, b = joint_lts(tns_b), joint_lts(tns_b)
    assert a.states == b.states and a.transitions == b.transitions and a.keys == b.keys


def test_transitions_replay_as_direct_transformations(tns_b):
    rules = build_joint(tns_b.joint_model())
    lts = joint_lts(tns_b)
    for t in lts.transitions:
        rule = find_rule(rules, t.rule)
        g = lts.states[t.src]
        assert any(i == t.match_index for i, _ in valid_matches(rule, g))
        after = [s.after for s in direct_transformations([rule], g) if s.match_index == t.match_index]
        assert is_isomorphic(after[0], lts.states[t.dst])


def test_representatives_are_canonical(tns_b):
    lts = joint_lts(tns_b)
    for g, key in zip(lts.states, lts.keys):
        assert canonicalize(g) == g and canonical_key(g) == key


def test_completion_adds_one_skip_loop_per_deadlock():
    lts = explore([], [Graph(("a",)), Graph(("b",))])
    done = complete_lts(lts)
    assert [(t.src, t.dst, t.role) for t in done.transitions] == [(0, 0, SKIP), (1, 1, SKIP)]
    assert done.is_total()


def test_completion_leaves_truncated_states_alone(capped):
    lts = joint_lts(capped, max_states=1)
    assert complete_lts(lts).transitions == lts.transitions


def test_capped_tns_needs_no_completion(capped):
    lts = joint_lts(capped)
    assert lts.is_total() and complete_lts(lts) is lts


def test_total_lts_is_returned_unchanged():
    lts = LTS((Graph(),), (b"",), (0,), (Transition(0, 0, "r", "system"),), True, (True,))
    assert complete_lts(lts) is lts


def run_rules(rules, g, names):
    trace = []
    for name in names:
        step = next(s for s in direct_transformations(rules, g) if s.origin == name)
        trace.append(step)
        g = step.after
    return trace


def test_project_trace_of_the_tns(capped):
    m = capped.joint_model()
    q = m.automaton.states
    names = ["Ascend", "Ascend", "Block", "Repair"]
    joint = run_rules(build_joint(m), initial_joint(capped.graph("G0"), m.automaton), names)
    p = project_trace(joint, q)
    assert p.run == ("q0", "q0", "q0", "q1", "q0")
    assert p.rules == tuple(names) and p.markings == ()
    assert all(x.labels().isdisjoint(set(q) | MARKINGS) for x in p.graphs)

    annotated = run_rules(build_annotated(m), initial_annotated(capped.graph("G0"), m.automaton), names)
    pa = project_trace(annotated, q)
    assert pa.run == p.run
    assert pa.markings == (TOP, "sys", "sys", "env", "sys")
    assert all(brute_isomorphic(a, b) for a, b in zip(p.graphs, pa.graphs))


def test_project_empty_trace(capped):
    assert project_trace([], ("q0",)) == project_trace([], ("q0",), None)
    p = project_trace([], ("q0",))
    assert p.graphs == () and p.rules == () and p.run == ()
    g0 = initial_joint(capped.graph("G0"), capped.automaton("A"))
    p = project_trace([], ("q0", "q1"), g0)
    assert p.run == ("q0",) and p.rules == ()
