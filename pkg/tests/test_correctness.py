from dataclasses import replace
from functools import lru_cache

import pytest

from advgts.cli.dsl import load_model
from advgts.conditions import FALSE, TRUE
from advgts.corpus import random_paths
from advgts.correctness import (
    build_formula, check, check_k_step, check_last_minute,
    check_system_correct, check_via_reduction, check_weak_k_step, replays, witness_refutes,
)
from advgts.graph import Graph
from advgts.regulation import RegulationAutomaton, build_joint, initial_joint
from advgts.rewrite import SYSTEM
from advgts.statespace import ExplorationLimits
from advgts.temporal import formulas as tf
from advgts.temporal.verdict import Status
from conftest import corpus_query, tns_query
from properties import characterization_violations, hierarchy_violations

H, V, U = Status.HOLDS, Status.VIOLATED, Status.UNKNOWN

# frozen after the first run; both methods must agree on each
CAPPED_GOLDEN = [("plain", 0, V), ("k-step", 0, V), ("k-step", 1, H), ("k-step", 2, H),
                 ("last-minute", 0, H)]
TNS_B_GOLDEN = [("weak-k-step", 1, H)] + [("k-step", k, V) for k in range(5)]


@lru_cache(maxsize=None)
def corpus():
    return tuple((p.stem, load_model(p)) for p in random_paths())


@pytest.mark.parametrize("kind,k,expected", CAPPED_GOLDEN)
def test_capped_tns_verdicts(kind, k, expected):
    method = "direct" if kind == "plain" else "both"
    r = check(tns_query(kind, k, method))
    assert r.verdict.status is expected
    assert r.complete
    assert r.agreement in (None, True)


@pytest.mark.parametrize("kind,k,expected", TNS_B_GOLDEN)
def test_tns_b_verdicts(kind, k, expected):
    r = check(tns_query(kind, k, "both", model="tns_b.gts"))
    assert r.verdict.status is expected and r.agreement and r.complete


def test_violations_carry_refuting_witnesses():
    queries = [tns_query(kind, k, "direct" if kind == "plain" else m)
               for kind, k, exp in CAPPED_GOLDEN if exp is V for m in ("direct", "reduction")]
    queries += [tns_query("k-step", k, m, model="tns_b.gts")
                for k in range(3) for m in ("direct", "reduction")]
    for q in queries:
        r = check(q)
        assert r.verdict.violated and witness_refutes(r, q), (q.kind, q.k, q.method)


def test_plain_violation_ends_in_a_blocked_graph(capped):
    q = tns_query("plain")
    cx = check(q).counterexample
    assert cx.steps[0].role == "init" and cx.steps[-1].role == "environment"
    assert "blocked" in {lab for *_, lab in cx.steps[-1].graph.edges}
    assert replays(cx, q.model)


def test_zero_step_witness_stops_right_after_the_environment():
    cx = check(tns_query("k-step", 0)).counterexample
    assert cx.steps[cx.violation_at].role == "environment"
    assert cx.violation_at == len(cx.steps) - 1


# -- formula shapes ---------------------------------------------------------------


def test_zero_step_recovery_collapses_to_the_postcondition():
    phi = build_formula("k-step", TRUE, TRUE, 0)
    ksc = phi.operands[1]
    g = ksc.right.operand.operand
    assert isinstance(g, tf.TImplies) and g.left == tf.E_ATOM and g.right == tf.Atom(TRUE, "d")


def test_k_step_recovery_is_a_disjunction_of_next_powers():
    phi = build_formula("k-step", TRUE, TRUE, 2)
    rec = phi.operands[1].right.operand.operand.right
    assert isinstance(rec, tf.TOr) and len(rec.operands) == 3
    assert rec.operands[2] == tf.Next(tf.Next(tf.Atom(TRUE, "d")))


def test_last_minute_formula_shape():
    gr = build_formula("last-minute", TRUE, TRUE).operands[1]
    body = gr.right.operand
    assert body.left == tf.TAnd((tf.S_ATOM, tf.Next(tf.E_ATOM)))


def test_weak_formula_is_ctl_and_the_others_are_ltl():
    assert tf.is_ctl(build_formula("weak-k-step", TRUE, TRUE, 2))
    for kind in ("k-step", "last-minute"):
        assert tf.is_ltl(build_formula(kind, TRUE, TRUE, 1))
    with pytest.raises(ValueError):
        build_formula("plain", TRUE, TRUE)


# -- query validation and edge cases ------------------------------------------------


def test_invalid_queries_are_rejected():
    with pytest.raises(ValueError):
        tns_query("sometimes")
    with pytest.raises(ValueError):
        tns_query("plain", method="reduction")
    with pytest.raises(ValueError):
        tns_query("k-step", -1)
    with pytest.raises(ValueError):
        replace(tns_query("k-step"), inits=())
    with pytest.raises(ValueError):
        tns_query("k-step", method="guess")


def test_kind_specific_entry_points():
    assert check_k_step(tns_query("k-step", 1)).verdict.holds
    assert check_last_minute(tns_query("last-minute")).verdict.holds
    assert check_weak_k_step(tns_query("weak-k-step", 1, model="tns_b.gts")).verdict.holds
    assert check_via_reduction(tns_query("k-step", 1)).method == "reduction"
    with pytest.raises(ValueError):
        check_k_step(tns_query("last-minute"))


def test_system_rules_alone_are_correct_but_the_joint_system_is_not(capped):
    m = capped.joint_model()
    c = capped.constraint("NoBlocked")
    init = [initial_joint(capped.graph("G0"), m.automaton)]
    system = [r for r in build_joint(m) if r.role == SYSTEM]
    assert check_system_correct(system, c, c, init).holds
    assert check_system_correct(build_joint(m), c, c, init).violated


def test_no_rules_is_vacuously_correct():
    assert check_system_correct([], TRUE, TRUE, [Graph(("a",))]).holds


def test_no_initial_graph_satisfies_the_precondition():
    r = check(replace(tns_query("k-step", 0, "both"), pre=FALSE))
    assert r.verdict.holds and r.agreement
    assert any("vacuously" in n for n in r.notes)


def test_truncation_gives_unknown_not_holds():
    r = check(tns_query("k-step", 1, "both", limits=ExplorationLimits(max_states=2)))
    assert r.verdict.status is U and not r.complete


def test_uncapped_model_is_unknown_or_violated():
    r = check(tns_query("k-step", 1, "both", model="tns.gts", limits=ExplorationLimits(max_states=30)))
    assert r.verdict.status in (U, V)
    assert r.verdict.status is not H


def test_every_report_mentions_the_initial_family():
    assert any("initial graphs" in n for n in check(tns_query("k-step", 1)).notes)


def test_deadlocked_initial_state_makes_the_methods_disagree(capped):
    # with no automaton transition the joint system is stuck at the start;
    # the direct check holds vacuously while the completed run never gets marked
    stuck = RegulationAutomaton("Stuck", ("q0",), "q0", (), ())
    q = replace(tns_query("k-step", 0, "both"), model=capped.joint_model().with_automaton(stuck))
    r = check(q)
    assert r.methods["direct"].verdict.holds
    assert r.methods["reduction"].verdict.violated
    assert r.agreement is False and any("disagree" in n for n in r.notes)


# -- corpus-wide properties -------------------------------------------------------


@pytest.mark.parametrize("name", [p.stem for p in random_paths()])
def test_corpus_methods_agree_and_witnesses_refute(name):
    model = dict(corpus())[name]
    for kind, k in [("k-step", 0), ("k-step", 1), ("k-step", 2), ("last-minute", 0),
                    ("weak-k-step", 0), ("weak-k-step", 1), ("weak-k-step", 2)]:
        q = corpus_query(model, kind, k, "both")
        r = check(q)
        assert r.agreement, (kind, k, r.notes)
        assert r.complete
        if r.verdict.violated:
            for method in ("direct", "reduction"):
                single = check(replace(q, method=method))
                assert witness_refutes(single, q), (kind, k, method)


@pytest.mark.parametrize("name", [p.stem for p in random_paths()])
def test_corpus_hierarchy_and_characterization(name):
    model = dict(corpus())[name]

    def queries_for(kind, k, **extra):
        return corpus_query(model, kind, k, **extra)

    assert hierarchy_violations(queries_for) == []
    assert characterization_violations(queries_for) == []


def test_tns_hierarchy_and_characterization():
    for model in ("tns_capped.gts", "tns_b.gts"):
        def queries_for(kind, k, **extra):
            return tns_query(kind, k, model=model, **extra)

        assert hierarchy_violations(queries_for) == []
        assert characterization_violations(queries_for) == []


def test_corpus_is_not_trivial():
    seen = {check(corpus_query(m, "k-step", 0)).verdict.status for _, m in corpus()}
    assert seen == {H, V}
