"""Acceptance gate: one PASS/FAIL line per criterion.

The lines are printed as each test finishes (visible with ``-s``) and
repeated in the terminal summary of every run.
"""
from __future__ import annotations

import io
import random
from dataclasses import replace
from functools import lru_cache

from advgts.cli.dsl import load_model, parse_model, print_model
from advgts.cli.main import run
from advgts.corpus import STATE_CAP, bundled_paths, random_paths
from advgts.correctness import check, witness_refutes
from advgts.graph import canonical_key, enumerate_injective_morphisms
from advgts.temporal.ctl import ctl_label, eval_ctl_naive
from advgts.temporal.ltl import eval_ltl_on_lasso, ltl_check, ltl_holds_on_all_lassos
from advgts.temporal.verdict import Status
from conftest import bundled, corpus_query, tns_query
from oracles import (
    all_graphs, brute_canonical, brute_morphisms, enumerable_lts, graph_family, permuted,
    random_ctl, random_lts, random_ltl,
)
from properties import (
    annotation_violations, characterization_violations, hierarchy_violations,
    properization_violations, synchronization_violations,
)

H, V = Status.HOLDS, Status.VIOLATED
RESULTS: dict[int, str] = {}
# every (query, report) with a violation, for the witness check of criterion 7
VIOLATIONS: list = []


def record(n: int, title: str, failures: list[str]) -> None:
    line = f"{'PASS' if not failures else 'FAIL'} criterion {n}: {title}"
    if failures:
        line += f" ({len(failures)} failure(s); first: {failures[0]})"
    RESULTS[n] = line
    print(line)
    assert not failures, "\n".join(failures[:10])


def run_query(q):
    r = check(q)
    if r.verdict.violated:
        VIOLATIONS.append((q, r))
    return r


@lru_cache(maxsize=None)
def corpus():
    return tuple((p.stem, load_model(p)) for p in random_paths())


def golden(query_for, expectations) -> list[str]:
    bad = []
    for kind, k, expected in expectations:
        method = "direct" if kind == "plain" else "both"
        r = run_query(query_for(kind, k, method))
        if r.verdict.status is not expected:
            bad.append(f"{kind} k={k}: {r.verdict.status.value}, expected {expected.value}")
        if not r.complete:
            bad.append(f"{kind} k={k}: state space not complete")
        if r.agreement is False:
            bad.append(f"{kind} k={k}: methods disagree")
    return bad


def test_criterion_1_capped_tns_golden_verdicts():
    expect = [("plain", 0, V), ("k-step", 0, V), ("k-step", 1, H), ("k-step", 2, H),
              ("last-minute", 0, H)]
    record(1, "capped traffic network golden verdicts",
           golden(lambda kind, k, m: tns_query(kind, k, m), expect))


def test_criterion_2_two_track_golden_verdicts():
    expect = [("weak-k-step", 1, H)] + [("k-step", k, V) for k in range(5)]
    record(2, "two-track traffic network golden verdicts",
           golden(lambda kind, k, m: tns_query(kind, k, m, model="tns_b.gts"), expect))


def differential(kinds) -> list[str]:
    bad = []
    if len(corpus()) < 20:
        bad.append(f"only {len(corpus())} randomized models")
    for name, model in corpus():
        for kind, k in kinds:
            r = run_query(corpus_query(model, kind, k, "both"))
            if r.states > STATE_CAP or not r.complete:
                bad.append(f"{name}: state space not finite within {STATE_CAP}")
            if not r.agreement:
                d, t = (r.methods[x].verdict.status.value for x in ("direct", "reduction"))
                bad.append(f"{name} {kind} k={k}: direct {d}, reduction {t}")
    return bad


def test_criterion_3_direct_and_ltl_reduction_agree():
    kinds = [("k-step", 0), ("k-step", 1), ("k-step", 2), ("last-minute", 0)]
    record(3, "direct vs LTL reduction agreement on the randomized corpus", differential(kinds))


def test_criterion_4_direct_and_ctl_reduction_agree():
    kinds = [("weak-k-step", 0), ("weak-k-step", 1), ("weak-k-step", 2)]
    record(4, "direct vs CTL reduction agreement on the randomized corpus", differential(kinds))


def test_criterion_5_semantic_properties_hold_over_the_corpus():
    bad = []
    models = [(n, m) for n, m in corpus()] + [(n, bundled(n)) for n in ("tns_capped.gts", "tns_b.gts")]
    for name, model in models:
        jm = model.joint_model()
        inits = [model.graph(n) for n in model.queries["main"].inits] if "main" in model.queries \
            else [model.graph("G0")]
        for check_name, fn in (("synchronization", synchronization_violations),
                               ("properization", properization_violations),
                               ("annotation", annotation_violations)):
            bad += [f"{name} {check_name}: {v}" for v in fn(jm, inits)]

        if name.startswith("random"):
            def queries_for(kind, k, _m=model, **extra):
                return corpus_query(_m, kind, k, **extra)
        else:
            def queries_for(kind, k, _n=name, **extra):
                return tns_query(kind, k, model=_n, **extra)
        bad += [f"{name} hierarchy: {v}" for v in hierarchy_violations(queries_for)]
        bad += [f"{name} last-minute conditions: {v}" for v in characterization_violations(queries_for)]
    record(5, "trace correspondence, properization, monotonicity, last-minute conditions, "
              "annotation", bad)


def test_criterion_6_engine_oracles():
    bad = []
    # matching: every small pattern against a seeded family of hosts up to 5 nodes
    patterns = list(all_graphs(2, 2, edge_labels=("x", "y")))
    for i, host in enumerate(graph_family(101, 120, max_nodes=5, max_edges=7)):
        for p in patterns:
            got = {(m.node_map, m.edge_map) for m in enumerate_injective_morphisms(p, host)}
            if got != brute_morphisms(p, host):
                bad.append(f"matching: pattern {p!r} in host {host!r}")
    # canonical keys: exhaustive up to 4 nodes and 3 edges, sampled at 5 nodes
    classes: dict[tuple, set] = {}
    small = list(all_graphs(4, 3))
    rng = random.Random(5)
    sampled = [g for g in graph_family(202, 150, max_nodes=5, max_edges=6)]
    sampled += [permuted(g, rng) for g in sampled]
    for g in small + sampled:
        classes.setdefault(brute_canonical(g), set()).add(canonical_key(g))
    if any(len(keys) != 1 for keys in classes.values()):
        bad.append("isomorphic graphs received different keys")
    if len({k for keys in classes.values() for k in keys}) != len(classes):
        bad.append("non-isomorphic graphs share a key")
    # LTL: sparse systems up to 20 states plus denser ones up to 10
    rng = random.Random(303)
    systems = [enumerable_lts(rng, 20, 0.15) for _ in range(100)]
    systems += [enumerable_lts(rng, 10, 0.3) for _ in range(100)]
    for i, lts in enumerate(systems):
        phi = random_ltl(rng, 3)
        v = ltl_check(lts, phi)
        if (v.status is H) != ltl_holds_on_all_lassos(lts, phi, len(lts) + 1):
            bad.append(f"ltl instance {i}: checker says {v.status.value}")
        if v.violated and eval_ltl_on_lasso(v.witness, lts.states, phi):
            bad.append(f"ltl instance {i}: witness does not refute the formula")
    # CTL: 50 instances, every state compared
    rng = random.Random(404)
    for i in range(50):
        lts = random_lts(rng, 20, 0.3)
        theta = random_ctl(rng, 3)
        lower, upper = ctl_label(lts, theta)
        memo: dict = {}
        truth = {s for s in range(len(lts)) if eval_ctl_naive(lts, s, theta, memo)}
        if not lower == upper == truth:
            bad.append(f"ctl instance {i}: labels differ from the naive evaluator")
    record(6, "matching, canonical keys, LTL and CTL against brute-force oracles", bad)


def cli_output(argv) -> str:
    out = io.StringIO()
    run(argv, out, io.StringIO())
    return out.getvalue()


def test_criterion_7_plumbing():
    bad = []
    for path in bundled_paths():
        m = load_model(path)
        text = print_model(m)
        again = parse_model(text)
        if again != m or print_model(again) != text:
            bad.append(f"{path.name}: printing and parsing is not the identity")
    # witnesses of everything checked above, plus the single-method runs
    extra = [tns_query("plain")]
    for _, model in corpus():
        for kind, k in (("k-step", 0), ("k-step", 1), ("last-minute", 0), ("weak-k-step", 1)):
            extra.append(corpus_query(model, kind, k, "direct"))
            extra.append(corpus_query(model, kind, k, "reduction"))
    for q in extra:
        run_query(q)
    if not VIOLATIONS:
        bad.append("no violations were produced to replay")
    for q, r in VIOLATIONS:
        singles = [r] if r.method != "both" else [check(replace(q, method=m)) for m in ("direct", "reduction")]
        for s in singles:
            if s.verdict.violated and not witness_refutes(s, q):
                bad.append(f"{q.kind} k={q.k} {s.method}: witness does not replay or refute")
    runs = [["check", "--model", "tns_capped.gts", "--query", "zero_step", "--format", "json"],
            ["dot", "--model", "tns_b.gts"]]
    runs += [["check", "--model", str(p), "--query", "main", "--format", "json"] for p in random_paths()]
    for argv in runs:
        if cli_output(argv) != cli_output(argv):
            bad.append(f"{' '.join(argv)}: output differs between runs")
    record(7, "round trip, witness replay, deterministic reports", bad)
