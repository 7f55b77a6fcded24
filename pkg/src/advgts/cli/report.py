"""JSON and text renderings of correctness reports."""
from __future__ import annotations

from typing import Optional

from ..correctness import CorrectnessReport, Counterexample
from ..graph import Graph
from .dsl import ModelFile

SCHEMA_VERSION = 1


def graph_json(g: Graph) -> dict:
    return {"nodes": list(g.node_labels), "edges": [[s, t, lab] for s, t, lab in g.edges]}


def graph_text(g: Graph) -> str:
    nodes = " ".join(f"{i}:{lab}" for i, lab in enumerate(g.node_labels))
    edges = " ".join(f"{s}-{lab}->{t}" for s, t, lab in g.edges)
    return f"[{nodes}]" + (f" [{edges}]" if edges else "")


def witness_json(cx: Optional[Counterexample]) -> list[dict]:
    if cx is None:
        return []
    return [
        {
            "rule": step.origin,
            "instance": step.rule,
            "role": step.role,
            "graph": graph_json(step.graph),
            "state": step.automaton_state,
            "marking": step.marking,
        }
        for step in cx.steps
    ]


def report_json(report: CorrectnessReport, model: Optional[ModelFile] = None) -> dict:
    cx = report.counterexample
    return {
        "schema": SCHEMA_VERSION,
        "verdict": report.verdict.status.value,
        "kind": report.kind,
        "k": report.k,
        "method": report.method,
        "states": report.states,
        "complete": report.complete,
        "witness": witness_json(cx),
        "witness_source": cx.source if cx else None,
        "claim": cx.claim if cx else None,
        "violation_at": cx.violation_at if cx else None,
        "loop_start": cx.loop_start if cx else None,
        "agreement": report.agreement,
        "methods": {
            name: {
                "verdict": r.verdict.status.value,
                "states": r.states,
                "complete": r.complete,
                "note": r.verdict.note,
            }
            for name, r in report.methods.items()
        },
        "notes": list(report.notes),
    }


def report_text(report: CorrectnessReport) -> str:
    lines = [f"verdict: {report.verdict.status.value}"]
    kind = report.kind + (f" (k={report.k})" if report.kind in ("k-step", "weak-k-step") else "")
    lines.append(f"kind: {kind}")
    method = report.method
    if report.agreement is not None:
        method += f" (agreement: {'yes' if report.agreement else 'NO'})"
    lines.append(f"method: {method}")
    for name, r in report.methods.items():
        state = "complete" if r.complete else "truncated"
        lines.append(f"  {name}: {r.verdict.status.value}, {r.states} states ({state})"
                     + (f"; {r.verdict.note}" if r.verdict.note else ""))
    cx = report.counterexample
    if cx is not None:
        lines.append(f"counterexample ({cx.source} system, refutes {cx.claim}):")
        for i, step in enumerate(cx.steps):
            mark = " <-" if i == cx.violation_at and cx.claim not in ("LTL formula", "CTL formula") else ""
            loop = " (loop starts)" if cx.loop_start is not None and i == cx.loop_start else ""
            tags = step.automaton_state or ""
            if step.marking:
                tags += f",{step.marking}"
            lines.append(f"  {i:3d} {step.role:<11} {step.origin or '-':<12} <{tags}> "
                         f"{graph_text(step.graph)}{mark}{loop}")
    for note in report.notes:
        lines.append(f"note: {note}")
    return "\n".join(lines) + "\n"
