"""Graphviz rendering of explored state spaces."""
from __future__ import annotations

from typing import Collection, Mapping

from ..conditions import Condition, graph_satisfies
from ..graph import MARKINGS, read_tag
from ..rewrite import ENVIRONMENT, SKIP
from ..statespace import LTS

EDGE_STYLE = {
    ENVIRONMENT: 'style=dashed, color="red"',
    SKIP: 'style=dotted, color="gray"',
}


def _quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def export_dot(lts: LTS, constraints: Mapping[str, Condition] = {},
               q_states: Collection[str] = ()) -> str:
    lines = ["digraph lts {", "  rankdir=LR;", "  node [shape=box, fontname=monospace];"]
    initial = set(lts.initial)
    for i, g in enumerate(lts.states):
        parts = [str(i)]
        q = read_tag(g, q_states) if q_states else None
        mk = read_tag(g, MARKINGS)
        parts += [x for x in (q, mk) if x]
        sat = [n for n, c in constraints.items() if graph_satisfies(g, c)]
        label = " | ".join(parts) + ("\\n" + ", ".join(sat) if sat else "")
        attrs = [f"label={_quote(label)}"]
        if i in initial:
            attrs.append("peripheries=2")
        if not lts.expanded[i]:
            attrs.append('style=dashed')
        lines.append(f"  s{i} [{', '.join(attrs)}];")
    for t in lts.transitions:
        style = EDGE_STYLE.get(t.role, "style=solid")
        lines.append(f"  s{t.src} -> s{t.dst} [label={_quote(t.base_rule)}, {style}];")
    lines.append("}")
    return "\n".join(lines) + "\n"
