"""The bundled model corpus and the seeded generator for its random part.

Random models keep a fixed set of nodes and only add, delete or relabel
edges.  Every rule that would create an edge is guarded against creating a
second parallel edge with the same label, so the reachable state space is
finite and small.
"""
from __future__ import annotations

import random
from pathlib import Path
from typing import Iterator, Optional

from .cli.dsl import ModelFile, parse_model
from .conditions import graph_satisfies
from .regulation import build_annotated, build_joint, initial_annotated, initial_joint
from .rewrite import is_deadlocked
from .statespace import ExplorationLimits, explore

MODEL_DIR = Path(__file__).resolve().parent / "models"
RANDOM_DIR = MODEL_DIR / "random"
NAMED_MODELS = ("tns.gts", "tns_capped.gts", "tns_b.gts")

NODE_LABELS = ("p", "q", "r")
GOOD_LABELS = ("a", "b")
BAD_LABEL = "x"
STATE_CAP = 500


def bundled_paths(include_infinite: bool = True) -> list[Path]:
    named = [MODEL_DIR / n for n in NAMED_MODELS if include_infinite or n != "tns.gts"]
    return named + sorted(RANDOM_DIR.glob("*.gts"))


def random_paths() -> list[Path]:
    return sorted(RANDOM_DIR.glob("*.gts"))


def _edge_rule(rng: random.Random, name: str, role: str, repair: bool = False,
               ends: Optional[tuple[str, str]] = None) -> str:
    src, dst = ends or (rng.choice(NODE_LABELS), rng.choice(NODE_LABELS))
    nodes = "node u : {0};".format(src) + ("" if src == dst else " node w : {0};".format(dst))
    w = "u" if src == dst else "w"
    if role == "environment":
        op = rng.choice(["add", "relabel", "relabel"])
        old = rng.choice(GOOD_LABELS)
        new = BAD_LABEL
    else:
        op = rng.choice(["delete", "relabel"] if repair else ["add", "delete", "relabel", "relabel"])
        old = BAD_LABEL if repair else rng.choice(GOOD_LABELS + (BAD_LABEL,))
        new = rng.choice([x for x in GOOD_LABELS if x != old])
    if op == "add":
        left = f"{{ {nodes} }}"
        right = f"{{ {nodes} edge f : u -> {w} : {new}; }}"
        guard = f"!exists {{ edge g : u -> {w} : {new}; }}"
    elif op == "delete":
        left = f"{{ {nodes} edge f : u -> {w} : {old}; }}"
        right = f"{{ {nodes} }}"
        guard = ""
    else:
        left = f"{{ {nodes} edge f : u -> {w} : {old}; }}"
        right = f"{{ {nodes} edge f2 : u -> {w} : {new}; }}"
        guard = f"!exists {{ edge g : u -> {w} : {new}; }}"
    when = f"\n  when {guard};" if guard else ""
    return f"rule {name} {role} {{\n  left {left}\n  right {right}{when}\n}}\n"


def _graph(rng: random.Random, name: str, allow_bad: bool) -> str:
    labels = list(NODE_LABELS) + [rng.choice(NODE_LABELS)]
    lines = [f"  node n{i} : {lab};" for i, lab in enumerate(labels)]
    used = set()
    for j in range(rng.randint(1, 4)):
        s, t = rng.randrange(len(labels)), rng.randrange(len(labels))
        lab = rng.choice(GOOD_LABELS + ((BAD_LABEL,) if allow_bad else ()))
        if (s, t, lab) in used:
            continue
        used.add((s, t, lab))
        lines.append(f"  edge e{j} : n{s} -> n{t} : {lab};")
    return f"graph {name} {{\n" + "\n".join(lines) + "\n}\n"


def _no_bad_edge() -> str:
    parts = []
    for src in NODE_LABELS:
        parts.append(f"!exists {{ node u : {src}; edge f : u -> u : {BAD_LABEL}; }}")
        for dst in NODE_LABELS:
            parts.append(f"!exists {{ node u : {src}; node w : {dst}; edge f : u -> w : {BAD_LABEL}; }}")
    return "constraint NoBad :=\n    " + "\n  & ".join(parts) + ";\n"


def random_model_text(seed: int) -> str:
    rng = random.Random(seed)
    system = [f"S{i}" for i in range(rng.randint(2, 4))]
    environment = [f"E{i}" for i in range(rng.randint(1, 2))]
    parts = [f"# random model, seed {seed}\n",
             f"alphabet {', '.join(NODE_LABELS + GOOD_LABELS + (BAD_LABEL,))};\n",
             _graph(rng, "G0", False), _graph(rng, "G1", rng.random() < 0.3),
             _no_bad_edge(),
             "constraint Anything := true;\n"]
    ends = (rng.choice(NODE_LABELS), rng.choice(NODE_LABELS))
    parts += [_edge_rule(rng, n, "system", repair=i == 0, ends=ends if i == 0 else None)
              for i, n in enumerate(system)]
    parts += [_edge_rule(rng, n, "environment", ends=ends if i == 0 else None)
              for i, n in enumerate(environment)]
    rules = system + environment
    if rng.random() < 0.6:
        # attack and repair phases: after an environment step only repairs may run
        lines = ["automaton R {", "  states s0 s1;", "  start s0;",
                 f"  s0 -> s0 [{', '.join(sorted(rng.sample(system, rng.randint(1, len(system)))))}];",
                 f"  s0 -> s1 [{', '.join(environment)}];",
                 f"  s1 -> s0 [{system[0]}];"]
        stay = ([system[0]] if rng.random() < 0.5 else []) + (
            environment if rng.random() < 0.3 else [])
        if stay:
            lines.append(f"  s1 -> s1 [{', '.join(stay)}];")
    else:
        states = [f"s{i}" for i in range(rng.randint(1, 3))]
        lines = ["automaton R {", f"  states {' '.join(states)};", f"  start {states[0]};"]
        for q in states:
            for q2 in states:
                if q == q2 or rng.random() < 0.6:
                    chosen = sorted(rng.sample(rules, rng.randint(1, len(rules))))
                    lines.append(f"  {q} -> {q2} [{', '.join(chosen)}];")
    parts.append("\n".join(lines) + "\n}\n")
    pre = rng.choice(["NoBad", "Anything"])
    parts.append(f"query main {{\n  kind k-step;\n  k 1;\n  pre {pre};\n  post NoBad;\n"
                 f"  init G0, G1;\n  method both;\n}}\n")
    return "\n".join(parts)


def admissible(model: ModelFile, cap: int = STATE_CAP) -> Optional[str]:
    """Why a generated model is unsuitable for the differential corpus, or None.

    Rejected: state spaces above ``cap`` and precondition-satisfying initial
    graphs that are deadlocked in the joint system.  There the direct check
    holds vacuously while the completed run stays top-marked forever, so the
    two methods legitimately disagree and the model says nothing about them.
    """
    jm = model.joint_model()
    a = jm.automaton
    query = model.queries["main"]
    pre = model.constraint(query.pre)
    inits = [model.graph(n) for n in query.inits]
    limits = ExplorationLimits(max_states=cap + 1)
    joint = build_joint(jm)
    for g in inits:
        if graph_satisfies(g, pre) and is_deadlocked(joint, initial_joint(g, a)):
            return "deadlocked initial graph"
    lts = explore(joint, [initial_joint(g, a) for g in inits], limits)
    if not lts.complete or len(lts) > cap:
        return "joint state space too large"
    ann = explore(build_annotated(jm), [initial_annotated(g, a) for g in inits], limits)
    if not ann.complete or len(ann) > cap:
        return "annotated state space too large"
    return None


def generate(count: int = 20, first_seed: int = 1) -> Iterator[tuple[int, str]]:
    seed = first_seed
    made = 0
    while made < count:
        text = random_model_text(seed)
        if admissible(parse_model(text)) is None:
            yield seed, text
            made += 1
        seed += 1


def write_corpus(count: int = 20, directory: Path = RANDOM_DIR) -> list[Path]:
    directory.mkdir(parents=True, exist_ok=True)
    for old in directory.glob("*.gts"):
        old.unlink()
    paths = []
    for i, (seed, text) in enumerate(generate(count)):
        path = directory / f"random_{i:02d}_seed{seed}.gts"
        path.write_text(text, encoding="utf-8")
        paths.append(path)
    return paths


if __name__ == "__main__":
    for p in write_corpus():
        print(p.name)
