"""Command-line entry point: ``advgts check|explore|simulate|dot``."""
from __future__ import annotations

import argparse
import json
import random
import sys
from pathlib import Path as FilePath
from typing import Optional, Sequence, TextIO

from ..correctness import KINDS, METHODS, CorrectnessQuery, CorrectnessReport, check
from ..errors import GTSError, ParseError, ResolutionError
from ..regulation import build_annotated, build_joint, initial_annotated, initial_joint
from ..statespace import ExplorationLimits, complete_lts, explore
from ..temporal.ctl import ctl_check
from ..temporal.ltl import ltl_check
from ..temporal.verdict import Status
from .dot import export_dot
from .dsl import ModelFile, load_model
from .report import graph_json, report_json, report_text

EXIT = {Status.HOLDS: 0, Status.VIOLATED: 1, Status.UNKNOWN: 2}
EXIT_USAGE = 64
EXIT_DATA = 65

MODEL_DIR = FilePath(__file__).resolve().parent.parent / "models"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--model", required=True, help="model file, or the name of a bundled model")
    p.add_argument("--automaton", default="", help="regulation automaton (default: first declared)")
    p.add_argument("--init", action="append", default=[],
                   help="initial graph name; repeat or comma-separate for several")
    p.add_argument("--max-states", type=int, default=ExplorationLimits.max_states)
    p.add_argument("--max-depth", type=int, default=ExplorationLimits.max_depth)
    p.add_argument("--max-size", type=int, default=ExplorationLimits.max_graph_size)
    p.add_argument("--format", choices=("text", "json"), default="text")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="advgts", description="Correctness checks for graph transformation "
                     "systems interacting with an adverse environment.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    c = sub.add_parser("check", help="decide a correctness notion or a temporal formula")
    _common(c)
    c.add_argument("--query", help="run a query declared in the model file")
    c.add_argument("--kind", choices=KINDS)
    c.add_argument("--k", type=int, default=None)
    c.add_argument("--pre", help="precondition constraint name")
    c.add_argument("--post", help="postcondition constraint name")
    c.add_argument("--method", choices=METHODS, default=None)
    c.add_argument("--last-minute-condition", choices=("simple", "original"), default="simple",
                   help="direct last-minute check via (R') or via (R)")
    c.add_argument("--formula", help="check a named ltl/ctl formula on the annotated system")

    e = sub.add_parser("explore", help="explore the joint state space and summarize it")
    _common(e)
    e.add_argument("--annotated", action="store_true")

    s = sub.add_parser("simulate", help="random walk through the joint system")
    _common(s)
    s.add_argument("--steps", type=int, default=10)
    s.add_argument("--seed", type=int, default=0)

    d = sub.add_parser("dot", help="print the explored state space in DOT")
    _common(d)
    d.add_argument("--annotated", action="store_true")
    return parser


def resolve_model_path(name: str) -> FilePath:
    path = FilePath(name)
    if path.exists():
        return path
    bundled = MODEL_DIR / name
    if bundled.exists():
        return bundled
    raise UsageError(f"model file {name!r} not found")


def _limits(args) -> ExplorationLimits:
    try:
        return ExplorationLimits(args.max_states, args.max_depth, args.max_size)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _init_names(args, model: ModelFile, fallback: Sequence[str] = ()) -> list[str]:
    names = [n for chunk in args.init for n in chunk.split(",") if n]
    if not names:
        names = list(fallback)
    if not names:
        if not model.graphs:
            raise UsageError("no initial graph: pass --init")
        names = [next(iter(model.graphs))]
    return names


def _query(args, model: ModelFile) -> CorrectnessQuery:
    declared = None
    if args.query:
        if args.query not in model.queries:
            raise ResolutionError(f"unknown query {args.query!r}", args.query)
        declared = model.queries[args.query]
    kind = args.kind or (declared.kind if declared else None)
    pre = args.pre or (declared.pre if declared else None)
    post = args.post or (declared.post if declared else None)
    if not (kind and pre and post):
        raise UsageError("check needs --kind, --pre and --post (or a --query providing them)")
    if kind not in KINDS:
        raise UsageError(f"unknown kind {kind!r}")
    k = args.k if args.k is not None else (declared.k if declared else 0)
    method = args.method or (declared.method if declared else "direct")
    automaton = args.automaton or (declared.automaton if declared else "")
    inits = [model.graph(n) for n in _init_names(args, model, declared.inits if declared else ())]
    try:
        return CorrectnessQuery(
            model=model.joint_model(automaton), pre=model.constraint(pre),
            post=model.constraint(post), kind=kind, inits=tuple(inits), k=k,
            limits=_limits(args), method=method,
            last_minute_simple=args.last_minute_condition == "simple",
            pre_name=pre, post_name=post,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _emit(out: TextIO, args, payload: dict, text: str) -> None:
    if args.format == "json":
        out.write(json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False) + "\n")
    else:
        out.write(text)


def _cmd_check(args, model: ModelFile, out: TextIO) -> int:
    if args.formula:
        return _cmd_formula(args, model, out)
    q = _query(args, model)
    report: CorrectnessReport = check(q)
    _emit(out, args, report_json(report, model), report_text(report))
    return EXIT[report.verdict.status]


def _cmd_formula(args, model: ModelFile, out: TextIO) -> int:
    if args.formula not in model.formulas:
        raise ResolutionError(f"unknown formula {args.formula!r}", args.formula)
    logic, phi = model.formulas[args.formula]
    jm = model.joint_model(args.automaton)
    inits = [initial_annotated(model.graph(n), jm.automaton) for n in _init_names(args, model)]
    lts = complete_lts(explore(build_annotated(jm), inits, _limits(args)))
    verdict = (ltl_check if logic == "ltl" else ctl_check)(lts, phi)
    w = verdict.witness
    states = list(w.states()) if w is not None and hasattr(w, "prefix") else (
        list(w.states) if w is not None else [])
    payload = {
        "verdict": verdict.status.value, "formula": args.formula, "logic": logic,
        "states": len(lts), "complete": lts.complete, "note": verdict.note,
        "witness": [{"state": s, "graph": graph_json(lts.states[s])} for s in states],
    }
    text = (f"verdict: {verdict.status.value}\nformula: {args.formula} ({logic})\n"
            f"states: {len(lts)} ({'complete' if lts.complete else 'truncated'})\n")
    if verdict.note:
        text += f"note: {verdict.note}\n"
    if states:
        text += "witness states: " + " ".join(map(str, states)) + "\n"
    _emit(out, args, payload, text)
    return EXIT[verdict.status]


def _space(args, model: ModelFile):
    jm = model.joint_model(args.automaton)
    a = jm.automaton
    names = _init_names(args, model)
    if getattr(args, "annotated", False):
        rules = build_annotated(jm)
        inits = [initial_annotated(model.graph(n), a) for n in names]
    else:
        rules = build_joint(jm)
        inits = [initial_joint(model.graph(n), a) for n in names]
    return jm, rules, inits


def _cmd_explore(args, model: ModelFile, out: TextIO) -> int:
    jm, rules, inits = _space(args, model)
    lts = complete_lts(explore(rules, inits, _limits(args)))
    roles: dict[str, int] = {}
    for t in lts.transitions:
        roles[t.role] = roles.get(t.role, 0) + 1
    payload = {"states": len(lts), "transitions": len(lts.transitions), "complete": lts.complete,
               "initial": list(lts.initial), "by_role": roles, "notes": list(lts.notes)}
    text = (f"states: {len(lts)}\ntransitions: {len(lts.transitions)}\n"
            f"complete: {'yes' if lts.complete else 'no'}\n"
            + "".join(f"{role}: {n}\n" for role, n in sorted(roles.items()))
            + "".join(f"note: {n}\n" for n in lts.notes))
    _emit(out, args, payload, text)
    return 0


def _cmd_simulate(args, model: ModelFile, out: TextIO) -> int:
    from ..rewrite import direct_transformations

    jm, rules, inits = _space(args, model)
    rng = random.Random(args.seed)
    g = inits[0]
    steps = [{"rule": "", "role": "init", "graph": graph_json(g)}]
    for _ in range(max(0, args.steps)):
        options = direct_transformations(rules, g)
        if not options:
            steps.append({"rule": "Skip", "role": "skip", "graph": graph_json(g)})
            break
        step = rng.choice(options)
        g = step.after
        steps.append({"rule": step.origin or step.rule_name, "role": step.role,
                      "graph": graph_json(g)})
    text = "".join(f"{i:3d} {s['role']:<12} {s['rule'] or '-'}\n" for i, s in enumerate(steps))
    _emit(out, args, {"steps": steps, "seed": args.seed}, text)
    return 0


def _cmd_dot(args, model: ModelFile, out: TextIO) -> int:
    jm, rules, inits = _space(args, model)
    lts = complete_lts(explore(rules, inits, _limits(args)))
    out.write(export_dot(lts, model.constraints, jm.automaton.states))
    return 0


COMMANDS = {"check": _cmd_check, "explore": _cmd_explore, "simulate": _cmd_simulate, "dot": _cmd_dot}


def run(argv: Optional[Sequence[str]] = None, out: Optional[TextIO] = None,
        err: Optional[TextIO] = None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = build_parser().parse_args(list(argv) if argv is not None else None)
        model = load_model(resolve_model_path(args.model))
        return COMMANDS[args.command](args, model, out)
    except UsageError as exc:
        err.write(f"usage error: {exc}\n")
        return EXIT_USAGE
    except (ParseError, ResolutionError) as exc:
        err.write(f"model error: {exc}\n")
        return EXIT_DATA
    except UnicodeDecodeError as exc:
        err.write(f"model error: not UTF-8 text ({exc.reason})\n")
        return EXIT_DATA
    except OSError as exc:
        err.write(f"usage error: {exc}\n")
        return EXIT_USAGE
    except GTSError as exc:
        err.write(f"model error: {exc}\n")
        return EXIT_DATA
    except SystemExit as exc:  # --help
        return int(exc.code or 0)


def main() -> None:
    sys.exit(run())
