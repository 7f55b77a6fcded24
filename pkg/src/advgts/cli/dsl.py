"""Parser and printer for the ``.gts`` model language.

A model file declares an alphabet, named graphs, constraints, rules,
regulation automata, temporal formulas and correctness queries.  Graph
blocks name their nodes and edges; rule interfaces and condition
extensions are inferred from shared names.  ``docs/grammar.ebnf`` has the
full grammar.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional

from ..conditions import TRUE, And, Condition, Exists, Not, TrueCond, condition_labels
from ..errors import ParseError, ResolutionError
from ..graph import EMPTY, MARKINGS, Graph, Morphism
from ..regulation import JointModel, RegulationAutomaton
from ..rewrite import ENVIRONMENT, SYSTEM, Rule, make_plain_rule
from ..temporal import formulas as tf

KEYWORDS = {
    "alphabet", "graph", "node", "edge", "constraint", "rule", "system", "environment",
    "left", "right", "when", "exists", "forall", "where", "true", "false", "automaton",
    "states", "start", "ltl", "ctl", "query",
}
TEMPORAL_WORDS = {"X", "G", "U", "W", "A", "E", "AX", "EX", "AG", "EG", "s", "e"}
QUERY_KEYS = ("kind", "k", "pre", "post", "init", "automaton", "method")

_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>(?:\#|//)[^\n]*)
  | (?P<string>"(?:[^"\\\n]|\\.)*")
  | (?P<number>\d+(?![A-Za-z_]))
  | (?P<ident>[A-Za-z_][A-Za-z0-9_']*(?:-[A-Za-z0-9_']+)*)
  | (?P<sym>:=|->|[{}()\[\];:,!&|])
""", re.VERBOSE)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    column: int


def tokenize(text: str) -> list[Token]:
    out = []
    line, col, pos = 1, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        chunk = m.group()
        if kind == "nl":
            line, col = line + 1, 1
        else:
            if kind == "string":
                out.append(Token("string", bytes(chunk[1:-1], "utf-8").decode("unicode_escape")
                                 if "\\" in chunk else chunk[1:-1], line, col))
            elif kind not in ("ws", "comment"):
                out.append(Token(kind, chunk, line, col))
            col += len(chunk)
        pos = m.end()
    out.append(Token("eof", "", line, col))
    return out


@dataclass(frozen=True)
class QuerySpec:
    name: str
    kind: str
    k: int = 0
    pre: str = ""
    post: str = ""
    inits: tuple[str, ...] = ()
    automaton: str = ""
    method: str = "direct"


@dataclass
class ModelFile:
    alphabet: tuple[str, ...] = ()
    graphs: dict[str, Graph] = field(default_factory=dict)
    constraints: dict[str, Condition] = field(default_factory=dict)
    rules: dict[str, Rule] = field(default_factory=dict)
    automata: dict[str, RegulationAutomaton] = field(default_factory=dict)
    formulas: dict[str, tuple[str, tf.Formula]] = field(default_factory=dict)
    queries: dict[str, QuerySpec] = field(default_factory=dict)

    def system_rules(self) -> tuple[Rule, ...]:
        return tuple(r for r in self.rules.values() if r.role == SYSTEM)

    def environment_rules(self) -> tuple[Rule, ...]:
        return tuple(r for r in self.rules.values() if r.role == ENVIRONMENT)

    def automaton(self, name: str = "") -> RegulationAutomaton:
        if not name:
            if not self.automata:
                raise ResolutionError("the model declares no automaton", "")
            return next(iter(self.automata.values()))
        if name not in self.automata:
            raise ResolutionError(f"unknown automaton {name!r}", name)
        return self.automata[name]

    def joint_model(self, automaton: str = "") -> JointModel:
        return JointModel(self.system_rules(), self.environment_rules(), self.automaton(automaton))

    def graph(self, name: str) -> Graph:
        if name not in self.graphs:
            raise ResolutionError(f"unknown graph {name!r}", name)
        return self.graphs[name]

    def constraint(self, name: str) -> Condition:
        if name not in self.constraints:
            raise ResolutionError(f"unknown constraint {name!r}", name)
        return self.constraints[name]

    def constraint_name(self, cond: Condition) -> Optional[str]:
        for n, c in self.constraints.items():
            if c == cond:
                return n
        return None


# -- parser -------------------------------------------------------------------


class _Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0
        self.model = ModelFile()

    # token helpers
    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def error(self, expected: str) -> ParseError:
        t = self.tok
        found = "end of input" if t.kind == "eof" else repr(t.text)
        return ParseError(f"line {t.line}, column {t.column}: expected {expected}, found {found}",
                          t.line, t.column, expected)

    def at(self, *texts: str) -> bool:
        return self.tok.kind in ("ident", "sym") and self.tok.text in texts

    def take(self, text: str) -> Token:
        if not self.at(text):
            raise self.error(repr(text))
        t = self.tok
        self.i += 1
        return t

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.i += 1
            return True
        return False

    def name(self, what: str = "a name") -> str:
        t = self.tok
        if t.kind != "ident" or t.text in KEYWORDS:
            raise self.error(what)
        self.i += 1
        return t.text

    def label(self) -> str:
        t = self.tok
        if t.kind == "string" or (t.kind == "ident" and t.text not in KEYWORDS):
            self.i += 1
            return t.text
        raise self.error("a label")

    def number(self) -> int:
        t = self.tok
        if t.kind != "number":
            raise self.error("a number")
        self.i += 1
        return int(t.text)

    def unresolved(self, message: str, name: str, t: Token) -> ResolutionError:
        return ResolutionError(f"line {t.line}, column {t.column}: {message}", name)

    # declarations
    def parse(self) -> ModelFile:
        if self.tok.kind == "eof":
            raise self.error("a declaration")
        while self.tok.kind != "eof":
            if self.at("alphabet"):
                self.alphabet()
            elif self.at("graph"):
                self.graph_decl()
            elif self.at("constraint"):
                self.constraint_decl()
            elif self.at("rule"):
                self.rule_decl()
            elif self.at("automaton"):
                self.automaton_decl()
            elif self.at("ltl", "ctl"):
                self.formula_decl()
            elif self.at("query"):
                self.query_decl()
            else:
                raise self.error("a declaration")
        _validate(self.model)
        return self.model

    def fresh(self, table: dict, t: Token, name: str) -> None:
        if name in table:
            raise ParseError(f"line {t.line}, column {t.column}: duplicate declaration {name!r}",
                             t.line, t.column, "a new name")

    def alphabet(self) -> None:
        self.take("alphabet")
        labels = [self.label()]
        while self.accept(","):
            labels.append(self.label())
        self.take(";")
        self.model.alphabet += tuple(x for x in labels if x not in self.model.alphabet)

    def graph_decl(self) -> None:
        self.take("graph")
        t = self.tok
        name = self.name("a graph name")
        self.fresh(self.model.graphs, t, name)
        self.model.graphs[name] = self.block(EMPTY)

    def block(self, context: Graph) -> Graph:
        """Items inside braces, appended to ``context``."""
        labels = list(context.node_labels)
        names = list(context.node_names or ())
        edges = list(context.edges)
        enames = list(context.edge_names or ())
        self.take("{")
        while not self.accept("}"):
            t = self.tok
            if self.accept("node"):
                n = self.name("a node name")
                if n in names:
                    raise self.unresolved(f"node {n!r} declared twice", n, t)
                self.take(":")
                labels.append(self.label())
                names.append(n)
            elif self.accept("edge"):
                n = self.name("an edge name")
                if n in enames:
                    raise self.unresolved(f"edge {n!r} declared twice", n, t)
                self.take(":")
                ends = []
                for sep in ("->", ":"):
                    st = self.tok
                    v = self.name("a node name")
                    if v not in names:
                        raise self.unresolved(f"undeclared node {v!r}", v, st)
                    ends.append(names.index(v))
                    self.take(sep)
                edges.append((ends[0], ends[1], self.label()))
                enames.append(n)
            else:
                raise self.error("'node', 'edge' or '}'")
            self.take(";")
        return Graph(tuple(labels), tuple(edges), tuple(names), tuple(enames))

    def constraint_decl(self) -> None:
        self.take("constraint")
        t = self.tok
        name = self.name("a constraint name")
        if name in TEMPORAL_WORDS:
            raise self.error("a constraint name that is not a temporal keyword")
        self.fresh(self.model.constraints, t, name)
        self.take(":=")
        self.model.constraints[name] = self.condition(EMPTY)
        self.take(";")

    # conditions: -> is right-associative and binds weakest, then |, &, prefix forms
    def condition(self, ctx: Graph) -> Condition:
        left = self.cond_or(ctx)
        if self.accept("->"):
            right = self.condition(ctx)
            return Not(And((left, Not(right))))
        return left

    def cond_or(self, ctx: Graph) -> Condition:
        parts = [self.cond_and(ctx)]
        while self.accept("|"):
            parts.append(self.cond_and(ctx))
        return parts[0] if len(parts) == 1 else Not(And(tuple(Not(p) for p in parts)))

    def cond_and(self, ctx: Graph) -> Condition:
        parts = [self.cond_unary(ctx)]
        while self.accept("&"):
            parts.append(self.cond_unary(ctx))
        return parts[0] if len(parts) == 1 else And(tuple(parts))

    def cond_unary(self, ctx: Graph) -> Condition:
        t = self.tok
        if self.accept("!"):
            return Not(self.cond_unary(ctx))
        if self.accept("("):
            c = self.condition(ctx)
            self.take(")")
            return c
        if self.accept("true"):
            return TRUE
        if self.accept("false"):
            return Not(TRUE)
        if self.at("exists", "forall"):
            universal = self.tok.text == "forall"
            self.i += 1
            cod = self.block(ctx)
            nested: Condition = TRUE
            if self.accept("where"):
                self.take("(")
                nested = self.condition(cod)
                self.take(")")
            ext = Morphism(ctx, cod, tuple(range(ctx.num_nodes)), tuple(range(ctx.num_edges)))
            if universal:
                return Not(Exists(ext, Not(nested)))
            return Exists(ext, nested)
        if t.kind == "ident" and t.text not in KEYWORDS:
            self.i += 1
            if t.text not in self.model.constraints:
                raise self.unresolved(f"unknown constraint {t.text!r}", t.text, t)
            if ctx.num_nodes or ctx.num_edges:
                raise self.unresolved(f"constraint {t.text!r} used inside a non-empty context",
                                      t.text, t)
            return self.model.constraints[t.text]
        raise self.error("a condition")

    def rule_decl(self) -> None:
        self.take("rule")
        t = self.tok
        name = self.name("a rule name")
        self.fresh(self.model.rules, t, name)
        if self.accept("system"):
            role = SYSTEM
        elif self.accept("environment"):
            role = ENVIRONMENT
        else:
            raise self.error("'system' or 'environment'")
        self.take("{")
        self.take("left")
        left = self.block(EMPTY)
        self.take("right")
        right = self.block(EMPTY)
        ac: Condition = TRUE
        if self.accept("when"):
            ac = self.condition(left)
            self.take(";")
        self.take("}")
        try:
            plain = make_plain_rule(name, left, right)
        except ValueError as exc:
            raise ParseError(f"line {t.line}, column {t.column}: {exc}", t.line, t.column,
                             "a consistent rule") from exc
        self.model.rules[name] = Rule(plain, ac, role)

    def automaton_decl(self) -> None:
        self.take("automaton")
        t = self.tok
        name = self.name("an automaton name")
        self.fresh(self.model.automata, t, name)
        self.take("{")
        self.take("states")
        states = [self.name("a state name")]
        while self.tok.kind == "ident" and not self.at(";"):
            states.append(self.name("a state name"))
        self.take(";")
        self.take("start")
        st = self.tok
        start = self.name("a state name")
        if start not in states:
            raise self.unresolved(f"unknown state {start!r}", start, st)
        self.take(";")
        delta, select = [], []
        while not self.accept("}"):
            pair = []
            for sep in ("->", "["):
                st = self.tok
                q = self.name("a state name")
                if q not in states:
                    raise self.unresolved(f"unknown state {q!r}", q, st)
                pair.append(q)
                self.take(sep)
            chosen: list[str] = []
            if not self.at("]"):
                chosen += self.rule_names()
                while self.accept(","):
                    chosen += self.rule_names()
            self.take("]")
            self.take(";")
            if tuple(pair) in delta:
                raise self.unresolved(f"transition {pair[0]}->{pair[1]} declared twice", name, st)
            delta.append(tuple(pair))
            select.append(frozenset(chosen))
        self.model.automata[name] = RegulationAutomaton(
            name, tuple(states), start, tuple(delta), tuple(select))

    def rule_names(self) -> list[str]:
        t = self.tok
        if self.accept("system"):
            return [r.name for r in self.model.system_rules()]
        if self.accept("environment"):
            return [r.name for r in self.model.environment_rules()]
        n = self.name("a rule name")
        if n not in self.model.rules:
            raise self.unresolved(f"unknown rule {n!r}", n, t)
        return [n]

    # temporal formulas
    def formula_decl(self) -> None:
        logic = self.tok.text
        self.i += 1
        t = self.tok
        name = self.name("a formula name")
        self.fresh(self.model.formulas, t, name)
        self.take(":=")
        f = self.tformula()
        self.take(";")
        ok = tf.is_ltl(f) if logic == "ltl" else tf.is_ctl(f)
        if not ok:
            raise ParseError(f"line {t.line}, column {t.column}: {name} is not a {logic.upper()} formula",
                             t.line, t.column, f"a {logic.upper()} formula")
        self.model.formulas[name] = (logic, f)

    def tformula(self) -> tf.Formula:
        left = self.t_or()
        if self.accept("->"):
            return tf.TImplies(left, self.tformula())
        return left

    def t_or(self) -> tf.Formula:
        parts = [self.t_and()]
        while self.accept("|"):
            parts.append(self.t_and())
        return parts[0] if len(parts) == 1 else tf.TOr(tuple(parts))

    def t_and(self) -> tf.Formula:
        parts = [self.t_until()]
        while self.accept("&"):
            parts.append(self.t_until())
        return parts[0] if len(parts) == 1 else tf.TAnd(tuple(parts))

    def t_until(self) -> tf.Formula:
        left = self.t_unary()
        if self.accept("U"):
            return tf.Until(left, self.t_unary())
        if self.accept("W"):
            return tf.WeakUntil(left, self.t_unary())
        return left

    _PREFIX = {"!": tf.TNot, "X": tf.Next, "G": tf.Globally, "AX": tf.AX, "EX": tf.EX,
               "AG": tf.AG, "EG": tf.EG}
    _PATH = {("A", "U"): tf.AU, ("A", "W"): tf.AW, ("E", "U"): tf.EU, ("E", "W"): tf.EW}

    def t_unary(self) -> tf.Formula:
        t = self.tok
        if t.kind in ("ident", "sym") and t.text in self._PREFIX:
            self.i += 1
            return self._PREFIX[t.text](self.t_unary())
        if self.at("A", "E"):
            quant = t.text
            self.i += 1
            self.take("[")
            left = self.t_unary()
            if not self.at("U", "W"):
                raise self.error("'U' or 'W'")
            op = self.tok.text
            self.i += 1
            right = self.t_unary()
            self.take("]")
            return self._PATH[(quant, op)](left, right)
        if self.accept("("):
            f = self.tformula()
            self.take(")")
            return f
        if self.accept("true"):
            return tf.TT
        if self.accept("s"):
            return tf.S_ATOM
        if self.accept("e"):
            return tf.E_ATOM
        if t.kind == "ident" and t.text not in KEYWORDS and t.text not in TEMPORAL_WORDS:
            self.i += 1
            if t.text not in self.model.constraints:
                raise self.unresolved(f"unknown constraint {t.text!r}", t.text, t)
            return tf.Atom(self.model.constraints[t.text], t.text)
        raise self.error("a temporal formula")

    def query_decl(self) -> None:
        self.take("query")
        t = self.tok
        name = self.name("a query name")
        self.fresh(self.model.queries, t, name)
        self.take("{")
        values: dict[str, object] = {}
        while not self.accept("}"):
            kt = self.tok
            key = self.name("a query key")
            if key not in QUERY_KEYS:
                raise ParseError(f"line {kt.line}, column {kt.column}: unknown query key {key!r}",
                                 kt.line, kt.column, " or ".join(QUERY_KEYS))
            if key == "k":
                values[key] = self.number()
            elif key == "init":
                inits = [self.ref(self.model.graphs, "graph")]
                while self.accept(","):
                    inits.append(self.ref(self.model.graphs, "graph"))
                values[key] = tuple(inits)
            elif key in ("pre", "post"):
                values[key] = self.ref(self.model.constraints, "constraint")
            elif key == "automaton":
                values[key] = self.ref(self.model.automata, "automaton")
            else:
                values[key] = self.name(f"a {key}")
            self.take(";")
        if "kind" not in values:
            raise self.error("a 'kind' entry")
        self.model.queries[name] = QuerySpec(name=name, **{
            ("inits" if k == "init" else k): v for k, v in values.items()})

    def ref(self, table: dict, what: str) -> str:
        t = self.tok
        n = self.name(f"a {what} name")
        if n not in table:
            raise self.unresolved(f"unknown {what} {n!r}", n, t)
        return n


def _validate(m: ModelFile) -> None:
    """Namespace checks: object labels, automaton states and markings are disjoint."""
    used: set[str] = set()
    for g in m.graphs.values():
        used |= g.labels()
    for c in m.constraints.values():
        used |= condition_labels(c)
    for r in m.rules.values():
        used |= r.plain.left.labels() | r.plain.right.labels() | condition_labels(r.ac)
    if m.alphabet:
        stray = sorted(used - set(m.alphabet))
        if stray:
            raise ResolutionError(f"label {stray[0]!r} is not in the declared alphabet", stray[0])
    alphabet = set(m.alphabet) | used
    reserved = alphabet & MARKINGS
    if reserved:
        lab = sorted(reserved)[0]
        raise ResolutionError(f"label {lab!r} is reserved for markings", lab)
    for a in m.automata.values():
        clash = (set(a.states) & alphabet) | (set(a.states) & MARKINGS)
        if clash:
            q = sorted(clash)[0]
            raise ResolutionError(f"automaton state {q!r} clashes with a label", q)
    for q in m.queries.values():
        if not q.inits:
            raise ResolutionError(f"query {q.name!r} names no initial graph", q.name)


def parse_model(text: str) -> ModelFile:
    return _Parser(text).parse()


def load_model(path) -> ModelFile:
    with open(path, encoding="utf-8") as fh:
        return parse_model(fh.read())


# -- printer ------------------------------------------------------------------

_PLAIN_LABEL = re.compile(r"[A-Za-z_][A-Za-z0-9_']*(?:-[A-Za-z0-9_']+)*\Z")


def _label(text: str) -> str:
    if _PLAIN_LABEL.match(text) and text not in KEYWORDS:
        return text
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _block(g: Graph, ctx: Graph, indent: str) -> str:
    items = []
    for v in range(ctx.num_nodes, g.num_nodes):
        items.append(f"node {g.node_name(v)} : {_label(g.node_labels[v])};")
    for e in range(ctx.num_edges, g.num_edges):
        s, t, lab = g.edges[e]
        items.append(f"edge {g.edge_name(e)} : {g.node_name(s)} -> {g.node_name(t)} : {_label(lab)};")
    if not items:
        return "{ }"
    return "{\n" + "".join(f"{indent}  {x}\n" for x in items) + indent + "}"


def condition_text(c: Condition, indent: str = "") -> str:
    if isinstance(c, TrueCond):
        return "true"
    if isinstance(c, Not):
        if isinstance(c.operand, TrueCond):
            return "false"
        return "!" + _cond_atom(c.operand, indent)
    if isinstance(c, And):
        if not c.operands:
            return "(true & true)"
        if len(c.operands) == 1:
            return "(" + condition_text(c.operands[0], indent) + ")"
        return " & ".join(_cond_atom(x, indent) for x in c.operands)
    if isinstance(c, Exists):
        ext = c.extension
        text = "exists " + _block(ext.codomain, ext.domain, indent)
        if c.nested != TRUE:
            text += " where (" + condition_text(c.nested, indent + "  ") + ")"
        return text
    raise TypeError(f"not a condition: {c!r}")


def _cond_atom(c: Condition, indent: str) -> str:
    text = condition_text(c, indent)
    if isinstance(c, And) and len(c.operands) > 1:
        return f"({text})"
    return text


def _formula_text(f: tf.Formula) -> str:
    if isinstance(f, tf.Atom):
        if f == tf.S_ATOM:
            return "s"
        if f == tf.E_ATOM:
            return "e"
        if f == tf.TT:
            return "true"
        return f.name
    return _tf_text(f)


def _tf_wrap(f: tf.Formula) -> str:
    text = _formula_text(f)
    if isinstance(f, (tf.Atom, tf.AU, tf.AW, tf.EU, tf.EW)) or isinstance(f, tuple(_PREFIX_OUT)):
        return text
    return f"({text})"


_PREFIX_OUT = {tf.TNot: "!", tf.Next: "X ", tf.Globally: "G ", tf.AX: "AX ", tf.EX: "EX ",
               tf.AG: "AG ", tf.EG: "EG "}
_PATH_OUT = {tf.AU: ("A", "U"), tf.AW: ("A", "W"), tf.EU: ("E", "U"), tf.EW: ("E", "W")}


def _tf_text(f: tf.Formula) -> str:
    if isinstance(f, tuple(_PREFIX_OUT)):
        return _PREFIX_OUT[type(f)] + _tf_wrap(f.operand)
    if isinstance(f, tf.TAnd):
        return " & ".join(_tf_wrap(g) for g in f.operands)
    if isinstance(f, tf.TOr):
        return " | ".join(_tf_wrap(g) for g in f.operands)
    if isinstance(f, tf.TImplies):
        return f"{_tf_wrap(f.left)} -> {_tf_wrap(f.right)}"
    if isinstance(f, (tf.Until, tf.WeakUntil)):
        op = "U" if isinstance(f, tf.Until) else "W"
        return f"{_tf_wrap(f.left)} {op} {_tf_wrap(f.right)}"
    q, op = _PATH_OUT[type(f)]
    return f"{q}[{_tf_wrap(f.left)} {op} {_tf_wrap(f.right)}]"


def formula_text(f: tf.Formula) -> str:
    return _formula_text(f)


def print_model(m: ModelFile) -> str:
    out = []
    if m.alphabet:
        out.append("alphabet " + ", ".join(_label(x) for x in m.alphabet) + ";\n")
    for name, g in m.graphs.items():
        out.append(f"graph {name} {_block(g, EMPTY, '')}\n")
    for name, c in m.constraints.items():
        out.append(f"constraint {name} := {condition_text(c)};\n")
    for name, r in m.rules.items():
        p = r.plain
        text = (f"rule {name} {r.role} {{\n  left {_block(p.left, EMPTY, '  ')}\n"
                f"  right {_block(p.right, EMPTY, '  ')}\n")
        if r.ac != TRUE:
            text += f"  when {condition_text(r.ac, '  ')};\n"
        out.append(text + "}\n")
    for name, a in m.automata.items():
        lines = [f"automaton {name} {{", f"  states {' '.join(a.states)};", f"  start {a.start};"]
        for (q, q2), sel in zip(a.delta, a.select):
            lines.append(f"  {q} -> {q2} [{', '.join(sorted(sel))}];")
        out.append("\n".join(lines) + "\n}\n")
    for name, (logic, f) in m.formulas.items():
        out.append(f"{logic} {name} := {formula_text(f)};\n")
    for name, q in m.queries.items():
        lines = [f"query {name} {{", f"  kind {q.kind};"]
        if q.k:
            lines.append(f"  k {q.k};")
        if q.pre:
            lines.append(f"  pre {q.pre};")
        if q.post:
            lines.append(f"  post {q.post};")
        lines.append(f"  init {', '.join(q.inits)};")
        if q.automaton:
            lines.append(f"  automaton {q.automaton};")
        if q.method != "direct":
            lines.append(f"  method {q.method};")
        out.append("\n".join(lines) + "\n}\n")
    return "\n".join(out)
