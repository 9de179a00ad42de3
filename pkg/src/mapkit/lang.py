"""Concrete syntax for action theories (.mad) and queries (.maq).

Grammar (EBNF; '#' starts a comment that runs to the end of the line)::

    theory     = { statement ( ";" | NEWLINE ) } ;
    statement  = decl | "executable" name [ "if" cond ]
               | name "causes" literal { "," literal } [ "if" cond ]
               | name "determines" name { "," name }
               | name "announces" formula
               | name "observes" name [ "if" cond ]
               | name "aware_of" name [ "if" cond ]
               | "initially" formula ;
    decl       = ( "agents" | "fluents" | "actions" ) name { "," name } ;
    cond       = formula { "," formula } ;          (* commas mean "and" *)
    literal    = [ "!" ] name ;
    formula    = disj [ "->" formula ] ;
    disj       = conj { "|" conj } ;
    conj       = unary { "&" unary } ;
    unary      = "!" unary | "B" "[" name "]" unary
               | ( "E" | "C" ) [ "[" "{" [ name { "," name } ] "}" "]" ] unary
               | "true" | "false" | name | "(" formula ")" ;
    name       = IDENT [ "(" name { "," name } ")" ] ;
    query      = formula "after" ( "[" "]" | name { ";" name } ) ;

Newlines inside brackets do not end a statement.  Conditions of observes /
aware_of statements and announced formulas must be modality-free.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import cached_property

from .errors import CategoryError, ParseError
from .logic import (
    BOT,
    TOP,
    And,
    Atom,
    B,
    C,
    E,
    FluentLiteral,
    Formula,
    Not,
    Or,
    Signature,
    atoms,
    conj,
    eval_fluent,
    all_interpretations,
    format_formula,
    is_fluent_formula,
)

KEYWORDS = {
    "agents", "fluents", "actions", "executable", "if", "causes", "determines",
    "announces", "observes", "aware_of", "initially", "after", "true", "false",
}
OPERATOR_NAMES = {"B", "E", "C"}

WORLD_ALTERING, SENSING, ANNOUNCEMENT = "world-altering", "sensing", "announcement"


# --- AST -------------------------------------------------------------------


@dataclass(frozen=True)
class Executable:
    action: str
    condition: Formula = TOP
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Causes:
    action: str
    literal: FluentLiteral
    condition: Formula = TOP
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Determines:
    action: str
    fluent: str
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Announces:
    action: str
    formula: Formula
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Observes:
    agent: str
    action: str
    condition: Formula = TOP
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class AwareOf:
    agent: str
    action: str
    condition: Formula = TOP
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Initially:
    formula: Formula
    line: int = field(default=0, compare=False)


DomainStatement = Executable | Causes | Determines | Announces | Observes | AwareOf


@dataclass(frozen=True)
class Theory:
    signature: Signature
    domain: tuple = ()
    initial: tuple = ()

    @property
    def agents(self):
        return self.signature.agents

    @property
    def fluents(self):
        return self.signature.fluents

    @property
    def actions(self):
        return self.signature.actions

    @cached_property
    def _by_action(self) -> dict:
        out = {a: [] for a in self.signature.actions}
        for st in self.domain:
            out.setdefault(st.action, []).append(st)
        return out

    def statements_for(self, action: str) -> list:
        if action not in self._by_action:
            raise CategoryError(f"undeclared action {action!r}")
        return self._by_action[action]

    def executability(self, action: str) -> Formula:
        conds = [s.condition for s in self.statements_for(action) if isinstance(s, Executable)]
        return conds[0] if conds else TOP

    def causes(self, action: str) -> list[Causes]:
        return [s for s in self.statements_for(action) if isinstance(s, Causes)]

    def sensed(self, action: str) -> list[str]:
        out = []
        for s in self.statements_for(action):
            if isinstance(s, Determines) and s.fluent not in out:
                out.append(s.fluent)
        return out

    def announced(self, action: str) -> Formula | None:
        for s in self.statements_for(action):
            if isinstance(s, Announces):
                return s.formula
        return None

    def observers(self, action: str) -> list[Observes]:
        return [s for s in self.statements_for(action) if isinstance(s, Observes)]

    def aware(self, action: str) -> list[AwareOf]:
        return [s for s in self.statements_for(action) if isinstance(s, AwareOf)]

    def kinds(self, action: str) -> set[str]:
        kinds = set()
        for s in self.statements_for(action):
            if isinstance(s, Causes):
                kinds.add(WORLD_ALTERING)
            elif isinstance(s, Determines):
                kinds.add(SENSING)
            elif isinstance(s, Announces):
                kinds.add(ANNOUNCEMENT)
        return kinds

    def kind(self, action: str) -> str:
        kinds = self.kinds(action)
        if len(kinds) != 1:
            what = "no" if not kinds else " and ".join(sorted(kinds))
            raise CategoryError(f"action {action} has {what} effect statements; it needs exactly one kind")
        return kinds.pop()


@dataclass(frozen=True)
class Query:
    goal: Formula
    plan: tuple[str, ...] = ()

    def __str__(self):
        return format_query(self)


# --- lexer -----------------------------------------------------------------

_TOKEN = re.compile(
    r"(?P<ws>[ \t\r]+)|(?P<comment>\#[^\n]*)|(?P<nl>\n)"
    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>->|[!&|()\[\]{},;])"
)


@dataclass(frozen=True)
class Token:
    kind: str  # ident, op, nl, eof
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    out: list[Token] = []
    line, line_start, depth, pos = 1, 0, 0, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        col = pos - line_start + 1
        if kind == "nl":
            if depth == 0:
                out.append(Token("nl", "\n", line, col))
            line += 1
            line_start = m.end()
        elif kind in ("ident", "op"):
            t = m.group()
            if t in "([{":
                depth += 1
            elif t in ")]}":
                depth = max(0, depth - 1)
            out.append(Token(kind, t, line, col))
        pos = m.end()
    out.append(Token("eof", "", line, pos - line_start + 1))
    return out


# --- parser ----------------------------------------------------------------


class _Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.pos = 0
        self.uses: list[tuple[str, str, int, int]] = []  # (kind, name, line, col)

    @property
    def tok(self) -> Token:
        return self.toks[self.pos]

    def error(self, msg: str, tok: Token | None = None):
        tok = tok or self.tok
        found = "end of input" if tok.kind == "eof" else ("end of line" if tok.kind == "nl" else repr(tok.text))
        raise ParseError(f"{msg} (found {found})", tok.line, tok.col)

    def at(self, text: str) -> bool:
        return self.tok.kind in ("op", "ident") and self.tok.text == text

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.pos += 1
            return True
        return False

    def expect(self, text: str):
        if not self.accept(text):
            self.error(f"expected {text!r}")

    def name(self, kind: str | None = None) -> str:
        tok = self.tok
        if tok.kind != "ident" or tok.text in KEYWORDS:
            self.error("expected a name")
        self.pos += 1
        text = tok.text
        if self.at("("):
            self.pos += 1
            args = [self.name()]
            while self.accept(","):
                args.append(self.name())
            self.expect(")")
            text += "(" + ",".join(args) + ")"
        if kind is not None:
            self.uses.append((kind, text, tok.line, tok.col))
        return text

    # formulas

    def formula(self) -> Formula:
        left = self.disj()
        if self.accept("->"):
            return Or(Not(left), self.formula())
        return left

    def disj(self) -> Formula:
        out = self.conj()
        while self.accept("|"):
            out = Or(out, self.conj())
        return out

    def conj(self) -> Formula:
        out = self.unary()
        while self.accept("&"):
            out = And(out, self.unary())
        return out

    def group(self) -> frozenset | None:
        if not self.accept("["):
            return None
        self.expect("{")
        names = []
        if not self.accept("}"):
            names.append(self.name("agent"))
            while self.accept(","):
                names.append(self.name("agent"))
            self.expect("}")
        self.expect("]")
        return frozenset(names)

    def unary(self) -> Formula:
        tok = self.tok
        if self.accept("!"):
            return Not(self.unary())
        if tok.kind == "ident" and tok.text in OPERATOR_NAMES:
            self.pos += 1
            if tok.text == "B":
                self.expect("[")
                agent = self.name("agent")
                self.expect("]")
                return B(agent, self.unary())
            g = self.group()
            return (E if tok.text == "E" else C)(g, self.unary())
        if self.accept("true"):
            return TOP
        if self.accept("false"):
            return BOT
        if self.accept("("):
            inner = self.formula()
            self.expect(")")
            return inner
        if tok.kind == "ident" and tok.text not in KEYWORDS:
            return Atom(self.name("fluent"))
        self.error("expected a formula")

    def condition(self) -> Formula:
        parts = [self.formula()]
        while self.accept(","):
            parts.append(self.formula())
        return conj(parts)

    def fluent_only(self, phi: Formula, what: str, tok: Token) -> Formula:
        if not is_fluent_formula(phi):
            raise ParseError(f"{what} must not contain belief operators", tok.line, tok.col)
        return phi

    # statements

    def end_statement(self):
        if self.tok.kind == "eof":
            return
        if self.tok.kind == "nl" or self.at(";"):
            self.pos += 1
            return
        self.error("expected end of statement")

    def theory(self) -> Theory:
        decls: dict[str, list[str]] = {"agents": [], "fluents": [], "actions": []}
        seen: dict[str, Token] = {}
        domain: list = []
        initial: list = []
        while True:
            while self.tok.kind == "nl" or self.at(";"):
                self.pos += 1
            tok = self.tok
            if tok.kind == "eof":
                break
            line = tok.line
            if tok.text in decls and tok.kind == "ident":
                self.pos += 1
                while True:
                    ntok = self.tok
                    name = self.name()
                    if name in seen:
                        raise ParseError(f"duplicate declaration of {name!r}", ntok.line, ntok.col)
                    if tok.text == "fluents" and name in OPERATOR_NAMES:
                        raise ParseError(f"{name!r} is reserved for belief operators", ntok.line, ntok.col)
                    seen[name] = ntok
                    decls[tok.text].append(name)
                    if not self.accept(","):
                        break
            elif self.accept("executable"):
                action = self.name("action")
                cond = self.condition() if self.accept("if") else TOP
                domain.append(Executable(action, cond, line))
            elif self.accept("initially"):
                initial.append(Initially(self.formula(), line))
            else:
                head = self.name()
                kw = self.tok
                if self.accept("causes"):
                    self.uses.append(("action", head, tok.line, tok.col))
                    lits = [self.literal()]
                    while self.accept(","):
                        lits.append(self.literal())
                    cond = self.condition() if self.accept("if") else TOP
                    domain.extend(Causes(head, l, cond, line) for l in lits)
                elif self.accept("determines"):
                    self.uses.append(("action", head, tok.line, tok.col))
                    fl = [self.name("fluent")]
                    while self.accept(","):
                        fl.append(self.name("fluent"))
                    domain.extend(Determines(head, f, line) for f in fl)
                elif self.accept("announces"):
                    self.uses.append(("action", head, tok.line, tok.col))
                    ftok = self.tok
                    phi = self.fluent_only(self.formula(), "an announced formula", ftok)
                    domain.append(Announces(head, phi, line))
                elif self.at("observes") or self.at("aware_of"):
                    self.pos += 1
                    self.uses.append(("agent", head, tok.line, tok.col))
                    action = self.name("action")
                    cond = TOP
                    if self.accept("if"):
                        ctok = self.tok
                        cond = self.fluent_only(self.condition(), "an observability condition", ctok)
                    cls = Observes if kw.text == "observes" else AwareOf
                    domain.append(cls(head, action, cond, line))
                else:
                    self.error("expected causes, determines, announces, observes or aware_of")
            self.end_statement()
        sig = Signature(tuple(decls["agents"]), tuple(decls["fluents"]), tuple(decls["actions"]))
        self.resolve(sig)
        return Theory(sig, tuple(domain), tuple(initial))

    def literal(self) -> FluentLiteral:
        positive = not self.accept("!")
        return FluentLiteral(self.name("fluent"), positive)

    def resolve(self, sig: Signature):
        pools = {"agent": set(sig.agents), "fluent": set(sig.fluents), "action": set(sig.actions)}
        for kind, name, line, col in self.uses:
            if name not in pools[kind]:
                raise ParseError(f"undeclared {kind} {name!r}", line, col)

    def query(self) -> Query:
        goal = self.formula()
        self.expect("after")
        plan: list[str] = []
        if self.accept("["):
            if not self.accept("]"):
                plan.append(self.name("action"))
                while self.accept(";") or self.accept(","):
                    plan.append(self.name("action"))
                self.expect("]")
        else:
            plan.append(self.name("action"))
            while self.accept(";"):
                if self.tok.kind in ("nl", "eof"):
                    break
                plan.append(self.name("action"))
        return Query(goal, tuple(plan))


def parse_theory(text: str) -> Theory:
    return _Parser(text).theory()


def parse_formula(text: str, signature: Signature | None = None) -> Formula:
    p = _Parser(text)
    while p.tok.kind == "nl":
        p.pos += 1
    phi = p.formula()
    while p.tok.kind == "nl":
        p.pos += 1
    if p.tok.kind != "eof":
        p.error("unexpected text after formula")
    if signature is not None:
        p.resolve(signature)
    return phi


def parse_query(text: str, signature: Signature | None = None) -> Query:
    p = _Parser(text)
    while p.tok.kind == "nl":
        p.pos += 1
    q = p.query()
    while p.tok.kind == "nl" or p.at(";"):
        p.pos += 1
    if p.tok.kind != "eof":
        p.error("unexpected text after query")
    if signature is not None:
        p.resolve(signature)
    return q


def parse_queries(text: str, signature: Signature | None = None) -> list[Query]:
    """One query per non-blank line."""
    out = []
    for n, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].strip()
        if not body:
            continue
        try:
            out.append(parse_query(body, signature))
        except ParseError as exc:
            raise ParseError(str(exc).split(": ", 1)[-1], n, exc.column) from None
    return out


# --- printing --------------------------------------------------------------


def format_query(q: Query, agent_order=None) -> str:
    plan = "; ".join(q.plan) if q.plan else "[]"
    return f"{format_formula(q.goal, agent_order)} after {plan}"


def _if(cond: Formula, order) -> str:
    return "" if cond == TOP else " if " + format_formula(cond, order)


def format_statement(st, agent_order=None) -> str:
    f = lambda phi: format_formula(phi, agent_order)  # noqa: E731
    if isinstance(st, Executable):
        return f"executable {st.action}{_if(st.condition, agent_order)}"
    if isinstance(st, Causes):
        return f"{st.action} causes {st.literal}{_if(st.condition, agent_order)}"
    if isinstance(st, Determines):
        return f"{st.action} determines {st.fluent}"
    if isinstance(st, Announces):
        return f"{st.action} announces {f(st.formula)}"
    if isinstance(st, Observes):
        return f"{st.agent} observes {st.action}{_if(st.condition, agent_order)}"
    if isinstance(st, AwareOf):
        return f"{st.agent} aware_of {st.action}{_if(st.condition, agent_order)}"
    if isinstance(st, Initially):
        return f"initially {f(st.formula)}"
    raise TypeError(st)


def format_theory(theory: Theory) -> str:
    sig = theory.signature
    order = sig.agents
    lines = []
    for label, names in (("agents", sig.agents), ("fluents", sig.fluents), ("actions", sig.actions)):
        if names:
            lines.append(f"{label} {', '.join(names)};")
    if theory.domain:
        lines.append("")
        lines.extend(format_statement(s, order) + ";" for s in theory.domain)
    if theory.initial:
        lines.append("")
        lines.extend(format_statement(s, order) + ";" for s in theory.initial)
    return "\n".join(lines) + "\n"


# --- validation ------------------------------------------------------------


@dataclass(frozen=True)
class Issue:
    message: str
    line: int = 0

    def __str__(self):
        return f"line {self.line}: {self.message}" if self.line else self.message


@dataclass
class ValidationReport:
    errors: list[Issue] = field(default_factory=list)
    warnings: list[Issue] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors


def _co_satisfiable(a: Formula, b: Formula) -> bool:
    names = sorted(atoms(a) | atoms(b))
    both = And(a, b)
    return any(eval_fluent(i, both) for i in all_interpretations(names))


def validate(theory: Theory) -> ValidationReport:
    report = ValidationReport()
    sig = theory.signature
    if not sig.agents:
        report.errors.append(Issue("no agents declared"))
    if not sig.fluents:
        report.errors.append(Issue("no fluents declared"))
    for a in sig.actions:
        stmts = theory.statements_for(a)
        execs = [s for s in stmts if isinstance(s, Executable)]
        if len(execs) > 1:
            report.errors.append(Issue(f"action {a} has {len(execs)} executability conditions", execs[1].line))
        kinds = theory.kinds(a)
        first = next((s for s in stmts if not isinstance(s, (Executable, Observes, AwareOf))), None)
        if len(kinds) > 1:
            report.errors.append(Issue(f"action {a} mixes {' and '.join(sorted(kinds))} statements", first.line))
        elif not kinds:
            report.warnings.append(Issue(f"action {a} has no causes/determines/announces statement and cannot be executed"))
        anns = [s for s in stmts if isinstance(s, Announces)]
        if len(anns) > 1:
            report.errors.append(Issue(f"action {a} has {len(anns)} announces statements", anns[1].line))
        if kinds == {WORLD_ALTERING}:
            for s in theory.aware(a):
                report.warnings.append(
                    Issue(f"{s.agent} aware_of {a}: world-altering actions have no partial observers; "
                          "execution fails if this condition holds", s.line)
                )
            lits = theory.causes(a)
            for x in lits:
                for y in lits:
                    if (
                        x.literal.fluent == y.literal.fluent
                        and x.literal.positive
                        and not y.literal.positive
                        and is_fluent_formula(x.condition)
                        and is_fluent_formula(y.condition)
                        and _co_satisfiable(x.condition, y.condition)
                    ):
                        report.warnings.append(
                            Issue(f"action {a} may cause both {x.literal} and {y.literal}", y.line)
                        )
        for o in theory.observers(a):
            for w in theory.aware(a):
                if o.agent == w.agent and _co_satisfiable(o.condition, w.condition):
                    report.warnings.append(
                        Issue(f"{o.agent} may be both a full and a partial observer of {a}", w.line)
                    )
    return report


def load_theory(path, check: bool = True) -> Theory:
    """Read, parse and (optionally) validate a theory file."""
    from .errors import ValidationError

    with open(path, encoding="utf-8") as fh:
        theory = parse_theory(fh.read())
    if check:
        report = validate(theory)
        if not report.ok:
            raise ValidationError(report)
    return theory


def corpus_path(name: str):
    """Path of a bundled corpus file."""
    from importlib.resources import files

    return files("mapkit") / "corpus" / name
