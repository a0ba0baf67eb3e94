"""Text grammar for concept expressions and .adl knowledge-base files.

Concept grammar (``and`` binds tighter than ``or``; a chain of the same
operator without parentheses is one n-ary node)::

    expr    := conj ('or' conj)*
    conj    := unary ('and' unary)*
    unary   := 'not' unary | ('all' | 'some') role '.' unary | atom
    atom    := NAME | 'TOP' | 'BOTTOM' | '(' CMP INT role ')' | '(' expr ')'
    role    := NAME | '(' NAME ('and' NAME)* ')'
    CMP     := '<' | '<=' | '=' | '>=' | '>'

File statements end with ';' and '#' starts a comment::

    primitive N;   role N;   individual N;
    N := expr;
    expr(IND);     ROLE(IND, IND);
    view N := expr [virtual|actual];
    event N { add ASSERTION; remove ASSERTION; switch WORLD; }
    evolver { initial E, ...; E -> E, ...; }

Snapshot files add ``world W { ASSERTION; ... }``, ``current W;``,
``cache VIEW WORLD { IND, ... }`` and ``last_event E;``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from adelog.concepts import (
    BOTTOM,
    COMPARATORS,
    MAX_N,
    TOP,
    ABox,
    All,
    And,
    Bottom,
    Concept,
    ConceptName,
    KnowledgeBase,
    Not,
    NumberRestriction,
    Or,
    RoleExpr,
    Signature,
    Some,
    TBox,
    Top,
    check_assertion,
    check_concept,
    sort_key,
)
from adelog.errors import ParseError, RedefinedName, SignatureError, SourceSpan

CONCEPT_KEYWORDS = {"and", "or", "not", "all", "some", "TOP", "BOTTOM"}
STATEMENT_KEYWORDS = {
    "primitive", "role", "individual", "view", "event", "evolver", "virtual", "actual",
    "add", "remove", "switch", "initial", "world", "current", "cache", "last_event",
}
KEYWORDS = CONCEPT_KEYWORDS | STATEMENT_KEYWORDS
IDENT_RE = re.compile(r"[A-Za-z][A-Za-z0-9_]*\Z")

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\f\v]+)
  | (?P<nl>\n)
  | (?P<comment>\#[^\n]*)
  | (?P<string>"(?:[^"\\\n]|\\.)*")
  | (?P<int>[0-9]+)
  | (?P<ident>[A-Za-z][A-Za-z0-9_]*)
  | (?P<sym>:=|<=|>=|->|[<>=().,;{}])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # ident, keyword, string, int, sym, eof
    value: str
    span: SourceSpan

    def describe(self) -> str:
        if self.kind == "eof":
            return "end of input"
        if self.kind == "string":
            return f"string {self.value!r}"
        return f"'{self.value}'"


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    line, line_start, pos = 1, 0, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            span = SourceSpan(line, pos - line_start + 1, 1)
            raise ParseError(span, ["a token"], repr(text[pos]))
        kind = m.lastgroup
        raw = m.group()
        span = SourceSpan(line, pos - line_start + 1, len(raw))
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind == "string":
            tokens.append(Token("string", _unquote(raw), span))
        elif kind == "ident":
            tokens.append(Token("keyword" if raw in KEYWORDS else "ident", raw, span))
        elif kind in ("int", "sym"):
            tokens.append(Token(kind, raw, span))
        pos = m.end()
    tokens.append(Token("eof", "", SourceSpan(line, pos - line_start + 1, 0)))
    return tokens


def _unquote(raw: str) -> str:
    return re.sub(r"\\(.)", r"\1", raw[1:-1])


def quote_name(name: str) -> str:
    """Bare identifier when possible, else a double-quoted string."""
    if IDENT_RE.match(name) and name not in KEYWORDS:
        return name
    return '"' + name.replace("\\", "\\\\").replace('"', '\\"') + '"'


# ---------------------------------------------------------------------------
# program-level results

@dataclass(frozen=True)
class ViewDecl:
    name: str
    body: Concept
    mode: str  # "virtual" or "actual"


@dataclass(frozen=True)
class Action:
    kind: str  # "add", "remove", "switch"
    payload: object  # an assertion tuple, or a world name for "switch"


@dataclass(frozen=True)
class EventDecl:
    name: str
    actions: tuple[Action, ...]


@dataclass(frozen=True)
class EvolverDecl:
    initial: frozenset[str]
    allowed: tuple[tuple[str, frozenset[str]], ...]


@dataclass
class Program:
    """Everything a .adl or snapshot file declares."""

    kb: KnowledgeBase
    views: list[ViewDecl] = field(default_factory=list)
    events: list[EventDecl] = field(default_factory=list)
    evolver: EvolverDecl | None = None
    worlds: dict[str, ABox] = field(default_factory=dict)
    current: str | None = None
    caches: dict[tuple[str, str], frozenset[str]] = field(default_factory=dict)
    last_event: str | None = None


# ---------------------------------------------------------------------------
# parser

class Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.pos = 0

    # token helpers

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def peek(self, offset: int = 1) -> Token:
        return self.tokens[min(self.pos + offset, len(self.tokens) - 1)]

    def at(self, value: str) -> bool:
        return self.tok.kind in ("sym", "keyword") and self.tok.value == value

    def advance(self) -> Token:
        tok = self.tok
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def fail(self, *expected: str):
        raise ParseError(self.tok.span, list(expected), self.tok.describe())

    def expect(self, value: str) -> Token:
        if not self.at(value):
            self.fail(f"'{value}'")
        return self.advance()

    def expect_ident(self, what: str = "a name") -> str:
        if self.tok.kind != "ident":
            self.fail(what)
        return self.advance().value

    def expect_individual(self) -> str:
        if self.tok.kind not in ("ident", "string"):
            self.fail("an individual name")
        return self.advance().value

    def expect_eof(self) -> None:
        if self.tok.kind != "eof":
            self.fail("end of input")

    # concepts

    def concept(self) -> Concept:
        parts = [self.conjunction()]
        while self.at("or"):
            self.advance()
            parts.append(self.conjunction())
        return parts[0] if len(parts) == 1 else Or(tuple(parts))

    def conjunction(self) -> Concept:
        parts = [self.unary()]
        while self.at("and"):
            self.advance()
            parts.append(self.unary())
        return parts[0] if len(parts) == 1 else And(tuple(parts))

    def unary(self) -> Concept:
        if self.at("not"):
            self.advance()
            return Not(self.unary())
        if self.at("all") or self.at("some"):
            kind = All if self.advance().value == "all" else Some
            role = self.role()
            self.expect(".")
            return kind(role, self.unary())
        return self.atom()

    def atom(self) -> Concept:
        tok = self.tok
        if tok.kind == "ident":
            self.advance()
            return ConceptName(tok.value)
        if self.at("TOP"):
            self.advance()
            return TOP
        if self.at("BOTTOM"):
            self.advance()
            return BOTTOM
        if self.at("("):
            self.advance()
            if self.tok.kind == "sym" and self.tok.value in COMPARATORS:
                op = self.advance().value
                if self.tok.kind != "int":
                    self.fail("a non-negative integer")
                num_tok = self.advance()
                n = int(num_tok.value)
                if n > MAX_N:
                    raise ParseError(num_tok.span, [f"an integer <= {MAX_N}"], num_tok.describe())
                role = self.role()
                self.expect(")")
                return NumberRestriction(op, n, role)
            inner = self.concept()
            self.expect(")")
            return inner
        self.fail("a concept name", "'TOP'", "'BOTTOM'", "'not'", "'all'", "'some'", "'('")

    def role(self) -> RoleExpr:
        if self.tok.kind == "ident":
            return RoleExpr.of(self.advance().value)
        if self.at("("):
            self.advance()
            names = [self.expect_ident("a role name")]
            while self.at("and"):
                self.advance()
                names.append(self.expect_ident("a role name"))
            self.expect(")")
            return RoleExpr(frozenset(names))
        self.fail("a role name", "'('")

    # assertions

    def assertion(self):
        """ROLE(a, b) or concept(a); returns a role triple or (concept, a)."""
        if (
            self.tok.kind == "ident"
            and self.peek().kind == "sym" and self.peek().value == "("
            and self.peek(2).kind in ("ident", "string")
            and self.peek(3).kind == "sym" and self.peek(3).value == ","
        ):
            role = self.advance().value
            self.expect("(")
            a = self.expect_individual()
            self.expect(",")
            b = self.expect_individual()
            self.expect(")")
            return (role, a, b)
        concept = self.concept()
        self.expect("(")
        ind = self.expect_individual()
        self.expect(")")
        return (concept, ind)

    # statements

    def program(self) -> Program:
        builder = _ProgramBuilder(self.tokens)
        while self.tok.kind != "eof":
            self.statement(builder)
        return builder.build()

    def statement(self, b: "_ProgramBuilder") -> None:
        start = self.tok.span
        if self.tok.kind == "keyword" and self.tok.value in ("primitive", "role", "individual"):
            kind = self.advance().value
            name = self.expect_individual() if kind == "individual" else self.expect_ident()
            self.expect(";")
            b.declare(kind, name, start)
        elif self.at("view"):
            self.advance()
            name = self.expect_ident("a view name")
            self.expect(":=")
            body = self.concept()
            mode = "virtual"
            if self.at("virtual") or self.at("actual"):
                mode = self.advance().value
            self.expect(";")
            b.views.append((ViewDecl(name, body, mode), start))
        elif self.at("event"):
            self.advance()
            name = self.expect_ident("an event name")
            self.expect("{")
            actions = []
            while not self.at("}"):
                actions.append(self.action())
            self.expect("}")
            self._optional(";")
            b.events.append((EventDecl(name, tuple(actions)), start))
        elif self.at("evolver"):
            self.advance()
            b.evolver = (self.evolver_body(), start)
        elif self.at("world"):
            self.advance()
            name = self.expect_individual()
            self.expect("{")
            assertions = []
            while not self.at("}"):
                at = self.tok.span
                assertions.append((self.assertion(), at))
                self.expect(";")
            self.expect("}")
            self._optional(";")
            b.worlds.append((name, assertions, start))
        elif self.at("current"):
            self.advance()
            b.current = self.expect_individual()
            self.expect(";")
        elif self.at("last_event"):
            self.advance()
            b.last_event = self.expect_ident("an event name")
            self.expect(";")
        elif self.at("cache"):
            self.advance()
            view = self.expect_ident("a view name")
            world = self.expect_individual()
            self.expect("{")
            members = []
            if not self.at("}"):
                members.append(self.expect_individual())
                while self.at(","):
                    self.advance()
                    members.append(self.expect_individual())
            self.expect("}")
            self._optional(";")
            b.caches[(view, world)] = frozenset(members)
        elif self.tok.kind == "ident" and self.peek().kind == "sym" and self.peek().value == ":=":
            name = self.advance().value
            self.advance()
            body = self.concept()
            self.expect(";")
            b.define(name, body, start)
        else:
            assertion = self.assertion()
            self.expect(";")
            b.assertions.append((assertion, start))

    def _optional(self, value: str) -> None:
        if self.at(value):
            self.advance()

    def action(self) -> Action:
        if self.at("add") or self.at("remove"):
            kind = self.advance().value
            payload = self.assertion()
        elif self.at("switch"):
            kind = self.advance().value
            payload = self.expect_individual()
        else:
            self.fail("'add'", "'remove'", "'switch'")
        self.expect(";")
        return Action(kind, payload)

    def evolver_body(self) -> EvolverDecl:
        self.expect("{")
        initial: set[str] = set()
        allowed: dict[str, set[str]] = {}
        while not self.at("}"):
            if self.at("initial"):
                self.advance()
                initial.update(self.name_list())
            else:
                src = self.expect_ident("an event name")
                self.expect("->")
                allowed.setdefault(src, set()).update(self.name_list())
            self.expect(";")
        self.expect("}")
        self._optional(";")
        return EvolverDecl(
            frozenset(initial),
            tuple((k, frozenset(v)) for k, v in sorted(allowed.items())),
        )

    def name_list(self) -> list[str]:
        names = [self.expect_ident("an event name")]
        while self.at(","):
            self.advance()
            names.append(self.expect_ident("an event name"))
        return names


class _ProgramBuilder:
    def __init__(self, tokens: list[Token]) -> None:
        self.tokens = tokens
        self.kinds: dict[str, tuple[str, SourceSpan]] = {}
        self.definitions: dict[str, tuple[Concept, SourceSpan]] = {}
        self.assertions: list = []
        self.views: list = []
        self.events: list = []
        self.evolver = None
        self.worlds: list = []
        self.current: str | None = None
        self.last_event: str | None = None
        self.caches: dict = {}

    def declare(self, kind: str, name: str, span: SourceSpan) -> None:
        seen = self.kinds.get(name)
        if seen is not None and seen[0] != kind:
            raise RedefinedName(name, f"{name!r} already declared as {seen[0]}", span)
        if name in self.definitions:
            raise RedefinedName(name, f"{name!r} is both declared and defined", span)
        self.kinds.setdefault(name, (kind, span))

    def define(self, name: str, body: Concept, span: SourceSpan) -> None:
        if name in self.kinds:
            raise RedefinedName(name, f"{name!r} is both declared and defined", span)
        seen = self.definitions.get(name)
        if seen is not None and seen[0] != body:
            raise RedefinedName(name, f"conflicting definitions of {name!r}", span)
        self.definitions.setdefault(name, (body, span))

    def build(self) -> Program:
        names = {"primitive": set(), "role": set(), "individual": set()}
        for name, (kind, _) in self.kinds.items():
            names[kind].add(name)
        signature = Signature(frozenset(names["primitive"]), frozenset(names["role"]), frozenset(names["individual"]))
        tbox = TBox(tuple((n, body) for n, (body, _) in self.definitions.items()))
        for name, (body, span) in self.definitions.items():
            self._with_span(span, check_concept, body, signature, tbox)
        abox = ABox()
        for assertion, span in self.assertions:
            self._with_span(span, check_assertion, assertion, signature, tbox)
            abox = abox.add(assertion)
        program = Program(KnowledgeBase(signature, tbox, abox))
        for view, span in self.views:
            self._with_span(span, check_concept, view.body, signature, tbox)
            program.views.append(view)
        for event, span in self.events:
            for action in event.actions:
                if action.kind != "switch":
                    self._with_span(span, check_assertion, action.payload, signature, tbox)
            program.events.append(event)
        if self.evolver is not None:
            program.evolver = self.evolver[0]
        for world, assertions, _ in self.worlds:
            wbox = ABox()
            for assertion, span in assertions:
                self._with_span(span, check_assertion, assertion, signature, tbox)
                wbox = wbox.add(assertion)
            program.worlds[world] = wbox
        program.current = self.current
        program.last_event = self.last_event
        program.caches = dict(self.caches)
        return program


    def _with_span(self, start: SourceSpan, check, *args) -> None:
        try:
            check(*args)
        except SignatureError as exc:
            if exc.span is None:
                raise type(exc)(exc.name, str(exc), self._locate(start, exc.name)) from None
            raise

    def _locate(self, start: SourceSpan, name: str) -> SourceSpan:
        """Span of the first use of name at or after start, else start itself."""
        origin = (start.line, start.column)
        for tok in self.tokens:
            if (tok.span.line, tok.span.column) < origin:
                continue
            if tok.kind in ("ident", "string") and tok.value == name:
                return tok.span
        return start


# ---------------------------------------------------------------------------
# public entry points

def parse_concept(text: str) -> Concept:
    p = Parser(text)
    c = p.concept()
    p.expect_eof()
    return c


def parse_concepts(text: str, count: int) -> list[Concept]:
    """Parse exactly ``count`` juxtaposed expressions, e.g. ``C1 author``."""
    p = Parser(text)
    out = [p.concept() for _ in range(count)]
    p.expect_eof()
    return out


def parse_assertion(text: str):
    p = Parser(text)
    a = p.assertion()
    p.expect_eof()
    return a


def parse_program(text: str) -> Program:
    return Parser(text).program()


def parse_kb(text: str) -> KnowledgeBase:
    return parse_program(text).kb


# ---------------------------------------------------------------------------
# printing

def print_role(role: RoleExpr) -> str:
    return str(role)


def print_concept(c: Concept) -> str:
    if isinstance(c, ConceptName):
        return c.name
    if isinstance(c, Top):
        return "TOP"
    if isinstance(c, Bottom):
        return "BOTTOM"
    if isinstance(c, And):
        return "(" + " and ".join(print_concept(a) for a in c.args) + ")"
    if isinstance(c, Or):
        return "(" + " or ".join(print_concept(a) for a in c.args) + ")"
    if isinstance(c, Not):
        return f"(not {print_concept(c.arg)})"
    if isinstance(c, All):
        return f"(all {print_role(c.role)}.{print_concept(c.body)})"
    if isinstance(c, Some):
        return f"(some {print_role(c.role)}.{print_concept(c.body)})"
    if isinstance(c, NumberRestriction):
        return f"({c.op} {c.n} {print_role(c.role)})"
    raise TypeError(f"not a concept: {c!r}")


def print_assertion(assertion) -> str:
    if len(assertion) == 3:
        role, a, b = assertion
        return f"{role}({quote_name(a)}, {quote_name(b)})"
    concept, a = assertion
    return f"{print_concept(concept)}({quote_name(a)})"


def sorted_assertions(abox: ABox) -> list:
    concepts = sorted(abox.concept_assertions, key=lambda ca: (ca[1], sort_key(ca[0])))
    return sorted(abox.role_assertions) + concepts


def print_kb(kb: KnowledgeBase, include_abox: bool = True) -> str:
    """Canonical text of a knowledge base; parse_kb inverts it."""
    sig = kb.signature
    lines = [f"primitive {quote_name(n)};" for n in sorted(sig.primitive_concepts)]
    lines += [f"role {quote_name(n)};" for n in sorted(sig.roles)]
    lines += [f"individual {quote_name(n)};" for n in sorted(sig.individuals)]
    lines += [f"{name} := {print_concept(body)};" for name, body in kb.tbox.definitions]
    if include_abox:
        lines += [print_assertion(a) + ";" for a in sorted_assertions(kb.abox)]
    return "\n".join(lines) + ("\n" if lines else "")
