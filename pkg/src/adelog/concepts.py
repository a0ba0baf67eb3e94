"""Concept and role expressions, knowledge-base containers, and canonical rewrites.

Every value here is immutable. Expressions are frozen dataclasses, so they
hash and compare structurally; two canonical forms are equal exactly when
their trees are identical.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping

from adelog.errors import CyclicTBox, RedefinedName, UndefinedName

MAX_N = 2**32 - 1

# comparators of the number restriction constructor
LT, LE, EQ, GE, GT = "<", "<=", "=", ">=", ">"
COMPARATORS = (LT, LE, EQ, GE, GT)


@dataclass(frozen=True)
class RoleExpr:
    """A conjunction of primitive roles, stored as a set of names."""

    primitives: frozenset[str]

    def __post_init__(self) -> None:
        if not isinstance(self.primitives, frozenset):
            object.__setattr__(self, "primitives", frozenset(self.primitives))
        if not self.primitives:
            raise ValueError("a role expression needs at least one primitive role")

    @classmethod
    def of(cls, *names: str) -> "RoleExpr":
        return cls(frozenset(names))

    def sort_key(self) -> tuple[str, ...]:
        return tuple(sorted(self.primitives))

    def __str__(self) -> str:
        names = self.sort_key()
        return names[0] if len(names) == 1 else "(" + " and ".join(names) + ")"


class Concept:
    """Base class of the concept expression tree."""

    __slots__ = ()

    def children(self) -> tuple["Concept", ...]:
        return ()


@dataclass(frozen=True)
class ConceptName(Concept):
    """A named concept: primitive, or defined in a TBox."""

    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Top(Concept):
    def __str__(self) -> str:
        return "TOP"


@dataclass(frozen=True)
class Bottom(Concept):
    def __str__(self) -> str:
        return "BOTTOM"


TOP = Top()
BOTTOM = Bottom()


@dataclass(frozen=True)
class And(Concept):
    args: tuple[Concept, ...]

    def __post_init__(self) -> None:
        if not isinstance(self.args, tuple):
            object.__setattr__(self, "args", tuple(self.args))
        if len(self.args) < 2:
            raise ValueError("And needs at least two arguments")

    def children(self) -> tuple[Concept, ...]:
        return self.args


@dataclass(frozen=True)
class Or(Concept):
    args: tuple[Concept, ...]

    def __post_init__(self) -> None:
        if not isinstance(self.args, tuple):
            object.__setattr__(self, "args", tuple(self.args))
        if len(self.args) < 2:
            raise ValueError("Or needs at least two arguments")

    def children(self) -> tuple[Concept, ...]:
        return self.args


@dataclass(frozen=True)
class Not(Concept):
    arg: Concept

    def children(self) -> tuple[Concept, ...]:
        return (self.arg,)


@dataclass(frozen=True)
class All(Concept):
    role: RoleExpr
    body: Concept

    def children(self) -> tuple[Concept, ...]:
        return (self.body,)


@dataclass(frozen=True)
class Some(Concept):
    role: RoleExpr
    body: Concept

    def children(self) -> tuple[Concept, ...]:
        return (self.body,)


@dataclass(frozen=True)
class NumberRestriction(Concept):
    op: str
    n: int
    role: RoleExpr

    def __post_init__(self) -> None:
        if self.op not in COMPARATORS:
            raise ValueError(f"unknown comparator {self.op!r}")
        # one step of headroom so that (> MAX_N R) and not (<= MAX_N R) can be rewritten
        if not 0 <= self.n <= MAX_N + 1:
            raise ValueError(f"number restriction bound out of range: {self.n}")


def conj(*parts: Concept) -> Concept:
    """Conjunction of any number of parts; empty gives TOP, one gives itself."""
    if not parts:
        return TOP
    return parts[0] if len(parts) == 1 else And(parts)


def disj(*parts: Concept) -> Concept:
    if not parts:
        return BOTTOM
    return parts[0] if len(parts) == 1 else Or(parts)


def at_least(n: int, *roles: str) -> NumberRestriction:
    return NumberRestriction(GE, n, RoleExpr.of(*roles))


def at_most(n: int, *roles: str) -> NumberRestriction:
    return NumberRestriction(LE, n, RoleExpr.of(*roles))


# ---------------------------------------------------------------------------
# traversal helpers

def walk(c: Concept) -> Iterator[Concept]:
    """Pre-order iteration over every sub-expression."""
    stack = [c]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(reversed(node.children()))


def concept_names(c: Concept) -> set[str]:
    return {node.name for node in walk(c) if isinstance(node, ConceptName)}


def role_names(c: Concept) -> set[str]:
    out: set[str] = set()
    for node in walk(c):
        if isinstance(node, (All, Some, NumberRestriction)):
            out |= node.role.primitives
    return out


def depth(c: Concept) -> int:
    kids = c.children()
    if isinstance(c, (And, Or)):
        return max(depth(k) for k in kids)
    return 1 + max((depth(k) for k in kids), default=0)


_TAGS = {Top: 0, Bottom: 1, ConceptName: 2, Not: 3, And: 4, Or: 5, All: 6, Some: 7, NumberRestriction: 8}
_OP_RANK = {op: i for i, op in enumerate(COMPARATORS)}


def sort_key(c: Concept) -> tuple:
    """Total order on expression trees: constructor tag first, then fields."""
    tag = _TAGS[type(c)]
    if isinstance(c, ConceptName):
        return (tag, c.name)
    if isinstance(c, Not):
        return (tag, sort_key(c.arg))
    if isinstance(c, (And, Or)):
        return (tag, tuple(sort_key(a) for a in c.args))
    if isinstance(c, (All, Some)):
        return (tag, c.role.sort_key(), sort_key(c.body))
    if isinstance(c, NumberRestriction):
        return (tag, c.role.sort_key(), _OP_RANK[c.op], c.n)
    return (tag,)


# ---------------------------------------------------------------------------
# rewrites

def canonicalize(c: Concept) -> Concept:
    """Flatten, deduplicate and sort And/Or, and apply the TOP/BOTTOM identities.

    Also folds the trivial restrictions (>= 0 R), (< 0 R), all R.TOP and
    some R.BOTTOM. Idempotent and extension-preserving.
    """
    if isinstance(c, (ConceptName, Top, Bottom)):
        return c
    if isinstance(c, Not):
        inner = canonicalize(c.arg)
        if inner == TOP:
            return BOTTOM
        if inner == BOTTOM:
            return TOP
        return Not(inner)
    if isinstance(c, (And, Or)):
        kind = type(c)
        unit, zero = (TOP, BOTTOM) if kind is And else (BOTTOM, TOP)
        parts: set[Concept] = set()
        for arg in c.args:
            arg = canonicalize(arg)
            if arg == zero:
                return zero
            if arg == unit:
                continue
            if type(arg) is kind:
                parts.update(arg.args)
            else:
                parts.add(arg)
        if not parts:
            return unit
        if len(parts) == 1:
            return parts.pop()
        return kind(tuple(sorted(parts, key=sort_key)))
    if isinstance(c, All):
        body = canonicalize(c.body)
        return TOP if body == TOP else All(c.role, body)
    if isinstance(c, Some):
        body = canonicalize(c.body)
        return BOTTOM if body == BOTTOM else Some(c.role, body)
    if isinstance(c, NumberRestriction):
        if c.n == 0 and c.op == GE:
            return TOP
        if c.n == 0 and c.op == LT:
            return BOTTOM
        return c
    raise TypeError(f"not a concept: {c!r}")


def rewrite_number_restrictions(c: Concept) -> Concept:
    """Rewrite every number restriction into <= and >= forms only."""
    if isinstance(c, NumberRestriction):
        n, role = c.n, c.role
        if c.op == LT:
            return NumberRestriction(LE, n - 1, role) if n >= 1 else BOTTOM
        if c.op == GT:
            return NumberRestriction(GE, n + 1, role)
        if c.op == EQ:
            return And((NumberRestriction(LE, n, role), rewrite_number_restrictions(NumberRestriction(GE, n, role))))
        if c.op == GE and n == 0:
            return TOP
        return c
    if isinstance(c, (And, Or)):
        return type(c)(tuple(rewrite_number_restrictions(a) for a in c.args))
    if isinstance(c, Not):
        return Not(rewrite_number_restrictions(c.arg))
    if isinstance(c, (All, Some)):
        return type(c)(c.role, rewrite_number_restrictions(c.body))
    return c


def nnf(c: Concept) -> Concept:
    """Negation normal form: negation is pushed down to concept names."""
    return _nnf(c, False)


def _nnf(c: Concept, neg: bool) -> Concept:
    if isinstance(c, ConceptName):
        return Not(c) if neg else c
    if isinstance(c, Top):
        return BOTTOM if neg else TOP
    if isinstance(c, Bottom):
        return TOP if neg else BOTTOM
    if isinstance(c, Not):
        return _nnf(c.arg, not neg)
    if isinstance(c, (And, Or)):
        kind = type(c)
        if neg:
            kind = Or if kind is And else And
        return kind(tuple(_nnf(a, neg) for a in c.args))
    if isinstance(c, All):
        return Some(c.role, _nnf(c.body, True)) if neg else All(c.role, _nnf(c.body, False))
    if isinstance(c, Some):
        return All(c.role, _nnf(c.body, True)) if neg else Some(c.role, _nnf(c.body, False))
    if isinstance(c, NumberRestriction):
        if not neg:
            return c
        n, role = c.n, c.role
        if c.op == LE:
            return NumberRestriction(GE, n + 1, role)
        if c.op == GE:
            return NumberRestriction(LE, n - 1, role) if n >= 1 else BOTTOM
        if c.op == LT:
            return NumberRestriction(GE, n, role)
        if c.op == GT:
            return NumberRestriction(LE, n, role)
        return Or((NumberRestriction(LT, n, role), NumberRestriction(GT, n, role)))
    raise TypeError(f"not a concept: {c!r}")


# ---------------------------------------------------------------------------
# knowledge base containers

@dataclass(frozen=True)
class Signature:
    primitive_concepts: frozenset[str] = frozenset()
    roles: frozenset[str] = frozenset()
    individuals: frozenset[str] = frozenset()

    def __post_init__(self) -> None:
        for attr in ("primitive_concepts", "roles", "individuals"):
            value = getattr(self, attr)
            if not isinstance(value, frozenset):
                object.__setattr__(self, attr, frozenset(value))
        groups = (self.primitive_concepts, self.roles, self.individuals)
        for i, a in enumerate(groups):
            for b in groups[i + 1:]:
                clash = a & b
                if clash:
                    name = min(clash)
                    raise RedefinedName(name, f"name {name!r} declared with two different kinds")

    def kind_of(self, name: str) -> str | None:
        if name in self.primitive_concepts:
            return "primitive"
        if name in self.roles:
            return "role"
        if name in self.individuals:
            return "individual"
        return None


@dataclass(frozen=True)
class TBox:
    """Ordered, acyclic concept definitions (name := expression)."""

    definitions: tuple[tuple[str, Concept], ...] = ()
    _index: Mapping[str, Concept] = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self) -> None:
        if isinstance(self.definitions, Mapping):
            object.__setattr__(self, "definitions", tuple(self.definitions.items()))
        else:
            object.__setattr__(self, "definitions", tuple(self.definitions))
        index: dict[str, Concept] = {}
        for name, body in self.definitions:
            if name in index and index[name] != body:
                raise RedefinedName(name, f"conflicting definitions of {name!r}")
            index[name] = body
        object.__setattr__(self, "_index", index)
        _check_acyclic(index)

    def __contains__(self, name: str) -> bool:
        return name in self._index

    def __getitem__(self, name: str) -> Concept:
        return self._index[name]

    def __len__(self) -> int:
        return len(self._index)

    def names(self) -> list[str]:
        return list(self._index)

    def items(self):
        return self._index.items()


def _check_acyclic(index: Mapping[str, Concept]) -> None:
    state: dict[str, int] = {}  # 1 = on stack, 2 = done

    def visit(name: str, path: list[str]) -> None:
        mark = state.get(name)
        if mark == 2:
            return
        if mark == 1:
            raise CyclicTBox(path[path.index(name):] + [name])
        state[name] = 1
        path.append(name)
        for ref in sorted(concept_names(index[name])):
            if ref in index:
                visit(ref, path)
        path.pop()
        state[name] = 2

    for name in index:
        visit(name, [])


def unfold(c: Concept, tbox: TBox, signature: Signature | None = None) -> Concept:
    """Replace defined names by their definitions until only primitives remain.

    Without a signature every name lacking a definition counts as primitive;
    with one, such names must be declared primitive concepts.
    """
    memo: dict[str, Concept] = {}

    def expand_name(name: str, stack: tuple[str, ...]) -> Concept:
        if name in memo:
            return memo[name]
        if name in stack:
            raise CyclicTBox(list(stack[stack.index(name):]) + [name])
        result = go(tbox[name], stack + (name,))
        memo[name] = result
        return result

    def go(e: Concept, stack: tuple[str, ...]) -> Concept:
        if isinstance(e, ConceptName):
            if e.name in tbox:
                return expand_name(e.name, stack)
            if signature is not None and e.name not in signature.primitive_concepts:
                raise UndefinedName(e.name)
            return e
        if isinstance(e, (And, Or)):
            return type(e)(tuple(go(a, stack) for a in e.args))
        if isinstance(e, Not):
            return Not(go(e.arg, stack))
        if isinstance(e, (All, Some)):
            if signature is not None:
                _check_roles(e.role, signature)
            return type(e)(e.role, go(e.body, stack))
        if isinstance(e, NumberRestriction) and signature is not None:
            _check_roles(e.role, signature)
        return e

    return go(c, ())


def _check_roles(role: RoleExpr, signature: Signature) -> None:
    for p in sorted(role.primitives):
        if p not in signature.roles:
            raise UndefinedName(p, f"undeclared role {p!r}")


def prepare(c: Concept, tbox: TBox | None = None, signature: Signature | None = None) -> Concept:
    """The full rewrite pipeline: unfold, rewrite numbers, NNF, canonicalize."""
    if tbox is not None:
        c = unfold(c, tbox, signature)
    return canonicalize(nnf(rewrite_number_restrictions(c)))


@dataclass(frozen=True)
class ABox:
    concept_assertions: frozenset[tuple[Concept, str]] = frozenset()
    role_assertions: frozenset[tuple[str, str, str]] = frozenset()

    def __post_init__(self) -> None:
        for attr in ("concept_assertions", "role_assertions"):
            value = getattr(self, attr)
            if not isinstance(value, frozenset):
                object.__setattr__(self, attr, frozenset(value))

    def __len__(self) -> int:
        return len(self.concept_assertions) + len(self.role_assertions)

    def individuals(self) -> set[str]:
        out = {a for _, a in self.concept_assertions}
        for _, a, b in self.role_assertions:
            out.update((a, b))
        return out

    def add(self, assertion) -> "ABox":
        if _is_role_assertion(assertion):
            return ABox(self.concept_assertions, self.role_assertions | {assertion})
        return ABox(self.concept_assertions | {assertion}, self.role_assertions)

    def remove(self, assertion) -> "ABox":
        if _is_role_assertion(assertion):
            return ABox(self.concept_assertions, self.role_assertions - {assertion})
        return ABox(self.concept_assertions - {assertion}, self.role_assertions)

    def __contains__(self, assertion) -> bool:
        if _is_role_assertion(assertion):
            return assertion in self.role_assertions
        return assertion in self.concept_assertions


def _is_role_assertion(assertion) -> bool:
    return len(assertion) == 3


@dataclass(frozen=True)
class KnowledgeBase:
    signature: Signature = field(default_factory=Signature)
    tbox: TBox = field(default_factory=TBox)
    abox: ABox = field(default_factory=ABox)

    def __post_init__(self) -> None:
        validate(self.signature, self.tbox, self.abox)

    def concept_names(self) -> list[str]:
        """Primitive and defined concept names, sorted."""
        return sorted(set(self.signature.primitive_concepts) | set(self.tbox.names()))

    def with_abox(self, abox: ABox) -> "KnowledgeBase":
        return KnowledgeBase(self.signature, self.tbox, abox)


def check_concept(c: Concept, signature: Signature, tbox: TBox) -> None:
    """Raise UndefinedName unless every name in c is declared or defined."""
    for name in sorted(concept_names(c)):
        if name not in tbox and name not in signature.primitive_concepts:
            raise UndefinedName(name)
    for role in sorted(role_names(c)):
        if role not in signature.roles:
            raise UndefinedName(role, f"undeclared role {role!r}")


def check_assertion(assertion, signature: Signature, tbox: TBox) -> None:
    if _is_role_assertion(assertion):
        role, a, b = assertion
        if role not in signature.roles:
            raise UndefinedName(role, f"undeclared role {role!r}")
        inds: Iterable[str] = (a, b)
    else:
        concept, a = assertion
        check_concept(concept, signature, tbox)
        inds = (a,)
    for ind in inds:
        if ind not in signature.individuals:
            raise UndefinedName(ind, f"undeclared individual {ind!r}")


def validate(signature: Signature, tbox: TBox, abox: ABox) -> None:
    for name, body in tbox.definitions:
        if signature.kind_of(name) is not None:
            raise RedefinedName(name, f"{name!r} is both declared and defined")
        check_concept(body, signature, tbox)
    for assertion in sorted(abox.concept_assertions, key=lambda ca: (ca[1], sort_key(ca[0]))):
        check_assertion(assertion, signature, tbox)
    for assertion in sorted(abox.role_assertions):
        check_assertion(assertion, signature, tbox)
