"""Hand-built interpretations with hand-computed extensions, one group per equation.

Every expected value below was worked out by hand from the set definitions,
not by running the evaluator. Tags mark the boundary cases the acceptance
suite insists on.
"""

from __future__ import annotations

from dataclasses import dataclass

from adelog.concepts import RoleExpr
from adelog.semantics import Interpretation
from adelog.syntax import parse_concept

EQUATIONS = ("conjunction", "disjunction", "value", "exists", "number", "role_conjunction")


@dataclass(frozen=True)
class Case:
    equation: str
    interp: Interpretation
    target: str  # concept text, or role text for role_conjunction
    expected: frozenset
    tags: tuple[str, ...] = ()

    @property
    def size(self) -> int:
        return len(self.interp.domain)

    @property
    def label(self) -> str:
        return f"{self.equation}[{self.size}] {self.target}"


def I(domain, concepts=None, roles=None):  # noqa: E743
    return Interpretation(frozenset(domain), concepts or {}, roles or {})


def role(text: str) -> RoleExpr:
    return RoleExpr(frozenset(p.strip() for p in text.strip("()").split(" and ")))


def target_value(case: Case, eval_concept, eval_role):
    if case.equation == "role_conjunction":
        return eval_role(role(case.target), case.interp)
    return eval_concept(parse_concept(case.target), case.interp)


one = I("a", {"A": {"a"}, "B": {"a"}}, {"r": set()})
CASES: list[Case] = [
    # (C1 and C2)(I) = C1(I) & C2(I)
    Case("conjunction", one, "A and B", frozenset("a")),
    Case("conjunction", I("ab", {"A": "ab", "B": "b"}), "A and B", frozenset("b")),
    Case("conjunction", I("abc", {"A": "ab", "B": "bc"}), "A and B", frozenset("b")),
    Case("conjunction", I("abc", {"A": "a", "B": "bc"}), "A and B", frozenset(), ("empty",)),
    # (C1 or C2)(I) = C1(I) | C2(I)
    Case("disjunction", I("a", {"A": "", "B": ""}), "A or B", frozenset(), ("empty",)),
    Case("disjunction", I("ab", {"A": "a", "B": "b"}), "A or B", frozenset("ab")),
    Case("disjunction", I("abc", {"A": "a", "B": "ac"}), "A or B", frozenset("ac")),
    # (all R.C)(I) = {h | every R-successor of h is in C}
    Case("value", I("a", {"A": ""}, {"r": set()}), "all r.A", frozenset("a"), ("vacuous",)),
    Case("value", I("a", {"A": ""}, {"r": {("a", "a")}}), "all r.A", frozenset()),
    Case("value", I("ab", {"A": "b"}, {"r": {("a", "b")}}), "all r.A", frozenset("ab"), ("vacuous",)),
    Case(
        "value",
        I("abc", {"A": "b"}, {"r": {("a", "b"), ("a", "c"), ("b", "c")}}),
        "all r.A",
        frozenset("c"),
        ("vacuous",),
    ),
    Case("value", I("abc", {"A": "abc"}, {"r": {("a", "b"), ("b", "c")}}), "all r.BOTTOM", frozenset("c"), ("vacuous",)),
    # (some R.C)(I) = {h | some R-successor of h is in C}
    Case("exists", I("a", {"A": "a"}, {"r": {("a", "a")}}), "some r.A", frozenset("a")),
    Case("exists", I("ab", {"A": "b"}, {"r": {("a", "b")}}), "some r.A", frozenset("a")),
    Case("exists", I("abc", {"A": "a"}, {"r": {("a", "b"), ("b", "c"), ("c", "c")}}), "some r.A", frozenset(), ("empty",)),
    Case("exists", I("abc", {"A": ""}, {"r": {("a", "b"), ("c", "c")}}), "some r.TOP", frozenset("ac")),
    # (op n R)(I) = {h | card{d : (h,d) in R(I)} op n}
    Case("number", I("a", {}, {"r": set()}), "(>= 0 r)", frozenset("a"), ("zero",)),
    Case("number", I("a", {}, {"r": set()}), "(< 0 r)", frozenset(), ("zero",)),
    Case("number", I("a", {}, {"r": set()}), "(= 0 r)", frozenset("a"), ("zero", "boundary")),
    Case("number", I("a", {}, {"r": set()}), "(> 0 r)", frozenset(), ("zero", "boundary")),
    Case("number", I("a", {}, {"r": set()}), "(<= 0 r)", frozenset("a"), ("zero", "boundary")),
    Case("number", I("ab", {}, {"r": {("a", "a"), ("a", "b")}}), "(<= 1 r)", frozenset("b")),
    Case("number", I("ab", {}, {"r": {("a", "a"), ("a", "b")}}), "(>= 2 r)", frozenset("a"), ("boundary",)),
    Case("number", I("ab", {}, {"r": {("a", "a"), ("a", "b")}}), "(= 2 r)", frozenset("a"), ("boundary",)),
    Case("number", I("ab", {}, {"r": {("a", "a"), ("a", "b")}}), "(< 2 r)", frozenset("b"), ("boundary",)),
    Case("number", I("ab", {}, {"r": {("a", "a"), ("a", "b")}}), "(> 2 r)", frozenset(), ("boundary",)),
    Case("number", I("abc", {}, {"r": {("a", "a"), ("a", "b"), ("a", "c"), ("b", "c")}}), "(<= 2 r)", frozenset("bc")),
    Case("number", I("abc", {}, {"r": {("a", "a"), ("a", "b"), ("a", "c"), ("b", "c")}}), "(>= 3 r)", frozenset("a"), ("boundary",)),
    Case("number", I("abc", {}, {"r": {("a", "a"), ("a", "b"), ("a", "c"), ("b", "c")}}), "(= 1 r)", frozenset("b"), ("boundary",)),
    Case("number", I("abc", {}, {"r": {("a", "a"), ("a", "b"), ("a", "c"), ("b", "c")}}), "(< 1 r)", frozenset("c"), ("boundary",)),
    Case("number", I("abc", {}, {"r": {("a", "a"), ("a", "b"), ("a", "c"), ("b", "c")}}), "(> 3 r)", frozenset(), ("boundary",)),
    # (P1 and ... and Pm)(I) = P1(I) & ... & Pm(I)
    Case("role_conjunction", I("a", {}, {"r": {("a", "a")}, "s": set()}), "r", frozenset({("a", "a")}), ("single",)),
    Case("role_conjunction", I("a", {}, {"r": {("a", "a")}, "s": set()}), "(r and s)", frozenset(), ("empty",)),
    Case("role_conjunction", I("ab", {}, {"r": {("a", "b"), ("a", "a")}, "s": {("a", "b")}}), "(r and s)", frozenset({("a", "b")})),
    Case(
        "role_conjunction",
        I("abc", {}, {"p1": {("a", "b"), ("a", "c")}, "p2": {("a", "b")}, "p3": {("a", "b"), ("c", "c")}}),
        "(p1 and p2 and p3)",
        frozenset({("a", "b")}),
    ),
    Case("role_conjunction", I("abc", {}, {"p1": {("a", "b"), ("a", "c")}, "p2": {("a", "b")}}), "(p1 and p2)", frozenset({("a", "b")})),
]
