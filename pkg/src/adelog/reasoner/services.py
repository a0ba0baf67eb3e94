"""Subsumption, classification, instance checking and retrieval."""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass

from adelog.concepts import (
    BOTTOM,
    TOP,
    Concept,
    ConceptName,
    KnowledgeBase,
    Not,
    Signature,
    TBox,
    check_concept,
    conj,
)
from adelog.errors import ResourceLimit, UndefinedName
from adelog.reasoner.structural import Engine, SubsumptionVerdict, Verdict, structural_subsumes
from adelog.reasoner.tableau import Budget, abox_satisfiable, tableau_satisfiable
from adelog.semantics import Interpretation

ENGINES = ("auto", "structural", "tableau")


def tableau_subsumes(
    c: Concept, d: Concept, tbox: TBox | None = None, budget: Budget | None = None, signature: Signature | None = None
) -> SubsumptionVerdict:
    result = tableau_satisfiable(conj(c, Not(d)), tbox, budget, signature)
    if result.satisfiable:
        return SubsumptionVerdict(Verdict.NOT_SUBSUMED, Engine.TABLEAU, result.model)
    return SubsumptionVerdict(Verdict.SUBSUMED, Engine.TABLEAU)


def subsumes(
    c: Concept,
    d: Concept,
    tbox: TBox | None = None,
    budget: Budget | None = None,
    engine: str = "auto",
    signature: Signature | None = None,
) -> SubsumptionVerdict:
    """Decide whether c is subsumed by d.

    ``auto`` asks the structural engine first and falls back to the tableau
    on Unknown. A structural NotSubsumed still gets a counter-model from the
    tableau when the budget allows.
    """
    if engine not in ENGINES:
        raise ValueError(f"unknown engine {engine!r}")
    if engine == "tableau":
        return tableau_subsumes(c, d, tbox, budget, signature)
    verdict = structural_subsumes(c, d, tbox, signature)
    if engine == "structural" or verdict.value is Verdict.SUBSUMED:
        return verdict
    if verdict.value is Verdict.NOT_SUBSUMED:
        try:
            checked = tableau_subsumes(c, d, tbox, budget, signature)
        except ResourceLimit:
            return verdict
        return SubsumptionVerdict(Verdict.NOT_SUBSUMED, Engine.STRUCTURAL, checked.witness)
    return tableau_subsumes(c, d, tbox, budget, signature)


# ---------------------------------------------------------------------------
# classification

@dataclass(frozen=True)
class Taxonomy:
    """Direct-subsumer DAG over equivalence classes of concept names.

    Each class is named by a representative: TOP, BOTTOM, or its
    alphabetically first member. Edges run from subsumer to subsumee.
    """

    classes: dict[str, frozenset[str]]
    edges: frozenset[tuple[str, str]]

    def representative(self, name: str) -> str:
        for rep, members in self.classes.items():
            if name in members:
                return rep
        raise KeyError(name)

    def parents(self, name: str) -> set[str]:
        rep = self.representative(name)
        return {p for p, c in self.edges if c == rep}

    def children(self, name: str) -> set[str]:
        rep = self.representative(name)
        return {c for p, c in self.edges if p == rep}

    @property
    def equivalence_classes(self) -> list[frozenset[str]]:
        return [m for m in self.classes.values() if len(m) > 1]

    def ordered(self) -> list[str]:
        """Representatives, parents before children, ties broken by name."""
        level: dict[str, int] = {}

        def depth(rep: str) -> int:
            if rep not in level:
                level[rep] = 1 + max((depth(p) for p in self._parents_of(rep)), default=-1)
            return level[rep]

        return sorted(self.classes, key=lambda n: (n == "BOTTOM", depth(n), n))

    def _parents_of(self, rep: str) -> list[str]:
        return sorted(p for p, c in self.edges if c == rep)

    def _label(self, rep: str) -> str:
        members = sorted(self.classes[rep] - {rep})
        return " = ".join([rep] + members)

    def format_text(self) -> str:
        lines = []
        for rep in self.ordered():
            parents = self._parents_of(rep)
            lines.append(self._label(rep) + (" -> " + ", ".join(parents) if parents else ""))
        return "\n".join(lines)

    def to_dot(self) -> str:
        lines = ["digraph taxonomy {", "  rankdir=BT;"]
        for rep in self.ordered():
            lines.append(f'  "{rep}" [label="{self._label(rep)}"];')
        for parent, child in sorted(self.edges):
            lines.append(f'  "{child}" -> "{parent}";')
        lines.append("}")
        return "\n".join(lines)

    def to_json_lines(self) -> str:
        return "\n".join(
            json.dumps({"node": rep, "members": sorted(self.classes[rep]), "parents": self._parents_of(rep)}, sort_keys=True)
            for rep in self.ordered()
        )


def classify(kb: KnowledgeBase, budget: Budget | None = None, engine: str = "auto") -> Taxonomy:
    """Insert every named concept into the hierarchy by top-down then bottom-up search."""
    builder = _TaxonomyBuilder(kb, budget, engine)
    for name in kb.concept_names():
        builder.insert(name)
    return builder.result()


class _TaxonomyBuilder:
    def __init__(self, kb: KnowledgeBase, budget: Budget | None, engine: str):
        self.kb = kb
        self.budget = budget
        self.engine = engine
        self.members: dict[str, set[str]] = {"TOP": {"TOP"}, "BOTTOM": {"BOTTOM"}}
        self.up: dict[str, set[str]] = {"TOP": set(), "BOTTOM": {"TOP"}}
        self.down: dict[str, set[str]] = {"TOP": {"BOTTOM"}, "BOTTOM": set()}
        self.cache: dict[tuple[str, str], bool] = {}

    def concept(self, name: str) -> Concept:
        return {"TOP": TOP, "BOTTOM": BOTTOM}.get(name) or ConceptName(name)

    def subs(self, x: str, y: str) -> bool:
        key = (x, y)
        if key not in self.cache:
            verdict = subsumes(self.concept(x), self.concept(y), self.kb.tbox, self.budget, self.engine)
            if verdict.value is Verdict.UNKNOWN:
                raise ResourceLimit("structural engine alone cannot classify this TBox")
            self.cache[key] = verdict.subsumed
        return self.cache[key]

    def insert(self, name: str) -> None:
        above = self._search(name, "TOP", self.down, lambda node: self.subs(name, node))
        parents = {p for p in above if not (self.down[p] & above)}
        for p in sorted(parents):
            if self.subs(p, name):
                self.members[p].add(name)
                return
        below = self._search(name, "BOTTOM", self.up, lambda node: self.subs(node, name))
        children = {c for c in below if not (self.up[c] & below)}
        self.members[name] = {name}
        self.up[name] = set(parents)
        self.down[name] = set(children)
        for p in parents:
            self.down[p] -= children
            self.down[p].add(name)
        for c in children:
            self.up[c] -= parents
            self.up[c].add(name)

    def _search(self, name: str, start: str, step: dict, test) -> set[str]:
        found = {start}
        seen = {start}
        queue = deque([start])
        while queue:
            node = queue.popleft()
            for nxt in sorted(step[node]):
                if nxt in seen:
                    continue
                seen.add(nxt)
                if test(nxt):
                    found.add(nxt)
                    queue.append(nxt)
        return found

    def result(self) -> Taxonomy:
        reps = {}
        for key, members in self.members.items():
            if key in ("TOP", "BOTTOM"):
                reps[key] = key
            else:
                reps[key] = min(members)
        classes = {reps[k]: frozenset(m) for k, m in self.members.items()}
        edges = frozenset((reps[p], reps[c]) for p, cs in self.down.items() for c in cs)
        return Taxonomy(classes, edges)


# ---------------------------------------------------------------------------
# instances

@dataclass(frozen=True)
class InstanceResult:
    """Entailed, or NotEntailed with a model of the ABox where the individual falls outside.

    Witness elements for individuals are the individual names themselves.
    """

    entailed: bool
    witness: Interpretation | None = None

    def __bool__(self) -> bool:
        return self.entailed


def abox_consistent(kb: KnowledgeBase, budget: Budget | None = None) -> bool:
    return abox_satisfiable(kb, (), budget).satisfiable


def instance_check(kb: KnowledgeBase, a: str, c: Concept, budget: Budget | None = None) -> InstanceResult:
    """Open-world entailment of c(a) under the unique-name assumption."""
    if a not in kb.signature.individuals:
        raise UndefinedName(a, f"undeclared individual {a!r}")
    check_concept(c, kb.signature, kb.tbox)
    result = abox_satisfiable(kb, ((Not(c), a),), budget)
    if result.satisfiable:
        return InstanceResult(False, result.model)
    return InstanceResult(True)


def retrieve_instances(kb: KnowledgeBase, c: Concept, budget: Budget | None = None) -> frozenset[str]:
    check_concept(c, kb.signature, kb.tbox)
    if not kb.signature.individuals:
        return frozenset()
    if not abox_consistent(kb, budget):
        return frozenset(kb.signature.individuals)
    return frozenset(a for a in sorted(kb.signature.individuals) if instance_check(kb, a, c, budget).entailed)
