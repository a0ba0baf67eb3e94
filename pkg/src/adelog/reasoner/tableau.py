"""Completion-graph tableau for concepts and ABoxes.

Nodes carry labels of NNF concepts; edges carry the set of primitive roles
that hold between their endpoints. A y is an R-successor of x when the edge
(x, y) includes every primitive of R. TBoxes are acyclic and unfolded
before expansion, so the graph stays finite without blocking.

Rule order: forall propagation, then the or-rule, then the at-most rule,
then one generating rule (some / at-least) on the shallowest node. Merges
therefore only ever touch nodes that have no successors yet.
"""

from __future__ import annotations

import functools
import itertools
import os
from dataclasses import dataclass

from adelog.concepts import (
    GE,
    LE,
    All,
    And,
    Bottom,
    Concept,
    ConceptName,
    KnowledgeBase,
    Not,
    NumberRestriction,
    Or,
    Signature,
    Some,
    TBox,
    canonicalize,
    concept_names,
    prepare,
    nnf,
    role_names,
    sort_key,
    unfold,
)
from adelog.errors import ResourceLimit
from adelog.semantics import Interpretation

DEFAULT_MAX_NODES = 100_000
DEFAULT_MAX_BRANCHES = 10_000


@dataclass(frozen=True)
class Budget:
    max_nodes: int = DEFAULT_MAX_NODES
    max_branches: int = DEFAULT_MAX_BRANCHES

    @classmethod
    def from_env(cls, default: "Budget | None" = None) -> "Budget":
        """Read ADELOG_BUDGET as ``NODES`` or ``NODES:BRANCHES``."""
        base = default or cls()
        raw = os.environ.get("ADELOG_BUDGET", "").strip()
        if not raw:
            return base
        nodes, _, branches = raw.partition(":")
        return cls(int(nodes), int(branches) if branches else base.max_branches)


@dataclass(frozen=True)
class Satisfiability:
    """Outcome of a tableau run; ``model`` is set exactly when satisfiable."""

    satisfiable: bool
    model: Interpretation | None = None

    def __bool__(self) -> bool:
        return self.satisfiable


class _Graph:
    __slots__ = ("labels", "succ", "pred", "depth", "roots", "distinct", "clash")

    def __init__(self) -> None:
        self.labels: dict[int, dict[Concept, None]] = {}
        self.succ: dict[int, dict[int, frozenset[str]]] = {}
        self.pred: dict[int, dict[int, frozenset[str]]] = {}
        self.depth: dict[int, int] = {}
        self.roots: dict[int, str] = {}
        self.distinct: set[frozenset[int]] = set()
        self.clash = False

    def copy(self) -> "_Graph":
        g = _Graph.__new__(_Graph)
        g.labels = {k: dict(v) for k, v in self.labels.items()}
        g.succ = {k: dict(v) for k, v in self.succ.items()}
        g.pred = {k: dict(v) for k, v in self.pred.items()}
        g.depth = dict(self.depth)
        g.roots = self.roots
        g.distinct = set(self.distinct)
        g.clash = self.clash
        return g

    def new_node(self, node: int, depth: int) -> None:
        self.labels[node] = {}
        self.succ[node] = {}
        self.pred[node] = {}
        self.depth[node] = depth

    def add(self, node: int, c: Concept) -> bool:
        label = self.labels[node]
        if c in label:
            return False
        label[c] = None
        if isinstance(c, Bottom):
            self.clash = True
        elif isinstance(c, ConceptName):
            if Not(c) in label:
                self.clash = True
        elif isinstance(c, Not):
            if c.arg in label:
                self.clash = True
        elif isinstance(c, And):
            for arg in c.args:
                self.add(node, arg)
        return True

    def link(self, x: int, y: int, roles: frozenset[str]) -> None:
        merged = self.succ[x].get(y, frozenset()) | roles
        self.succ[x][y] = merged
        self.pred[y][x] = merged

    def is_distinct(self, y: int, z: int) -> bool:
        return (y in self.roots and z in self.roots) or frozenset((y, z)) in self.distinct

    def merge(self, y: int, z: int) -> None:
        """Fold node y into node z."""
        for c in list(self.labels[y]):
            self.add(z, c)
        for p, roles in list(self.pred[y].items()):
            del self.succ[p][y]
            self.link(p, z, roles)
        for s, roles in list(self.succ[y].items()):
            del self.pred[s][y]
            self.link(z, s, roles)
        for pair in [p for p in self.distinct if y in p]:
            self.distinct.discard(pair)
            (w,) = pair - {y}
            self.distinct.add(frozenset((w, z)))
        self.depth[z] = min(self.depth[z], self.depth[y])
        for table in (self.labels, self.succ, self.pred, self.depth):
            del table[y]

    def r_successors(self, x: int, prims: frozenset[str]) -> list[int]:
        return [y for y, roles in self.succ[x].items() if prims <= roles]


class Tableau:
    """One satisfiability problem: a concept, or an ABox plus extra assertions."""

    def __init__(self, budget: Budget | None = None):
        self.budget = budget or Budget.from_env()
        self.nodes_made = 0
        self.branches = 0
        self.next_id = 0

    # construction

    def _fresh(self, g: _Graph, depth: int) -> int:
        self.nodes_made += 1
        if self.nodes_made > self.budget.max_nodes:
            raise ResourceLimit(f"tableau node budget of {self.budget.max_nodes} exhausted")
        node = self.next_id
        self.next_id += 1
        g.new_node(node, depth)
        return node

    def concept_graph(self, c: Concept) -> _Graph:
        g = _Graph()
        root = self._fresh(g, 0)
        g.add(root, c)
        return g

    def abox_graph(self, individuals, concept_assertions, role_assertions) -> tuple[_Graph, dict[str, int]]:
        g = _Graph()
        ids: dict[str, int] = {}
        roots: dict[int, str] = {}
        for name in sorted(individuals):
            ids[name] = self._fresh(g, 0)
            roots[ids[name]] = name
        g.roots = roots
        for role, a, b in sorted(role_assertions):
            g.link(ids[a], ids[b], frozenset((role,)))
        for c, a in concept_assertions:
            g.add(ids[a], c)
        return g, ids

    # search

    def run(self, g: _Graph) -> _Graph | None:
        stack: list[tuple[_Graph, object]] = [(g, None)]
        while stack:
            base, alternative = stack.pop()
            if alternative is None:
                g = base
            else:
                g = base.copy()
                alternative(g)
            choices = self._saturate(g)
            if choices is None:
                if not g.clash:
                    return g
                continue
            self.branches += len(choices) - 1
            if self.branches > self.budget.max_branches:
                raise ResourceLimit(f"tableau branch budget of {self.budget.max_branches} exhausted")
            for choice in reversed(choices):
                stack.append((g, choice))
        return None

    def _saturate(self, g: _Graph):
        """Apply deterministic rules; return branch alternatives, or None when done or clashed."""
        while True:
            if g.clash:
                return None
            if self._forall(g):
                continue
            choices = self._or_rule(g)
            if choices is True:
                continue
            if choices:
                return choices
            choices = self._at_most(g)
            if choices:
                return choices
            if g.clash:
                return None
            if not self._generate(g):
                return None

    def _forall(self, g: _Graph) -> bool:
        changed = False
        for x in list(g.labels):
            if x not in g.labels:
                continue
            for c in list(g.labels[x]):
                if isinstance(c, All):
                    for y in g.r_successors(x, c.role.primitives):
                        if g.add(y, c.body):
                            changed = True
        return changed

    def _or_rule(self, g: _Graph):
        """Branch on an open disjunction, or return True after a forced step.

        Disjuncts whose complement is already in the label are dropped; one
        survivor is added outright, none is a clash. Branch i adds disjunct i
        together with the complements of the disjuncts tried before it.
        """
        for x, label in g.labels.items():
            for c in label:
                if not isinstance(c, Or) or any(arg in label for arg in c.args):
                    continue
                live = [arg for arg in c.args if complement(arg) not in label]
                if len(live) == 1:
                    g.add(x, live[0])
                    return True
                if not live:
                    g.clash = True
                    return True
                return [_adder(x, arg, *(complement(a) for a in live[:i])) for i, arg in enumerate(live)]
        return None

    def _at_most(self, g: _Graph):
        for x, label in g.labels.items():
            for c in label:
                if not (isinstance(c, NumberRestriction) and c.op == LE):
                    continue
                succ = g.r_successors(x, c.role.primitives)
                if len(succ) <= c.n:
                    continue
                pairs = [(y, z) for y, z in itertools.combinations(succ, 2) if not g.is_distinct(y, z)]
                if not pairs:
                    g.clash = True
                    return None
                return [_merger(y, z, g.roots) for y, z in pairs]
        return None

    def _generate(self, g: _Graph) -> bool:
        for x in sorted(g.labels, key=lambda n: (g.depth[n], n)):
            label = g.labels[x]
            for c in list(label):
                if isinstance(c, Some):
                    if any(c.body in g.labels[y] for y in g.r_successors(x, c.role.primitives)):
                        continue
                    y = self._fresh(g, g.depth[x] + 1)
                    g.link(x, y, c.role.primitives)
                    g.add(y, c.body)
                    return True
                if isinstance(c, NumberRestriction) and c.op == GE:
                    succ = g.r_successors(x, c.role.primitives)
                    if _has_clique(g, succ, c.n):
                        continue
                    fresh = [self._fresh(g, g.depth[x] + 1) for _ in range(c.n)]
                    for y in fresh:
                        g.link(x, y, c.role.primitives)
                    g.distinct.update(frozenset(p) for p in itertools.combinations(fresh, 2))
                    return True
        return False


@functools.lru_cache(maxsize=65536)
def complement(c: Concept) -> Concept:
    """The prepared form of not-c, for c already prepared."""
    return canonicalize(nnf(Not(c)))


def _adder(x: int, *concepts: Concept):
    def apply(g: _Graph) -> None:
        for c in concepts:
            g.add(x, c)

    return apply


def _merger(y: int, z: int, roots):
    # anonymous nodes fold into roots; otherwise the younger node folds into the older
    if y in roots:
        y, z = z, y
    elif z not in roots and y < z:
        y, z = z, y

    def apply(g: _Graph) -> None:
        g.merge(y, z)

    return apply


def _has_clique(g: _Graph, nodes: list[int], k: int) -> bool:
    """Whether k of the nodes are pairwise marked distinct."""
    if k <= 0:
        return True
    if len(nodes) < k:
        return False
    for i, v in enumerate(nodes):
        if len(nodes) - i < k:
            return False
        rest = [w for w in nodes[i + 1:] if g.is_distinct(v, w)]
        if _has_clique(g, rest, k - 1):
            return True
    return False


# ---------------------------------------------------------------------------
# model extraction

def extract_model(g: _Graph, concepts, roles) -> Interpretation:
    """Read an interpretation off a complete, clash-free graph.

    Root nodes become their individual names; anonymous nodes are numbered
    0, 1, ... in creation order.
    """
    anonymous = sorted(n for n in g.labels if n not in g.roots)
    names = {n: i for i, n in enumerate(anonymous)}
    names.update(g.roots)
    cext = {a: set() for a in concepts}
    rext = {r: set() for r in roles}
    for node, label in g.labels.items():
        for c in label:
            if isinstance(c, ConceptName):
                cext.setdefault(c.name, set()).add(names[node])
    for x, edges in g.succ.items():
        for y, prims in edges.items():
            for p in prims:
                rext.setdefault(p, set()).add((names[x], names[y]))
    return Interpretation(frozenset(names.values()), cext, rext)


# ---------------------------------------------------------------------------
# entry points

def tableau_satisfiable(
    c: Concept,
    tbox: TBox | None = None,
    budget: Budget | None = None,
    signature: Signature | None = None,
) -> Satisfiability:
    """Decide whether c has a non-empty extension in some interpretation.

    On success the model's element 0 belongs to c.
    """
    prepared = prepare(c, tbox, signature)
    tab = Tableau(budget)
    done = tab.run(tab.concept_graph(prepared))
    if done is None:
        return Satisfiability(False)
    # names that simplification dropped still get (empty) extensions
    full = unfold(c, tbox) if tbox is not None else c
    concepts = concept_names(full) | set(signature.primitive_concepts if signature else ())
    roles = role_names(full) | set(signature.roles if signature else ())
    return Satisfiability(True, extract_model(done, concepts, roles))


def abox_satisfiable(
    kb: KnowledgeBase,
    extra: tuple = (),
    budget: Budget | None = None,
) -> Satisfiability:
    """Consistency of kb's ABox plus extra concept assertions, under unique names.

    The model names each individual's element after the individual.
    """
    concept_assertions = [
        (prepare(c, kb.tbox, kb.signature), a)
        for c, a in sorted_concept_assertions(list(kb.abox.concept_assertions) + list(extra))
    ]
    tab = Tableau(budget)
    g, _ = tab.abox_graph(kb.signature.individuals, concept_assertions, kb.abox.role_assertions)
    done = tab.run(g)
    if done is None:
        return Satisfiability(False)
    return Satisfiability(True, extract_model(done, kb.signature.primitive_concepts, kb.signature.roles))


def sorted_concept_assertions(assertions):
    return sorted(assertions, key=lambda ca: (ca[1], sort_key(ca[0])))
