"""Finite interpretations, the extension evaluator, and the brute-force oracle.

The oracle is a refutation engine: a bounded model search can show that a
subsumption fails, never that it holds in general.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Hashable, Iterator, Mapping

from adelog.concepts import (
    EQ,
    GE,
    LE,
    LT,
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
    concept_names,
    conj,
    role_names,
    unfold,
)
from adelog.errors import BudgetExceeded, UndefinedName

Element = Hashable
Pair = tuple[Element, Element]


@dataclass(frozen=True)
class Interpretation:
    domain: frozenset
    concept_ext: Mapping[str, frozenset] = field(default_factory=dict)
    role_ext: Mapping[str, frozenset] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "domain", frozenset(self.domain))
        object.__setattr__(self, "concept_ext", {k: frozenset(v) for k, v in self.concept_ext.items()})
        object.__setattr__(self, "role_ext", {k: frozenset(v) for k, v in self.role_ext.items()})
        if not self.domain:
            raise ValueError("an interpretation needs a non-empty domain")
        for name, ext in self.concept_ext.items():
            if not ext <= self.domain:
                raise ValueError(f"extension of {name!r} leaves the domain")
        for name, ext in self.role_ext.items():
            for a, b in ext:
                if a not in self.domain or b not in self.domain:
                    raise ValueError(f"extension of role {name!r} leaves the domain")

    def __hash__(self) -> int:
        return hash((self.domain, tuple(sorted(self.concept_ext.items())), tuple(sorted(self.role_ext.items()))))


@dataclass(frozen=True)
class ModelSearchConfig:
    max_domain_size: int = 3
    max_models: int | None = None

    def __post_init__(self) -> None:
        if not 1 <= self.max_domain_size <= 5:
            raise ValueError("max_domain_size must lie in 1..5")
        if self.max_models is not None and self.max_models < 1:
            raise ValueError("max_models must be positive")


# ---------------------------------------------------------------------------
# evaluation

def eval_role(r: RoleExpr, interp: Interpretation) -> frozenset:
    result = None
    for p in sorted(r.primitives):
        if p not in interp.role_ext:
            raise UndefinedName(p, f"role {p!r} has no extension")
        ext = interp.role_ext[p]
        result = ext if result is None else result & ext
    return result


def eval_concept(c: Concept, interp: Interpretation, tbox: TBox | None = None) -> frozenset:
    """The extension of c in interp; defined names are unfolded through tbox."""
    if tbox is not None:
        c = unfold(c, tbox)
    memo: dict[int, frozenset] = {}
    return _eval(c, interp, memo)


def _successors(pairs: frozenset, domain) -> dict:
    succ = {h: set() for h in domain}
    for h, d in pairs:
        succ[h].add(d)
    return succ


def _eval(c: Concept, interp: Interpretation, memo: dict) -> frozenset:
    key = id(c)
    if key in memo:
        return memo[key]
    dom = interp.domain
    if isinstance(c, ConceptName):
        if c.name not in interp.concept_ext:
            raise UndefinedName(c.name, f"concept {c.name!r} has no extension")
        out = interp.concept_ext[c.name]
    elif isinstance(c, Top):
        out = dom
    elif isinstance(c, Bottom):
        out = frozenset()
    elif isinstance(c, Not):
        out = dom - _eval(c.arg, interp, memo)
    elif isinstance(c, And):
        out = dom
        for a in c.args:
            out = out & _eval(a, interp, memo)
    elif isinstance(c, Or):
        out = frozenset()
        for a in c.args:
            out = out | _eval(a, interp, memo)
    elif isinstance(c, (All, Some)):
        body = _eval(c.body, interp, memo)
        succ = _successors(eval_role(c.role, interp), dom)
        if isinstance(c, All):
            out = frozenset(h for h in dom if succ[h] <= body)
        else:
            out = frozenset(h for h in dom if succ[h] & body)
    elif isinstance(c, NumberRestriction):
        succ = _successors(eval_role(c.role, interp), dom)
        out = frozenset(h for h in dom if compare(len(succ[h]), c.op, c.n))
    else:
        raise TypeError(f"not a concept: {c!r}")
    memo[key] = out
    return out


def compare(count: int, op: str, n: int) -> bool:
    if op == LT:
        return count < n
    if op == LE:
        return count <= n
    if op == EQ:
        return count == n
    if op == GE:
        return count >= n
    return count > n


def satisfies_abox(kb: KnowledgeBase, interp: Interpretation, mapping: Mapping[str, Element]) -> bool:
    """True iff interp, with individuals placed by mapping, is a model of kb's ABox."""
    inds = kb.signature.individuals
    missing = inds - set(mapping)
    if missing:
        raise ValueError(f"mapping misses individuals: {sorted(missing)}")
    if len({mapping[a] for a in inds}) != len(inds):
        raise ValueError("mapping must be injective (unique-name assumption)")
    for concept, a in kb.abox.concept_assertions:
        if mapping[a] not in eval_concept(concept, interp, kb.tbox):
            return False
    for role, a, b in kb.abox.role_assertions:
        if (mapping[a], mapping[b]) not in interp.role_ext.get(role, frozenset()):
            return False
    return True


# ---------------------------------------------------------------------------
# exhaustive enumeration

def count_models(sig: Signature, size: int) -> int:
    c, r = len(sig.primitive_concepts), len(sig.roles)
    return 2 ** (c * size) * 2 ** (r * size * size)


def enumerate_models(sig: Signature, cfg: ModelSearchConfig = ModelSearchConfig()) -> Iterator[Interpretation]:
    """Every interpretation over domains {0..k-1}, k = 1..max_domain_size.

    Isomorphic copies are not removed. Raises BudgetExceeded before yielding
    anything if the total would pass cfg.max_models.
    """
    total = sum(count_models(sig, k) for k in range(1, cfg.max_domain_size + 1))
    if cfg.max_models is not None and total > cfg.max_models:
        raise BudgetExceeded(f"{total} interpretations exceed the cap of {cfg.max_models}")
    concepts = sorted(sig.primitive_concepts)
    roles = sorted(sig.roles)
    for k in range(1, cfg.max_domain_size + 1):
        domain = frozenset(range(k))
        subsets = [frozenset(i for i in range(k) if mask >> i & 1) for mask in range(2**k)]
        pairs = [(a, b) for a in range(k) for b in range(k)]
        relations = [frozenset(p for j, p in enumerate(pairs) if mask >> j & 1) for mask in range(2 ** len(pairs))]
        for cexts in itertools.product(subsets, repeat=len(concepts)):
            for rexts in itertools.product(relations, repeat=len(roles)):
                yield Interpretation(domain, dict(zip(concepts, cexts)), dict(zip(roles, rexts)))


# ---------------------------------------------------------------------------
# the oracle

@dataclass(frozen=True)
class OracleResult:
    """NotSubsumed when ``witness`` is set, NoCounterexampleFound otherwise.

    A missing counterexample proves nothing beyond the searched domain sizes.
    """

    witness: Interpretation | None = None
    element: Element | None = None

    @property
    def not_subsumed(self) -> bool:
        return self.witness is not None

    @property
    def no_counterexample_found(self) -> bool:
        return self.witness is None


def oracle_subsumes(
    c: Concept,
    d: Concept,
    tbox: TBox | None = None,
    cfg: ModelSearchConfig = ModelSearchConfig(),
    signature: Signature | None = None,
    exhaustive: bool = False,
) -> OracleResult:
    """Look for an interpretation with an element in c but not in d."""
    return oracle_satisfiable(conj(c, Not(d)), tbox, cfg, signature, exhaustive)


def oracle_satisfiable(
    c: Concept,
    tbox: TBox | None = None,
    cfg: ModelSearchConfig = ModelSearchConfig(),
    signature: Signature | None = None,
    exhaustive: bool = False,
) -> OracleResult:
    """Look for an interpretation of size <= cfg.max_domain_size where c is non-empty.

    The default search assigns atoms one at a time and evaluates c in
    three-valued logic, pruning as soon as the chosen element is definitely
    outside c; ``exhaustive`` walks enumerate_models instead. Both visit the
    same space of interpretations. cfg.max_models caps visited search nodes
    (or enumerated interpretations).
    """
    if tbox is not None:
        c = unfold(c, tbox)
    concepts = sorted(concept_names(c))
    roles = sorted(role_names(c))
    if exhaustive:
        sig = Signature(frozenset(concepts), frozenset(roles))
        for interp in enumerate_models(sig, cfg):
            ext = eval_concept(c, interp)
            if ext:
                return OracleResult(_pad(interp, signature), min(ext))
        return OracleResult()
    budget = [cfg.max_models]
    for k in range(1, cfg.max_domain_size + 1):
        found = _Search(c, k, concepts, roles, budget).run()
        if found is not None:
            return OracleResult(_pad(found, signature), 0)
    return OracleResult()


def _pad(interp: Interpretation, signature: Signature | None) -> Interpretation:
    if signature is None:
        return interp
    cext = {n: interp.concept_ext.get(n, frozenset()) for n in signature.primitive_concepts}
    cext.update(interp.concept_ext)
    rext = {n: interp.role_ext.get(n, frozenset()) for n in signature.roles}
    rext.update(interp.role_ext)
    return Interpretation(interp.domain, cext, rext)


# node kinds of the compiled search form
_NAME, _TOP, _BOT, _NOT, _AND, _OR, _ALL, _SOME, _NR = range(9)


class _Search:
    """Depth-first search for a model placing element 0 inside a concept.

    Any model with a witness element can be relabelled so that the witness
    is 0, so fixing the element loses nothing. The concept is compiled once
    into a table of nodes; equal subconcepts share a node and are evaluated
    once per element.
    """

    def __init__(self, concept: Concept, size: int, concepts: list[str], roles: list[str], budget: list):
        self.size = size
        self.concepts = concepts
        self.roles = roles
        self.budget = budget
        self.nodes: list[tuple] = []
        self.index: dict[Concept, int] = {}
        self.root = self._compile(concept)
        self.cvals: dict[tuple[str, int], bool] = {}
        self.rvals: dict[tuple[str, int, int], bool] = {}

    def _compile(self, c: Concept) -> int:
        found = self.index.get(c)
        if found is not None:
            return found
        if isinstance(c, ConceptName):
            node = (_NAME, c.name)
        elif isinstance(c, Top):
            node = (_TOP,)
        elif isinstance(c, Bottom):
            node = (_BOT,)
        elif isinstance(c, Not):
            node = (_NOT, self._compile(c.arg))
        elif isinstance(c, (And, Or)):
            node = (_AND if isinstance(c, And) else _OR, tuple(self._compile(a) for a in c.args))
        elif isinstance(c, (All, Some)):
            node = (_ALL if isinstance(c, All) else _SOME, tuple(sorted(c.role.primitives)), self._compile(c.body))
        elif isinstance(c, NumberRestriction):
            node = (_NR, tuple(sorted(c.role.primitives)), c.op, c.n)
        else:
            raise TypeError(f"not a concept: {c!r}")
        self.nodes.append(node)
        self.index[c] = len(self.nodes) - 1
        return len(self.nodes) - 1

    def run(self) -> Interpretation | None:
        return self._dfs()

    def _tick(self) -> None:
        if self.budget[0] is not None:
            self.budget[0] -= 1
            if self.budget[0] < 0:
                raise BudgetExceeded("oracle search budget exhausted")

    def _dfs(self) -> Interpretation | None:
        self._tick()
        trail: list[tuple] = []
        try:
            while True:
                value, atom = self._eval(self.root, 0, {})
                if value is True:
                    return self._complete()
                if value is False:
                    return None
                forced = self._propagate()
                if forced is None:
                    return None
                if not forced:
                    break
                for a, v in forced.items():
                    self._table(a)[a] = v
                    trail.append(a)
            table = self._table(atom)
            for choice in (False, True):
                table[atom] = choice
                found = self._dfs()
                if found is not None:
                    return found
            del table[atom]
            return None
        finally:
            for a in trail:
                del self._table(a)[a]

    def _table(self, atom: tuple) -> dict:
        return self.cvals if len(atom) == 2 else self.rvals

    # propagation: atoms every model of the root must share with the
    # current partial assignment

    def _propagate(self) -> dict | None:
        """Forced atom values, or None if the root cannot become true."""
        self.memo: dict = {}
        self.required: dict[tuple[int, int], bool] = {}
        self.forced: dict[tuple, bool] = {}
        self.conflict = False
        self._force(self.root, 0, True)
        return None if self.conflict else self.forced

    def _set(self, atom: tuple, value: bool) -> None:
        if self.forced.setdefault(atom, value) != value:
            self.conflict = True

    def _value(self, i: int, e: int):
        return self._eval(i, e, self.memo)[0]

    def _open_prims(self, prims: tuple, a: int, b: int):
        """Unassigned primitive atoms of a pair, or None if the pair is already false."""
        out = []
        for p in prims:
            v = self.rvals.get((p, a, b))
            if v is False:
                return None
            if v is None:
                out.append((p, a, b))
        return out

    def _force_pair(self, prims: tuple, a: int, b: int, value: bool) -> None:
        atoms = self._open_prims(prims, a, b)
        if atoms is None:
            if value:
                self.conflict = True
            return
        if value:
            for atom in atoms:
                self._set(atom, True)
        elif len(atoms) == 1:
            self._set(atoms[0], False)
        elif not atoms:
            self.conflict = True

    def _force(self, i: int, e: int, want: bool) -> None:
        if self.conflict:
            return
        prev = self.required.setdefault((i, e), want)
        if prev != want:
            self.conflict = True
            return
        v = self._value(i, e)
        if v is not None:
            if v != want:
                self.conflict = True
            return
        node = self.nodes[i]
        kind = node[0]
        if kind == _NAME:
            self._set((node[1], e), want)
        elif kind == _NOT:
            self._force(node[1], e, not want)
        elif kind == _AND or kind == _OR:
            if (kind == _AND) == want:
                for arg in node[1]:
                    self._force(arg, e, want)
            else:
                candidates = [arg for arg in node[1] if self._value(arg, e) is None]
                if len(candidates) == 1:
                    self._force(candidates[0], e, want)
        elif kind == _ALL or kind == _SOME:
            self._force_quantifier(kind == _ALL, node[1], node[2], e, want)
        elif kind == _NR:
            self._force_count(node[1], node[2], node[3], e, want)

    def _force_quantifier(self, universal: bool, prims: tuple, body: int, e: int, want: bool) -> None:
        # all-true and some-false constrain every successor's body to `want`;
        # all-false and some-true need one successor whose body is `want`
        if universal == want:
            for d in range(self.size):
                pv = self._pair(prims, e, d)[0]
                if pv is False:
                    continue
                if pv is True:
                    self._force(body, d, want)
                elif self._value(body, d) is (not want):
                    self._force_pair(prims, e, d, False)
            return
        candidates = [
            d for d in range(self.size)
            if self._pair(prims, e, d)[0] is not False and self._value(body, d) is not (not want)
        ]
        if not candidates:
            self.conflict = True
        elif len(candidates) == 1:
            self._force_pair(prims, e, candidates[0], True)
            self._force(body, candidates[0], want)

    def _force_count(self, prims: tuple, op: str, n: int, e: int, want: bool) -> None:
        known, unknown = 0, []
        for d in range(self.size):
            v = self._pair(prims, e, d)[0]
            if v is True:
                known += 1
            elif v is None:
                unknown.append(d)
        ok = [j for j in range(len(unknown) + 1) if compare(known + j, op, n) == want]
        if not ok:
            self.conflict = True
        elif ok == [len(unknown)]:
            for d in unknown:
                self._force_pair(prims, e, d, True)
        elif ok == [0]:
            for d in unknown:
                self._force_pair(prims, e, d, False)

    def _complete(self) -> Interpretation:
        dom = range(self.size)
        cext = {n: frozenset(e for e in dom if self.cvals.get((n, e))) for n in self.concepts}
        rext = {
            r: frozenset((a, b) for a in dom for b in dom if self.rvals.get((r, a, b)))
            for r in self.roles
        }
        return Interpretation(frozenset(dom), cext, rext)

    def _pair(self, prims: tuple, a: int, b: int):
        unknown = None
        rvals = self.rvals
        for p in prims:
            v = rvals.get((p, a, b))
            if v is False:
                return False, None
            if v is None and unknown is None:
                unknown = (p, a, b)
        return (True, None) if unknown is None else (None, unknown)

    def _eval(self, i: int, e: int, memo: dict):
        """Kleene value of node i at element e, plus an unassigned atom when unknown."""
        key = i * self.size + e
        out = memo.get(key)
        if out is not None:
            return out
        node = self.nodes[i]
        kind = node[0]
        if kind == _NAME:
            v = self.cvals.get((node[1], e))
            out = (v, (node[1], e) if v is None else None)
        elif kind == _AND or kind == _OR:
            stop = kind == _OR  # value that decides the connective
            pending = None
            for arg in node[1]:
                v, atom = self._eval(arg, e, memo)
                if v is stop:
                    out = (stop, None)
                    break
                if v is None and pending is None:
                    pending = atom
            if out is None:
                out = (not stop, None) if pending is None else (None, pending)
        elif kind == _NOT:
            v, atom = self._eval(node[1], e, memo)
            out = (None if v is None else not v, atom)
        elif kind == _ALL or kind == _SOME:
            out = self._quantifier(kind == _ALL, node[1], node[2], e, memo)
        elif kind == _NR:
            out = self._count(node[1], node[2], node[3], e)
        elif kind == _TOP:
            out = (True, None)
        else:
            out = (False, None)
        memo[key] = out
        return out

    def _count(self, prims: tuple, op: str, n: int, e: int):
        known, unknown, pending = 0, 0, None
        for d in range(self.size):
            v, atom = self._pair(prims, e, d)
            if v is True:
                known += 1
            elif v is None:
                unknown += 1
                pending = pending or atom
        lo = compare(known, op, n)
        if unknown == 0:
            return (lo, None)
        outcomes = {compare(k, op, n) for k in range(known, known + unknown + 1)}
        return (lo, None) if len(outcomes) == 1 else (None, pending)

    def _quantifier(self, universal: bool, prims: tuple, body: int, e: int, memo: dict):
        pending = None
        for d in range(self.size):
            pv, patom = self._pair(prims, e, d)
            if pv is False:
                continue
            bv, batom = self._eval(body, d, memo)
            if universal and bv is True or not universal and bv is False:
                continue
            if pv is True and bv is not None:
                return (not universal, None)  # decisive successor found
            if pending is None:
                pending = patom if pv is None else batom
        if pending is None:
            return (universal, None)
        return (None, pending)


# ---------------------------------------------------------------------------
# display

def element_key(x):
    return (isinstance(x, str), x) if isinstance(x, (int, str)) else (True, repr(x))


def _show(x) -> str:
    if isinstance(x, str):
        from adelog.syntax import quote_name

        return quote_name(x)
    return str(x)


def format_interpretation(interp: Interpretation) -> str:
    """Deterministic text table: the domain, then one line per name."""
    lines = ["domain: {" + ", ".join(_show(x) for x in sorted(interp.domain, key=element_key)) + "}"]
    for name in sorted(interp.concept_ext):
        members = sorted(interp.concept_ext[name], key=element_key)
        lines.append(f"  {name} = {{" + ", ".join(_show(x) for x in members) + "}")
    for name in sorted(interp.role_ext):
        pairs = sorted(interp.role_ext[name], key=lambda p: (element_key(p[0]), element_key(p[1])))
        lines.append(f"  {name} = {{" + ", ".join(f"({_show(a)}, {_show(b)})" for a, b in pairs) + "}")
    return "\n".join(lines)
