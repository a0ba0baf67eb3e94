"""Normalize-compare subsumption.

Both concepts are brought to a NormalForm, then every component of the
subsumer must be implied by the subsumee's components. Successor counting
works over *role types*: the set of primitive roles an edge carries. An
R-successor is a successor whose type contains R, so (>= n R), (<= m S)
and the value restrictions become linear constraints over the number of
successors of each type.

On the fragment built from names, TOP/BOTTOM, and, all and number
restrictions the comparison is exact and the engine answers Subsumed or
NotSubsumed. With negated names or existentials it only ever proves
subsumption, and with disjunction it gives up immediately; both cases
report Unknown instead of a negative answer.
"""

from __future__ import annotations

import enum
import functools
import itertools
import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, milp

from adelog.concepts import (
    BOTTOM,
    GE,
    LE,
    TOP,
    All,
    And,
    Bottom,
    Concept,
    ConceptName,
    Not,
    NumberRestriction,
    Or,
    RoleExpr,
    Signature,
    Some,
    TBox,
    Top,
    canonicalize,
    conj,
    prepare,
)

# brute-force the counting problem below this many candidate assignments
_ENUMERATION_LIMIT = 20_000
# role universes larger than this are not compared structurally
_MAX_UNIVERSE = 10


class Verdict(enum.Enum):
    SUBSUMED = "subsumed"
    NOT_SUBSUMED = "not subsumed"
    UNKNOWN = "unknown"


class Engine(enum.Enum):
    STRUCTURAL = "structural"
    TABLEAU = "tableau"
    ORACLE = "oracle"


@dataclass(frozen=True)
class SubsumptionVerdict:
    value: Verdict
    engine: Engine
    witness: object | None = None  # an Interpretation, only with NOT_SUBSUMED

    def __post_init__(self) -> None:
        if self.value is Verdict.UNKNOWN and self.engine is not Engine.STRUCTURAL:
            raise ValueError("only the structural engine answers Unknown")
        if self.witness is not None and self.value is not Verdict.NOT_SUBSUMED:
            raise ValueError("a witness only accompanies NotSubsumed")

    @property
    def subsumed(self) -> bool:
        return self.value is Verdict.SUBSUMED


@dataclass(frozen=True, eq=False)
class NormalForm:
    primitives: frozenset[str] = frozenset()
    negated_primitives: frozenset[str] = frozenset()
    value_restrictions: Mapping[RoleExpr, "NormalForm"] = field(default_factory=dict)
    existentials: tuple[tuple[RoleExpr, "NormalForm"], ...] = ()
    min_card: Mapping[RoleExpr, int] = field(default_factory=dict)
    max_card: Mapping[RoleExpr, int] = field(default_factory=dict)
    disjunctions: tuple[Or, ...] = ()
    is_bottom: bool = False
    # the prepared expression this form was built from
    concept: Concept = TOP

    def __eq__(self, other) -> bool:
        return isinstance(other, NormalForm) and self.concept == other.concept

    def __hash__(self) -> int:
        return hash(self.concept)

    @property
    def in_exact_fragment(self) -> bool:
        """No negated names, existentials or disjunctions at any depth."""
        return _exact(self.concept)

    def roles(self) -> set[str]:
        out: set[str] = set()
        for r in itertools.chain(self.value_restrictions, self.min_card, self.max_card):
            out |= r.primitives
        for r, _ in self.existentials:
            out |= r.primitives
        return out

    def body_for(self, type_: frozenset[str]) -> "NormalForm":
        """Conjunction of the value-restriction bodies that reach a successor of this type."""
        bodies = [nf.concept for r, nf in self.value_restrictions.items() if r.primitives <= type_]
        return _build(canonicalize(conj(*bodies)))


_BOTTOM_FORM = NormalForm(is_bottom=True, concept=BOTTOM)


def normalize(c: Concept, tbox: TBox | None = None, signature: Signature | None = None) -> NormalForm:
    """unfold, rewrite numbers, NNF, canonicalize, then bucket the conjuncts."""
    return _build(prepare(c, tbox, signature))


@functools.lru_cache(maxsize=65536)
def _exact(c: Concept) -> bool:
    if isinstance(c, (Not, Some, Or)):
        return False
    return all(_exact(k) for k in c.children())


@functools.lru_cache(maxsize=65536)
def _build(c: Concept) -> NormalForm:
    if isinstance(c, Bottom):
        return _BOTTOM_FORM
    parts = c.args if isinstance(c, And) else () if isinstance(c, Top) else (c,)
    prims, negs, ors = set(), set(), []
    vr_bodies: dict[RoleExpr, list[Concept]] = {}
    raw_exists: list[tuple[RoleExpr, Concept]] = []
    min_card: dict[RoleExpr, int] = {}
    max_card: dict[RoleExpr, int] = {}
    for p in parts:
        if isinstance(p, ConceptName):
            prims.add(p.name)
        elif isinstance(p, Not):
            negs.add(p.arg.name)
        elif isinstance(p, All):
            vr_bodies.setdefault(p.role, []).append(p.body)
        elif isinstance(p, Some):
            raw_exists.append((p.role, p.body))
        elif isinstance(p, NumberRestriction) and p.op == GE:
            min_card[p.role] = max(min_card.get(p.role, 0), p.n)
        elif isinstance(p, NumberRestriction) and p.op == LE:
            max_card[p.role] = min(max_card.get(p.role, p.n), p.n)
        elif isinstance(p, Or):
            ors.append(p)
        else:
            raise TypeError(f"unexpected conjunct after preparation: {p!r}")
    if prims & negs:
        return _BOTTOM_FORM
    vrs = {r: _build(canonicalize(conj(*bodies))) for r, bodies in sorted(vr_bodies.items(), key=lambda kv: kv[0].sort_key())}
    nf = NormalForm(
        primitives=frozenset(prims),
        negated_primitives=frozenset(negs),
        value_restrictions=vrs,
        existentials=tuple((r, _build(body)) for r, body in raw_exists),
        min_card=min_card,
        max_card=max_card,
        disjunctions=tuple(ors),
        concept=c,
    )
    if any(nf.max_card.get(r, math.inf) < n for r, n in nf.min_card.items()):
        return _BOTTOM_FORM
    for r, body in nf.existentials:
        if _effective(nf, r, body).is_bottom:
            return _BOTTOM_FORM
    if len(nf.roles()) <= _MAX_UNIVERSE and not _counting(nf, frozenset()).feasible():
        return _BOTTOM_FORM
    return nf


def _effective(nf: NormalForm, role: RoleExpr, body: NormalForm) -> NormalForm:
    """The body an existential successor must satisfy, merged with reaching value restrictions."""
    reach = [b.concept for r, b in nf.value_restrictions.items() if r.primitives <= role.primitives]
    return _build(canonicalize(conj(body.concept, *reach)))


# ---------------------------------------------------------------------------
# successor counting

class _Counting:
    """Integer constraints on how many successors of each role type exist.

    Relaxed outside the exact fragment: existentials only count as
    (>= 1 R), and a type is excluded only when its body is provably empty.
    """

    def __init__(self, nf: NormalForm, universe: frozenset[str]):
        names = sorted(universe)
        every = [frozenset(s) for k in range(1, len(names) + 1) for s in itertools.combinations(names, k)]
        self.types = [t for t in every if not nf.body_for(t).is_bottom]
        ge = dict(nf.min_card)
        for r, _ in nf.existentials:
            ge[r] = max(ge.get(r, 0), 1)
        self.ge = [(r.primitives, n) for r, n in ge.items()]
        self.le = [(r.primitives, m) for r, m in nf.max_card.items()]
        self.cap = max([1] + [n for _, n in self.ge])
        self.upper = [min([m for s, m in self.le if s <= t], default=None) for t in self.types]

    def covering(self, prims: frozenset[str]) -> list[int]:
        return [i for i, t in enumerate(self.types) if prims <= t]

    def feasible(self) -> bool:
        return self._optimize(None, maximize=False) is not None

    def min_count(self, prims: frozenset[str]) -> int | None:
        """Fewest R-successors over all solutions; None when infeasible."""
        return self._optimize(self.covering(prims), maximize=False)

    def max_count(self, prims: frozenset[str]) -> float | None:
        """Most R-successors; math.inf when unbounded, None when infeasible."""
        idx = self.covering(prims)
        if not self.feasible():
            return None
        for i in idx:
            if self.upper[i] is None and self.possible(i):
                return math.inf
        return self._optimize(idx, maximize=True)

    def possible(self, i: int) -> bool:
        """Whether some solution has a successor of type i."""
        return self._optimize(None, maximize=False, force=i) is not None

    def _optimize(self, objective, maximize: bool, force: int | None = None):
        n = len(self.types)
        obj = set(objective or ())
        lo = [1 if i == force else 0 for i in range(n)]
        hi = []
        for i in range(n):
            if maximize and i in obj and self.upper[i] is not None:
                hi.append(self.upper[i])
            else:
                hi.append(self.cap if self.upper[i] is None else min(self.upper[i], self.cap))
        if any(h < l for h, l in zip(hi, lo)):
            return None
        rows = [([i for i, t in enumerate(self.types) if r <= t], n_, True) for r, n_ in self.ge]
        rows += [([i for i, t in enumerate(self.types) if s <= t], m, False) for s, m in self.le]
        space = math.prod(h - l + 1 for h, l in zip(hi, lo))
        if space <= _ENUMERATION_LIMIT:
            return _enumerate(lo, hi, rows, obj, maximize)
        return _milp(lo, hi, rows, obj, maximize)


def _enumerate(lo, hi, rows, obj, maximize):
    best = None
    for xs in itertools.product(*(range(l, h + 1) for l, h in zip(lo, hi))):
        ok = True
        for idx, bound, is_ge in rows:
            total = sum(xs[i] for i in idx)
            if (total < bound) if is_ge else (total > bound):
                ok = False
                break
        if not ok:
            continue
        value = sum(xs[i] for i in obj)
        if best is None or (value > best if maximize else value < best):
            best = value
    return best


def _milp(lo, hi, rows, obj, maximize):
    n = len(lo)
    if n == 0:
        return 0 if all((0 >= b) if g else (0 <= b) for _, b, g in rows) else None
    cost = np.array([(-1.0 if maximize else 1.0) if i in obj else 0.0 for i in range(n)])
    constraints = []
    for idx, bound, is_ge in rows:
        a = np.zeros(n)
        a[idx] = 1.0
        constraints.append(LinearConstraint(a, bound, np.inf) if is_ge else LinearConstraint(a, -np.inf, bound))
    res = milp(cost, constraints=constraints or None, integrality=np.ones(n), bounds=Bounds(lo, hi))
    if res.status != 0:
        return None
    return int(round(sum(res.x[i] for i in obj)))


@functools.lru_cache(maxsize=65536)
def _counting(nf: NormalForm, extra: frozenset[str]) -> _Counting:
    return _Counting(nf, frozenset(nf.roles()) | extra)


# ---------------------------------------------------------------------------
# comparison

def structural_subsumes(c: Concept, d: Concept, tbox: TBox | None = None, signature: Signature | None = None) -> SubsumptionVerdict:
    cf = normalize(c, tbox, signature)
    df = normalize(d, tbox, signature)
    result = _compare(cf, df)
    value = {True: Verdict.SUBSUMED, False: Verdict.NOT_SUBSUMED, None: Verdict.UNKNOWN}[result]
    return SubsumptionVerdict(value, Engine.STRUCTURAL)


@functools.lru_cache(maxsize=65536)
def _compare(c: NormalForm, d: NormalForm) -> bool | None:
    """True: c is subsumed by d. False: it is not (exact fragment only). None: unknown."""
    if c.is_bottom or d.concept == TOP:
        return True
    if c.disjunctions or d.disjunctions:
        return None
    exact = c.in_exact_fragment and d.in_exact_fragment
    failed = False if exact else None
    if d.is_bottom:
        return failed
    if not d.primitives <= c.primitives or not d.negated_primitives <= c.negated_primitives:
        return failed
    roles = c.roles() | d.roles()
    if len(roles) > _MAX_UNIVERSE:
        return None
    unknown = False
    for r, n in d.min_card.items():
        low = _counting(c, r.primitives).min_count(r.primitives)
        if low is None:
            return True
        if low < n:
            return failed
    for r, m in d.max_card.items():
        high = _counting(c, r.primitives).max_count(r.primitives)
        if high is None:
            return True
        if high > m:
            return failed
    for r, body in d.value_restrictions.items():
        verdict = _all_successors(c, r, body)
        if verdict is None:
            unknown = True
        elif not verdict:
            return failed
    for r, body in d.existentials:
        if not _implies_existential(c, r, body):
            unknown = True
    return None if unknown else True


def _all_successors(c: NormalForm, role: RoleExpr, target: NormalForm) -> bool | None:
    """Whether every R-successor in every model of c satisfies target."""
    counting = _counting(c, role.primitives)
    result: bool | None = True
    for i in counting.covering(role.primitives):
        if not counting.possible(i):
            continue
        verdict = _compare(c.body_for(counting.types[i]), target)
        if verdict is False:
            return False
        if verdict is None:
            result = None
    return result


def _implies_existential(c: NormalForm, role: RoleExpr, target: NormalForm) -> bool:
    for r, body in c.existentials:
        if role.primitives <= r.primitives and _compare(_effective(c, r, body), target) is True:
            return True
    low = _counting(c, role.primitives).min_count(role.primitives)
    return bool(low) and _all_successors(c, role, target) is True


def to_concept(nf: NormalForm) -> Concept:
    """The canonical expression a normal form stands for."""
    if nf.is_bottom:
        return BOTTOM
    parts: list[Concept] = [ConceptName(p) for p in sorted(nf.primitives)]
    parts += [Not(ConceptName(p)) for p in sorted(nf.negated_primitives)]
    parts += [All(r, to_concept(b)) for r, b in nf.value_restrictions.items()]
    parts += [Some(r, to_concept(b)) for r, b in nf.existentials]
    parts += [NumberRestriction(GE, n, r) for r, n in nf.min_card.items()]
    parts += [NumberRestriction(LE, m, r) for r, m in nf.max_card.items()]
    parts += list(nf.disjunctions)
    return canonicalize(conj(*parts))
