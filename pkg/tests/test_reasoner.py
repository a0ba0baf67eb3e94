import random

import pytest
from hypothesis import given

from adelog.concepts import (
    BOTTOM,
    TOP,
    ConceptName,
    RoleExpr,
    conj,
    disj,
)
from adelog.errors import ResourceLimit, UndefinedName
from adelog.reasoner import (
    Budget,
    Engine,
    Verdict,
    classify,
    instance_check,
    normalize,
    retrieve_instances,
    structural_subsumes,
    subsumes,
    tableau_satisfiable,
    tableau_subsumes,
)
from adelog.reasoner.structural import SubsumptionVerdict
from adelog.semantics import ModelSearchConfig, eval_concept, oracle_satisfiable, oracle_subsumes, satisfies_abox
from adelog.syntax import parse_concept, parse_kb

from gen import concepts, random_aln_concept, random_concept, random_pair, random_tbox_text
from oracles import reduction, subsumption_matrix

C1_BODY = "person and (all paper.technical) and (<= 6 paper) and (some paper.InformationTechnologies)"
PAPER_TEXT = f"""
primitive person; primitive technical; primitive InformationTechnologies;
role paper;
individual Rick; individual "Logics in Humanities";
C1 := {C1_BODY};
author := person and (> 0 paper);
paper(Rick, "Logics in Humanities");
(all paper.technical)(Rick);
"""
KB = parse_kb(PAPER_TEXT)
L = "Logics in Humanities"
paper = RoleExpr.of("paper")


def n(name):
    return ConceptName(name)


# ---------------------------------------------------------------------------
# normalize


def test_normalize_author():
    nf = normalize(n("author"), KB.tbox)
    assert nf.primitives == {"person"}
    assert nf.min_card == {paper: 1}
    assert not nf.is_bottom


def test_normalize_direct_clash():
    assert normalize(parse_concept("A and (not A)")).is_bottom


def test_normalize_card_clash():
    assert normalize(parse_concept("(>= 3 r) and (<= 2 r)")).is_bottom


def test_normalize_merges_value_restrictions():
    nf = normalize(parse_concept("(all paper.A) and (all paper.B)"))
    assert set(nf.value_restrictions) == {paper}
    assert nf.value_restrictions[paper].primitives == {"A", "B"}
    merged = parse_concept("all paper.(A and B)")
    assert oracle_subsumes(parse_concept("(all paper.A) and (all paper.B)"), merged).no_counterexample_found
    assert oracle_subsumes(merged, parse_concept("(all paper.A) and (all paper.B)")).no_counterexample_found


def test_normalize_keeps_disjunctions():
    nf = normalize(parse_concept("A and (B or C)"))
    assert len(nf.disjunctions) == 1
    assert not normalize(parse_concept("A and B")).disjunctions


def test_normalize_bottom_form_is_empty():
    nf = normalize(BOTTOM)
    assert nf.is_bottom and not nf.primitives and not nf.min_card


@given(concepts())
def test_normal_form_invariants(c):
    nf = normalize(c)
    if nf.is_bottom:
        assert not (nf.primitives or nf.negated_primitives or nf.value_restrictions or nf.existentials)
        assert not (nf.min_card or nf.max_card or nf.disjunctions)
    else:
        assert all(v >= 1 for v in nf.min_card.values())


# ---------------------------------------------------------------------------
# structural


def test_structural_c1_author():
    v = structural_subsumes(n("C1"), n("author"), KB.tbox)
    assert v.value is Verdict.SUBSUMED and v.engine is Engine.STRUCTURAL


def test_structural_unknown_on_disjunction():
    v = structural_subsumes(n("A"), parse_concept("A or B"))
    assert v.value is Verdict.UNKNOWN


def test_structural_projection():
    assert structural_subsumes(parse_concept("A and B"), n("A")).subsumed


def test_structural_role_conjunction_direction():
    # more conjoined primitives, smaller relation
    assert structural_subsumes(parse_concept("(>= 2 (r and s))"), parse_concept("(>= 2 r)")).subsumed
    assert structural_subsumes(parse_concept("(<= 1 r)"), parse_concept("(<= 1 (r and s))")).subsumed
    assert not structural_subsumes(parse_concept("(>= 2 r)"), parse_concept("(>= 2 (r and s))")).subsumed
    assert structural_subsumes(parse_concept("all r.A"), parse_concept("all (r and s).A")).subsumed


def test_structural_counting_across_restrictions():
    # three r-successors in A, at most two r-successors total: impossible
    c = parse_concept("(all r.A) and (>= 3 r) and (<= 2 r)")
    assert structural_subsumes(c, BOTTOM).subsumed


def test_verdict_invariants():
    with pytest.raises(ValueError):
        SubsumptionVerdict(Verdict.UNKNOWN, Engine.TABLEAU)
    with pytest.raises(ValueError):
        SubsumptionVerdict(Verdict.SUBSUMED, Engine.TABLEAU, witness=object())


# ---------------------------------------------------------------------------
# tableau


def test_counting_clash():
    assert not tableau_satisfiable(parse_concept("(>= 2 paper) and (<= 1 paper)"))


def test_c1_satisfiable_two_elements():
    result = tableau_satisfiable(n("C1"), KB.tbox)
    assert result.satisfiable
    model = result.model
    assert len(model.domain) == 2
    assert 0 in eval_concept(n("C1"), model, KB.tbox)


def test_role_conjunction_reaches_value_restriction():
    c = parse_concept("(some (p1 and p2).A) and (all p1.(not A))")
    assert not tableau_satisfiable(c)
    assert oracle_satisfiable(c, cfg=ModelSearchConfig(3)).no_counterexample_found


def test_at_least_creates_distinct_successors():
    c = parse_concept("(>= 3 r) and (all r.A)")
    result = tableau_satisfiable(c)
    assert result.satisfiable and 0 in eval_concept(c, result.model)


def test_merge_under_at_most():
    c = parse_concept("(some r.A) and (some r.B) and (<= 1 r)")
    result = tableau_satisfiable(c)
    assert result.satisfiable
    assert 0 in eval_concept(c, result.model)
    assert not tableau_satisfiable(parse_concept("(some r.A) and (some r.(not A)) and (<= 1 r)"))


def test_node_budget():
    c = parse_concept("(>= 50 r) and (all r.((>= 50 s)))")
    with pytest.raises(ResourceLimit):
        tableau_satisfiable(c, budget=Budget(max_nodes=100))


def test_env_budget(monkeypatch):
    c = parse_concept("(>= 50 r)")
    monkeypatch.setenv("ADELOG_BUDGET", "10")
    with pytest.raises(ResourceLimit):
        tableau_satisfiable(c)
    monkeypatch.setenv("ADELOG_BUDGET", "1000:50")
    assert Budget.from_env() == Budget(1000, 50)
    assert tableau_satisfiable(c)
    monkeypatch.delenv("ADELOG_BUDGET")
    assert Budget.from_env() == Budget()


def test_deterministic_witness():
    c = parse_concept("(A or B) and (some r.(C or D)) and (<= 2 r)")
    assert tableau_satisfiable(c).model == tableau_satisfiable(c).model


@pytest.mark.parametrize("seed", range(3))
def test_extracted_models_verify(seed):
    rng = random.Random(seed)
    for _ in range(200):
        c = random_concept(rng, 4)
        result = tableau_satisfiable(c)
        if result.satisfiable:
            assert 0 in eval_concept(c, result.model), c
        else:
            assert oracle_satisfiable(c, cfg=ModelSearchConfig(2)).no_counterexample_found, c


# ---------------------------------------------------------------------------
# subsumes


def test_subsumes_c1_author():
    v = subsumes(n("C1"), n("author"), KB.tbox)
    assert v.subsumed and v.engine is Engine.STRUCTURAL


def test_subsumes_person_author_witness():
    v = subsumes(n("person"), n("author"), KB.tbox)
    assert v.value is Verdict.NOT_SUBSUMED
    w = v.witness
    assert 0 in eval_concept(n("person"), w, KB.tbox)
    assert 0 not in eval_concept(n("author"), w, KB.tbox)
    assert oracle_subsumes(n("person"), n("author"), KB.tbox).not_subsumed


def test_subsumes_disjunction_by_tableau():
    v = subsumes(n("A"), parse_concept("A or B"))
    assert v.subsumed and v.engine is Engine.TABLEAU


def test_engines():
    v = subsumes(n("A"), parse_concept("A or B"), engine="structural")
    assert v.value is Verdict.UNKNOWN
    assert subsumes(n("C1"), n("author"), KB.tbox, engine="tableau").engine is Engine.TABLEAU
    with pytest.raises(ValueError):
        subsumes(n("A"), n("A"), engine="guess")


def test_preorder_on_triples():
    rng = random.Random(4)
    for _ in range(150):
        a, b, c = (random_concept(rng, 2, names=("A", "B"), roles=("r",), max_n=2) for _ in range(3))
        assert subsumes(a, a).subsumed
        if subsumes(a, b).subsumed and subsumes(b, c).subsumed:
            assert subsumes(a, c).subsumed
    # chains built to be transitive
    for _ in range(100):
        c = random_concept(rng, 3)
        b = disj(c, random_concept(rng, 2))
        a = conj(c, random_concept(rng, 2))
        assert subsumes(a, c).subsumed and subsumes(c, b).subsumed and subsumes(a, b).subsumed


def test_structural_sound_and_exact_on_fragment():
    rng = random.Random(9)
    for _ in range(150):
        c, d = random_pair(rng, random_aln_concept)
        s = structural_subsumes(c, d)
        t = tableau_subsumes(c, d)
        assert s.value is not Verdict.UNKNOWN
        assert s.subsumed == t.subsumed, (c, d)
    for _ in range(150):
        c, d = random_pair(rng, random_concept)
        if structural_subsumes(c, d).subsumed:
            assert tableau_subsumes(c, d).subsumed, (c, d)


# ---------------------------------------------------------------------------
# classify


def test_classify_paper_chain():
    tax = classify(KB)
    assert tax.parents("C1") == {"author"}
    assert tax.parents("author") == {"person"}
    assert tax.parents("person") == {"TOP"}
    assert tax.children("BOTTOM") == set()


def test_classify_single_primitive():
    tax = classify(parse_kb("primitive A;"))
    assert tax.parents("A") == {"TOP"}
    assert tax.children("A") == {"BOTTOM"}


def test_classify_equivalence():
    tax = classify(parse_kb("primitive A; role r; X := A and (some r.A); Y := (some r.A) and A;"))
    assert tax.equivalence_classes == [frozenset({"X", "Y"})]
    assert tax.representative("Y") == "X"


def test_classify_unsatisfiable_name_joins_bottom():
    tax = classify(parse_kb("primitive A; X := A and (not A);"))
    assert tax.representative("X") == "BOTTOM"


def test_classify_outputs_deterministic():
    tax = classify(KB)
    assert tax.format_text().splitlines()[0] == "TOP"
    assert "C1 -> author" in tax.format_text()
    assert tax.to_dot().startswith("digraph taxonomy {")
    assert tax.to_dot() == classify(KB).to_dot()
    assert tax.to_json_lines() == classify(KB).to_json_lines()


def test_classify_structural_engine_gives_up_on_disjunction():
    kb = parse_kb("primitive A; primitive B; X := A or B;")
    with pytest.raises(ResourceLimit):
        classify(kb, engine="structural")
    assert classify(kb).parents("A") == {"X"}


@pytest.mark.parametrize("seed", range(3))
def test_classify_matches_reduction_twenty_names(seed):
    rng = random.Random(100 + seed)
    kb = parse_kb(random_tbox_text(rng, 20, primitives=5))
    tax = classify(kb)
    classes, edges = reduction(subsumption_matrix(kb))
    assert tax.classes == classes
    assert set(tax.edges) == edges


# ---------------------------------------------------------------------------
# instances


def test_instance_l_technical():
    assert instance_check(KB, L, n("technical")).entailed


def test_instance_rick_has_paper():
    assert instance_check(KB, "Rick", parse_concept("(>= 1 paper)")).entailed


def test_instance_rick_technical_witness():
    result = instance_check(KB, "Rick", n("technical"))
    assert not result.entailed
    w = result.witness
    mapping = {a: a for a in KB.signature.individuals}
    assert satisfies_abox(KB, w, mapping)
    assert "Rick" not in eval_concept(n("technical"), w, KB.tbox)


def test_instance_undeclared():
    with pytest.raises(UndefinedName):
        instance_check(KB, "Nobody", TOP)
    with pytest.raises(UndefinedName):
        instance_check(KB, "Rick", n("Unknown"))


def test_retrieve():
    assert retrieve_instances(KB, parse_concept("(>= 1 paper)")) == {"Rick"}
    assert retrieve_instances(KB, TOP) == KB.signature.individuals
    assert retrieve_instances(KB, BOTTOM) == frozenset()


def test_unique_names_block_merging():
    kb = parse_kb("role r; individual a; individual b; individual c; r(a, b); r(a, c); (<= 1 r)(a);")
    from adelog.reasoner import abox_consistent

    assert not abox_consistent(kb)
    assert retrieve_instances(kb, BOTTOM) == kb.signature.individuals


def test_entailment_monotone():
    rng = random.Random(2)
    base = parse_kb(PAPER_TEXT + "individual Anna;")
    queries = [parse_concept(t) for t in ("technical", "(>= 1 paper)", "person", "all paper.technical", "(<= 1 paper)")]
    extras = [
        "person(Rick);",
        'technical("Logics in Humanities");',
        "paper(Anna, Rick);",
        "(<= 1 paper)(Rick);",
        "(all paper.person)(Anna);",
        "(not technical)(Anna);",
    ]
    for _ in range(10):
        chosen = rng.sample(extras, rng.randint(1, 3))
        bigger = parse_kb(PAPER_TEXT + "individual Anna;" + "".join(chosen))
        for a in sorted(base.signature.individuals):
            for q in queries:
                if instance_check(base, a, q).entailed:
                    assert instance_check(bigger, a, q).entailed
