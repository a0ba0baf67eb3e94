"""One test per acceptance criterion; each prints a single PASS/FAIL line.

Tolerances are pinned as module constants next to the test that uses them.
"""

import itertools
import json
import random
import time
from pathlib import Path

import numpy as np

from adelog.concepts import ConceptName, Not, TBox, canonicalize, conj, nnf, rewrite_number_restrictions, unfold
from adelog.errors import NoSuchIndividual, NotUnique
from adelog.reasoner import Verdict, classify, instance_check, structural_subsumes, tableau_satisfiable, tableau_subsumes
from adelog.semantics import ModelSearchConfig, eval_concept, eval_role, oracle_satisfiable, oracle_subsumes, satisfies_abox
from adelog.syntax import parse_concept, parse_kb, parse_program
from adelog.views import describe, new_world_line

from acceptance_log import verdict
from exhaustive import Space
from gen import random_aln_concept, random_concept, random_pair, random_tbox_text
from golden_cases import CASES, codes_path, invoke, normalized, output_path
from oracles import reduction, subsumption_matrix
from semantics_cases import CASES as SEMANTIC_CASES
from semantics_cases import EQUATIONS, target_value
from world_sim import run_sequence

FIXTURE = Path(__file__).parent / "fixtures" / "paper.adl"
L = "Logics in Humanities"


def fixture_kb():
    return parse_program(FIXTURE.read_text()).kb


# ---------------------------------------------------------------------------
# 1. worked example

AC1_MAX_SECONDS = 1.0
AC1_ORACLE_SIZE = 4


def test_ac1_paper_example():
    start = time.perf_counter()
    kb = fixture_kb()
    s = structural_subsumes(ConceptName("C1"), ConceptName("author"), kb.tbox)
    o = oracle_subsumes(ConceptName("C1"), ConceptName("author"), kb.tbox, ModelSearchConfig(AC1_ORACLE_SIZE))
    elapsed = time.perf_counter() - start
    ok = s.value is Verdict.SUBSUMED and o.no_counterexample_found and elapsed < AC1_MAX_SECONDS
    verdict(
        "AC1",
        ok,
        f"structural {s.value.name}, oracle counterexample up to size {AC1_ORACLE_SIZE}: "
        f"{'none' if o.no_counterexample_found else 'found'}, {elapsed:.3f}s (limit {AC1_MAX_SECONDS}s)",
    )


# ---------------------------------------------------------------------------
# 2. semantics of each constructor

AC2_SIZES = {1, 2, 3}
AC2_REQUIRED_TAGS = {"vacuous", "boundary"}


def test_ac2_semantics_equations():
    failures = [c.label for c in SEMANTIC_CASES if target_value(c, eval_concept, eval_role) != c.expected]
    covered = {(c.equation, c.size) for c in SEMANTIC_CASES}
    missing = sorted(set(itertools.product(EQUATIONS, AC2_SIZES)) - covered)
    tags = set().union(*(c.tags for c in SEMANTIC_CASES))
    ok = not failures and not missing and AC2_REQUIRED_TAGS <= tags
    verdict(
        "AC2",
        ok,
        f"{len(SEMANTIC_CASES)} hand cases, {len(EQUATIONS) * len(AC2_SIZES) - len(missing)}/"
        f"{len(EQUATIONS) * len(AC2_SIZES)} equation x size cells, wrong {failures}, missing {missing}, "
        f"tags {sorted(tags & AC2_REQUIRED_TAGS)}",
    )


# ---------------------------------------------------------------------------
# 3. engines agree with each other and with the oracle

AC3_PAIRS = 1000
AC3_MAX_SECONDS = 60.0
AC3_ORACLE_SIZE = 3


def test_ac3_engine_agreement():
    rng = random.Random(2024)
    start = time.perf_counter()
    violations = {"a": [], "b": [], "c": []}
    counts = {"structural_subsumed": 0, "sat": 0, "unsat": 0}
    for _ in range(AC3_PAIRS):
        c, d = random_pair(rng, random_concept, depth=4, max_n=3)
        if structural_subsumes(c, d).value is Verdict.SUBSUMED:
            counts["structural_subsumed"] += 1
            if not tableau_subsumes(c, d).subsumed:
                violations["a"].append((c, d))
        for probe in (c, d, conj(c, Not(d))):
            result = tableau_satisfiable(probe)
            if result.satisfiable:
                counts["sat"] += 1
                if 0 not in eval_concept(probe, result.model):
                    violations["b"].append(probe)
            else:
                counts["unsat"] += 1
                if not oracle_satisfiable(probe, cfg=ModelSearchConfig(AC3_ORACLE_SIZE)).no_counterexample_found:
                    violations["c"].append(probe)
    elapsed = time.perf_counter() - start
    bad = {k: len(v) for k, v in violations.items()}
    ok = not any(bad.values()) and elapsed < AC3_MAX_SECONDS
    verdict(
        "AC3",
        ok,
        f"{AC3_PAIRS} pairs, {counts}, violations {bad}, {elapsed:.1f}s (limit {AC3_MAX_SECONDS}s)",
    )


# ---------------------------------------------------------------------------
# 4. structural engine is complete on the and/all/number fragment

AC4_PAIRS = 500


def test_ac4_structural_complete_on_fragment():
    rng = random.Random(77)
    unknown, mismatch, subsumed = [], [], 0
    for _ in range(AC4_PAIRS):
        c, d = random_pair(rng, random_aln_concept)
        s = structural_subsumes(c, d)
        if s.value is Verdict.UNKNOWN:
            unknown.append((c, d))
            continue
        t = tableau_subsumes(c, d)
        subsumed += t.subsumed
        if s.subsumed != t.subsumed:
            mismatch.append((c, d))
    ok = not unknown and not mismatch
    verdict(
        "AC4",
        ok,
        f"{AC4_PAIRS} pairs ({subsumed} subsumed), unknown {len(unknown)}, disagreements {len(mismatch)} (tolerance 0)",
    )


# ---------------------------------------------------------------------------
# 5. rewrites preserve extensions, checked on every interpretation

AC5_MAX_SIZE = 3
AC5_RANDOM = 300
# definitions over the two primitives; Y refers to X
AC5_TBOX = TBox(
    (
        ("X", parse_concept("A and (some r.(not B))")),
        ("Y", parse_concept("(<= 1 r) or (X and (all r.B))")),
    )
)

AC5_HAND = [
    "not (A and B)",
    "not (A or (not B))",
    "not (all r.A)",
    "not (some r.(A and B))",
    "not not A",
    "not TOP",
    "not BOTTOM",
    "A and TOP and A",
    "A or BOTTOM or (B or A)",
    "A and BOTTOM",
    "(A and B) and (B and A)",
    "all r.TOP",
    "some r.BOTTOM",
] + [f"{neg}({op} {n} r)" for neg in ("", "not ") for op in ("<", "<=", "=", ">=", ">") for n in range(4)]


def ac5_corpus(names):
    rng = random.Random(5)
    out = [parse_concept(t) for t in AC5_HAND]
    out += [random_concept(rng, 3, names=names, roles=("r",), max_n=3) for _ in range(AC5_RANDOM)]
    return out


def defined_space(k):
    """A space over A, B and r where X and Y take the extension their bodies force."""
    sp = Space(("A", "B"), ("r",), k)
    for name, body in AC5_TBOX.definitions:
        sp.ext[name] = sp.eval(body)
    return sp


def test_ac5_rewrites_preserve_extensions():
    rewrites = {
        "canonicalize": (canonicalize, ("A", "B")),
        "nnf": (nnf, ("A", "B")),
        "rewrite_number_restrictions": (rewrite_number_restrictions, ("A", "B")),
        "unfold": (lambda c: unfold(c, AC5_TBOX), ("A", "B", "X", "Y")),
    }
    failures, checked, interps = {}, 0, 0
    for name, (f, names) in rewrites.items():
        bad = 0
        for k in range(1, AC5_MAX_SIZE + 1):
            sp = defined_space(k) if name == "unfold" else Space(("A", "B"), ("r",), k)
            interps += sp.size if name == "canonicalize" else 0
            for c in ac5_corpus(names):
                checked += 1
                if not np.array_equal(sp.eval(c), sp.eval(f(c))):
                    bad += 1
        failures[name] = bad
    ok = not any(failures.values())
    verdict(
        "AC5",
        ok,
        f"{checked} concept checks over all {interps} interpretations of size <= {AC5_MAX_SIZE}, "
        f"failures {failures} (tolerance 0)",
    )


# ---------------------------------------------------------------------------
# 6. classification against the pairwise matrix

AC6_TBOXES = 50
AC6_MAX_NAMES = 12


def test_ac6_classification():
    rng = random.Random(606)
    wrong = []
    for i in range(AC6_TBOXES):
        size = rng.randint(4, AC6_MAX_NAMES)
        kb = parse_kb(random_tbox_text(rng, size, primitives=min(4, size)))
        tax = classify(kb)
        classes, edges = reduction(subsumption_matrix(kb))
        if tax.classes != classes or set(tax.edges) != edges:
            wrong.append(i)
    verdict("AC6", not wrong, f"{AC6_TBOXES} TBoxes of <= {AC6_MAX_NAMES} names, mismatched {wrong} (tolerance 0)")


# ---------------------------------------------------------------------------
# 7. instance checks on the worked example


def test_ac7_abox_fixture():
    kb = fixture_kb()
    technical = ConceptName("technical")
    l_result = instance_check(kb, L, technical)
    rick = instance_check(kb, "Rick", technical)
    w = rick.witness
    witness_ok = (
        w is not None
        and satisfies_abox(kb, w, {a: a for a in kb.signature.individuals})
        and "Rick" not in eval_concept(technical, w, kb.tbox)
    )
    ok = l_result.entailed and not rick.entailed and witness_ok
    verdict(
        "AC7",
        ok,
        f"technical({L}) {'Entailed' if l_result.entailed else 'NotEntailed'}, "
        f"technical(Rick) {'Entailed' if rick.entailed else 'NotEntailed'}, witness verified {witness_ok}",
    )


# ---------------------------------------------------------------------------
# 8. view coherence under random event sequences

AC8_SEQUENCES = 100
AC8_MAX_LENGTH = 50


def test_ac8_view_coherence():
    rng = random.Random(8)
    events = injected = 0
    problems = []
    for _ in range(AC8_SEQUENCES):
        n, bad, found = run_sequence(rng, rng.randint(1, AC8_MAX_LENGTH))
        events += n
        injected += bad
        problems += found
    ok = not problems and injected > 0
    verdict(
        "AC8",
        ok,
        f"{AC8_SEQUENCES} sequences, {events} events, {injected} injected faults, "
        f"problems {len(problems)} {problems[:3]} (tolerance 0)",
    )


# ---------------------------------------------------------------------------
# 9. definite descriptions

AC9_INDIVIDUALS = ("a", "b", "c")
AC9_CARDINALITIES = (0, 1, 2)


def test_ac9_definite_description():
    body = ConceptName("A")
    checked, wrong = 0, []
    for size in AC9_CARDINALITIES:
        for ext in itertools.combinations(AC9_INDIVIDUALS, size):
            text = "primitive A; " + " ".join(f"individual {n};" for n in AC9_INDIVIDUALS)
            text += "".join(f"A({n});" for n in ext)
            wl = new_world_line(parse_kb(text))
            if wl.extension(body) != set(ext):
                wrong.append(("extension", ext))
                continue
            try:
                got = describe(wl, body)
                error = None
            except (NoSuchIndividual, NotUnique) as e:
                got, error = None, type(e)
            expected_error = {0: NoSuchIndividual, 1: None, 2: NotUnique}[size]
            if error is not expected_error:
                wrong.append(("error", ext))
            for a in AC9_INDIVIDUALS:
                checked += 1
                if (got == a) != (set(ext) == {a}):
                    wrong.append((a, ext))
    verdict("AC9", not wrong, f"{checked} biconditional instances over cardinalities {AC9_CARDINALITIES}, wrong {wrong}")


# ---------------------------------------------------------------------------
# 10. CLI goldens and exit codes


def test_ac10_cli_goldens():
    codes = json.loads(codes_path().read_text())
    unstable, mismatched = [], []
    for name, args in sorted(CASES.items()):
        first, second = invoke(args), invoke(args)
        if first.output != second.output or first.exit_code != second.exit_code:
            unstable.append(name)
        if normalized(first.output) != output_path(name).read_text() or first.exit_code != codes[name]:
            mismatched.append(name)
    by_code = {}
    for name, code in codes.items():
        by_code.setdefault(code, set()).add(outcome(output_path(name).read_text()))
    partition_ok = all(len(kinds) == 1 for kinds in by_code.values()) and len(by_code) == len(
        set().union(*by_code.values())
    )
    ok = not unstable and not mismatched and partition_ok
    verdict(
        "AC10",
        ok,
        f"{len(CASES)} goldens, unstable {unstable}, mismatched {mismatched}, "
        f"exit codes {dict(sorted((c, sorted(k)) for c, k in by_code.items()))}",
    )


def outcome(text: str) -> str:
    first = text.split("\n")[0]
    if first.startswith("{") and "verdict" in first:
        first = json.loads(first)["verdict"].upper().replace("_", " ")
    if first.startswith("error:"):
        return "usage"
    if first.startswith("resource limit"):
        return "limit"
    if first.startswith(("NOT ", "UNSATISFIABLE")):
        return "no"
    return "yes"
