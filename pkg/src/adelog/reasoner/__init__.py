"""Structural and tableau reasoning, classification and instance checking."""

from adelog.reasoner.services import (
    Taxonomy,
    InstanceResult,
    abox_consistent,
    classify,
    instance_check,
    retrieve_instances,
    subsumes,
    tableau_subsumes,
)
from adelog.reasoner.structural import (
    Engine,
    NormalForm,
    SubsumptionVerdict,
    Verdict,
    normalize,
    structural_subsumes,
)
from adelog.reasoner.tableau import Budget, Satisfiability, abox_satisfiable, tableau_satisfiable

__all__ = [
    "Budget",
    "Engine",
    "InstanceResult",
    "NormalForm",
    "Satisfiability",
    "SubsumptionVerdict",
    "Taxonomy",
    "Verdict",
    "abox_consistent",
    "abox_satisfiable",
    "classify",
    "instance_check",
    "normalize",
    "retrieve_instances",
    "structural_subsumes",
    "subsumes",
    "tableau_satisfiable",
    "tableau_subsumes",
]
