"""adelog: a description-logic reasoner with worlds, events and views."""

from adelog.concepts import (
    ABox,
    KnowledgeBase,
    Signature,
    TBox,
)
from adelog.syntax import parse_concept, parse_kb, parse_program, print_concept

__version__ = "0.1.0"

__all__ = ["ABox", "KnowledgeBase", "Signature", "TBox", "parse_concept", "parse_kb", "parse_program", "print_concept"]
