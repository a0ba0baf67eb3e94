"""Exception hierarchy shared by every adelog module."""

from __future__ import annotations

from dataclasses import dataclass


class AdelogError(Exception):
    """Base class for all errors raised by adelog."""


@dataclass(frozen=True)
class SourceSpan:
    """A 1-based position in source text."""

    line: int
    column: int
    length: int = 0

    def __post_init__(self) -> None:
        if self.line < 1 or self.column < 1 or self.length < 0:
            raise ValueError(f"invalid span {self.line}:{self.column}+{self.length}")

    def __str__(self) -> str:
        return f"{self.line}:{self.column}"


class ParseError(AdelogError):
    def __init__(self, span: SourceSpan, expected: list[str], found: str, message: str = ""):
        if not expected:
            raise ValueError("ParseError needs at least one expected token description")
        self.span = span
        self.expected = list(expected)
        self.found = found
        detail = message or f"expected {' or '.join(self.expected)}, found {found}"
        super().__init__(f"{span}: {detail}")


class SignatureError(AdelogError):
    """Common base for signature-level name problems; may carry a span."""

    def __init__(self, name: str, message: str = "", span: SourceSpan | None = None):
        self.name = name
        self.span = span
        text = message or self.default_message(name)
        if span is not None:
            text = f"{span}: {text}"
        super().__init__(text)


    @staticmethod
    def default_message(name: str) -> str:
        return f"bad name {name!r}"


class UndefinedName(SignatureError):
    @staticmethod
    def default_message(name: str) -> str:
        return f"undefined name {name!r}"


class RedefinedName(SignatureError):
    @staticmethod
    def default_message(name: str) -> str:
        return f"name {name!r} is already defined"


class CyclicTBox(AdelogError):
    def __init__(self, cycle: list[str]):
        self.cycle = list(cycle)
        super().__init__("cyclic definition: " + " -> ".join(cycle))


class BudgetExceeded(AdelogError):
    """Model enumeration would exceed the configured cap."""


class ResourceLimit(AdelogError):
    """The tableau ran out of its node or branch budget."""


class UnknownView(AdelogError):
    pass


class UnknownWorld(AdelogError):
    pass


class UnknownEvent(AdelogError):
    pass


class EvolverViolation(AdelogError):
    pass


class NoSuchIndividual(AdelogError):
    pass


class NotUnique(AdelogError):
    def __init__(self, individuals):
        self.individuals = frozenset(individuals)
        super().__init__("description is not unique: " + ", ".join(sorted(self.individuals)))


class IntegrityError(AdelogError):
    def __init__(self, view: str, message: str = ""):
        self.view = view
        super().__init__(message or f"cache of view {view!r} disagrees with recomputation")
