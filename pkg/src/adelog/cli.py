"""Command-line front end: batch commands and an interactive session.

Exit codes: 0 positive answer, 1 negative answer, 2 usage or input error,
3 resource limit (or an undecided structural-only verdict).
"""

from __future__ import annotations

import functools
import json
import shlex
import sys
from typing import Callable, TextIO

import click

from adelog.concepts import ABox, Concept, KnowledgeBase, Signature, TBox, check_concept
from adelog.errors import AdelogError, BudgetExceeded, ResourceLimit
from adelog.reasoner.services import (
    ENGINES,
    abox_consistent,
    classify,
    instance_check,
    retrieve_instances,
    subsumes,
)
from adelog.reasoner.structural import Verdict
from adelog.reasoner.tableau import Budget, tableau_satisfiable
from adelog.semantics import (
    Interpretation,
    ModelSearchConfig,
    element_key,
    format_interpretation,
    oracle_subsumes,
)
from adelog.syntax import Parser, parse_concept, parse_concepts, parse_program, quote_name
from adelog.views import (
    VIRTUAL,
    WorldLine,
    define_view,
    describe,
    fire_event,
    new_world_line,
    query_view,
    restore,
    snapshot,
    world_line_from_program,
)

EXIT_YES, EXIT_NO, EXIT_USAGE, EXIT_LIMIT = 0, 1, 2, 3
FORMATS = ("text", "dot", "json-lines")


class Outcome:
    """Printed text plus the exit code it maps to."""

    def __init__(self, text: str, code: int = EXIT_YES):
        self.text = text
        self.code = code


# ---------------------------------------------------------------------------
# rendering

def interpretation_json(interp: Interpretation) -> dict:
    def pairs(ext):
        return [list(p) for p in sorted(ext, key=lambda p: (element_key(p[0]), element_key(p[1])))]

    return {
        "domain": sorted(interp.domain, key=element_key),
        "concepts": {n: sorted(e, key=element_key) for n, e in sorted(interp.concept_ext.items())},
        "roles": {n: pairs(e) for n, e in sorted(interp.role_ext.items())},
    }


def _indent(text: str) -> str:
    return "\n".join("  " + line for line in text.splitlines())


def render_verdict(label: str, engine: str, witness: Interpretation | None, fmt: str, code: int, batch: bool = True) -> Outcome:
    if fmt == "json-lines":
        record = {"verdict": label.lower().replace(" ", "_"), "engine": engine}
        record["witness"] = interpretation_json(witness) if witness is not None else None
        return Outcome(json.dumps(record, sort_keys=True), code)
    head = f"{label} (engine: {engine})" if batch else f"{label} ({engine})"
    if witness is not None:
        head += "\nwitness:\n" + _indent(format_interpretation(witness))
    return Outcome(head, code)


_LABELS = {
    Verdict.SUBSUMED: ("SUBSUMED", EXIT_YES),
    Verdict.NOT_SUBSUMED: ("NOT SUBSUMED", EXIT_NO),
    Verdict.UNKNOWN: ("UNKNOWN", EXIT_LIMIT),
}


# ---------------------------------------------------------------------------
# services shared by batch commands and the session

def run_subsumes(wl: WorldLine, c: Concept, d: Concept, engine: str, fmt: str = "text", batch: bool = True) -> Outcome:
    for x in (c, d):
        check_concept(x, wl.signature, wl.tbox)
    verdict = subsumes(c, d, wl.tbox, wl.budget, engine, wl.signature)
    label, code = _LABELS[verdict.value]
    return render_verdict(label, verdict.engine.value, verdict.witness, fmt, code, batch)


def run_satisfiable(wl: WorldLine, c: Concept, fmt: str = "text", batch: bool = True) -> Outcome:
    check_concept(c, wl.signature, wl.tbox)
    result = tableau_satisfiable(c, wl.tbox, wl.budget, wl.signature)
    if result.satisfiable:
        return render_verdict("SATISFIABLE", "tableau", result.model, fmt, EXIT_YES, batch)
    return render_verdict("UNSATISFIABLE", "tableau", None, fmt, EXIT_NO, batch)


def run_instance(wl: WorldLine, a: str, c: Concept, fmt: str = "text", batch: bool = True) -> Outcome:
    result = instance_check(wl.kb(), a, c, wl.budget)
    if result.entailed:
        return render_verdict("ENTAILED", "tableau", None, fmt, EXIT_YES, batch)
    return render_verdict("NOT ENTAILED", "tableau", result.witness, fmt, EXIT_NO, batch)


def run_instances(wl: WorldLine, c: Concept, fmt: str = "text") -> Outcome:
    members = sorted(retrieve_instances(wl.kb(), c, wl.budget))
    if fmt == "json-lines":
        return Outcome("\n".join(json.dumps({"individual": a}) for a in members))
    return Outcome("\n".join(quote_name(a) for a in members))


def run_oracle(wl: WorldLine, c: Concept, d: Concept, max_domain: int, fmt: str = "text", batch: bool = True) -> Outcome:
    for x in (c, d):
        check_concept(x, wl.signature, wl.tbox)
    result = oracle_subsumes(c, d, wl.tbox, ModelSearchConfig(max_domain), wl.signature)
    if result.not_subsumed:
        return render_verdict("NOT SUBSUMED", "oracle", result.witness, fmt, EXIT_NO, batch)
    return render_verdict(f"NO COUNTEREXAMPLE UP TO SIZE {max_domain}", "oracle", None, fmt, EXIT_YES, batch)


def run_classify(wl: WorldLine, fmt: str = "text") -> Outcome:
    taxonomy = classify(wl.kb(), wl.budget)
    if fmt == "dot":
        return Outcome(taxonomy.to_dot())
    if fmt == "json-lines":
        return Outcome(taxonomy.to_json_lines())
    return Outcome(taxonomy.format_text())


def run_check(wl: WorldLine) -> Outcome:
    sig = wl.signature
    counts = (
        f"primitives {len(sig.primitive_concepts)}, roles {len(sig.roles)}, "
        f"individuals {len(sig.individuals)}, definitions {len(wl.tbox.definitions)}, "
        f"assertions {len(wl.worlds[wl.current])}"
    )
    if abox_consistent(wl.kb(), wl.budget):
        return Outcome(f"OK: {counts}")
    return Outcome(f"INCONSISTENT: {counts}", EXIT_NO)


def empty_world_line(budget: Budget | None = None) -> WorldLine:
    return new_world_line(KnowledgeBase(Signature(), TBox(), ABox()), budget=budget)


def load_world_line(path: str, budget: Budget | None = None) -> WorldLine:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    try:
        return world_line_from_program(parse_program(text), budget)
    except (ResourceLimit, BudgetExceeded):
        raise
    except AdelogError as exc:
        raise _located(exc, f"{path}:")


def _located(exc: AdelogError, prefix: str) -> AdelogError:
    exc.args = (f"{prefix}{exc}",)
    return exc


def _argument(text: str, label: str) -> Concept:
    try:
        return parse_concept(text)
    except AdelogError as exc:
        raise _located(exc, f"argument {label}: ")


# ---------------------------------------------------------------------------
# batch commands

def _budget(nodes: int | None) -> Budget:
    base = Budget.from_env()
    return base if nodes is None else Budget(nodes, base.max_branches)


def _emit(action: Callable[[], Outcome]) -> None:
    """Run action, print its output, and exit with the mapped code."""
    try:
        outcome = action()
    except (ResourceLimit, BudgetExceeded) as exc:
        click.echo(f"resource limit: {exc}", err=True)
        sys.exit(EXIT_LIMIT)
    except (AdelogError, ValueError, OSError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_USAGE)
    if outcome.text:
        click.echo(outcome.text)
    sys.exit(outcome.code)


def _with_kb(fn):
    @functools.wraps(fn)
    def wrapper(ctx, file, *args, **kwargs):
        _emit(lambda: fn(load_world_line(file, ctx.obj["budget"]), *args, **kwargs))

    return wrapper


FILE = click.argument("file", type=click.Path(exists=True, dir_okay=False))
FORMAT = click.option("--format", "fmt", type=click.Choice(FORMATS), default="text", show_default=True)


@click.group()
@click.option("--budget-nodes", type=click.IntRange(min=1), default=None, help="Tableau node budget.")
@click.pass_context
def cli(ctx, budget_nodes):
    """Description-logic reasoning over .adl knowledge bases."""
    ctx.ensure_object(dict)
    ctx.obj["budget"] = _budget(budget_nodes)


@cli.command()
@FILE
@click.pass_context
@_with_kb
def check(wl):
    """Validate FILE and test ABox consistency."""
    return run_check(wl)


@cli.command(name="classify")
@FILE
@FORMAT
@click.pass_context
@_with_kb
def classify_cmd(wl, fmt):
    """Print the concept hierarchy of FILE."""
    return run_classify(wl, fmt)


@cli.command(name="subsumes")
@FILE
@click.argument("c")
@click.argument("d")
@click.option("--engine", type=click.Choice(ENGINES), default="auto", show_default=True)
@FORMAT
@click.pass_context
@_with_kb
def subsumes_cmd(wl, c, d, engine, fmt):
    """Is C subsumed by D?"""
    return run_subsumes(wl, _argument(c, "C"), _argument(d, "D"), engine, fmt)


@cli.command()
@FILE
@click.argument("c")
@FORMAT
@click.pass_context
@_with_kb
def satisfiable(wl, c, fmt):
    """Does C have a model?"""
    return run_satisfiable(wl, _argument(c, "C"), fmt)


@cli.command()
@FILE
@click.argument("c")
@FORMAT
@click.pass_context
@_with_kb
def instances(wl, c, fmt):
    """List the individuals entailed to belong to C."""
    return run_instances(wl, _argument(c, "C"), fmt)


@cli.command()
@FILE
@click.argument("individual")
@click.argument("c")
@FORMAT
@click.pass_context
@_with_kb
def instance(wl, individual, c, fmt):
    """Is INDIVIDUAL entailed to belong to C?"""
    return run_instance(wl, individual, _argument(c, "C"), fmt)


@cli.command()
@FILE
@click.argument("c")
@click.argument("d")
@click.option("--max-domain", type=click.IntRange(1, 5), default=3, show_default=True)
@FORMAT
@click.pass_context
@_with_kb
def oracle(wl, c, d, max_domain, fmt):
    """Search small interpretations for a counterexample to C below D."""
    return run_oracle(wl, _argument(c, "C"), _argument(d, "D"), max_domain, fmt)


@cli.command()
@click.argument("file", type=click.Path(exists=True, dir_okay=False), required=False)
@click.option("--engine", type=click.Choice(ENGINES), default="auto", show_default=True)
@click.option("--max-domain", type=click.IntRange(1, 5), default=3, show_default=True)
@click.pass_context
def repl(ctx, file, engine, max_domain):
    """Interactive session, optionally starting from FILE."""
    session = Session(ctx.obj["budget"], engine, max_domain)
    if file is not None:
        click.echo(session.execute(f"load {shlex.quote(file)}"))
    session.run(sys.stdin, sys.stdout)
    sys.exit(EXIT_YES)


def main() -> None:
    cli(obj={})


# ---------------------------------------------------------------------------
# interactive session

HELP = """\
commands:
  load PATH                 read a .adl file or snapshot
  classify                  print the concept hierarchy
  subsumes C D              subsumption test
  sat C                     satisfiability test
  instances C               individuals entailed to be in C
  check IND C               instance check
  view NAME := C [actual]   define a view (virtual by default)
  query NAME [WORLD]        view contents
  fire EVENT                run an event script
  worlds                    list worlds, current marked with *
  describe C                the unique individual in C
  snapshot PATH             save the session
  restore PATH              load a saved session
  oracle C D [N]            search models up to size N for a counterexample
  help                      this text
  quit                      leave"""


class Session:
    """One interactive session. A failed command leaves the state untouched."""

    def __init__(self, budget: Budget | None = None, engine: str = "auto", max_domain: int = 3):
        self.budget = budget
        self.engine = engine
        self.max_domain = max_domain
        self.wl = empty_world_line(budget)
        self.done = False

    def run(self, stdin: TextIO, stdout: TextIO, prompt: str = "> ") -> None:
        interactive = stdin.isatty()
        while not self.done:
            if interactive:
                stdout.write(prompt)
                stdout.flush()
            line = stdin.readline()
            if not line:
                break
            out = self.execute(line)
            if out:
                stdout.write(out + "\n")
                stdout.flush()

    def execute(self, line: str) -> str:
        line = line.strip()
        if not line or line.startswith("#"):
            return ""
        verb, _, rest = line.partition(" ")
        handler = getattr(self, "_cmd_" + verb.replace("-", "_"), None)
        if handler is None:
            return f"error: unknown command {verb!r} (try 'help')"
        try:
            return handler(rest.strip())
        except (ResourceLimit, BudgetExceeded) as exc:
            return f"resource limit: {exc}"
        except (AdelogError, ValueError, OSError) as exc:
            return f"error: {exc}"

    # commands

    def _cmd_help(self, rest: str) -> str:
        return HELP

    def _cmd_quit(self, rest: str) -> str:
        self.done = True
        return ""

    _cmd_exit = _cmd_quit

    def _cmd_load(self, rest: str) -> str:
        path = _path(rest)
        self.wl = load_world_line(path, self.budget)
        return f"loaded {path}"

    def _cmd_classify(self, rest: str) -> str:
        return run_classify(self.wl).text

    def _cmd_subsumes(self, rest: str) -> str:
        c, d = parse_concepts(rest, 2)
        return run_subsumes(self.wl, c, d, self.engine, batch=False).text

    def _cmd_sat(self, rest: str) -> str:
        return run_satisfiable(self.wl, parse_concept(rest), batch=False).text

    def _cmd_instances(self, rest: str) -> str:
        return run_instances(self.wl, parse_concept(rest)).text or "(none)"

    def _cmd_check(self, rest: str) -> str:
        p = Parser(rest)
        a = p.expect_individual()
        c = p.concept()
        p.expect_eof()
        return run_instance(self.wl, a, c, batch=False).text

    def _cmd_view(self, rest: str) -> str:
        p = Parser(rest)
        name = p.expect_ident("a view name")
        p.expect(":=")
        body = p.concept()
        mode = VIRTUAL
        if p.at("virtual") or p.at("actual"):
            mode = p.advance().value
        p.expect_eof()
        self.wl = define_view(self.wl, name, body, mode)
        return f"view {name} defined ({mode})"

    def _cmd_query(self, rest: str) -> str:
        p = Parser(rest)
        name = p.expect_ident("a view name")
        world = None if p.tok.kind == "eof" else p.expect_individual()
        p.expect_eof()
        members = sorted(query_view(self.wl, name, world))
        return "{" + ", ".join(quote_name(a) for a in members) + "}"

    def _cmd_fire(self, rest: str) -> str:
        p = Parser(rest)
        name = p.expect_ident("an event name")
        p.expect_eof()
        self.wl, report = fire_event(self.wl, name)
        return report.format()

    def _cmd_worlds(self, rest: str) -> str:
        return "\n".join(
            ("* " if w == self.wl.current else "  ") + quote_name(w) + f" ({len(self.wl.worlds[w])} assertions)"
            for w in sorted(self.wl.worlds)
        )

    def _cmd_describe(self, rest: str) -> str:
        return quote_name(describe(self.wl, parse_concept(rest)))

    def _cmd_snapshot(self, rest: str) -> str:
        path = _path(rest)
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(snapshot(self.wl))
        return f"saved {path}"

    def _cmd_restore(self, rest: str) -> str:
        path = _path(rest)
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
        try:
            self.wl = restore(text, self.budget)
        except (ResourceLimit, BudgetExceeded):
            raise
        except AdelogError as exc:
            raise _located(exc, f"{path}:")
        return f"restored {path}"

    def _cmd_oracle(self, rest: str) -> str:
        p = Parser(rest)
        c, d = p.concept(), p.concept()
        size = self.max_domain
        if p.tok.kind == "int":
            size = int(p.advance().value)
        p.expect_eof()
        return run_oracle(self.wl, c, d, size, batch=False).text


def _path(rest: str) -> str:
    parts = shlex.split(rest)
    if len(parts) != 1:
        raise ValueError("expected exactly one path")
    return parts[0]


if __name__ == "__main__":
    main()
