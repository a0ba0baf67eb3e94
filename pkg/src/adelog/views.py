"""Worlds, events, virtual and actual views, and definite descriptions.

A WorldLine is an immutable value. Every operation that changes it returns
a new WorldLine and leaves the argument untouched, so a failed operation
can never leave a half-applied state behind.

Actual views keep a cache per world. Whenever an event touches a world,
the cache entry is rebuilt from scratch by instance retrieval.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Mapping

from adelog.concepts import ABox, Concept, KnowledgeBase, Signature, TBox, check_assertion, check_concept
from adelog.errors import (
    EvolverViolation,
    IntegrityError,
    NoSuchIndividual,
    NotUnique,
    RedefinedName,
    UnknownEvent,
    UnknownView,
    UnknownWorld,
)
from adelog.reasoner.services import retrieve_instances
from adelog.reasoner.tableau import Budget
from adelog.syntax import (
    Program,
    parse_program,
    print_assertion,
    print_concept,
    print_kb,
    quote_name,
    sorted_assertions,
)

VIRTUAL = "virtual"
ACTUAL = "actual"
DEFAULT_WORLD = "w0"


@dataclass(frozen=True)
class AddAssertion:
    assertion: tuple


@dataclass(frozen=True)
class RemoveAssertion:
    assertion: tuple


@dataclass(frozen=True)
class SwitchWorld:
    world: str


Action = AddAssertion | RemoveAssertion | SwitchWorld


@dataclass(frozen=True)
class Event:
    name: str
    script: tuple

    def __post_init__(self) -> None:
        if not self.script:
            raise ValueError(f"event {self.name!r} has an empty script")


@dataclass(frozen=True)
class Evolver:
    """Which events may follow which; ``initial`` lists the events allowed first."""

    initial: frozenset[str]
    allowed: Mapping[str, frozenset[str]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "initial", frozenset(self.initial))
        # an event with no successors and an absent entry mean the same thing
        object.__setattr__(self, "allowed", {k: frozenset(v) for k, v in self.allowed.items() if v})

    def permits(self, last: str | None, event: str) -> bool:
        if last is None:
            return event in self.initial
        return event in self.allowed.get(last, frozenset())

    def names(self) -> set[str]:
        out = set(self.initial) | set(self.allowed)
        for nxt in self.allowed.values():
            out |= nxt
        return out


@dataclass(frozen=True)
class ViewDef:
    name: str
    body: Concept
    mode: str
    cache: Mapping[str, frozenset[str]] | None = None

    def __post_init__(self) -> None:
        if self.mode not in (VIRTUAL, ACTUAL):
            raise ValueError(f"unknown view mode {self.mode!r}")
        if (self.cache is not None) != (self.mode == ACTUAL):
            raise ValueError("only actual views carry a cache")


@dataclass(frozen=True)
class ViewChange:
    view: str
    world: str
    added: frozenset[str]
    removed: frozenset[str]


@dataclass(frozen=True)
class EventReport:
    event: str
    worlds: tuple[str, ...]
    changes: tuple[ViewChange, ...]

    def format(self) -> str:
        lines = [f"event {self.event} fired"]
        if not self.changes:
            lines.append("  no view changed")
        for ch in self.changes:
            parts = []
            if ch.added:
                parts.append("+{" + _names(ch.added) + "}")
            if ch.removed:
                parts.append("-{" + _names(ch.removed) + "}")
            lines.append(f"  {ch.view} @ {ch.world}: " + " ".join(parts))
        return "\n".join(lines)


@dataclass(frozen=True)
class WorldLine:
    signature: Signature
    tbox: TBox
    worlds: Mapping[str, ABox]
    current: str
    views: Mapping[str, ViewDef] = field(default_factory=dict)
    events: Mapping[str, Event] = field(default_factory=dict)
    evolver: Evolver | None = None
    last_event: str | None = None
    budget: Budget | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        if self.current not in self.worlds:
            raise UnknownWorld(f"current world {self.current!r} does not exist")
        if self.evolver is not None:
            missing = self.evolver.names() - set(self.events)
            if missing:
                raise UnknownEvent(f"evolver mentions unknown events: {', '.join(sorted(missing))}")

    def kb(self, world: str | None = None) -> KnowledgeBase:
        world = self.current if world is None else world
        if world not in self.worlds:
            raise UnknownWorld(f"no world named {world!r}")
        return KnowledgeBase(self.signature, self.tbox, self.worlds[world])

    def extension(self, body: Concept, world: str | None = None) -> frozenset[str]:
        return retrieve_instances(self.kb(world), body, self.budget)


def new_world_line(kb: KnowledgeBase, world: str = DEFAULT_WORLD, budget: Budget | None = None) -> WorldLine:
    return WorldLine(kb.signature, kb.tbox, {world: kb.abox}, world, budget=budget)


def _view(wl: WorldLine, name: str) -> ViewDef:
    if name not in wl.views:
        raise UnknownView(f"no view named {name!r}")
    return wl.views[name]


# ---------------------------------------------------------------------------
# views

def define_view(wl: WorldLine, name: str, body: Concept, mode: str = VIRTUAL) -> WorldLine:
    if name in wl.views:
        raise RedefinedName(name, f"view {name!r} already exists")
    check_concept(body, wl.signature, wl.tbox)
    cache = None
    if mode == ACTUAL:
        cache = {w: wl.extension(body, w) for w in sorted(wl.worlds)}
    view = ViewDef(name, body, mode, cache)
    return replace(wl, views={**wl.views, name: view})


def query_view(wl: WorldLine, name: str, world: str | None = None) -> frozenset[str]:
    view = _view(wl, name)
    world = wl.current if world is None else world
    if world not in wl.worlds:
        raise UnknownWorld(f"no world named {world!r}")
    if view.mode == ACTUAL:
        return view.cache[world]
    return wl.extension(view.body, world)


def variable_domain(wl: WorldLine, name: str) -> dict[str, frozenset[str]]:
    """The state of a view at every world."""
    _view(wl, name)
    return {w: query_view(wl, name, w) for w in sorted(wl.worlds)}


def describe(wl: WorldLine, body: Concept, world: str | None = None) -> str:
    """The one declared individual in body's extension, if there is exactly one."""
    ext = wl.extension(body, world)
    if not ext:
        raise NoSuchIndividual("no individual satisfies the description")
    if len(ext) > 1:
        raise NotUnique(ext)
    return next(iter(ext))


# ---------------------------------------------------------------------------
# worlds and events

def add_world(wl: WorldLine, world: str, abox: ABox | None = None) -> WorldLine:
    """A new world; without an ABox it starts as a copy of the current one."""
    if world in wl.worlds:
        raise RedefinedName(world, f"world {world!r} already exists")
    abox = wl.worlds[wl.current] if abox is None else abox
    for assertion in sorted_assertions(abox):
        check_assertion(assertion, wl.signature, wl.tbox)
    grown = replace(wl, worlds={**wl.worlds, world: abox})
    return _refresh(grown, [world])[0]


def define_event(wl: WorldLine, event: Event) -> WorldLine:
    if event.name in wl.events:
        raise RedefinedName(event.name, f"event {event.name!r} already exists")
    for action in event.script:
        if not isinstance(action, SwitchWorld):
            check_assertion(action.assertion, wl.signature, wl.tbox)
    return replace(wl, events={**wl.events, event.name: event})


def set_evolver(wl: WorldLine, evolver: Evolver | None) -> WorldLine:
    return replace(wl, evolver=evolver)


def fire_event(wl: WorldLine, name: str) -> tuple[WorldLine, EventReport]:
    """Run an event's script against the current world.

    Actions run in script order; a switch redirects the actions after it
    and creates the target world as a copy of the current one if needed.
    """
    if name not in wl.events:
        raise UnknownEvent(f"no event named {name!r}")
    if wl.evolver is not None and not wl.evolver.permits(wl.last_event, name):
        after = f"after {wl.last_event!r}" if wl.last_event else "as the first event"
        raise EvolverViolation(f"event {name!r} is not permitted {after}")
    worlds = dict(wl.worlds)
    current = wl.current
    touched: list[str] = []
    for action in wl.events[name].script:
        if isinstance(action, SwitchWorld):
            if action.world not in worlds:
                worlds[action.world] = worlds[current]
                touched.append(action.world)
            current = action.world
            continue
        check_assertion(action.assertion, wl.signature, wl.tbox)
        box = worlds[current]
        worlds[current] = box.add(action.assertion) if isinstance(action, AddAssertion) else box.remove(action.assertion)
        if current not in touched:
            touched.append(current)
    moved = replace(wl, worlds=worlds, current=current, last_event=name)
    fresh, changes = _refresh(moved, sorted(touched), previous=wl)
    return fresh, EventReport(name, tuple(sorted(touched)), tuple(changes))


def _refresh(wl: WorldLine, worlds: list[str], previous: WorldLine | None = None):
    """Recompute actual caches at the given worlds; report what moved."""
    views = dict(wl.views)
    changes = []
    for vname in sorted(views):
        view = views[vname]
        if view.mode != ACTUAL:
            continue
        cache = dict(view.cache)
        for w in worlds:
            new = wl.extension(view.body, w)
            old = view.cache.get(w, frozenset())
            cache[w] = new
            if new != old:
                changes.append(ViewChange(vname, w, new - old, old - new))
        views[vname] = replace(view, cache=cache)
    return replace(wl, views=views), changes


# ---------------------------------------------------------------------------
# persistence

def world_line_from_program(program: Program, budget: Budget | None = None) -> WorldLine:
    """Build a WorldLine from a parsed .adl file, computing every cache."""
    return _from_program(program, budget, verify=False)


def restore(text: str, budget: Budget | None = None) -> WorldLine:
    """Inverse of snapshot. Stored caches are checked against recomputation."""
    return _from_program(parse_program(text), budget, verify=True)


def _from_program(program: Program, budget: Budget | None, verify: bool) -> WorldLine:
    kb = program.kb
    if program.worlds:
        if len(kb.abox):
            raise IntegrityError("", "assertions outside a world block")
        worlds = dict(program.worlds)
        current = program.current or min(worlds)
    else:
        current = program.current or DEFAULT_WORLD
        worlds = {current: kb.abox}
    if current not in worlds:
        raise UnknownWorld(f"current world {current!r} is not declared")
    wl = WorldLine(kb.signature, kb.tbox, worlds, current, budget=budget)
    for decl in program.events:
        script = tuple(_action(a) for a in decl.actions)
        wl = define_event(wl, Event(decl.name, script))
    if program.evolver is not None:
        ev = program.evolver
        wl = set_evolver(wl, Evolver(ev.initial, dict(ev.allowed)))
    if program.last_event is not None and program.last_event not in wl.events:
        raise UnknownEvent(f"last event {program.last_event!r} is not declared")
    wl = replace(wl, last_event=program.last_event)
    for decl in program.views:
        wl = define_view(wl, decl.name, decl.body, decl.mode)
    if verify:
        _verify_caches(wl, program.caches)
    return wl


def _action(action) -> Action:
    if action.kind == "add":
        return AddAssertion(action.payload)
    if action.kind == "remove":
        return RemoveAssertion(action.payload)
    return SwitchWorld(action.payload)


def _verify_caches(wl: WorldLine, stored: Mapping[tuple[str, str], frozenset[str]]) -> None:
    for (vname, world) in stored:
        if vname not in wl.views or wl.views[vname].mode != ACTUAL:
            raise IntegrityError(vname, f"cache stored for {vname!r}, which is not an actual view")
        if world not in wl.worlds:
            raise IntegrityError(vname, f"cache of {vname!r} names unknown world {world!r}")
    for vname, view in wl.views.items():
        if view.mode != ACTUAL:
            continue
        for world, members in view.cache.items():
            if (vname, world) not in stored:
                raise IntegrityError(vname, f"cache of view {vname!r} at {world!r} is missing")
            if stored[(vname, world)] != members:
                raise IntegrityError(vname, f"cache of view {vname!r} at {world!r} disagrees with recomputation")


def _names(names) -> str:
    return ", ".join(quote_name(n) for n in sorted(names))


def snapshot(wl: WorldLine) -> str:
    """Canonical text for wl; equal states give byte-identical output."""
    kb = KnowledgeBase(wl.signature, wl.tbox, ABox())
    header = print_kb(kb, include_abox=False)
    lines = [header.rstrip("\n")] if header else []
    for name in sorted(wl.views):
        view = wl.views[name]
        lines.append(f"view {name} := {print_concept(view.body)} {view.mode};")
    for name in sorted(wl.events):
        body = []
        for action in wl.events[name].script:
            if isinstance(action, SwitchWorld):
                body.append(f"  switch {quote_name(action.world)};")
            else:
                verb = "add" if isinstance(action, AddAssertion) else "remove"
                body.append(f"  {verb} {print_assertion(action.assertion)};")
        lines.append(f"event {name} {{\n" + "\n".join(body) + "\n}")
    if wl.evolver is not None:
        body = []
        if wl.evolver.initial:
            body.append(f"  initial {_names(wl.evolver.initial)};")
        for src in sorted(wl.evolver.allowed):
            if wl.evolver.allowed[src]:
                body.append(f"  {src} -> {_names(wl.evolver.allowed[src])};")
        lines.append("evolver {\n" + "\n".join(body) + ("\n" if body else "") + "}")
    for world in sorted(wl.worlds):
        body = [f"  {print_assertion(a)};" for a in sorted_assertions(wl.worlds[world])]
        lines.append(f"world {quote_name(world)} {{\n" + "".join(b + "\n" for b in body) + "}")
    lines.append(f"current {quote_name(wl.current)};")
    if wl.last_event is not None:
        lines.append(f"last_event {wl.last_event};")
    for name in sorted(wl.views):
        view = wl.views[name]
        if view.mode == ACTUAL:
            for world in sorted(view.cache):
                lines.append(f"cache {name} {quote_name(world)} {{{_names(view.cache[world])}}}")
    return "\n".join(lines) + "\n"
