"""Forward and reverse execution of the parallel dialect.

Parallelism is simulated: a scheduler picks which enabled statement runs
next, and that statement then runs to completion (statements are atomic).
Every completed assignment takes the next identifier from the counter and
pushes it onto the statement's identifier stack; a destructive assignment
also saves ``(id, old value)`` on the variable's stack. Reverse execution
lets a statement run only when its most recent identifier is the counter's
``previous()``, which replays the forward interleaving backwards.

Runtime programs are threads of nodes. A ``Leaf`` is one simple statement
tagged with its location in the source program; a ``Fork`` is a ``par``
whose two sides are both still running. Locations are tuples such as
``(0, "R", 1)``: statement 0, its right side, statement 1 there.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Union

from .seq_engine import (
    DEFAULT_FUEL,
    FuelExhausted,
    UnboundVariable,
    default_fuel,
    step_aexp,
)
from .stores import (
    PARALLEL,
    AuxStore,
    EmptyStackError,
    IdentifierCounter,
    aux_pop,
    aux_push,
    delta_from_json,
    id_next,
    id_previous_consume,
    id_previous_peek,
    init_aux,
)
from .syntax.nodes import (
    ConstAssign,
    DestAssign,
    IntLit,
    Par,
    Program,
    Skip,
    count_simple,
    with_ids,
)
from .syntax.parser import Dialect, check_dialect, parse_program
from .syntax.render import render_program, render_stmt
from .syntax.validate import variables_of
from .transform import inv_annotated

Loc = tuple


class ScheduleError(ValueError):
    pass


class ScheduleExhausted(ScheduleError):
    pass


class StuckReverse(RuntimeError):
    """No statement's identifier matches ``previous()``: inputs were tampered with."""


class BoundExceeded(ValueError):
    pass


class Leaf(NamedTuple):
    loc: Loc
    stmt: Union[Skip, DestAssign, ConstAssign]


class Fork(NamedTuple):
    left: tuple
    right: tuple


class Handle(NamedTuple):
    """An enabled statement: ``side`` navigates the current thread tree,
    ``branch`` is the stable L/R path of its location in the source."""

    side: str
    leaf: Leaf

    @property
    def branch(self) -> str:
        return branch_of(self.leaf.loc)

    @property
    def loc(self) -> Loc:
        return self.leaf.loc


class RecordEntry(NamedTuple):
    ident: int
    text: str
    loc: Loc


class TraceEntry(NamedTuple):
    rule: str
    loc: Optional[Loc]
    ident: Optional[int] = None


def branch_of(loc: Loc) -> str:
    return "".join(x for x in loc if isinstance(x, str))


# -- building and navigating thread trees -------------------------------------


def build_thread(p: Program, prefix: Loc = ()) -> tuple:
    nodes = []
    for i, s in enumerate(p.stmts):
        if isinstance(s, Par):
            nodes.append(Fork(build_thread(s.left, prefix + (i, "L")),
                              build_thread(s.right, prefix + (i, "R"))))
        else:
            nodes.append(Leaf(prefix + (i,), s))
    return tuple(nodes)


def leaf_locs(p: Program, prefix: Loc = ()) -> list:
    out = []
    for i, s in enumerate(p.stmts):
        if isinstance(s, Par):
            out += leaf_locs(s.left, prefix + (i, "L"))
            out += leaf_locs(s.right, prefix + (i, "R"))
        else:
            out.append(prefix + (i,))
    return out


def stmt_at(p: Program, loc: Loc):
    s = p.stmts[loc[0]]
    if len(loc) == 1:
        return s
    side = s.left if loc[1] == "L" else s.right
    return stmt_at(side, loc[2:])


def replace_ids(p: Program, ids_by_loc: dict, prefix: Loc = ()) -> Program:
    out = []
    for i, s in enumerate(p.stmts):
        loc = prefix + (i,)
        if isinstance(s, Par):
            out.append(Par(replace_ids(s.left, ids_by_loc, loc + ("L",)),
                           replace_ids(s.right, ids_by_loc, loc + ("R",))))
        elif loc in ids_by_loc:
            out.append(with_ids(s, ids_by_loc[loc]))
        else:
            out.append(s)
    return Program(tuple(out))


def invert_loc(p: Program, loc: Loc) -> Loc:
    """Location in ``inv_annotated(p)`` of the statement at ``loc`` in ``p``."""
    i = loc[0]
    j = len(p.stmts) - 1 - i
    if len(loc) == 1:
        return (j,)
    s = p.stmts[i]
    side = s.left if loc[1] == "L" else s.right
    return (j, loc[1]) + invert_loc(side, loc[2:])


def leaf_labels(p: Program) -> dict:
    """Readable names for statements, keyed to their locations.

    A program that is a single ``P par Q`` gets the labels P1, P2, ... for
    the left side and Q1, Q2, ... for the right. Otherwise statements are
    S1, S2, ... in source order.
    """
    if len(p.stmts) == 1 and isinstance(p.stmts[0], Par):
        par = p.stmts[0]
        left = leaf_locs(par.left, (0, "L"))
        right = leaf_locs(par.right, (0, "R"))
        labels = {f"P{n}": loc for n, loc in enumerate(left, 1)}
        labels.update({f"Q{n}": loc for n, loc in enumerate(right, 1)})
        return labels
    return {f"S{n}": loc for n, loc in enumerate(leaf_locs(p), 1)}


def inverted_leaf_labels(q: Program) -> dict:
    """``leaf_labels`` of the forward program, mapped into inverted ``q``."""
    forward = inv_annotated(q)
    return {name: invert_loc(forward, loc) for name, loc in leaf_labels(forward).items()}


def normalize(thread: tuple, rules: Optional[list] = None) -> tuple:
    """Apply the administrative rules: drop a finished ``skip`` at the head
    and collapse a ``par`` once either side has finished."""
    while thread:
        head = thread[0]
        if isinstance(head, Leaf):
            if isinstance(head.stmt, Skip):
                if rules is not None:
                    rules.append("Skip")
                thread = thread[1:]
                continue
            return thread
        left = normalize(head.left, rules)
        right = normalize(head.right, rules)
        if not left:
            if rules is not None:
                rules.append("P2")
            thread = right + thread[1:]
        elif not right:
            if rules is not None:
                rules.append("P1")
            thread = left + thread[1:]
        else:
            return (Fork(left, right),) + thread[1:]
    return thread


def enabled(thread: tuple, side: str = "") -> list:
    """Every statement that may take the next step, leftmost first."""
    if not thread:
        return []
    head = thread[0]
    if isinstance(head, Leaf):
        return [Handle(side, head)]
    return enabled(head.left, side + "L") + enabled(head.right, side + "R")


def _rule_path(thread: tuple, side: str) -> list:
    path = []
    for ch in side:
        if len(thread) > 1:
            path.append("Seq1")
        path.append("P3" if ch == "L" else "P4")
        fork = thread[0]
        thread = fork.left if ch == "L" else fork.right
    if len(thread) > 1:
        path.append("Seq1")
    return path


def _replace_head(thread: tuple, side: str, nodes: tuple) -> tuple:
    if not side:
        return nodes + thread[1:]
    fork = thread[0]
    if side[0] == "L":
        fork = Fork(_replace_head(fork.left, side[1:], nodes), fork.right)
    else:
        fork = Fork(fork.left, _replace_head(fork.right, side[1:], nodes))
    return (fork,) + thread[1:]


# -- schedules -----------------------------------------------------------------


@dataclass(frozen=True)
class Explicit:
    """Choices, one per statement completion (trailing forced ones optional).

    A choice is an L/R branch path or a statement label (P1, Q2, S3, ...).
    At a point where only one statement is enabled a choice is consumed
    only if it names that statement.
    """

    choices: tuple = ()


@dataclass(frozen=True)
class Seeded:
    seed: int = 0


@dataclass(frozen=True)
class Preset:
    name: str = "first"  # first | last | rr


@dataclass(frozen=True)
class Exhaustive:
    pass


Schedule = Union[Explicit, Seeded, Preset, Exhaustive]


def parse_schedule(text: str) -> Schedule:
    text = text.strip()
    if text in ("first", "last", "rr"):
        return Preset(text)
    if text in ("all", "exhaustive"):
        return Exhaustive()
    if text.startswith("seed:"):
        return Seeded(int(text[5:]))
    return Explicit(tuple(c.strip() for c in text.split(",") if c.strip()))


def _matches(choice: str, handle: Handle, labels: dict) -> bool:
    if choice in labels:
        return handle.loc == labels[choice]
    if set(choice) <= {"L", "R"}:
        return handle.branch.startswith(choice)
    raise ScheduleError(f"unknown schedule choice {choice!r}")


def _pick(choice: str, handles: list, labels: dict) -> Optional[Handle]:
    for h in handles:
        if h.branch == choice:
            return h
    for h in handles:
        if _matches(choice, h, labels):
            return h
    return None


class Scheduler:
    def __init__(self, schedule: Schedule, labels: dict):
        if isinstance(schedule, Exhaustive):
            raise ScheduleError("an exhaustive schedule drives enumerate_interleavings, not a single run")
        self.schedule = schedule
        self.labels = labels
        self.pos = 0
        self.turn = 0
        self.rng = random.Random(schedule.seed) if isinstance(schedule, Seeded) else None

    def choose(self, handles: list) -> Handle:
        s = self.schedule
        self.turn += 1
        if isinstance(s, Explicit):
            if self.pos < len(s.choices):
                picked = _pick(s.choices[self.pos], handles, self.labels)
                if picked is not None:
                    self.pos += 1
                    return picked
                if len(handles) > 1:
                    names = ", ".join(h.branch or "-" for h in handles)
                    raise ScheduleError(
                        f"choice {s.choices[self.pos]!r} matches no enabled statement ({names})")
            if len(handles) == 1:
                return handles[0]
            raise ScheduleExhausted(f"schedule ran out at decision point {self.turn}")
        if len(handles) == 1:
            return handles[0]
        if isinstance(s, Seeded):
            return self.rng.choice(handles)
        if s.name == "first":
            return handles[0]
        if s.name == "last":
            return handles[-1]
        if s.name == "rr":
            return handles[(self.turn - 1) % len(handles)]
        raise ScheduleError(f"unknown preset {s.name!r}")

    def finish(self):
        if isinstance(self.schedule, Explicit) and self.pos < len(self.schedule.choices):
            rest = ",".join(self.schedule.choices[self.pos:])
            raise ScheduleError(f"schedule has unused choices: {rest}")


# -- forward execution ---------------------------------------------------------


class FwdState(NamedTuple):
    thread: tuple
    sigma: dict
    delta: AuxStore
    counter: IdentifierCounter
    ids: dict  # loc -> identifiers added by this run, head first
    record: tuple  # RecordEntry, completion order
    steps: int = 0


def initial_state(p: Program, sigma0, delta0: Optional[AuxStore] = None,
                  counter: Optional[IdentifierCounter] = None) -> FwdState:
    check_dialect(p, Dialect.ANNOTATED)
    if delta0 is None:
        delta0 = init_aux(variables_of(p), PARALLEL)
    if delta0.mode != PARALLEL:
        raise ValueError("parallel runs need a parallel-mode auxiliary store")
    return FwdState(normalize(build_thread(p)), dict(sigma0), delta0,
                    counter or IdentifierCounter(), {}, ())


def fwd_step(state: FwdState, handle: Handle, trace: Optional[list] = None,
             fuel: int = DEFAULT_FUEL) -> FwdState:
    """Run the statement at ``handle`` to completion, then tidy the thread."""
    loc, s = handle.leaf
    sigma, delta, counter = state.sigma, state.delta, state.counter
    steps = state.steps
    prefix = "/".join(_rule_path(state.thread, handle.side))
    prefix = prefix + "/" if prefix else ""
    rhs = s.rhs
    sub = "DA2" if isinstance(s, DestAssign) else "CA2"
    while type(rhs) is not IntLit:
        if steps >= fuel:
            raise FuelExhausted(steps)
        rules, rhs, delta = step_aexp(rhs, sigma, delta)
        steps += 1
        if trace is not None:
            trace.append(TraceEntry(prefix + "/".join((sub,) + rules), loc))
    if steps >= fuel:
        raise FuelExhausted(steps)
    if s.target not in sigma:
        raise UnboundVariable(f"variable {s.target} is unbound")
    m, counter = id_next(counter)
    old = sigma[s.target]
    if isinstance(s, DestAssign):
        rule = "DA1"
        sigma = {**sigma, s.target: rhs.value}
        delta = aux_push(delta, s.target, (m, old))
    else:
        rule = "CA1"
        v = old + rhs.value if s.op == "+=" else old - rhs.value
        sigma = {**sigma, s.target: v}
    steps += 1
    if trace is not None:
        trace.append(TraceEntry(prefix + rule, loc, m))
    ids = {**state.ids, loc: (m,) + state.ids.get(loc, ())}
    record = state.record + (RecordEntry(m, render_stmt(with_ids(s, None)), loc),)
    admin = [] if trace is not None else None
    thread = normalize(_replace_head(state.thread, handle.side, ()), admin)
    if admin:
        trace.extend(TraceEntry(r, None) for r in admin)
    return FwdState(thread, sigma, delta, counter, ids, record, steps)


def fwd_enabled(state_or_program, sigma0=None) -> list:
    """Enabled statements of a state, or of a fresh annotated program."""
    if isinstance(state_or_program, Program):
        state_or_program = initial_state(state_or_program, sigma0 or {})
    return enabled(state_or_program.thread)


@dataclass
class FwdResult:
    program: Program  # the annotated program with populated identifier stacks
    sigma: dict
    delta: AuxStore
    counter: IdentifierCounter
    record: list
    schedule: list = field(default_factory=list)  # branch of each completion
    trace: list = field(default_factory=list)

    def checkpoint(self) -> dict:
        return checkpoint_to_json(self.program, self.sigma, self.delta, self.counter, self.record)


def _finish(p: Program, state: FwdState) -> Program:
    merged = {}
    for loc, new in state.ids.items():
        merged[loc] = new + stmt_at(p, loc).ids
    return replace_ids(p, merged)


def fwd_run(p: Program, sigma0, delta0: Optional[AuxStore] = None,
            schedule: Schedule = Preset("first"), fuel: Optional[int] = None, *,
            counter: Optional[IdentifierCounter] = None, trace: bool = False) -> FwdResult:
    if fuel is None:
        fuel = default_fuel()
    state = initial_state(p, sigma0, delta0, counter)
    scheduler = Scheduler(schedule, leaf_labels(p))
    entries = [] if trace else None
    taken = []
    while state.thread:
        handle = scheduler.choose(enabled(state.thread))
        taken.append(handle.branch)
        state = fwd_step(state, handle, entries, fuel)
    scheduler.finish()
    return FwdResult(_finish(p, state), state.sigma, state.delta, state.counter,
                     list(state.record), taken, entries or [])


# -- reverse execution ---------------------------------------------------------


@dataclass
class RevResult:
    program: Program  # the inverted program with identifiers consumed
    sigma: dict
    delta: AuxStore
    counter: IdentifierCounter
    record: list
    trace: list = field(default_factory=list)


def _rev_enabled(handles: list, counter: IdentifierCounter) -> list:
    return [h for h in handles
            if h.leaf.stmt.ids and id_previous_peek(counter, h.leaf.stmt.ids[0])]


def rev_run(q: Program, sigma, delta: AuxStore, counter: IdentifierCounter,
            fuel: Optional[int] = None, *, trace: bool = False) -> RevResult:
    """Run inverted annotated program ``q`` backwards from the final stores.

    Exactly one statement can be enabled at a time; finding two means the
    identifiers are not unique and raises AssertionError.
    """
    if fuel is None:
        fuel = default_fuel()
    check_dialect(q, Dialect.ANNOTATED)
    thread = normalize(build_thread(q))
    sigma = dict(sigma)
    ids = {}
    record = []
    entries = [] if trace else None
    steps = 0
    while thread:
        handles = enabled(thread)
        ready = _rev_enabled(handles, counter)
        if not ready:
            waiting = ", ".join(f"{render_stmt(h.leaf.stmt)}" for h in handles)
            raise StuckReverse(f"no statement carries identifier {counter.previous}: {waiting}")
        assert len(ready) == 1, f"several statements claim identifier {counter.previous}"
        h = ready[0]
        loc, s = h.leaf
        m = s.ids[0]
        prefix = "/".join(_rule_path(thread, h.side))
        prefix = prefix + "/" if prefix else ""
        if isinstance(s, DestAssign):
            top = delta[s.target][0] if delta[s.target] else None
            if top is None:
                raise EmptyStackError(f"pop from empty stack {s.target}")
            if top[0] != m:
                raise StuckReverse(
                    f"{s.target}'s saved value is tagged {top[0]}, statement expects {m}")
            counter = id_previous_consume(counter, m)
            (_, v), delta = aux_pop(delta, s.target)
            sigma[s.target] = v
            rule = "RDA"
        else:
            rhs = s.rhs
            while type(rhs) is not IntLit:
                # every sub-step is gated on the identifier without consuming it
                if not id_previous_peek(counter, m):
                    raise StuckReverse(f"identifier {m} lost its turn mid-statement")
                if steps >= fuel:
                    raise FuelExhausted(steps)
                rules, rhs, delta = step_aexp(rhs, sigma, delta)
                steps += 1
                if entries is not None:
                    entries.append(TraceEntry(prefix + "/".join(("RCA2",) + rules), loc, m))
            counter = id_previous_consume(counter, m)
            old = sigma[s.target]
            sigma[s.target] = old + rhs.value if s.op == "+=" else old - rhs.value
            rule = "RCA1"
        steps += 1
        if steps > fuel:
            raise FuelExhausted(steps)
        if entries is not None:
            entries.append(TraceEntry(prefix + rule, loc, m))
        ids[loc] = s.ids[1:]
        record.append(RecordEntry(m, render_stmt(with_ids(s, None)), loc))
        admin = [] if entries is not None else None
        thread = normalize(_replace_head(thread, h.side, ()), admin)
        if admin:
            entries.extend(TraceEntry(r, None) for r in admin)
    return RevResult(replace_ids(q, ids), sigma, delta, counter, record, entries or [])


def rev_run_unchecked(q: Program, sigma, delta: AuxStore, order: Schedule):
    """Reverse ``q`` in a CHOSEN order, ignoring identifiers.

    Demonstrates why the interleaving must be recorded: a wrong order leaves
    the data store in a state the program never started from.
    Returns (sigma, delta, record).
    """
    check_dialect(q, Dialect.ANNOTATED)
    scheduler = Scheduler(order, inverted_leaf_labels(q))
    thread = normalize(build_thread(q))
    sigma = dict(sigma)
    record = []
    while thread:
        h = scheduler.choose(enabled(thread))
        loc, s = h.leaf
        if isinstance(s, DestAssign):
            (_, v), delta = aux_pop(delta, s.target)
            sigma[s.target] = v
        else:
            rhs = s.rhs
            while type(rhs) is not IntLit:
                _, rhs, delta = step_aexp(rhs, sigma, delta)
            old = sigma[s.target]
            sigma[s.target] = old + rhs.value if s.op == "+=" else old - rhs.value
        record.append(RecordEntry(s.ids[0] if s.ids else 0, render_stmt(with_ids(s, None)), loc))
        thread = normalize(_replace_head(thread, h.side, ()))
    scheduler.finish()
    return sigma, delta, record


# -- exhaustive exploration ----------------------------------------------------


@dataclass
class InterleavingResult:
    schedule: tuple  # branch path of each completed statement
    sigma: dict
    restored: bool
    forward: FwdResult
    reverse: Optional[RevResult] = None
    error: Optional[str] = None


def enumerate_interleavings(p: Program, sigma0, delta0: Optional[AuxStore] = None,
                            bound: int = 12, *, check: bool = True) -> list:
    """Every statement-completion order of ``p``, each forward then reversed.

    ``restored`` is True when the reverse run gave back exactly the starting
    data store, auxiliary store and counter.
    """
    n = count_simple(p)
    if n > bound:
        raise BoundExceeded(f"{n} statements exceeds the bound of {bound}")
    start = initial_state(p, sigma0, delta0)
    results = []

    def explore(state: FwdState, taken: tuple):
        if not state.thread:
            fwd = FwdResult(_finish(p, state), state.sigma, state.delta, state.counter,
                            list(state.record), list(taken))
            results.append(_verdict(fwd, start, taken) if check
                           else InterleavingResult(taken, fwd.sigma, False, fwd))
            return
        for h in enabled(state.thread):
            explore(fwd_step(state, h), taken + (h.branch,))

    explore(start, ())
    return results


def _verdict(fwd: FwdResult, start: FwdState, taken: tuple) -> InterleavingResult:
    try:
        rev = rev_run(inv_annotated(fwd.program), fwd.sigma, fwd.delta, fwd.counter)
    except (StuckReverse, EmptyStackError, AssertionError) as exc:
        return InterleavingResult(taken, fwd.sigma, False, fwd, None, str(exc))
    ok = rev.sigma == start.sigma and rev.delta == start.delta and rev.counter == start.counter
    return InterleavingResult(taken, fwd.sigma, ok, fwd, rev)


# -- checkpoints ---------------------------------------------------------------


def checkpoint_to_json(program: Program, sigma, delta: AuxStore, counter: IdentifierCounter,
                       record) -> dict:
    return {
        "program": render_program(program),
        "sigma": dict(sigma),
        "delta": [[name, [[i, v] for i, v in stack]] for name, stack in delta.stacks.items()],
        "counter": counter.next_value,
        "record": [[e.ident, e.text] for e in record],
    }


def checkpoint_from_json(doc: dict):
    """Returns (annotated program, sigma, delta, counter, record)."""
    program = parse_program(doc["program"], Dialect.ANNOTATED)
    sigma = {k: int(v) for k, v in doc["sigma"].items()}
    delta = delta_from_json({name: items for name, items in doc["delta"]}, PARALLEL)
    counter = IdentifierCounter(int(doc["counter"]))
    record = [(int(i), text) for i, text in doc.get("record", [])]
    return program, sigma, delta, counter, record


def dump_checkpoint(doc: dict) -> str:
    return json.dumps(doc, indent=2)
