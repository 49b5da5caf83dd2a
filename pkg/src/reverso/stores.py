"""Data store, auxiliary stack store and the identifier counter.

Stores are immutable values: every update returns a new store, so a trace
can keep each intermediate configuration without copying.

Stacks are tuples with the head at index 0, the same orientation the JSON
form uses.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Union

from .syntax.nodes import RESERVED_STACKS
from .syntax.validate import ReservedName

SEQUENTIAL = "sequential"
PARALLEL = "parallel"

SavedEntry = Union[int, bool, tuple[int, int]]
DataStore = dict  # VarName -> int


class UnknownStack(KeyError):
    def __str__(self):
        return f"no stack named {self.args[0]!r}"


class EmptyStackError(RuntimeError):
    """Pop from an empty stack: forward and reverse runs are out of step."""


class MismatchError(Exception):
    """The claimed identifier is not the most recently issued one.

    A scheduling signal (the reverse step is disabled), not a fault.
    """


# -- data store ----------------------------------------------------------------


def init_sigma(variables: Iterable[str], values: Mapping[str, int] | None = None) -> dict:
    """Total store over ``variables``; missing values default to 0."""
    values = dict(values or {})
    sigma = {v: int(values.pop(v, 0)) for v in variables}
    sigma.update({k: int(v) for k, v in values.items()})
    return sigma


# -- auxiliary store -----------------------------------------------------------


@dataclass(frozen=True)
class AuxStore:
    mode: str = SEQUENTIAL
    stacks: dict = field(default_factory=dict)

    def __getitem__(self, name: str) -> tuple:
        try:
            return self.stacks[name]
        except KeyError:
            raise UnknownStack(name) from None

    def __contains__(self, name):
        return name in self.stacks

    def is_empty(self) -> bool:
        return all(not s for s in self.stacks.values())

    def push(self, name: str, entry: SavedEntry) -> "AuxStore":
        return aux_push(self, name, entry)

    def pop(self, name: str):
        return aux_pop(self, name)

    def with_stacks(self, **extra) -> "AuxStore":
        return AuxStore(self.mode, {**self.stacks, **extra})

    def to_json(self) -> dict:
        out = {}
        for name, stack in self.stacks.items():
            if self.mode == PARALLEL:
                out[name] = [[i, v] for i, v in stack]
            else:
                out[name] = list(stack)
        return out

    def __str__(self):
        return format_delta(self)


def init_aux(variables: Iterable[str], mode: str = SEQUENTIAL) -> AuxStore:
    """Empty stacks for every variable, plus B and W in sequential mode."""
    if mode not in (SEQUENTIAL, PARALLEL):
        raise ValueError(f"unknown store mode {mode!r}")
    stacks = {}
    for v in variables:
        if v in RESERVED_STACKS:
            raise ReservedName(f"{v!r} is reserved for the auxiliary store")
        stacks[v] = ()
    if mode == SEQUENTIAL:
        stacks["B"] = ()
        stacks["W"] = ()
    return AuxStore(mode, stacks)


def _check_entry(delta: AuxStore, name: str, entry) -> None:
    if delta.mode == PARALLEL:
        if not (isinstance(entry, tuple) and len(entry) == 2):
            raise TypeError(f"parallel stacks hold (identifier, value) pairs, got {entry!r}")
        ident = entry[0]
        if ident < 1:
            raise ValueError(f"identifier {ident} is not positive")
        stack = delta.stacks[name]
        if stack and stack[0][0] >= ident:
            raise ValueError(
                f"identifier {ident} pushed onto {name} above {stack[0][0]}; "
                "identifiers must decrease from head to bottom"
            )
    elif name in RESERVED_STACKS:
        if not isinstance(entry, bool):
            raise TypeError(f"stack {name} holds Booleans, got {entry!r}")
    elif isinstance(entry, bool) or not isinstance(entry, int):
        raise TypeError(f"stack {name} holds integers, got {entry!r}")


def aux_push(delta: AuxStore, name: str, entry: SavedEntry) -> AuxStore:
    if name not in delta.stacks:
        raise UnknownStack(name)
    _check_entry(delta, name, entry)
    return AuxStore(delta.mode, {**delta.stacks, name: (entry,) + delta.stacks[name]})


def aux_pop(delta: AuxStore, name: str) -> tuple[SavedEntry, AuxStore]:
    stack = delta[name]
    if not stack:
        raise EmptyStackError(f"pop from empty stack {name}")
    return stack[0], AuxStore(delta.mode, {**delta.stacks, name: stack[1:]})


def aux_peek(delta: AuxStore, name: str):
    stack = delta[name]
    return stack[0] if stack else None


# -- identifier counter --------------------------------------------------------


@dataclass(frozen=True)
class IdentifierCounter:
    """Issues identifiers 1, 2, 3, ... forward and takes them back in reverse.

    ``next_value`` is what ``next()`` returns; ``previous()`` is one less.
    Calls are single operations on an immutable value, which gives the
    as-if-atomic behaviour the parallel semantics asks for.
    """

    next_value: int = 1

    def __post_init__(self):
        if self.next_value < 1:
            raise ValueError("counter value must be at least 1")

    @property
    def previous(self) -> int:
        return self.next_value - 1


def id_next(c: IdentifierCounter) -> tuple[int, IdentifierCounter]:
    return c.next_value, IdentifierCounter(c.next_value + 1)


def id_previous_consume(c: IdentifierCounter, claimed: int) -> IdentifierCounter:
    if claimed != c.previous or claimed < 1:
        raise MismatchError(f"identifier {claimed} is not the most recent ({c.previous})")
    return IdentifierCounter(c.next_value - 1)


def id_previous_peek(c: IdentifierCounter, claimed: int) -> bool:
    return claimed >= 1 and claimed == c.previous


# -- serialisation -------------------------------------------------------------


def stores_to_json(sigma: Mapping[str, int], delta: AuxStore | None = None) -> dict:
    doc = {"sigma": dict(sigma)}
    if delta is not None:
        doc["delta"] = delta.to_json()
    return doc


def delta_from_json(doc: Mapping, mode: str | None = None) -> AuxStore:
    if mode is None:
        mode = _guess_mode(doc)
    stacks = {}
    for name, items in doc.items():
        if mode == PARALLEL:
            stacks[name] = tuple((int(i), int(v)) for i, v in items)
        elif name in RESERVED_STACKS:
            stacks[name] = tuple(_as_bool(x) for x in items)
        else:
            stacks[name] = tuple(int(x) for x in items)
    if mode == SEQUENTIAL:
        stacks.setdefault("B", ())
        stacks.setdefault("W", ())
    return AuxStore(mode, stacks)


def _as_bool(x) -> bool:
    if isinstance(x, bool):
        return x
    if x in ("T", "F"):
        return x == "T"
    raise TypeError(f"expected a Boolean, got {x!r}")


def _guess_mode(doc: Mapping) -> str:
    if any(name in RESERVED_STACKS for name in doc):
        return SEQUENTIAL
    for items in doc.values():
        for x in items:
            return PARALLEL if isinstance(x, (list, tuple)) else SEQUENTIAL
    return SEQUENTIAL


def stores_from_json(doc: Mapping, mode: str | None = None):
    sigma = {k: int(v) for k, v in doc.get("sigma", {}).items()}
    delta = delta_from_json(doc["delta"], mode) if "delta" in doc else None
    return sigma, delta


def load_stores(path, mode: str | None = None):
    with open(path) as fh:
        return stores_from_json(json.load(fh), mode)


# -- display -------------------------------------------------------------------


def _fmt(x) -> str:
    if isinstance(x, bool):
        return "T" if x else "F"
    if isinstance(x, tuple):
        return f"({x[0]},{x[1]})"
    return str(x)


def format_sigma(sigma: Mapping[str, int]) -> str:
    return "{" + ", ".join(f"{k}:{v}" for k, v in sigma.items()) + "}"


def format_delta(delta: AuxStore) -> str:
    parts = [f"{k}:[{','.join(_fmt(x) for x in s)}]" for k, s in delta.stacks.items()]
    return "{" + ", ".join(parts) + "}"
