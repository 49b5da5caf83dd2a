"""Greedy shrinking of failing programs."""

from __future__ import annotations

from typing import Callable, Iterator

from ..syntax.nodes import If, Par, Program, While


class NotFailing(ValueError):
    """The program handed to ``minimize`` does not fail the oracle."""


def _candidates(p: Program) -> Iterator[Program]:
    """Programs one edit smaller than ``p``, biggest cuts first."""
    stmts = p.stmts
    for i, s in enumerate(stmts):
        yield Program(stmts[:i] + stmts[i + 1:])
    for i, s in enumerate(stmts):
        head, tail = stmts[:i], stmts[i + 1:]
        if isinstance(s, If):
            yield Program(head + s.then.stmts + tail)
            yield Program(head + s.orelse.stmts + tail)
        elif isinstance(s, While):
            yield Program(head + s.body.stmts + tail)
        elif isinstance(s, Par):
            yield Program(head + s.left.stmts + s.right.stmts + tail)
    for i, s in enumerate(stmts):
        head, tail = stmts[:i], stmts[i + 1:]
        if isinstance(s, If):
            for q in _candidates(s.then):
                yield Program(head + (If(s.cond, q, s.orelse),) + tail)
            for q in _candidates(s.orelse):
                yield Program(head + (If(s.cond, s.then, q),) + tail)
        elif isinstance(s, While):
            for q in _candidates(s.body):
                yield Program(head + (While(s.cond, q),) + tail)
        elif isinstance(s, Par):
            for q in _candidates(s.left):
                yield Program(head + (Par(q, s.right),) + tail)
            for q in _candidates(s.right):
                yield Program(head + (Par(s.left, q),) + tail)


def minimize(failing: Program, oracle: Callable[[Program], bool], max_rounds: int = 1000) -> Program:
    """Shrink ``failing`` while ``oracle`` keeps returning True.

    ``oracle(p)`` answers "does p still fail?". Candidates that make the
    oracle raise are treated as passing. The result is 1-minimal with
    respect to the edits tried: no single removal keeps it failing.
    """
    if not _safe(oracle, failing):
        raise NotFailing("the starting program does not fail the oracle")
    current = failing
    for _ in range(max_rounds):
        for q in _candidates(current):
            if _safe(oracle, q):
                current = q
                break
        else:
            return current
    return current


def _safe(oracle, p) -> bool:
    try:
        return bool(oracle(p))
    except Exception:  # noqa: BLE001 - a crashing candidate is not a reduction
        return False
