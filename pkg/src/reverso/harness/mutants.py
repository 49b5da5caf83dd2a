"""Deliberately broken transforms, used to check that the suites have teeth.

Each mutant corrupts exactly one clause of aug, inv or inv_annotated and is
otherwise identical to the real transform.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from ..syntax.nodes import (
    INVERSE_COP,
    ConstAssign,
    DestAssign,
    If,
    Par,
    Pop,
    Program,
    Push,
    Skip,
    SIMPLE_STMTS,
    While,
)
from ..syntax.parser import Dialect, check_dialect
from ..syntax.validate import require_valid
from ..transform import F, T, aug, inv, inv_annotated, push_current

SEQ = "sequential"
PAR = "parallel"


@dataclass(frozen=True)
class Mutant:
    name: str
    description: str
    dialect: str
    aug_fn: Callable = aug
    inv_fn: Callable = inv
    inv_annotated_fn: Callable = inv_annotated


def _broken_aug(bug: str) -> Callable:
    def walk(p: Program) -> Program:
        out = []
        for s in p.stmts:
            out.extend(clause(s))
        return Program(tuple(out))

    def clause(s):
        if isinstance(s, (Skip, ConstAssign)):
            return (s,)
        if isinstance(s, DestAssign):
            return (s,) if bug == "drop-da-push" else (push_current(s.target), s)
        if isinstance(s, If):
            then_flag, else_flag = (F, T) if bug == "swap-if-flags" else (T, F)
            return (If(s.cond, Program(walk(s.then).stmts + (Push("B", then_flag),)),
                       Program(walk(s.orelse).stmts + (Push("B", else_flag),))),)
        body = walk(s.body).stmts
        first = T if bug == "while-first-t" else F
        later = F if bug == "while-later-f" else T
        last = F if bug == "while-exit-f" else T
        skipped = T if bug == "while-never-entered-t" else F
        loop = While(s.cond, Program((Push("W", later),) + body))
        entered = (Push("W", first),) + body + (loop, Push("W", last))
        return (If(s.cond, Program(entered), Program((Push("W", skipped),))),)

    def run(p: Program) -> Program:
        require_valid(p, Dialect.SEQUENTIAL)
        return walk(p)

    return run


def _broken_inv(bug: str) -> Callable:
    def walk(p: Program) -> Program:
        stmts = p.stmts if bug == "inv-keep-order" else tuple(reversed(p.stmts))
        return Program(tuple(clause(s) for s in stmts))

    def clause(s):
        if isinstance(s, Skip):
            return s
        if isinstance(s, DestAssign):
            return DestAssign(s.target, Pop(s.target))
        if isinstance(s, ConstAssign):
            op = s.op if bug == "inv-same-cop" else INVERSE_COP[s.op]
            return ConstAssign(s.target, op, s.rhs)
        if isinstance(s, If):
            if bug == "inv-swap-branches":
                return If(Pop("B"), walk(s.orelse), walk(s.then))
            return If(Pop("B"), walk(s.then), walk(s.orelse))
        return While(Pop("W"), walk(s.body))

    def run(p: Program) -> Program:
        require_valid(p, Dialect.SEQUENTIAL)
        return walk(p)

    return run


def _broken_inv_annotated(bug: str) -> Callable:
    def walk(p: Program) -> Program:
        stmts = p.stmts if bug == "par-inv-keep-order" else tuple(reversed(p.stmts))
        out = []
        for s in stmts:
            if isinstance(s, Par):
                out.append(Par(walk(s.left), walk(s.right)))
            elif isinstance(s, ConstAssign):
                op = s.op if bug == "par-inv-same-cop" else INVERSE_COP[s.op]
                out.append(ConstAssign(s.target, op, s.rhs, s.ids))
            elif isinstance(s, SIMPLE_STMTS):
                out.append(s)
        return Program(tuple(out))

    def run(p: Program) -> Program:
        check_dialect(p, Dialect.ANNOTATED)
        return walk(p)

    return run


def _seq_aug(name, description):
    return Mutant(name, description, SEQ, aug_fn=_broken_aug(name))


def _seq_inv(name, description):
    return Mutant(name, description, SEQ, inv_fn=_broken_inv(name))


def _par_inv(name, description):
    return Mutant(name, description, PAR, inv_annotated_fn=_broken_inv_annotated(name))


MUTANTS = (
    _seq_aug("while-first-t", "while loop records T instead of F for its first iteration"),
    _seq_aug("drop-da-push", "destructive assignment does not save the old value"),
    _seq_aug("swap-if-flags", "conditional records F for the then branch and T for else"),
    _seq_aug("while-exit-f", "while loop records F instead of T when it exits"),
    _seq_aug("while-never-entered-t", "loop that is never entered records T instead of F"),
    _seq_aug("while-later-f", "later loop iterations record F instead of T"),
    _seq_inv("inv-keep-order", "inversion keeps statement order instead of reversing it"),
    _seq_inv("inv-same-cop", "inversion keeps += and -= instead of flipping them"),
    _seq_inv("inv-swap-branches", "inversion swaps the then and else branches"),
    _par_inv("par-inv-keep-order", "parallel inversion keeps statement order"),
    _par_inv("par-inv-same-cop", "parallel inversion keeps += and -="),
)

MUTANTS_BY_NAME = {m.name: m for m in MUTANTS}
