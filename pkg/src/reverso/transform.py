"""Source-to-source transforms.

Sequential dialect:
    aug  -- insert pushes so a forward run records what it destroys
    inv  -- build the program that consumes those records in reverse
Parallel dialect:
    ann  -- give every statement an empty identifier stack
    inv_annotated -- reverse statement order, flip constructive operators
"""

from __future__ import annotations

from .syntax.nodes import (
    INVERSE_COP,
    BoolLit,
    ConstAssign,
    DestAssign,
    If,
    Par,
    Pop,
    Program,
    Push,
    Skip,
    SIMPLE_STMTS,
    Var,
    While,
    with_ids,
)
from .syntax.parser import Dialect, check_dialect
from .syntax.validate import require_valid

T = BoolLit(True)
F = BoolLit(False)


def push_current(name: str) -> Push:
    """``push(sigma(X), delta(X))``; the value is read when the push runs."""
    return Push(name, Var(name))


# -- augmentation --------------------------------------------------------------


def aug(p: Program) -> Program:
    require_valid(p, Dialect.SEQUENTIAL)
    return _aug(p)


def _aug(p: Program) -> Program:
    out = []
    for s in p.stmts:
        out.extend(_aug_stmt(s))
    return Program(tuple(out))


def _aug_stmt(s):
    if isinstance(s, (Skip, ConstAssign)):
        return (s,)
    if isinstance(s, DestAssign):
        return (push_current(s.target), s)
    if isinstance(s, If):
        then = _aug(s.then).stmts + (Push("B", T),)
        orelse = _aug(s.orelse).stmts + (Push("B", F),)
        return (If(s.cond, Program(then), Program(orelse)),)
    if isinstance(s, While):
        # First iteration records F, every later test (including the failing
        # one) records T; a loop never entered records a lone F.
        body = _aug(s.body).stmts
        loop = While(s.cond, Program((Push("W", T),) + body))
        entered = (Push("W", F),) + body + (loop, Push("W", T))
        return (If(s.cond, Program(entered), Program((Push("W", F),))),)
    raise TypeError(f"cannot augment {type(s).__name__}")


# -- inversion -----------------------------------------------------------------


def inv(p: Program) -> Program:
    """Invert an ORIGINAL program (not its augmented form)."""
    require_valid(p, Dialect.SEQUENTIAL)
    return _inv(p)


def _inv(p: Program) -> Program:
    return Program(tuple(_inv_stmt(s) for s in reversed(p.stmts)))


def _inv_stmt(s):
    if isinstance(s, Skip):
        return s
    if isinstance(s, DestAssign):
        return DestAssign(s.target, Pop(s.target))
    if isinstance(s, ConstAssign):
        return ConstAssign(s.target, INVERSE_COP[s.op], s.rhs)
    if isinstance(s, If):
        return If(Pop("B"), _inv(s.then), _inv(s.orelse))
    if isinstance(s, While):
        return While(Pop("W"), _inv(s.body))
    raise TypeError(f"cannot invert {type(s).__name__}")


def deaug(p: Program) -> Program:
    """Recover the original program from ``aug``'s output.

    Only programs in the image of ``aug`` are accepted; anything else raises
    ValueError. Lets a checkpoint taken from an augmented run be reversed.
    """
    out = []
    stmts = p.stmts
    i = 0
    while i < len(stmts):
        s = stmts[i]
        if isinstance(s, (Skip, ConstAssign)):
            out.append(s)
        elif (isinstance(s, Push) and s.value == Var(s.stack) and i + 1 < len(stmts)
              and isinstance(stmts[i + 1], DestAssign) and stmts[i + 1].target == s.stack):
            out.append(stmts[i + 1])
            i += 1
        elif isinstance(s, If) and (loop := _match_aug_while(s)) is not None:
            out.append(loop)
        elif isinstance(s, If) and _ends_with(s.then, Push("B", T)) and _ends_with(s.orelse, Push("B", F)):
            out.append(If(s.cond, deaug(Program(s.then.stmts[:-1])), deaug(Program(s.orelse.stmts[:-1]))))
        else:
            raise ValueError(f"statement {i + 1} is not in augmented form: {s!r}")
        i += 1
    return Program(tuple(out))


def _ends_with(p: Program, s) -> bool:
    return bool(p.stmts) and p.stmts[-1] == s


def _match_aug_while(s: If):
    then, orelse = s.then.stmts, s.orelse.stmts
    if orelse != (Push("W", F),) or len(then) < 3:
        return None
    if then[0] != Push("W", F) or then[-1] != Push("W", T):
        return None
    loop = then[-2]
    if not isinstance(loop, While) or loop.cond != s.cond:
        return None
    body = then[1:-2]
    if loop.body.stmts != (Push("W", T),) + body:
        return None
    return While(s.cond, deaug(Program(body)))


# -- parallel dialect ----------------------------------------------------------


def ann(p: Program) -> Program:
    require_valid(p, Dialect.PARALLEL)
    return _ann(p)


def _ann(p: Program) -> Program:
    out = []
    for s in p.stmts:
        if isinstance(s, Par):
            out.append(Par(_ann(s.left), _ann(s.right)))
        else:
            out.append(with_ids(s, ()))
    return Program(tuple(out))


def inv_annotated(p: Program) -> Program:
    """Reverse order and flip ``+=``/``-=``; identifier stacks carry over.

    Destructive assignments keep their right-hand side: reverse execution
    restores the saved value and never evaluates it.
    """
    check_dialect(p, Dialect.ANNOTATED)
    return _inv_ann(p)


def _inv_ann(p: Program) -> Program:
    out = []
    for s in reversed(p.stmts):
        if isinstance(s, Par):
            out.append(Par(_inv_ann(s.left), _inv_ann(s.right)))
        elif isinstance(s, ConstAssign):
            out.append(ConstAssign(s.target, INVERSE_COP[s.op], s.rhs, s.ids))
        elif isinstance(s, SIMPLE_STMTS):
            out.append(s)
        else:
            raise TypeError(f"cannot invert {type(s).__name__} in the parallel dialect")
    return Program(tuple(out))
