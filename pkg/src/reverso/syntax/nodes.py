"""Abstract syntax for the while language, its parallel dialect and the
augmented / inverted / annotated forms produced by the transforms.

All nodes are frozen dataclasses. Source positions ride along in ``pos`` but
never take part in equality, so a parsed program compares equal to one built
by hand or by a transform.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

Pos = Optional[tuple[int, int]]

RESERVED_STACKS = frozenset({"B", "W"})
# T and F are the Boolean literals, so they cannot name variables either.
RESERVED_NAMES = RESERVED_STACKS | {"T", "F"}


def _pos():
    return field(default=None, compare=False, repr=False)


# -- arithmetic expressions --------------------------------------------------


@dataclass(frozen=True)
class Var:
    name: str
    pos: Pos = _pos()


@dataclass(frozen=True)
class IntLit:
    value: int
    pos: Pos = _pos()


@dataclass(frozen=True)
class Paren:
    """``( e )`` around either an arithmetic or a Boolean expression."""

    inner: Expr
    pos: Pos = _pos()


@dataclass(frozen=True)
class BinOp:
    op: str  # "+" | "-"
    left: AExp
    right: AExp
    pos: Pos = _pos()


# -- Boolean expressions -----------------------------------------------------


@dataclass(frozen=True)
class BoolLit:
    value: bool
    pos: Pos = _pos()


@dataclass(frozen=True)
class Not:
    operand: BExp
    pos: Pos = _pos()


@dataclass(frozen=True)
class CmpEq:
    left: AExp
    right: AExp
    pos: Pos = _pos()


@dataclass(frozen=True)
class CmpGt:
    left: AExp
    right: AExp
    pos: Pos = _pos()


@dataclass(frozen=True)
class And:
    left: BExp
    right: BExp
    pos: Pos = _pos()


@dataclass(frozen=True)
class BoolEq:
    left: BExp
    right: BExp
    pos: Pos = _pos()


@dataclass(frozen=True)
class Pop:
    """``pop(delta(S))``: integer-valued for a variable stack, Boolean for B/W."""

    stack: str
    pos: Pos = _pos()


AExp = Union[Var, IntLit, Paren, BinOp, Pop]
BExp = Union[BoolLit, Not, Paren, CmpEq, CmpGt, And, BoolEq, Pop]
Expr = Union[AExp, BExp]

BOOL_NODES = (BoolLit, Not, CmpEq, CmpGt, And, BoolEq)


def is_bool_expr(e: Expr) -> bool:
    if isinstance(e, Paren):
        return is_bool_expr(e.inner)
    if isinstance(e, Pop):
        return e.stack in RESERVED_STACKS
    return isinstance(e, BOOL_NODES)


def is_value(e: Expr) -> bool:
    return isinstance(e, (IntLit, BoolLit))


# -- statements --------------------------------------------------------------
#
# ``ids`` is the identifier stack of the parallel dialect's annotated form,
# head first. ``None`` means the statement is not annotated at all.

Ids = Optional[tuple[int, ...]]


@dataclass(frozen=True)
class Skip:
    ids: Ids = None
    pos: Pos = _pos()


@dataclass(frozen=True)
class DestAssign:
    target: str
    rhs: AExp
    ids: Ids = None
    pos: Pos = _pos()


@dataclass(frozen=True)
class ConstAssign:
    target: str
    op: str  # "+=" | "-="
    rhs: AExp
    ids: Ids = None
    pos: Pos = _pos()


@dataclass(frozen=True)
class If:
    cond: BExp
    then: Program
    orelse: Program
    pos: Pos = _pos()


@dataclass(frozen=True)
class While:
    cond: BExp
    body: Program
    pos: Pos = _pos()


@dataclass(frozen=True)
class Par:
    left: Program
    right: Program
    pos: Pos = _pos()


@dataclass(frozen=True)
class Push:
    """``push(value, delta(stack))``.

    ``Push("X", Var("X"))`` is the augmentation's ``push(sigma(X), delta(X))``:
    the value is read from the data store when the push executes.
    """

    stack: str
    value: Expr
    pos: Pos = _pos()


Stmt = Union[Skip, DestAssign, ConstAssign, If, While, Par, Push]
SIMPLE_STMTS = (Skip, DestAssign, ConstAssign)


@dataclass(frozen=True)
class Program:
    stmts: tuple[Stmt, ...] = ()

    def __post_init__(self):
        if not isinstance(self.stmts, tuple):
            object.__setattr__(self, "stmts", tuple(self.stmts))

    def __len__(self):
        return len(self.stmts)

    def __iter__(self):
        return iter(self.stmts)


def program(*stmts: Stmt) -> Program:
    return Program(tuple(stmts))


INVERSE_COP = {"+=": "-=", "-=": "+="}
COP_TO_OP = {"+=": "+", "-=": "-"}


# -- traversal helpers ---------------------------------------------------------


def walk_stmts(p: Program):
    """Yield every statement in ``p``, pre-order, descending into blocks."""
    for s in p.stmts:
        yield s
        for child in child_programs(s):
            yield from walk_stmts(child)


def child_programs(s: Stmt) -> tuple[Program, ...]:
    if isinstance(s, If):
        return (s.then, s.orelse)
    if isinstance(s, While):
        return (s.body,)
    if isinstance(s, Par):
        return (s.left, s.right)
    return ()


def walk_expr(e: Expr):
    yield e
    if isinstance(e, Paren):
        yield from walk_expr(e.inner)
    elif isinstance(e, Not):
        yield from walk_expr(e.operand)
    elif isinstance(e, (BinOp, CmpEq, CmpGt, And, BoolEq)):
        yield from walk_expr(e.left)
        yield from walk_expr(e.right)


def stmt_exprs(s: Stmt) -> tuple[Expr, ...]:
    if isinstance(s, (DestAssign, ConstAssign)):
        return (s.rhs,)
    if isinstance(s, (If, While)):
        return (s.cond,)
    if isinstance(s, Push):
        return (s.value,)
    return ()


def expr_vars(e: Expr) -> list[str]:
    return [n.name for n in walk_expr(e) if isinstance(n, Var)]


def count_simple(p: Program) -> int:
    """Number of skip/assignment leaves in ``p``."""
    return sum(isinstance(s, SIMPLE_STMTS) for s in walk_stmts(p))


def strip_ids(p: Program) -> Program:
    """Drop identifier stacks, giving back the un-annotated program."""
    return map_simple(p, lambda s: _with_ids(s, None))


def map_simple(p: Program, fn) -> Program:
    out = []
    for s in p.stmts:
        if isinstance(s, SIMPLE_STMTS):
            out.append(fn(s))
        elif isinstance(s, If):
            out.append(If(s.cond, map_simple(s.then, fn), map_simple(s.orelse, fn), pos=s.pos))
        elif isinstance(s, While):
            out.append(While(s.cond, map_simple(s.body, fn), pos=s.pos))
        elif isinstance(s, Par):
            out.append(Par(map_simple(s.left, fn), map_simple(s.right, fn), pos=s.pos))
        else:
            out.append(s)
    return Program(tuple(out))


def _with_ids(s, ids):
    if isinstance(s, Skip):
        return Skip(ids, pos=s.pos)
    if isinstance(s, DestAssign):
        return DestAssign(s.target, s.rhs, ids, pos=s.pos)
    return ConstAssign(s.target, s.op, s.rhs, ids, pos=s.pos)


def with_ids(s, ids: Ids):
    """Copy of a simple statement carrying identifier stack ``ids``."""
    return _with_ids(s, ids)
