"""Pretty-printer producing text the parser reads back to the same AST.

Parentheses come from ``Paren`` nodes. Where an AST has no ``Paren`` but the
text would otherwise regroup (``X - (Y - Z)`` built without one), the
printer adds them so the printed program still means the same thing.
"""

from __future__ import annotations

from .nodes import (
    And,
    BinOp,
    BoolEq,
    BoolLit,
    CmpEq,
    CmpGt,
    ConstAssign,
    DestAssign,
    If,
    IntLit,
    Not,
    Par,
    Paren,
    Pop,
    Program,
    Push,
    Skip,
    Var,
    While,
)

INDENT = "  "


def render_program(p: Program, indent: int = 0) -> str:
    """Multi-line rendering: one statement per line, blocks indented."""
    return "".join(_lines(p, indent))


def _lines(p: Program, depth: int):
    pad = INDENT * depth
    for s in p.stmts:
        if isinstance(s, If):
            yield f"{pad}if {render_expr(s.cond)} then\n"
            yield from _lines(s.then, depth + 1)
            yield f"{pad}else\n"
            yield from _lines(s.orelse, depth + 1)
            yield f"{pad}end;\n"
        elif isinstance(s, While):
            yield f"{pad}while {render_expr(s.cond)} do\n"
            yield from _lines(s.body, depth + 1)
            yield f"{pad}end;\n"
        else:
            yield f"{pad}{render_stmt(s)};\n"


def render_inline(p: Program) -> str:
    return "; ".join(render_stmt(s) for s in p.stmts)


def render_stmt(s) -> str:
    """Single-line rendering of one statement (no trailing ';')."""
    if isinstance(s, Skip):
        return "skip" + _ids(s.ids)
    if isinstance(s, DestAssign):
        return f"{s.target} = {render_expr(s.rhs)}{_ids(s.ids)}"
    if isinstance(s, ConstAssign):
        return f"{s.target} {s.op} {render_expr(s.rhs)}{_ids(s.ids)}"
    if isinstance(s, Push):
        if isinstance(s.value, Var):
            value = f"sigma({s.value.name})"
        else:
            value = render_expr(s.value)
        return f"push({value}, delta({s.stack}))"
    if isinstance(s, Par):
        return f"{_par_operand(s.left)} par {_par_operand(s.right)}"
    if isinstance(s, If):
        return (f"if {render_expr(s.cond)} then {render_inline(s.then)} "
                f"else {render_inline(s.orelse)} end")
    if isinstance(s, While):
        return f"while {render_expr(s.cond)} do {render_inline(s.body)} end"
    raise TypeError(f"not a statement: {s!r}")


def _par_operand(p: Program) -> str:
    if len(p.stmts) == 1 and not isinstance(p.stmts[0], Par):
        return render_stmt(p.stmts[0])
    return f"({render_inline(p)})"


def _ids(ids) -> str:
    if ids is None:
        return ""
    return " [" + ",".join(str(i) for i in ids) + "]"


# -- expressions ---------------------------------------------------------------
#
# Levels, loosest first: and (1) < Boolean == (2) < not/atom (3) for Boolean
# expressions; sum (1) < primary (2) for arithmetic ones.


def render_expr(e) -> str:
    if isinstance(e, (BoolLit, Not, CmpEq, CmpGt, And, BoolEq)):
        return _b(e, 1)
    if isinstance(e, Paren):
        return f"({render_expr(e.inner)})"
    if isinstance(e, Pop):
        return f"pop(delta({e.stack}))"
    return _a(e, 1)


def _a(e, level: int) -> str:
    if isinstance(e, IntLit):
        return str(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Pop):
        return f"pop(delta({e.stack}))"
    if isinstance(e, Paren):
        return f"({render_expr(e.inner)})"
    if isinstance(e, BinOp):
        text = f"{_a(e.left, 1)} {e.op} {_a(e.right, 2)}"
        return f"({text})" if level > 1 else text
    raise TypeError(f"not an arithmetic expression: {e!r}")


def _b(e, level: int) -> str:
    if isinstance(e, BoolLit):
        return "T" if e.value else "F"
    if isinstance(e, Pop):
        return f"pop(delta({e.stack}))"
    if isinstance(e, Paren):
        return f"({render_expr(e.inner)})"
    if isinstance(e, Not):
        return f"not {_b(e.operand, 3)}"
    if isinstance(e, CmpGt):
        return f"{_a(e.left, 1)} > {_a(e.right, 1)}"
    if isinstance(e, CmpEq):
        return f"{_a(e.left, 1)} == {_a(e.right, 1)}"
    if isinstance(e, BoolEq):
        text = f"{_b(e.left, 2)} == {_b(e.right, 3)}"
        return f"({text})" if level > 2 else text
    if isinstance(e, And):
        text = f"{_b(e.left, 1)} and {_b(e.right, 2)}"
        return f"({text})" if level > 1 else text
    raise TypeError(f"not a Boolean expression: {e!r}")
