"""Static checks that sit on top of the grammar."""

from __future__ import annotations

from dataclasses import dataclass

from .nodes import (
    RESERVED_NAMES,
    RESERVED_STACKS,
    ConstAssign,
    DestAssign,
    Pop,
    Program,
    Push,
    SIMPLE_STMTS,
    Var,
    child_programs,
    expr_vars,
    is_bool_expr,
    stmt_exprs,
    walk_expr,
)
from .parser import Dialect, dialect_problems


class ReservedName(ValueError):
    pass


class ValidationError(ValueError):
    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(str(v) for v in self.violations))


@dataclass(frozen=True)
class Violation:
    code: str
    message: str
    line: int = 0
    col: int = 0
    stmt_index: int = 0  # 1-based pre-order statement number

    def __str__(self):
        return f"{self.line}:{self.col}: {self.code}: {self.message}"


def _numbered(p: Program, counter):
    for s in p.stmts:
        counter[0] += 1
        yield counter[0], s
        for child in child_programs(s):
            yield from _numbered(child, counter)


def validate(p: Program, dialect="sequential", *, transformed: bool = False) -> list[Violation]:
    """Return every rule ``p`` breaks; an empty list means it is acceptable.

    ``transformed=True`` admits the push/pop forms that augmentation and
    inversion introduce; user-written source may not contain them.
    """
    dialect = Dialect.coerce(dialect)
    out = []
    index = {id(s): n for n, s in _numbered(p, [0])}

    def add(code, message, s):
        line, col = s.pos or (0, 0)
        out.append(Violation(code, message, line, col, index.get(id(s), 0)))

    for s, message in dialect_problems(p, dialect):
        add("DialectError", message, s)

    for n, s in _numbered(p, [0]):
        if isinstance(s, ConstAssign) and s.target in expr_vars(s.rhs):
            add("ConstructiveSelfReference",
                f"right-hand side of '{s.target} {s.op} ...' mentions {s.target}", s)
        if isinstance(s, (DestAssign, ConstAssign)) and s.target in RESERVED_NAMES:
            add("ReservedName", f"{s.target!r} is reserved and cannot be a variable", s)
        for e in stmt_exprs(s):
            for node in walk_expr(e):
                if isinstance(node, Var) and node.name in RESERVED_NAMES:
                    add("ReservedName", f"{node.name!r} is reserved and cannot be a variable", s)
                if isinstance(node, Pop) and not transformed:
                    add("StackOpInSource", "'pop' only appears in inverted programs", s)
        if isinstance(s, Push) and not transformed:
            add("StackOpInSource", "'push' only appears in augmented programs", s)
        if isinstance(s, Push) and s.stack in RESERVED_STACKS and not is_bool_expr(s.value):
            add("TypeError", f"stack {s.stack} holds Booleans", s)
        if isinstance(s, SIMPLE_STMTS) and s.ids:
            if any(a <= b for a, b in zip(s.ids, s.ids[1:])) or min(s.ids) < 1:
                add("BadIdentifierStack",
                    "identifiers must be positive and strictly decreasing from the head", s)
    return out


def require_valid(p: Program, dialect="sequential", **kw) -> None:
    violations = validate(p, dialect, **kw)
    if violations:
        raise ValidationError(violations)


def variables_of(p: Program) -> list[str]:
    """Variables read or written by ``p``, in order of first occurrence.

    Raises ReservedName if the program uses B, W, T or F as a variable.
    Stack names mentioned only by push/pop count when they are variables.
    """
    seen: dict[str, None] = {}

    def note(name, s):
        if name in RESERVED_NAMES:
            line, col = s.pos or (0, 0)
            raise ReservedName(f"{line}:{col}: {name!r} is reserved and cannot be a variable")
        seen.setdefault(name, None)

    def visit(prog: Program):
        for s in prog.stmts:
            if isinstance(s, (DestAssign, ConstAssign)):
                note(s.target, s)
            if isinstance(s, Push) and s.stack not in RESERVED_STACKS:
                note(s.stack, s)
            for e in stmt_exprs(s):
                for node in walk_expr(e):
                    if isinstance(node, Var):
                        note(node.name, s)
                    elif isinstance(node, Pop) and node.stack not in RESERVED_STACKS:
                        note(node.stack, s)
            for child in child_programs(s):
                visit(child)

    visit(p)
    return list(seen)
