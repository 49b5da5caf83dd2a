"""Recursive-descent parser for ``.rev`` source.

One grammar covers every dialect; the requested dialect is enforced after
parsing so that error messages can point at the offending construct.
Statement separators: ``;`` between statements, optional
after a block closed by ``end`` or ``)``, optional at the end of a block.
"""

from __future__ import annotations

import re
from enum import Enum

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
    SIMPLE_STMTS,
    Var,
    While,
    walk_expr,
    walk_stmts,
    stmt_exprs,
)


class Dialect(str, Enum):
    SEQUENTIAL = "sequential"
    PARALLEL = "parallel"
    ANNOTATED = "annotated"

    @classmethod
    def coerce(cls, value) -> "Dialect":
        if isinstance(value, cls):
            return value
        aliases = {"seq": "sequential", "par": "parallel", "ann": "annotated"}
        return cls(aliases.get(value, value))


class ParseError(SyntaxError):
    """Malformed source. Carries 1-based ``line`` and ``col``."""

    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {message}")
        self.msg_text = message
        self.line = line
        self.col = col


class DialectError(ValueError):
    def __init__(self, message: str, line: int = 0, col: int = 0):
        super().__init__(f"{line}:{col}: {message}" if line else message)
        self.line = line
        self.col = col


KEYWORDS = {
    "skip", "if", "then", "else", "end", "while", "do", "par",
    "push", "pop", "sigma", "delta", "not", "and", "T", "F",
}
_ALIASES = {"σ": "sigma", "δ": "delta", "¬": "not", "!": "not", "∧": "and", "&&": "and"}

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>\#[^\n]*)
  | (?P<int>\d+)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>\+=|-=|==|&&|[=+\-><()\[\],;!]|σ|δ|¬|∧)
    """,
    re.VERBOSE,
)


class Token:
    __slots__ = ("kind", "text", "line", "col")

    def __init__(self, kind, text, line, col):
        self.kind = kind
        self.text = text
        self.line = line
        self.col = col

    def __repr__(self):
        return f"Token({self.kind}, {self.text!r}, {self.line}:{self.col})"


def tokenize(text: str) -> list[Token]:
    tokens = []
    line, line_start, i = 1, 0, 0
    while i < len(text):
        m = _TOKEN_RE.match(text, i)
        if m is None:
            raise ParseError(f"unexpected character {text[i]!r}", line, i - line_start + 1)
        kind = m.lastgroup
        col = i - line_start + 1
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind == "int":
            tokens.append(Token("int", m.group(), line, col))
        elif kind == "name":
            word = m.group()
            tokens.append(Token("kw" if word in KEYWORDS else "name", word, line, col))
        elif kind == "op":
            sym = _ALIASES.get(m.group(), m.group())
            tokens.append(Token("kw" if sym in KEYWORDS else "op", sym, line, col))
        i = m.end()
    tokens.append(Token("eof", "", line, i - line_start + 1))
    return tokens


class _Backtrack(Exception):
    pass


class Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0

    # -- token plumbing --

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def at(self, *texts: str) -> bool:
        t = self.tok
        return t.kind in ("op", "kw") and t.text in texts

    def advance(self) -> Token:
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.error(f"expected {text!r}, found {self.describe()}")
        return self.advance()

    def expect_name(self) -> Token:
        if self.tok.kind != "name":
            self.error(f"expected a variable name, found {self.describe()}")
        return self.advance()

    def describe(self) -> str:
        return "end of input" if self.tok.kind == "eof" else repr(self.tok.text)

    def error(self, message: str):
        raise ParseError(message, self.tok.line, self.tok.col)

    def pos(self):
        return (self.tok.line, self.tok.col)

    # -- programs and statements --

    def parse(self) -> Program:
        prog = self.block(())
        if self.tok.kind != "eof":
            self.error(f"unexpected {self.describe()}")
        return prog

    def block(self, closers: tuple[str, ...]) -> Program:
        stmts = []
        while self.tok.kind != "eof" and not self.at(*closers):
            s, closed = self.statement()
            stmts.append(s)
            if self.at(";"):
                self.advance()
            elif not closed and self.tok.kind != "eof" and not self.at(*closers):
                self.error(f"expected ';', found {self.describe()}")
        return Program(tuple(stmts))

    def statement(self):
        """Returns (stmt, closed) where closed means it ended in 'end' or ')'."""
        start = self.pos()
        left, closed = self.par_operand()
        if not self.at("par"):
            if self._last_was_group:
                self.error("a parenthesised block must be an operand of 'par'")
            return left.stmts[0], closed
        node = None
        while self.at("par"):
            self.advance()
            right, closed = self.par_operand()
            node = Par(left, right, pos=start)
            left = Program((node,))
        return node, closed

    def par_operand(self):
        self._last_was_group = False
        if self.at("("):
            self.advance()
            body = self.block((")",))
            self.expect(")")
            self._last_was_group = True
            return body, True
        s, closed = self.single()
        return Program((s,)), closed

    def single(self):
        t = self.tok
        p = self.pos()
        if self.at("skip"):
            self.advance()
            return Skip(self.ids(), pos=p), False
        if self.at("if"):
            self.advance()
            cond = self.bexp()
            self.expect("then")
            then = self.block(("else", "end"))
            orelse = Program()
            if self.at("else"):
                self.advance()
                orelse = self.block(("end",))
            self.expect("end")
            return If(cond, then, orelse, pos=p), True
        if self.at("while"):
            self.advance()
            cond = self.bexp()
            self.expect("do")
            body = self.block(("end",))
            self.expect("end")
            return While(cond, body, pos=p), True
        if self.at("push"):
            self.advance()
            self.expect("(")
            value = self.push_value()
            self.expect(",")
            stack = self.stack_ref()
            self.expect(")")
            return Push(stack, value, pos=p), True
        if t.kind == "name":
            name = self.advance().text
            if self.at("="):
                self.advance()
                rhs = self.aexp()
                return DestAssign(name, rhs, self.ids(), pos=p), False
            if self.at("+=", "-="):
                op = self.advance().text
                rhs = self.aexp()
                return ConstAssign(name, op, rhs, self.ids(), pos=p), False
            self.error(f"expected '=', '+=' or '-=' after {name!r}, found {self.describe()}")
        self.error(f"expected a statement, found {self.describe()}")

    def ids(self):
        if not self.at("["):
            return None
        self.advance()
        out = []
        while not self.at("]"):
            if self.tok.kind != "int":
                self.error(f"expected an identifier, found {self.describe()}")
            out.append(int(self.advance().text))
            if not self.at("]"):
                self.expect(",")
        self.expect("]")
        return tuple(out)

    def stack_ref(self) -> str:
        if self.at("delta"):
            self.advance()
            self.expect("(")
            name = self.expect_name().text
            self.expect(")")
            return name
        return self.expect_name().text

    def push_value(self):
        if self.at("T", "F") and self.toks[self.i + 1].text == ",":
            return BoolLit(self.advance().text == "T", pos=self.pos())
        mark = self.i
        try:
            return self.bexp()
        except ParseError:
            self.i = mark
        return self.aexp()

    # -- arithmetic --

    def aexp(self):
        left = self.primary()
        while self.at("+", "-"):
            p = self.pos()
            op = self.advance().text
            left = BinOp(op, left, self.primary(), pos=p)
        return left

    def primary(self):
        t = self.tok
        p = self.pos()
        if t.kind == "int":
            self.advance()
            return IntLit(int(t.text), pos=p)
        if self.at("-") and self.toks[self.i + 1].kind == "int":
            self.advance()
            return IntLit(-int(self.advance().text), pos=p)
        if t.kind == "name":
            self.advance()
            return Var(t.text, pos=p)
        if self.at("sigma"):
            self.advance()
            self.expect("(")
            name = self.expect_name().text
            self.expect(")")
            return Var(name, pos=p)
        if self.at("pop"):
            return self.pop()
        if self.at("("):
            self.advance()
            inner = self.aexp()
            self.expect(")")
            return Paren(inner, pos=p)
        self.error(f"expected an expression, found {self.describe()}")

    def pop(self):
        p = self.pos()
        self.expect("pop")
        self.expect("(")
        name = self.stack_ref()
        self.expect(")")
        return Pop(name, pos=p)

    # -- Boolean --
    # bexp := beq ('and' beq)* ; beq := bunary ('==' bunary)*

    def bexp(self):
        left = self.beq()
        while self.at("and"):
            p = self.pos()
            self.advance()
            left = And(left, self.beq(), pos=p)
        return left

    def beq(self):
        left = self.bunary()
        while self.at("=="):
            p = self.pos()
            self.advance()
            left = BoolEq(left, self.bunary(), pos=p)
        return left

    def bunary(self):
        p = self.pos()
        if self.at("not"):
            self.advance()
            return Not(self.bunary(), pos=p)
        if self.at("T", "F"):
            return BoolLit(self.advance().text == "T", pos=p)
        mark = self.i
        try:
            return self.comparison()
        except ParseError:
            self.i = mark
        if self.at("("):
            self.advance()
            inner = self.bexp()
            self.expect(")")
            return Paren(inner, pos=p)
        if self.at("pop"):
            return self.pop()
        self.error(f"expected a Boolean expression, found {self.describe()}")

    def comparison(self):
        p = self.pos()
        left = self.aexp()
        if self.at(">"):
            self.advance()
            return CmpGt(left, self.aexp(), pos=p)
        if self.at("=="):
            self.advance()
            return CmpEq(left, self.aexp(), pos=p)
        self.error("expected '>' or '=='")


def parse_program(text: str, dialect="sequential") -> Program:
    """Parse ``text`` and check it only uses constructs legal in ``dialect``.

    Raises ParseError for malformed text and DialectError for a construct
    the dialect does not allow (``par`` in sequential code, loops under
    ``par``, missing identifier stacks in annotated code, ...).
    """
    prog = Parser(text).parse()
    check_dialect(prog, Dialect.coerce(dialect))
    return prog


def parse_expr(text: str):
    """Parse a standalone arithmetic or Boolean expression."""
    parser = Parser(text)
    mark = parser.i
    try:
        e = parser.bexp()
        if parser.tok.kind == "eof":
            return e
    except ParseError:
        pass
    parser.i = mark
    e = parser.aexp()
    if parser.tok.kind != "eof":
        parser.error(f"unexpected {parser.describe()}")
    return e


def dialect_problems(prog: Program, dialect: Dialect):
    """Yield (stmt, message) for every construct illegal in ``dialect``."""
    for s in walk_stmts(prog):
        if dialect is Dialect.SEQUENTIAL:
            if isinstance(s, Par):
                yield s, "'par' is not allowed in the sequential dialect"
            elif isinstance(s, SIMPLE_STMTS) and s.ids is not None:
                yield s, "identifier stacks are only allowed in annotated programs"
            continue
        if isinstance(s, (If, While)):
            kind = "if" if isinstance(s, If) else "while"
            yield s, f"'{kind}' is not allowed in the parallel dialect"
        elif isinstance(s, Push):
            yield s, "'push' is not allowed in the parallel dialect"
        elif isinstance(s, SIMPLE_STMTS):
            if dialect is Dialect.ANNOTATED and s.ids is None:
                yield s, "statement lacks an identifier stack"
            elif dialect is Dialect.PARALLEL and s.ids is not None:
                yield s, "identifier stacks are only allowed in annotated programs"
        for e in stmt_exprs(s):
            if any(isinstance(n, Pop) for n in walk_expr(e)):
                yield s, "'pop' is not allowed in the parallel dialect"


def check_dialect(prog: Program, dialect: Dialect) -> None:
    for s, message in dialect_problems(prog, dialect):
        line, col = s.pos or (0, 0)
        raise DialectError(message, line, col)
