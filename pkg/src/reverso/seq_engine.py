"""Small-step operational semantics for the sequential dialect.

A configuration is ``(program, sigma, delta)``. ``step`` applies exactly one
rule; expression operands are reduced left to right. Rule names are reported
as the derivation path, outermost first, e.g. ``Seq/DA2/OpL/Var``.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

from .stores import AuxStore, aux_pop, aux_push, format_delta, format_sigma
from .syntax.nodes import (
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
    Paren,
    Pop,
    Program,
    Push,
    Skip,
    Var,
    While,
    is_bool_expr,
)
from .syntax.render import render_stmt

DEFAULT_FUEL = 1_000_000
EXPRESSION_RULES = frozenset({"DA2", "CA2", "C3", "Push2"})


class UnboundVariable(NameError):
    pass


class StuckError(RuntimeError):
    """No rule applies to a non-terminal configuration."""


class FuelExhausted(RuntimeError):
    def __init__(self, steps: int, config=None):
        super().__init__(f"no termination within {steps} steps")
        self.steps = steps
        self.config = config


class ExprTypeError(TypeError):
    pass


def default_fuel() -> int:
    return int(os.environ.get("REVERSO_FUEL", DEFAULT_FUEL))


class Configuration(NamedTuple):
    program: Program
    sigma: dict
    delta: AuxStore

    def is_terminal(self) -> bool:
        stmts = self.program.stmts
        return not stmts or (len(stmts) == 1 and isinstance(stmts[0], Skip))


class TraceEntry(NamedTuple):
    rule: str
    config: Configuration

    def line(self) -> str:
        stmts = self.config.program.stmts
        head = render_stmt(stmts[0]) if stmts else "skip"
        return (f"{self.rule} | {head} | sigma={format_sigma(self.config.sigma)}"
                f" | delta={format_delta(self.config.delta)}")

    def to_json(self) -> dict:
        stmts = self.config.program.stmts
        return {
            "rule": self.rule,
            "head": render_stmt(stmts[0]) if stmts else "skip",
            "sigma": dict(self.config.sigma),
            "delta": self.config.delta.to_json(),
        }


# -- expressions ---------------------------------------------------------------


def _pop_value(delta, name, want_bool):
    entry, delta = aux_pop(delta, name)
    if isinstance(entry, bool) != want_bool:
        kind = "Boolean" if want_bool else "integer"
        raise ExprTypeError(f"pop from {name} gave {entry!r} where an {kind} was expected")
    return (BoolLit(entry) if want_bool else IntLit(entry)), delta


def step_aexp(e, sigma, delta):
    """One step of an arithmetic expression: (rules, e', delta')."""
    t = type(e)
    if t is Var:
        try:
            return ("Var",), IntLit(sigma[e.name]), delta
        except KeyError:
            raise UnboundVariable(f"variable {e.name} is unbound") from None
    if t is BinOp:
        left, right = e.left, e.right
        if type(left) is IntLit and type(right) is IntLit:
            v = left.value + right.value if e.op == "+" else left.value - right.value
            return ("Op",), IntLit(v), delta
        if type(left) is not IntLit:
            rules, left, delta = step_aexp(left, sigma, delta)
            return ("OpL",) + rules, BinOp(e.op, left, right), delta
        rules, right, delta = step_aexp(right, sigma, delta)
        return ("OpR",) + rules, BinOp(e.op, left, right), delta
    if t is Paren:
        if type(e.inner) is IntLit:
            return ("Paren",), e.inner, delta
        rules, inner, delta = step_aexp(e.inner, sigma, delta)
        return ("ParenStep",) + rules, Paren(inner), delta
    if t is Pop:
        value, delta = _pop_value(delta, e.stack, False)
        return ("Pop",), value, delta
    raise StuckError(f"arithmetic expression cannot step: {e!r}")


def step_bexp(e, sigma, delta):
    """One step of a Boolean expression: (rules, e', delta')."""
    t = type(e)
    if t is CmpGt or t is CmpEq:
        left, right = e.left, e.right
        if type(left) is IntLit and type(right) is IntLit:
            v = left.value > right.value if t is CmpGt else left.value == right.value
            return ("Bop",), BoolLit(v), delta
        if type(left) is not IntLit:
            rules, left, delta = step_aexp(left, sigma, delta)
            return ("BopL",) + rules, t(left, right), delta
        rules, right, delta = step_aexp(right, sigma, delta)
        return ("BopR",) + rules, t(left, right), delta
    if t is And or t is BoolEq:
        left, right = e.left, e.right
        if type(left) is BoolLit and type(right) is BoolLit:
            if t is And:
                v = left.value and right.value
            else:
                v = left.value == right.value
            return ("Bop",), BoolLit(v), delta
        if type(left) is not BoolLit:
            rules, left, delta = step_bexp(left, sigma, delta)
            return ("BopL",) + rules, t(left, right), delta
        rules, right, delta = step_bexp(right, sigma, delta)
        return ("BopR",) + rules, t(left, right), delta
    if t is Not:
        if type(e.operand) is BoolLit:
            return ("Not",), BoolLit(not e.operand.value), delta
        rules, operand, delta = step_bexp(e.operand, sigma, delta)
        return ("NotStep",) + rules, Not(operand), delta
    if t is Paren:
        if type(e.inner) is BoolLit:
            return ("Paren",), e.inner, delta
        rules, inner, delta = step_bexp(e.inner, sigma, delta)
        return ("ParenStep",) + rules, Paren(inner), delta
    if t is Pop:
        value, delta = _pop_value(delta, e.stack, True)
        return ("Pop",), value, delta
    raise StuckError(f"Boolean expression cannot step: {e!r}")


def eval_aexp(e, sigma, delta=None):
    """Reduce ``e`` to an integer by repeated small steps."""
    while type(e) is not IntLit:
        _, e, delta = step_aexp(e, sigma, delta)
    return e.value


# -- statements ----------------------------------------------------------------

_SKIP = (Skip(),)


def step_stmt(s, sigma, delta):
    """One step of the head statement: (rules, replacement stmts, sigma', delta')."""
    t = type(s)
    if t is DestAssign:
        if type(s.rhs) is IntLit:
            return ("DA1",), _SKIP, {**sigma, s.target: s.rhs.value}, delta
        rules, rhs, delta = step_aexp(s.rhs, sigma, delta)
        return ("DA2",) + rules, (DestAssign(s.target, rhs),), sigma, delta
    if t is ConstAssign:
        if type(s.rhs) is IntLit:
            try:
                old = sigma[s.target]
            except KeyError:
                raise UnboundVariable(f"variable {s.target} is unbound") from None
            v = old + s.rhs.value if s.op == "+=" else old - s.rhs.value
            return ("CA1",), _SKIP, {**sigma, s.target: v}, delta
        rules, rhs, delta = step_aexp(s.rhs, sigma, delta)
        return ("CA2",) + rules, (ConstAssign(s.target, s.op, rhs),), sigma, delta
    if t is If:
        if type(s.cond) is BoolLit:
            if s.cond.value:
                return ("C1",), s.then.stmts, sigma, delta
            return ("C2",), s.orelse.stmts, sigma, delta
        rules, cond, delta = step_bexp(s.cond, sigma, delta)
        return ("C3",) + rules, (If(cond, s.then, s.orelse),), sigma, delta
    if t is While:
        unfolded = If(s.cond, Program(s.body.stmts + (s,)), Program(_SKIP))
        return ("Wh",), (unfolded,), sigma, delta
    if t is Push:
        v = s.value
        if type(v) is IntLit or type(v) is BoolLit:
            return ("Push1",), _SKIP, sigma, aux_push(delta, s.stack, v.value)
        stepper = step_bexp if is_bool_expr(v) else step_aexp
        rules, v, delta = stepper(v, sigma, delta)
        return ("Push2",) + rules, (Push(s.stack, v),), sigma, delta
    raise StuckError(f"no rule applies to {render_stmt(s)!r}")


def step(c: Configuration) -> Optional[tuple[str, Configuration]]:
    """Apply one rule, or return None if ``c`` is terminal."""
    stmts = c.program.stmts
    if not stmts:
        return None
    head = stmts[0]
    if type(head) is Skip:
        if len(stmts) == 1:
            return None
        return "Skip", Configuration(Program(stmts[1:]), c.sigma, c.delta)
    rules, repl, sigma, delta = step_stmt(head, c.sigma, c.delta)
    rest = stmts[1:]
    if rest:
        rules = ("Seq",) + rules
    return "/".join(rules), Configuration(Program(repl + rest), sigma, delta)


@dataclass
class RunResult:
    sigma: dict
    delta: AuxStore
    steps: int
    trace: list = field(default_factory=list)

    def trace_lines(self) -> list[str]:
        return [entry.line() for entry in self.trace]

    def trace_json(self) -> str:
        return json.dumps([entry.to_json() for entry in self.trace])


def _is_expression_step(rule: str) -> bool:
    parts = rule.split("/", 2)
    return parts[0] in EXPRESSION_RULES or (parts[0] == "Seq" and parts[1] in EXPRESSION_RULES)


def run(p: Program, sigma0, delta0: AuxStore, fuel: int | None = None, *,
        trace: bool = True, micro_steps: bool = True) -> RunResult:
    """Step ``p`` to termination.

    The trace starts with a ``start`` entry for the initial configuration.
    With ``micro_steps=False`` expression sub-steps are still executed one
    at a time but left out of the trace.
    """
    if fuel is None:
        fuel = default_fuel()
    if fuel <= 0:
        raise ValueError("fuel must be positive")
    c = Configuration(p, dict(sigma0), delta0)
    entries = [TraceEntry("start", c)] if trace else []
    steps = 0
    while True:
        result = step(c)
        if result is None:
            return RunResult(c.sigma, c.delta, steps, entries)
        if steps >= fuel:
            raise FuelExhausted(steps, c)
        rule, c = result
        steps += 1
        if trace and (micro_steps or not _is_expression_step(rule)):
            entries.append(TraceEntry(rule, c))
