"""Seeded random program generation."""

from __future__ import annotations

import random
from dataclasses import dataclass, replace

from ..stores import init_sigma
from ..syntax.nodes import (
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
    Program,
    Skip,
    Var,
    While,
)
from ..syntax.validate import variables_of

DATA_VARS = ("X", "Y", "Z", "U", "V", "A", "C", "D", "E", "G")
COUNTER_VARS = ("N", "M", "K", "L")

COUNTER_PATTERN = "counter-pattern"
FUEL_ONLY = "fuel-only"


@dataclass(frozen=True)
class GenConfig:
    seed: int = 0
    max_depth: int = 2
    max_stmts: int = 12
    var_pool: int = 4
    dialect: str = "sequential"
    loop_bound_style: str = COUNTER_PATTERN
    max_counter: int = 10
    value_range: tuple = (-100, 100)

    def __post_init__(self):
        if self.var_pool < 1 or self.var_pool > len(DATA_VARS):
            raise ValueError(f"var_pool must be between 1 and {len(DATA_VARS)}")
        if self.max_stmts < 0 or self.max_depth < 0:
            raise ValueError("max_stmts and max_depth must be non-negative")
        if self.loop_bound_style not in (COUNTER_PATTERN, FUEL_ONLY):
            raise ValueError(f"unknown loop bound style {self.loop_bound_style!r}")

    def with_seed(self, seed: int) -> "GenConfig":
        return replace(self, seed=seed)


class _Gen:
    def __init__(self, cfg: GenConfig):
        self.cfg = cfg
        self.rng = random.Random(cfg.seed)
        self.data = DATA_VARS[: cfg.var_pool]
        self.budget = cfg.max_stmts

    # -- expressions --

    def aexp(self, depth=0, avoid=None):
        rng = self.rng
        readable = [v for v in self.data + self.counters_in_scope if v != avoid]
        if depth >= 2 or rng.random() < 0.45:
            if readable and rng.random() < 0.65:
                return Var(rng.choice(readable))
            return IntLit(rng.randint(0, 10))
        left = self.aexp(depth + 1, avoid)
        right = self.aexp(depth + 1, avoid)
        if isinstance(right, BinOp) or rng.random() < 0.1:
            right = Paren(right)
        return BinOp(rng.choice("+-"), left, right)

    def bexp(self, depth=0):
        rng = self.rng
        r = rng.random()
        if depth >= 2 or r < 0.55:
            cmp = CmpGt if rng.random() < 0.6 else CmpEq
            return cmp(self.aexp(1), self.aexp(1))
        if r < 0.65:
            return BoolLit(rng.random() < 0.5)
        if r < 0.75:
            return Not(self._bunary(depth + 1))
        if r < 0.9:
            right = self.bexp(depth + 1)
            if isinstance(right, And):
                right = Paren(right)
            return And(self.bexp(depth + 1), right)
        left = self._bunary(depth + 1)
        right = self._bunary(depth + 1)
        return BoolEq(left, right)

    def _bunary(self, depth):
        e = self.bexp(depth)
        return Paren(e) if isinstance(e, (And, BoolEq)) else e

    # -- sequential statements --

    counters_in_scope: tuple = ()

    def block(self, depth, lo=0, hi=3, loops=0):
        n = self.rng.randint(lo, hi)
        stmts = []
        for _ in range(n):
            if self.budget <= 0:
                break
            stmts.extend(self.stmt(depth, loops))
        return stmts

    def stmt(self, depth, loops):
        rng = self.rng
        self.budget -= 1
        kinds = ["da"] * 3 + ["ca"] * 3 + ["skip"]
        if depth < self.cfg.max_depth and self.budget > 0:
            kinds += ["if"] * 2
            # a loop also spends budget on its decrement, nested ones on a reset
            if loops < len(COUNTER_VARS) and self.budget >= (2 if loops else 1):
                kinds += ["while"] * 2
        kind = rng.choice(kinds)
        if kind == "skip":
            return [Skip()]
        if kind == "da":
            target = rng.choice(self.data)
            return [DestAssign(target, self.aexp())]
        if kind == "ca":
            target = rng.choice(self.data)
            return [ConstAssign(target, rng.choice(("+=", "-=")), self.aexp(avoid=target))]
        if kind == "if":
            then = self.block(depth + 1, loops=loops)
            orelse = self.block(depth + 1, loops=loops)
            return [If(self.bexp(), Program(tuple(then)), Program(tuple(orelse)))]
        return self.loop(depth, loops)

    def loop(self, depth, loops):
        rng = self.rng
        if self.cfg.loop_bound_style == FUEL_ONLY:
            body = self.block(depth + 1, loops=loops)
            return [While(self.bexp(), Program(tuple(body)))]
        counter = COUNTER_VARS[loops]
        out = []
        self.budget -= 1
        if loops > 0 or (self.budget > 0 and rng.random() < 0.3):
            self.budget -= 1
            # nested loops restart their counter, otherwise only the first
            # outer iteration would run them
            out.append(DestAssign(counter, IntLit(rng.randint(0, self.cfg.max_counter))))
        c = rng.choice((0, 0, 1, 2))
        guard_left = Var(counter) if c == 0 else BinOp("-", Var(counter), IntLit(c))
        guard = CmpGt(guard_left, IntLit(0))
        if rng.random() < 0.2:
            extra = self.bexp(1) if rng.random() < 0.5 else BoolLit(True)
            guard = And(guard, Paren(extra) if isinstance(extra, (And, BoolEq)) else extra)
        saved = self.counters_in_scope
        self.counters_in_scope = saved + (counter,)
        body = self.block(depth + 1, loops=loops + 1)
        self.counters_in_scope = saved
        body.append(ConstAssign(counter, "-=", IntLit(1)))
        out.append(While(guard, Program(tuple(body))))
        return out

    # -- parallel statements --

    def par_block(self, depth, lo=1, hi=3):
        n = self.rng.randint(lo, hi)
        stmts = []
        for _ in range(n):
            if self.budget <= 0:
                break
            stmts.append(self.par_stmt(depth))
        return stmts

    def par_stmt(self, depth):
        rng = self.rng
        kinds = ["da"] * 3 + ["ca"] * 3 + ["skip"]
        if depth < self.cfg.max_depth and self.budget >= 2:
            kinds += ["par"] * 4
        kind = rng.choice(kinds)
        if kind == "par":
            left = self.par_block(depth + 1)
            right = self.par_block(depth + 1)
            return Par(Program(tuple(left)), Program(tuple(right)))
        self.budget -= 1
        if kind == "skip":
            return Skip()
        target = rng.choice(self.data)
        if kind == "da":
            return DestAssign(target, self.aexp())
        return ConstAssign(target, rng.choice(("+=", "-=")), self.aexp(avoid=target))


def gen_program(cfg: GenConfig) -> Program:
    """A random program that passes ``validate`` for ``cfg.dialect``.

    With the counter-pattern loop style every loop is guarded by a counter
    that only its own body decrements, so every program terminates.
    """
    return gen_case(cfg)[0]


def gen_case(cfg: GenConfig):
    """(program, initial data store) drawn from ``cfg.seed``."""
    g = _Gen(cfg)
    if cfg.max_stmts == 0:
        stmts = []
    elif cfg.dialect in ("parallel", "par"):
        stmts = []
        if cfg.max_depth > 0 and cfg.max_stmts >= 2 and g.rng.random() < 0.8:
            stmts.append(Par(Program(tuple(g.par_block(1))), Program(tuple(g.par_block(1)))))
        while g.budget > 0:
            stmts.append(g.par_stmt(0))
            if g.rng.random() < 0.3:
                break
    else:
        stmts = []
        while g.budget > 0:
            stmts.extend(g.stmt(0, 0))
            if g.rng.random() < 0.15:
                break
    p = Program(tuple(stmts))
    lo, hi = cfg.value_range
    values = {}
    for v in list(g.data) + list(variables_of(p)):
        if v in COUNTER_VARS:
            values[v] = g.rng.randint(0, cfg.max_counter)
        else:
            values[v] = g.rng.randint(lo, hi)
    return p, init_sigma(values.keys(), values)
