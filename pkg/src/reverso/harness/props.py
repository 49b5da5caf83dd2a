"""Executable round-trip and equivalence properties.

Checks never raise on a property failure; they return a PropertyReport.
Runs that exhaust their fuel are counted as skipped, since the properties
only speak about terminating executions.
"""

from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional

from .. import par_engine, seq_engine
from ..seq_engine import FuelExhausted
from ..stores import SEQUENTIAL, IdentifierCounter, init_aux, init_sigma
from ..syntax.nodes import ConstAssign, DestAssign, Program, walk_stmts, with_ids
from ..syntax.render import render_program
from ..syntax.validate import variables_of
from ..transform import ann, aug, inv, inv_annotated

HARNESS_FUEL = 200_000


@dataclass
class Failure:
    message: str
    program: str
    seed: Optional[int] = None
    minimized: Optional[str] = None
    schedule: Optional[list] = None


@dataclass
class PropertyReport:
    prop: str = ""
    cases: int = 0
    passed: int = 0
    skipped: int = 0
    failures: list = field(default_factory=list)
    elapsed: float = 0.0

    @property
    def ok(self) -> bool:
        return not self.failures

    def merge(self, other: "PropertyReport") -> "PropertyReport":
        self.cases += other.cases
        self.passed += other.passed
        self.skipped += other.skipped
        self.failures.extend(other.failures)
        self.elapsed += other.elapsed
        return self

    def to_json(self) -> dict:
        doc = asdict(self)
        doc["ok"] = self.ok
        return doc

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2)


def _single(prop, p, started, *, failure=None, skipped=False) -> PropertyReport:
    report = PropertyReport(prop=prop, cases=1, elapsed=time.perf_counter() - started)
    if skipped:
        report.skipped = 1
    elif failure is not None:
        report.failures.append(Failure(failure, render_program(p)))
    else:
        report.passed = 1
    return report


def _stores(p: Program, sigma0):
    return init_sigma(variables_of(p), sigma0), init_aux(variables_of(p), SEQUENTIAL)


def check_prop1(p: Program, sigma0, *, aug_fn: Callable = aug, fuel: int = HARNESS_FUEL) -> PropertyReport:
    """aug(p) changes the data store exactly as p does; p leaves delta alone."""
    started = time.perf_counter()
    sigma0, delta0 = _stores(p, sigma0)
    try:
        plain = seq_engine.run(p, sigma0, delta0, fuel, trace=False)
    except FuelExhausted:
        return _single("1", p, started, skipped=True)
    if plain.delta != delta0:
        return _single("1", p, started, failure="original program touched the auxiliary store")
    try:
        augmented = seq_engine.run(aug_fn(p), sigma0, delta0, 10 * plain.steps + 1000, trace=False)
    except Exception as exc:  # noqa: BLE001 - any fault is a property failure
        return _single("1", p, started, failure=f"augmented run failed: {type(exc).__name__}: {exc}")
    if augmented.sigma != plain.sigma:
        return _single("1", p, started,
                       failure=f"data stores differ: original {plain.sigma}, augmented {augmented.sigma}")
    return _single("1", p, started)


def check_prop2(p: Program, sigma0, *, aug_fn: Callable = aug, inv_fn: Callable = inv,
                fuel: int = HARNESS_FUEL) -> PropertyReport:
    """Running inv(p) after aug(p) gives back sigma0 and drains every stack."""
    started = time.perf_counter()
    sigma0, delta0 = _stores(p, sigma0)
    try:
        plain = seq_engine.run(p, sigma0, delta0, fuel, trace=False)
    except FuelExhausted:
        return _single("2", p, started, skipped=True)
    budget = 10 * plain.steps + 1000
    try:
        fwd = seq_engine.run(aug_fn(p), sigma0, delta0, budget, trace=False)
        back = seq_engine.run(inv_fn(p), fwd.sigma, fwd.delta, budget, trace=False)
    except Exception as exc:  # noqa: BLE001
        return _single("2", p, started, failure=f"{type(exc).__name__}: {exc}")
    if back.sigma != sigma0:
        return _single("2", p, started, failure=f"data store not restored: {back.sigma} != {sigma0}")
    if back.delta != delta0:
        return _single("2", p, started, failure=f"auxiliary store not drained: {back.delta}")
    return _single("2", p, started)


def _forward_runs(annotated: Program, sigma0, mode):
    if mode == "exhaustive":
        for r in par_engine.enumerate_interleavings(annotated, sigma0, bound=10**6, check=False):
            yield r.forward
        return
    _, n, seed = mode
    for k in range(n):
        yield par_engine.fwd_run(annotated, sigma0, schedule=par_engine.Seeded(seed + k))


def _check_one_schedule(p, annotated, sigma0, delta0, fwd, inv_fn) -> Optional[str]:
    # forward data store agrees with running the statements in completion order
    order = [with_ids(par_engine.stmt_at(annotated, e.loc), None) for e in fwd.record]
    seq = seq_engine.run(Program(tuple(order)), sigma0, init_aux(variables_of(p)), trace=False)
    if seq.sigma != fwd.sigma:
        return f"forward store {fwd.sigma} differs from sequential replay {seq.sigma}"
    assignments = [s for s in walk_stmts(fwd.program) if isinstance(s, (DestAssign, ConstAssign))]
    seen = sorted(i for s in assignments for i in s.ids)
    if seen != list(range(1, len(assignments) + 1)) or any(len(s.ids) != 1 for s in assignments):
        return f"identifier stacks are not a permutation of 1..{len(assignments)}: {seen}"
    try:
        rev = par_engine.rev_run(inv_fn(fwd.program), fwd.sigma, fwd.delta, fwd.counter)
    except Exception as exc:  # noqa: BLE001
        return f"reverse run failed: {type(exc).__name__}: {exc}"
    if rev.sigma != sigma0:
        return f"data store not restored: {rev.sigma} != {sigma0}"
    if rev.delta != delta0:
        return f"auxiliary store not drained: {rev.delta}"
    if rev.counter != IdentifierCounter(1):
        return f"counter not reset: {rev.counter}"
    forward_ids = [e.ident for e in fwd.record]
    if [e.ident for e in rev.record] != forward_ids[::-1]:
        return "reverse completion order does not mirror the forward one"
    return None


def check_prop3_prop4(p: Program, sigma0, mode="exhaustive", *,
                      inv_fn: Callable = inv_annotated, stop_on_first: bool = False) -> PropertyReport:
    """Forward, invert and reverse ``p`` under every schedule (or a sample).

    ``mode`` is ``"exhaustive"`` or ``("sampled", n, seed)``.
    """
    started = time.perf_counter()
    annotated = ann(p)
    sigma0 = init_sigma(variables_of(p), sigma0)
    delta0 = init_aux(variables_of(p), "parallel")
    report = PropertyReport(prop="34")
    for fwd in _forward_runs(annotated, sigma0, mode):
        report.cases += 1
        problem = _check_one_schedule(p, annotated, sigma0, delta0, fwd, inv_fn)
        if problem is None:
            report.passed += 1
            continue
        report.failures.append(Failure(problem, render_program(p), schedule=list(fwd.schedule)))
        if stop_on_first:
            break
    report.elapsed = time.perf_counter() - started
    return report
