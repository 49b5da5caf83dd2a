import json
import math

import pytest
from conftest import RACE_SIGMA, source
from hypothesis import given, settings
from hypothesis import strategies as st
from oracle import big_step

from reverso.harness import GenConfig, gen_case
from reverso.par_engine import (
    BoundExceeded,
    Explicit,
    ScheduleError,
    Seeded,
    StuckReverse,
    checkpoint_from_json,
    checkpoint_to_json,
    dump_checkpoint,
    enumerate_interleavings,
    fwd_run,
    leaf_labels,
    parse_schedule,
    rev_run,
    rev_run_unchecked,
)
from reverso.stores import IdentifierCounter
from reverso.syntax import parse_program
from reverso.syntax.nodes import SIMPLE_STMTS, Par, Program, Skip, walk_stmts
from reverso.transform import ann, inv_annotated


def race():
    return ann(parse_program(source("race.rev"), "parallel"))


def forward(schedule="L,R,R", p=None):
    return fwd_run(p or race(), RACE_SIGMA, schedule=parse_schedule(schedule))


def test_forward_golden_run():
    res = forward("L,R,R")
    assert res.sigma == {"X": 4, "Y": 6}
    assert res.delta.stacks == {"X": ((3, 4),), "Y": ((2, 1),)}
    assert res.counter == IdentifierCounter(4)
    assert res.program == parse_program(source("race_final.rev"), "annotated")
    assert [e.ident for e in res.record] == [1, 2, 3]


def test_labels_name_the_same_schedule():
    assert leaf_labels(race()).keys() == {"P1", "Q1", "Q2"}
    assert forward("P1,Q1,Q2").program == forward("L,R,R").program
    assert forward("P1").program == forward("L,R,R").program  # forced steps may be left out


def test_reverse_golden_run():
    fwd = forward("L,R,R")
    rev = rev_run(inv_annotated(fwd.program), fwd.sigma, fwd.delta, fwd.counter)
    assert rev.sigma == RACE_SIGMA
    assert rev.delta.is_empty()
    assert rev.counter == IdentifierCounter(1)
    assert [e.text for e in rev.record] == ["X = 4", "Y = X + 2", "X -= Y + 2"]
    assert [e.ident for e in rev.record] == [3, 2, 1]
    assert all(s.ids == () for s in walk_stmts(rev.program) if isinstance(s, SIMPLE_STMTS))


def test_unchecked_reverse_reproduces_wrong_state():
    fwd = forward("L,R,R")
    q = inv_annotated(fwd.program)
    sigma, _, _ = rev_run_unchecked(q, fwd.sigma, fwd.delta, Explicit(("P1", "Q2", "Q1")))
    assert sigma == {"X": 4, "Y": 1}
    sigma, delta, _ = rev_run_unchecked(q, fwd.sigma, fwd.delta, Explicit(("Q2", "Q1", "P1")))
    assert sigma == RACE_SIGMA and delta.is_empty()


def _sequential(texts, sigma):
    return big_step(parse_program("; ".join(texts)), sigma)[0]


def test_every_interleaving_matches_its_sequential_order():
    results = enumerate_interleavings(race(), RACE_SIGMA)
    assert len(results) == 3
    by_schedule = {r.schedule: r.sigma for r in results}
    assert by_schedule[("L", "R", "R")] == _sequential(["X += Y + 2", "Y = X + 2", "X = 4"], RACE_SIGMA)
    assert by_schedule[("R", "L", "R")] == _sequential(["Y = X + 2", "X += Y + 2", "X = 4"], RACE_SIGMA)
    assert by_schedule[("R", "R", "L")] == _sequential(["Y = X + 2", "X = 4", "X += Y + 2"], RACE_SIGMA)
    assert by_schedule[("R", "R", "L")] == {"X": 9, "Y": 3}
    assert all(r.restored for r in results)


def test_schedule_presets_and_seeds():
    assert forward("first").schedule == ["L", "R", "R"]
    assert forward("last").schedule == ["R", "R", "L"]
    assert forward("rr").schedule == ["L", "R", "R"]
    a = fwd_run(race(), RACE_SIGMA, schedule=Seeded(7))
    b = fwd_run(race(), RACE_SIGMA, schedule=Seeded(7))
    assert a.schedule == b.schedule


def test_schedule_errors():
    with pytest.raises(ScheduleError):
        forward("L,R,R,L")
    with pytest.raises(ScheduleError):
        forward("Z9")
    with pytest.raises(ScheduleError):
        fwd_run(race(), RACE_SIGMA, schedule=parse_schedule("all"))


def test_reverse_gating_keeps_statement_steps_together():
    p = ann(parse_program("X += Y + 1 + 2 par Y += 3 + 4", "parallel"))
    for r in enumerate_interleavings(p, {"X": 0, "Y": 0}):
        fwd = r.forward
        rev = rev_run(inv_annotated(fwd.program), fwd.sigma, fwd.delta, fwd.counter, trace=True)
        steps = [e for e in rev.trace if e.ident is not None]
        ids = [e.ident for e in steps]
        # each identifier's steps form one block ending in its completion rule
        blocks = [i for n, i in enumerate(ids) if n == 0 or ids[n - 1] != i]
        assert blocks == [2, 1]
        assert [e.rule.rsplit("/", 1)[-1] for e in steps if e.rule.endswith("RCA1")] == ["RCA1"] * 2


def test_tampered_identifiers_get_stuck():
    fwd = forward("L,R,R")
    q = inv_annotated(fwd.program)
    swapped = parse_program("X -= Y + 2 [1] par (X = 4 [2]; Y = X + 2 [3])", "annotated")
    with pytest.raises(StuckReverse):
        rev_run(swapped, fwd.sigma, fwd.delta, fwd.counter)
    with pytest.raises(StuckReverse):
        rev_run(q, fwd.sigma, fwd.delta, IdentifierCounter(3))


def test_duplicate_identifiers_are_rejected():
    fwd = forward("L,R,R")
    dup = parse_program("X -= Y + 2 [3] par (X = 4 [3]; Y = X + 2 [2])", "annotated")
    with pytest.raises(AssertionError):
        rev_run(dup, fwd.sigma, fwd.delta, fwd.counter)


def test_skip_consumes_no_identifier():
    p = ann(parse_program("skip par X = 1", "parallel"))
    res = fwd_run(p, {"X": 0})
    assert res.counter == IdentifierCounter(2)
    assert [s.ids for s in walk_stmts(res.program) if isinstance(s, SIMPLE_STMTS)] == [(), (1,)]


def test_checkpoint_round_trip():
    fwd = forward("L,R,R")
    doc = json.loads(dump_checkpoint(fwd.checkpoint()))
    assert doc["counter"] == 4 and doc["delta"] == [["X", [[3, 4]]], ["Y", [[2, 1]]]]
    program, sigma, delta, counter, record = checkpoint_from_json(doc)
    assert program == fwd.program and sigma == fwd.sigma
    assert delta == fwd.delta and counter == fwd.counter
    assert record == [(1, "X += Y + 2"), (2, "Y = X + 2"), (3, "X = 4")]
    rev = rev_run(inv_annotated(program), sigma, delta, counter)
    assert rev.sigma == RACE_SIGMA


def test_empty_checkpoint_is_identity():
    res = fwd_run(Program(()), {})
    doc = checkpoint_to_json(res.program, res.sigma, res.delta, res.counter, res.record)
    program, sigma, delta, counter, _ = checkpoint_from_json(doc)
    rev = rev_run(inv_annotated(program), sigma, delta, counter)
    assert rev.sigma == {} and rev.counter == IdentifierCounter(1)


def test_bound():
    with pytest.raises(BoundExceeded):
        enumerate_interleavings(race(), RACE_SIGMA, bound=2)


def _count(p: Program) -> int:
    """Completion orders of ``p``, by counting rather than running."""
    total = 1
    for s in p.stmts:
        if isinstance(s, Par):
            a, b = _leaves(s.left), _leaves(s.right)
            total *= math.comb(a + b, a) * _count(s.left) * _count(s.right)
    return total


def _leaves(p: Program) -> int:
    return sum(isinstance(s, SIMPLE_STMTS) and not isinstance(s, Skip) for s in walk_stmts(p))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**63 - 1))
def test_interleaving_count_matches_combinatorics(seed):
    p, sigma0 = gen_case(GenConfig(seed=seed, dialect="parallel", max_stmts=7, max_depth=3))
    results = enumerate_interleavings(ann(p), sigma0)
    assert len(results) == _count(p)
    assert len({r.schedule for r in results}) == len(results)
    assert all(r.restored for r in results)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**63 - 1), st.integers(0, 1000))
def test_forward_store_matches_sequential_replay(seed, sched):
    p, sigma0 = gen_case(GenConfig(seed=seed, dialect="parallel", max_stmts=8, max_depth=3))
    a = ann(p)
    res = fwd_run(a, sigma0, schedule=Seeded(sched))
    texts = [e.text for e in res.record]
    expected = _sequential(texts, sigma0) if texts else sigma0
    assert res.sigma == expected
