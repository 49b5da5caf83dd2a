import json

import pytest
from conftest import FIB_DELTA_FINAL, FIB_SIGMA, FIB_SIGMA_FINAL, source
from hypothesis import given, settings
from hypothesis import strategies as st
from oracle import OutOfFuel, big_step

from reverso.harness import GenConfig, gen_case
from reverso.seq_engine import (
    Configuration,
    FuelExhausted,
    StuckError,
    UnboundVariable,
    eval_aexp,
    run,
    step,
)
from reverso.stores import EmptyStackError, init_aux, init_sigma
from reverso.syntax import parse_expr, parse_program, variables_of
from reverso.syntax.nodes import Program
from reverso.transform import aug, inv


def _stores(p, values):
    names = variables_of(p)
    return init_sigma(names, values), init_aux(names)


def test_fib_augmented_run_exact():
    p = parse_program(source("fib.rev"))
    sigma, delta = _stores(p, FIB_SIGMA)
    res = run(aug(p), sigma, delta)
    assert res.sigma == FIB_SIGMA_FINAL
    assert dict(res.delta.stacks) == FIB_DELTA_FINAL


def test_fib_inverse_run_restores():
    p = parse_program(source("fib.rev"))
    sigma, delta = _stores(p, FIB_SIGMA)
    fwd = run(aug(p), sigma, delta)
    back = run(inv(p), fwd.sigma, fwd.delta)
    assert back.sigma == FIB_SIGMA
    assert back.delta.is_empty() and back.delta == delta


def test_fib_original_run_matches_reference():
    p = parse_program(source("fib.rev"))
    sigma, delta = _stores(p, FIB_SIGMA)
    res = run(p, sigma, delta)
    assert res.sigma == big_step(p, sigma)[0] == FIB_SIGMA_FINAL
    assert res.delta == delta


def test_destructive_assignment_steps():
    p = parse_program("X = Y + 1;")
    res = run(p, {"X": 0, "Y": 4}, init_aux(["X", "Y"]))
    assert [e.rule for e in res.trace] == ["start", "DA2/OpL/Var", "DA2/Op", "DA1"]
    assert res.sigma == {"X": 5, "Y": 4} and res.steps == 3


def test_sequence_and_skip_rules():
    p = parse_program("skip; X = 1;")
    res = run(p, {"X": 0}, init_aux(["X"]))
    assert [e.rule for e in res.trace[1:]] == ["Skip", "DA1"]
    p = parse_program("X = 1; Y = 2;")
    res = run(p, {"X": 0, "Y": 0}, init_aux(["X", "Y"]))
    assert [e.rule for e in res.trace[1:]] == ["Seq/DA1", "Skip", "DA1"]


def test_conditional_and_loop_rules():
    p = parse_program("while X > 0 do X -= 1 end")
    rules = [e.rule for e in run(p, {"X": 1}, init_aux(["X"])).trace[1:]]
    assert rules[0] == "Wh"
    assert rules[1].startswith("C3/BopL") and "C1" in rules and rules[-1] == "C2"


def test_micro_steps_flag_hides_expression_steps():
    p = parse_program("X = Y + 1 + 2;")
    full = run(p, {"X": 0, "Y": 1}, init_aux(["X", "Y"]))
    brief = run(p, {"X": 0, "Y": 1}, init_aux(["X", "Y"]), micro_steps=False)
    assert brief.sigma == full.sigma and brief.steps == full.steps
    assert [e.rule for e in brief.trace] == ["start", "DA1"]


def test_trace_line_format_and_json():
    p = parse_program("X = 1;")
    res = run(p, {"X": 0}, init_aux(["X"]))
    assert res.trace_lines()[-1] == "DA1 | skip | sigma={X:1} | delta={X:[], B:[], W:[]}"
    doc = json.loads(res.trace_json())
    assert doc[-1]["rule"] == "DA1" and doc[-1]["sigma"] == {"X": 1}


def test_traces_are_deterministic():
    p = aug(parse_program(source("fib.rev")))
    sigma, delta = _stores(p, FIB_SIGMA)
    assert run(p, sigma, delta).trace_lines() == run(p, sigma, delta).trace_lines()


def test_terminal_configurations():
    assert Configuration(Program(()), {}, init_aux([])).is_terminal()
    assert step(Configuration(parse_program("skip;"), {}, init_aux([]))) is None
    assert run(Program(()), {"X": 3}, init_aux(["X"])).sigma == {"X": 3}


def test_fuel_exhaustion():
    p = parse_program("while T do skip end")
    with pytest.raises(FuelExhausted) as err:
        run(p, {}, init_aux([]), fuel=50)
    assert err.value.steps == 50


def test_fuel_env_default(monkeypatch):
    monkeypatch.setenv("REVERSO_FUEL", "10")
    with pytest.raises(FuelExhausted):
        run(parse_program("while T do skip end"), {}, init_aux([]))


def test_runtime_errors():
    with pytest.raises(UnboundVariable):
        run(parse_program("X = Q;"), {"X": 0}, init_aux(["X"]))
    with pytest.raises(EmptyStackError):
        run(parse_program("X = pop(delta(X));"), {"X": 0}, init_aux(["X"]))
    with pytest.raises(StuckError):
        run(parse_program("X = 1 par X = 2", "parallel"), {"X": 0}, init_aux(["X"]))


def test_eval_aexp():
    assert eval_aexp(parse_expr("X - (Y + 1) - 2"), {"X": 10, "Y": 3}) == 4


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 2**63 - 1))
def test_small_step_agrees_with_reference(seed):
    p, sigma0 = gen_case(GenConfig(seed=seed, max_stmts=16, max_depth=3))
    sigma, delta = _stores(p, sigma0)
    try:
        expected, _ = big_step(p, sigma)
    except OutOfFuel:
        return
    assert run(p, sigma, delta, trace=False).sigma == expected
    # the augmented program against the reference, stacks included
    expected_sigma, expected_stacks = big_step(aug(p), sigma, {k: () for k in delta.stacks})
    res = run(aug(p), sigma, delta, trace=False)
    assert res.sigma == expected_sigma
    assert dict(res.delta.stacks) == expected_stacks


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 12), st.integers(0, 3))
def test_loop_flag_sequence(start, c):
    # W holds one T per iteration on top of a single F, or a lone F if never entered
    p = parse_program(f"while N - {c} > 0 do N -= 1 end")
    res = run(aug(p), {"N": start}, init_aux(["N"]), trace=False)
    k = max(start - c, 0)
    assert res.delta["W"] == ((True,) * k + (False,) if k else (False,))
