import json

import pytest
from conftest import FIB_SIGMA, RACE_SIGMA, source
from hypothesis import given, settings
from hypothesis import strategies as st

from reverso import seq_engine
from reverso.harness import (
    MUTANTS,
    MUTANTS_BY_NAME,
    GenConfig,
    NotFailing,
    check_prop1,
    check_prop2,
    check_prop3_prop4,
    detect_mutant,
    gen_case,
    gen_program,
    minimize,
    run_case,
    run_suite,
)
from reverso.stores import init_aux
from reverso.syntax import parse_program, validate, variables_of
from reverso.syntax.nodes import ConstAssign, Program, While, expr_vars, walk_stmts


def fib():
    return parse_program(source("fib.rev"))


def test_zero_budget_gives_empty_program():
    assert gen_program(GenConfig(seed=1, max_stmts=0)) == Program(())


def test_generation_is_deterministic():
    cfg = GenConfig(seed=42, max_stmts=15)
    assert gen_case(cfg) == gen_case(cfg)
    assert gen_program(cfg) != gen_program(cfg.with_seed(43))


@pytest.mark.parametrize("bad", [dict(var_pool=0), dict(max_stmts=-1), dict(loop_bound_style="x")])
def test_bad_config(bad):
    with pytest.raises(ValueError):
        GenConfig(**bad)


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**64 - 1), st.sampled_from(["sequential", "parallel"]))
def test_generated_programs_are_valid(seed, dialect):
    cfg = GenConfig(seed=seed, dialect=dialect, max_stmts=20, max_depth=3)
    p, sigma0 = gen_case(cfg)
    assert validate(p, dialect) == []
    assert sum(1 for _ in walk_stmts(p)) <= 20 or dialect == "parallel"
    assert set(variables_of(p)) <= set(sigma0)
    for s in walk_stmts(p):
        if isinstance(s, ConstAssign):
            assert s.target not in expr_vars(s.rhs)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**63 - 1))
def test_counter_pattern_loops_terminate(seed):
    p, sigma0 = gen_case(GenConfig(seed=seed, max_stmts=20, max_depth=3))
    res = seq_engine.run(p, sigma0, init_aux(variables_of(p)), fuel=200_000, trace=False)
    assert res.steps < 200_000


def test_fuel_only_loops_may_be_skipped():
    cfg = GenConfig(max_stmts=10, loop_bound_style="fuel-only")
    report = run_suite("2", 60, 0, cfg, shrink=False)
    assert report.ok and report.passed + report.skipped == report.cases == 60


def test_prop1_and_prop2_on_known_programs():
    for p in (fib(), Program(())):
        assert check_prop1(p, FIB_SIGMA).passed == 1
        assert check_prop2(p, FIB_SIGMA).passed == 1


def test_prop3_prop4_known_programs():
    race = parse_program(source("race.rev"), "parallel")
    report = check_prop3_prop4(race, RACE_SIGMA)
    assert (report.cases, report.passed) == (3, 3)
    one = check_prop3_prop4(parse_program("skip;", "parallel"), {})
    assert one.cases == one.passed == 1
    sampled = check_prop3_prop4(race, RACE_SIGMA, ("sampled", 5, 0))
    assert sampled.cases == 5 and sampled.ok


def test_non_terminating_case_is_skipped():
    report = check_prop2(parse_program("while T do skip end"), {}, fuel=1000)
    assert report.skipped == 1 and report.ok


def test_report_json():
    report = run_suite("1", 5, 0)
    doc = json.loads(report.dumps())
    assert doc["cases"] == 5 and doc["ok"] is True and doc["prop"] == "1"


def test_mutant_failure_replays_from_seed():
    report = run_suite("2", 300, 0, mutant="while-first-t", stop_on_first=True)
    assert not report.ok
    failure = report.failures[0]
    again = run_case("2", GenConfig(seed=failure.seed, dialect="sequential", max_stmts=20,
                                    max_depth=3, max_counter=10), mutant="while-first-t")
    assert again.failures[0].message == failure.message
    assert again.failures[0].minimized == failure.minimized


def test_minimize_broken_inverse_on_fib():
    broken = MUTANTS_BY_NAME["inv-keep-order"]
    oracle = lambda q: not check_prop2(q, FIB_SIGMA, inv_fn=broken.inv_fn).ok
    small = minimize(fib(), oracle)
    assert oracle(small)
    assert sum(1 for _ in walk_stmts(small)) <= 3


def test_minimize_keeps_minimal_program_and_rejects_passing():
    oracle = lambda q: any(isinstance(s, While) for s in walk_stmts(q))
    assert minimize(parse_program("X = 1; while T do skip end"), oracle) == parse_program("while T do end")
    already = parse_program("while T do end")
    assert minimize(already, oracle) == already
    with pytest.raises(NotFailing):
        minimize(fib(), lambda q: False)


def test_correct_transforms_pass_parallel_suite_with_jobs():
    report = run_suite("34", 20, 5, jobs=2)
    assert report.ok and report.cases >= 20


@pytest.mark.parametrize("name", [m.name for m in MUTANTS])
def test_every_mutant_is_detected(name):
    report = detect_mutant(name, cases=300)
    assert not report.ok, name


def test_mutant_catalogue():
    assert len(MUTANTS) >= 6
    assert {m.dialect for m in MUTANTS} == {"sequential", "parallel"}
