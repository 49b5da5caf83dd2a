"""Seeded property suites over generated programs."""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from typing import Optional

from ..syntax.render import render_program
from .gen import GenConfig, gen_case
from .minimize import minimize
from .mutants import MUTANTS_BY_NAME
from .props import PropertyReport, check_prop1, check_prop2, check_prop3_prop4

PROPS = ("1", "2", "34")


def default_config(prop: str) -> GenConfig:
    if prop == "34":
        return GenConfig(dialect="parallel", max_stmts=8, max_depth=2, var_pool=3)
    return GenConfig(dialect="sequential", max_stmts=20, max_depth=3, max_counter=10)


def _checker(prop: str, mutant: Optional[str], par_mode):
    m = MUTANTS_BY_NAME[mutant] if mutant else None
    if prop == "1":
        kw = {"aug_fn": m.aug_fn} if m else {}
        return lambda p, s: check_prop1(p, s, **kw)
    if prop == "2":
        kw = {"aug_fn": m.aug_fn, "inv_fn": m.inv_fn} if m else {}
        return lambda p, s: check_prop2(p, s, **kw)
    if prop == "34":
        kw = {"inv_fn": m.inv_annotated_fn} if m else {}
        return lambda p, s: check_prop3_prop4(p, s, par_mode, stop_on_first=True, **kw)
    raise ValueError(f"unknown property {prop!r}; expected one of {', '.join(PROPS)}")


def run_case(prop: str, cfg: GenConfig, mutant: Optional[str] = None, par_mode="exhaustive",
             shrink: bool = True) -> PropertyReport:
    """Generate the program for ``cfg.seed`` and check it.

    Failures carry the seed, so they replay from ``(seed, cfg)`` alone.
    """
    check = _checker(prop, mutant, par_mode)
    p, sigma0 = gen_case(cfg)
    report = check(p, sigma0)
    for failure in report.failures:
        failure.seed = cfg.seed
        if shrink:
            small = minimize(p, lambda q: not check(q, sigma0).ok)
            failure.minimized = render_program(small)
    return report


def _run_chunk(args):
    prop, cfg, seeds, mutant, par_mode, shrink, stop_on_first = args
    total = PropertyReport(prop=prop)
    for s in seeds:
        total.merge(run_case(prop, cfg.with_seed(s), mutant, par_mode, shrink))
        if stop_on_first and total.failures:
            break
    return total


def run_suite(prop: str, cases: int, seed: int = 0, cfg: Optional[GenConfig] = None, *,
              jobs: int = 1, mutant: Optional[str] = None, par_mode="exhaustive",
              shrink: bool = True, stop_on_first: bool = False) -> PropertyReport:
    """Check ``prop`` on ``cases`` generated programs; case i uses seed ``seed + i``."""
    if prop not in PROPS:
        raise ValueError(f"unknown property {prop!r}; expected one of {', '.join(PROPS)}")
    cfg = cfg or default_config(prop)
    if prop == "34" and cfg.dialect != "parallel":
        cfg = replace(cfg, dialect="parallel")
    started = time.perf_counter()
    seeds = [seed + i for i in range(cases)]
    if jobs <= 1:
        report = _run_chunk((prop, cfg, seeds, mutant, par_mode, shrink, stop_on_first))
    else:
        chunks = [seeds[k::jobs] for k in range(jobs)]
        report = PropertyReport(prop=prop)
        with ProcessPoolExecutor(jobs) as pool:
            args = [(prop, cfg, c, mutant, par_mode, shrink, stop_on_first) for c in chunks if c]
            for part in pool.map(_run_chunk, args):
                report.merge(part)
        report.failures.sort(key=lambda f: f.seed)
    report.prop = prop
    report.elapsed = time.perf_counter() - started
    return report


def detect_mutant(name: str, cases: int = 200, seed: int = 0, *, jobs: int = 1) -> PropertyReport:
    """Run the suites a mutant should trip, stopping at the first failure."""
    m = MUTANTS_BY_NAME[name]
    props = ("34",) if m.dialect == "parallel" else ("1", "2")
    total = PropertyReport(prop="+".join(props))
    for prop in props:
        total.merge(run_suite(prop, cases, seed, jobs=jobs, mutant=name,
                              shrink=False, stop_on_first=True))
        if total.failures:
            break
    return total
