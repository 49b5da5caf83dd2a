"""``reverso`` command line.

Exit codes: 0 ok, 1 parse or validation error (also bad flags and files),
2 fuel exhausted, 3 auxiliary store error, 4 reverse run stuck,
5 restoration mismatch or property failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional

from . import __version__, par_engine, seq_engine
from .harness import MUTANTS_BY_NAME, PROPS, GenConfig, default_config, run_suite
from .par_engine import (
    BoundExceeded,
    ScheduleError,
    StuckReverse,
    enumerate_interleavings,
    fwd_run,
    parse_schedule,
    rev_run,
    rev_run_unchecked,
)
from .seq_engine import ExprTypeError, FuelExhausted, UnboundVariable, default_fuel
from .stores import (
    PARALLEL,
    SEQUENTIAL,
    EmptyStackError,
    IdentifierCounter,
    MismatchError,
    UnknownStack,
    delta_from_json,
    format_delta,
    format_sigma,
    init_aux,
    init_sigma,
)
from .syntax import (
    Dialect,
    DialectError,
    ParseError,
    Program,
    ValidationError,
    render_program,
    render_stmt,
    validate,
    variables_of,
)
from .syntax.nodes import Par, SIMPLE_STMTS, walk_stmts
from .syntax.parser import Parser, check_dialect
from .syntax.validate import ReservedName
from .transform import ann, aug, deaug, inv, inv_annotated

EXIT_OK, EXIT_INPUT, EXIT_FUEL, EXIT_STORE, EXIT_STUCK, EXIT_MISMATCH = range(6)

STORE_ERRORS = (EmptyStackError, UnknownStack, MismatchError, ExprTypeError, UnboundVariable)


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_INPUT):
        super().__init__(message)
        self.code = code


# -- input helpers -------------------------------------------------------------


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        with open(path) as fh:
            return fh.read()
    except OSError as exc:
        raise CliError(f"{path}: {exc.strerror}") from None


def _detect(p: Program) -> Dialect:
    simple = [s for s in walk_stmts(p) if isinstance(s, SIMPLE_STMTS)]
    if any(s.ids is not None for s in simple):
        return Dialect.ANNOTATED
    if any(isinstance(s, Par) for s in walk_stmts(p)):
        return Dialect.PARALLEL
    return Dialect.SEQUENTIAL


def load_program(path: str, dialect: str = "auto") -> tuple[Program, Dialect]:
    """Parse, settle the dialect and validate."""
    text = _read(path)
    prog = Parser(text).parse()
    d = _detect(prog) if dialect == "auto" else Dialect.coerce(dialect)
    check_dialect(prog, d)
    problems = validate(prog, d, transformed=True)
    if problems:
        raise ValidationError(problems)
    return prog, d


def _parse_assignments(text: str) -> dict:
    out = {}
    for part in text.split(","):
        if not part.strip():
            continue
        name, sep, value = part.partition("=")
        if not sep:
            raise CliError(f"expected NAME=VALUE, got {part.strip()!r}")
        try:
            out[name.strip()] = int(value)
        except ValueError:
            raise CliError(f"{name.strip()}: {value.strip()!r} is not an integer") from None
    return out


def load_initial(args, p: Program, mode: str):
    """Initial (sigma, delta): zeros unless --store / --sigma say otherwise."""
    values, delta = {}, None
    if getattr(args, "store", None):
        try:
            doc = json.loads(_read(args.store))
        except json.JSONDecodeError as exc:
            raise CliError(f"{args.store}: invalid JSON: {exc}") from None
        if "sigma" in doc or "delta" in doc:
            values = doc.get("sigma", {})
            if doc.get("delta") is not None:
                delta = delta_from_json(doc["delta"], mode)
        else:
            values = doc
    if getattr(args, "sigma", None):
        values = {**values, **_parse_assignments(args.sigma)}
    variables = variables_of(p)
    sigma = init_sigma(variables, values)
    if delta is None:
        delta = init_aux(variables, mode)
    else:
        missing = {v: () for v in variables if v not in delta}
        delta = delta.with_stacks(**missing)
    return sigma, delta


def _fuel(args) -> int:
    return args.fuel if getattr(args, "fuel", None) is not None else default_fuel()


def _schedule(text: str):
    try:
        return parse_schedule(text)
    except ValueError as exc:
        raise CliError(str(exc)) from None


def _emit(args, doc: dict, text: str) -> None:
    if args.json:
        print(json.dumps(doc, indent=2))
    elif text:
        print(text)


def _stores_text(sigma, delta) -> str:
    return f"sigma = {format_sigma(sigma)}\ndelta = {format_delta(delta)}"


def _write_out(path: Optional[str], doc: dict) -> None:
    if not path:
        return
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def _par_trace_lines(prog: Program, entries) -> list:
    lines = []
    for e in entries:
        if e.loc is None:
            lines.append(e.rule)
            continue
        stmt = render_stmt(par_engine.stmt_at(prog, e.loc))
        suffix = f" | id={e.ident}" if e.ident is not None else ""
        lines.append(f"{e.rule} | {stmt}{suffix}")
    return lines


def _par_trace_json(prog: Program, entries) -> list:
    return [{"rule": e.rule,
             "stmt": render_stmt(par_engine.stmt_at(prog, e.loc)) if e.loc is not None else None,
             "id": e.ident} for e in entries]


# -- transforms ----------------------------------------------------------------


def cmd_parse(args) -> int:
    text = _read(args.input)
    prog = Parser(text).parse()
    d = _detect(prog) if args.dialect == "auto" else Dialect.coerce(args.dialect)
    check_dialect(prog, d)
    problems = validate(prog, d, transformed=True)
    rendered = render_program(prog)
    doc = {"dialect": d.value, "program": rendered,
           "violations": [str(v) for v in problems]}
    if not problems:
        doc["variables"] = variables_of(prog)
    _emit(args, doc, "\n".join([rendered.rstrip("\n")] + [str(v) for v in problems]).strip("\n"))
    return EXIT_INPUT if problems else EXIT_OK


def _transform(args, fn_for) -> int:
    prog, d = load_program(args.input, args.dialect)
    out = fn_for(d)(prog)
    rendered = render_program(out)
    _emit(args, {"dialect": d.value, "program": rendered}, rendered.rstrip("\n"))
    return EXIT_OK


def cmd_augment(args) -> int:
    def pick(d):
        if d is not Dialect.SEQUENTIAL:
            raise CliError("augment works on sequential programs; use annotate for parallel ones")
        return aug
    return _transform(args, pick)


def cmd_invert(args) -> int:
    def pick(d):
        if d is Dialect.SEQUENTIAL:
            return inv
        if d is Dialect.ANNOTATED:
            return inv_annotated
        return lambda p: inv_annotated(ann(p))
    return _transform(args, pick)


def cmd_annotate(args) -> int:
    def pick(d):
        if d is not Dialect.PARALLEL:
            raise CliError(f"annotate expects a parallel program, got {d.value}")
        return ann
    return _transform(args, pick)


# -- execution -----------------------------------------------------------------


def _seq_checkpoint(original: Program, sigma0, sigma, delta) -> dict:
    return {"dialect": SEQUENTIAL, "program": render_program(original),
            "initial_sigma": dict(sigma0), "sigma": dict(sigma), "delta": delta.to_json()}


def cmd_run(args) -> int:
    prog, d = load_program(args.input, args.dialect)
    if d is Dialect.SEQUENTIAL:
        return _run_seq(args, prog)
    return _run_par(args, ann(prog) if d is Dialect.PARALLEL else prog)


def _run_seq(args, prog: Program) -> int:
    if args.schedule:
        raise CliError("--schedule only applies to parallel programs")
    sigma0, delta0 = load_initial(args, prog, SEQUENTIAL)
    original = prog
    if args.augment:
        prog = aug(prog)
    tracing = args.trace or args.trace_json
    res = seq_engine.run(prog, sigma0, delta0, _fuel(args), trace=tracing,
                         micro_steps=args.micro_steps)
    if args.out:
        if not args.augment:
            try:
                original = deaug(prog)
            except ValueError:
                raise CliError("a checkpoint needs an augmented run; pass --augment "
                               "or run the output of 'reverso augment'") from None
        _write_out(args.out, _seq_checkpoint(original, sigma0, res.sigma, res.delta))
    doc = {"sigma": res.sigma, "delta": res.delta.to_json(), "steps": res.steps}
    if args.trace_json:
        doc["trace"] = [e.to_json() for e in res.trace]
    lines = res.trace_lines() if args.trace else []
    if args.trace_json and not args.json:
        print(json.dumps(doc["trace"]))
        return EXIT_OK
    _emit(args, doc, "\n".join(lines + [_stores_text(res.sigma, res.delta)]))
    return EXIT_OK


def _run_par(args, annotated: Program) -> int:
    if args.augment:
        raise CliError("--augment only applies to sequential programs; parallel runs record as they go")
    sigma0, delta0 = load_initial(args, annotated, PARALLEL)
    tracing = args.trace or args.trace_json
    res = fwd_run(annotated, sigma0, delta0, _schedule(args.schedule or "first"), _fuel(args),
                  trace=tracing)
    checkpoint = {"dialect": PARALLEL, **res.checkpoint(), "initial_sigma": dict(sigma0)}
    _write_out(args.out, checkpoint)
    doc = {"sigma": res.sigma, "delta": res.delta.to_json(), "counter": res.counter.next_value,
           "schedule": res.schedule, "record": checkpoint["record"],
           "program": checkpoint["program"]}
    if args.trace_json:
        doc["trace"] = _par_trace_json(annotated, res.trace)
        if not args.json:
            print(json.dumps(doc["trace"]))
            return EXIT_OK
    lines = _par_trace_lines(annotated, res.trace) if args.trace else []
    lines.append(checkpoint["program"].rstrip("\n"))
    lines.append(_stores_text(res.sigma, res.delta))
    lines.append(f"counter = {res.counter.next_value}")
    _emit(args, doc, "\n".join(lines))
    return EXIT_OK


def cmd_reverse(args) -> int:
    try:
        doc = json.loads(_read(args.checkpoint))
    except json.JSONDecodeError as exc:
        raise CliError(f"{args.checkpoint}: invalid JSON: {exc}") from None
    mode = doc.get("dialect") or (PARALLEL if "counter" in doc else SEQUENTIAL)
    if mode == SEQUENTIAL:
        prog = Parser(doc.get("program", "")).parse()
        check_dialect(prog, Dialect.SEQUENTIAL)
        sigma = {k: int(v) for k, v in doc["sigma"].items()}
        delta = delta_from_json(doc.get("delta", {}), SEQUENTIAL)
        delta = delta.with_stacks(**{v: () for v in variables_of(prog) if v not in delta})
        res = seq_engine.run(inv(prog), sigma, delta, _fuel(args), trace=args.trace)
        sigma, delta, counter, lines = res.sigma, res.delta, None, res.trace_lines()
    else:
        prog, sigma, delta, counter, _ = par_engine.checkpoint_from_json(doc)
        inverted = inv_annotated(prog)
        res = rev_run(inverted, sigma, delta, counter, _fuel(args), trace=args.trace)
        sigma, delta, counter = res.sigma, res.delta, res.counter
        lines = _par_trace_lines(inverted, res.trace)
    problems = []
    if not delta.is_empty():
        problems.append("auxiliary store not drained")
    if counter is not None and counter != IdentifierCounter(1):
        problems.append(f"counter is {counter.next_value}, expected 1")
    expected = doc.get("initial_sigma")
    if expected is not None and {k: int(v) for k, v in expected.items()} != sigma:
        problems.append(f"data store differs from the recorded start {format_sigma(expected)}")
    out = {"sigma": sigma, "delta": delta.to_json(), "restored": not problems, "problems": problems}
    if counter is not None:
        out["counter"] = counter.next_value
        out["record"] = [[e.ident, e.text] for e in res.record]
    text = lines + [_stores_text(sigma, delta)]
    if counter is not None:
        text.append(f"counter = {counter.next_value}")
    text.append("RESTORED" if not problems else "NOT RESTORED: " + "; ".join(problems))
    _emit(args, out, "\n".join(text))
    return EXIT_OK if not problems else EXIT_MISMATCH


def cmd_roundtrip(args) -> int:
    prog, d = load_program(args.input, args.dialect)
    if d is Dialect.SEQUENTIAL:
        if args.all_schedules or args.unchecked_order or args.schedule:
            raise CliError("schedule flags only apply to parallel programs")
        sigma0, delta0 = load_initial(args, prog, SEQUENTIAL)
        fwd = seq_engine.run(aug(prog), sigma0, delta0, _fuel(args), trace=False)
        back = seq_engine.run(inv(prog), fwd.sigma, fwd.delta, _fuel(args), trace=False)
        ok = back.sigma == sigma0 and back.delta == delta0
        doc = {"verdict": "PASS" if ok else "FAIL", "initial": sigma0, "forward": fwd.sigma,
               "restored": back.sigma, "delta": back.delta.to_json()}
        text = (f"forward sigma = {format_sigma(fwd.sigma)}\n"
                f"restored sigma = {format_sigma(back.sigma)}\n{doc['verdict']}")
        _emit(args, doc, text)
        return EXIT_OK if ok else EXIT_MISMATCH
    annotated = ann(prog) if d is Dialect.PARALLEL else prog
    sigma0, delta0 = load_initial(args, annotated, PARALLEL)
    if args.all_schedules:
        return _roundtrip_all(args, annotated, sigma0, delta0)
    fwd = fwd_run(annotated, sigma0, delta0, _schedule(args.schedule or "first"), _fuel(args))
    inverted = inv_annotated(fwd.program)
    if args.unchecked_order:
        sigma, delta, record = rev_run_unchecked(inverted, fwd.sigma, fwd.delta,
                                                 _schedule(args.unchecked_order))
        counter = None
    else:
        rev = rev_run(inverted, fwd.sigma, fwd.delta, fwd.counter, _fuel(args))
        sigma, delta, record, counter = rev.sigma, rev.delta, rev.record, rev.counter
    ok = sigma == sigma0 and delta == delta0 and counter in (None, IdentifierCounter(1))
    doc = {"verdict": "PASS" if ok else "FAIL", "initial": sigma0, "forward": fwd.sigma,
           "schedule": fwd.schedule, "restored": sigma, "delta": delta.to_json(),
           "reverse_record": [[e.ident, e.text] for e in record]}
    text = (f"forward sigma = {format_sigma(fwd.sigma)}\n"
            f"restored sigma = {format_sigma(sigma)}\n{doc['verdict']}")
    _emit(args, doc, text)
    return EXIT_OK if ok else EXIT_MISMATCH


def _roundtrip_all(args, annotated, sigma0, delta0) -> int:
    if args.unchecked_order:
        raise CliError("--unchecked-order needs a single forward schedule, not --all-schedules")
    results = enumerate_interleavings(annotated, sigma0, delta0, bound=args.bound)
    passed = sum(r.restored for r in results)
    rows = [{"schedule": list(r.schedule), "sigma": r.sigma, "restored": r.restored,
             "error": r.error} for r in results]
    verdict = "PASS" if passed == len(results) else "FAIL"
    lines = [f"{','.join(r.schedule) or '-'}  {format_sigma(r.sigma)}  "
             f"{'PASS' if r.restored else 'FAIL'}" for r in results]
    lines.append(f"{passed}/{len(results)} {verdict}")
    _emit(args, {"verdict": verdict, "passed": passed, "total": len(results), "schedules": rows},
          "\n".join(lines))
    return EXIT_OK if verdict == "PASS" else EXIT_MISMATCH


def cmd_interleavings(args) -> int:
    prog, d = load_program(args.input, args.dialect)
    if d is Dialect.SEQUENTIAL and not any(isinstance(s, Par) for s in walk_stmts(prog)):
        d = Dialect.PARALLEL
        check_dialect(prog, d)
    annotated = ann(prog) if d is Dialect.PARALLEL else prog
    sigma0, delta0 = load_initial(args, annotated, PARALLEL)
    results = enumerate_interleavings(annotated, sigma0, delta0, bound=args.bound)
    rows = [{"schedule": list(r.schedule), "sigma": r.sigma, "restored": r.restored,
             "order": [e.text for e in r.forward.record]} for r in results]
    distinct = {tuple(sorted(r.sigma.items())) for r in results}
    lines = [f"{','.join(r.schedule) or '-'}  {format_sigma(r.sigma)}  "
             f"{'restored' if r.restored else 'NOT restored'}" for r in results]
    lines.append(f"{len(results)} interleavings, {len(distinct)} distinct final stores")
    _emit(args, {"total": len(results), "distinct_final_stores": len(distinct),
                 "interleavings": rows}, "\n".join(lines))
    return EXIT_OK if all(r.restored for r in results) else EXIT_MISMATCH


def cmd_fuzz(args) -> int:
    prop = args.prop
    base = default_config(prop)
    dialect = "parallel" if prop == "34" else "sequential"
    if args.dialect not in ("auto", None):
        wanted = Dialect.coerce(args.dialect).value
        if wanted != dialect:
            raise CliError(f"property {prop} runs on {dialect} programs, not {wanted}")
    overrides = {k: v for k, v in (("max_stmts", args.max_stmts), ("max_depth", args.max_depth),
                                   ("var_pool", args.var_pool),
                                   ("loop_bound_style", args.loop_style)) if v is not None}
    try:
        cfg = GenConfig(**{**base.__dict__, **overrides})
    except ValueError as exc:
        raise CliError(str(exc)) from None
    if args.mutant and args.mutant not in MUTANTS_BY_NAME:
        raise CliError(f"unknown mutant {args.mutant!r}; known: {', '.join(MUTANTS_BY_NAME)}")
    par_mode = ("sampled", args.sampled, args.seed) if args.sampled else "exhaustive"
    report = run_suite(prop, args.cases, args.seed, cfg, jobs=args.jobs, mutant=args.mutant,
                       par_mode=par_mode, shrink=not args.no_shrink,
                       stop_on_first=args.stop_on_first)
    if args.json:
        print(report.dumps())
    else:
        print(f"prop {prop}: {report.cases} cases, {report.passed} passed, "
              f"{report.skipped} skipped, {len(report.failures)} failed "
              f"in {report.elapsed:.2f}s")
        for f in report.failures[:5]:
            print(f"seed {f.seed}: {f.message}")
            print(f.minimized or f.program)
    return EXIT_OK if report.ok else EXIT_MISMATCH


# -- argument parsing ----------------------------------------------------------


DIALECTS = ("auto", "seq", "par", "ann", "sequential", "parallel", "annotated")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="reverso", description="Run and reverse while programs.")
    ap.add_argument("--version", action="version", version=f"reverso {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, program=True):
        if program:
            p.add_argument("input", help="program file, or - for stdin")
            p.add_argument("--dialect", choices=DIALECTS, default="auto")
        p.add_argument("--json", action="store_true", help="machine-readable output")

    def stores(p):
        p.add_argument("--store", help="JSON file with sigma (and optionally delta)")
        p.add_argument("--sigma", help="initial values as X=4,Y=3 (overrides --store)")
        p.add_argument("--fuel", type=int, help="step limit (default $REVERSO_FUEL or 1000000)")

    p = sub.add_parser("parse", help="parse, validate and pretty-print")
    common(p)
    p.set_defaults(fn=cmd_parse)
    for name, fn, text in (("augment", cmd_augment, "insert state-saving pushes"),
                           ("invert", cmd_invert, "build the inverse program"),
                           ("annotate", cmd_annotate, "attach empty identifier stacks")):
        p = sub.add_parser(name, help=text)
        common(p)
        p.set_defaults(fn=fn)

    p = sub.add_parser("run", help="run forwards")
    common(p)
    stores(p)
    p.add_argument("--schedule", help="parallel schedule: first, last, rr, seed:N or L,R,...")
    p.add_argument("--augment", action="store_true", help="augment a sequential program first")
    p.add_argument("--trace", action="store_true", help="print one line per rule applied")
    p.add_argument("--trace-json", action="store_true", help="print the trace as JSON")
    p.add_argument("--micro-steps", action=argparse.BooleanOptionalAction, default=True,
                   help="show expression sub-steps in sequential traces")
    p.add_argument("--out", help="write a checkpoint for 'reverse' here")
    p.set_defaults(fn=cmd_run)

    p = sub.add_parser("reverse", help="reverse a checkpoint")
    p.add_argument("checkpoint")
    common(p, program=False)
    p.add_argument("--fuel", type=int)
    p.add_argument("--trace", action="store_true")
    p.set_defaults(fn=cmd_reverse)

    p = sub.add_parser("roundtrip", help="forward, invert, reverse and compare")
    common(p)
    stores(p)
    p.add_argument("--schedule")
    p.add_argument("--all-schedules", action="store_true")
    p.add_argument("--unchecked-order", help="reverse in this order ignoring identifiers")
    p.add_argument("--bound", type=int, default=12, help="statement limit for --all-schedules")
    p.set_defaults(fn=cmd_roundtrip)

    p = sub.add_parser("interleavings", help="enumerate every completion order")
    common(p)
    stores(p)
    p.add_argument("--bound", type=int, default=12)
    p.set_defaults(fn=cmd_interleavings)

    p = sub.add_parser("fuzz", help="property suites on generated programs")
    common(p, program=False)
    p.add_argument("--prop", choices=PROPS, required=True)
    p.add_argument("--cases", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dialect", choices=DIALECTS, default="auto")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--max-stmts", type=int)
    p.add_argument("--max-depth", type=int)
    p.add_argument("--var-pool", type=int)
    p.add_argument("--loop-style", choices=("counter-pattern", "fuel-only"))
    p.add_argument("--sampled", type=int, help="sample N schedules per program instead of all")
    p.add_argument("--mutant", help="check a deliberately broken transform")
    p.add_argument("--no-shrink", action="store_true")
    p.add_argument("--stop-on-first", action="store_true")
    p.set_defaults(fn=cmd_fuzz)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (ParseError, DialectError, ValidationError, ReservedName, CliError,
            ScheduleError, BoundExceeded) as exc:
        code = getattr(exc, "code", EXIT_INPUT)
        print(f"reverso: {exc}", file=sys.stderr)
        return code
    except FuelExhausted as exc:
        print(f"reverso: {exc}", file=sys.stderr)
        return EXIT_FUEL
    except StuckReverse as exc:
        print(f"reverso: stuck: {exc}", file=sys.stderr)
        return EXIT_STUCK
    except STORE_ERRORS as exc:
        print(f"reverso: store error: {exc}", file=sys.stderr)
        return EXIT_STORE


if __name__ == "__main__":
    sys.exit(main())
