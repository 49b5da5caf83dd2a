import json
import subprocess
import sys

from conftest import FIB_SIGMA, FIB_SIGMA_FINAL, PROGRAMS, source

from reverso.cli import main
from reverso.syntax import parse_program, render_program

FIB = str(PROGRAMS / "fib.rev")
FIB_STORE = str(PROGRAMS / "fib.json")
RACE = str(PROGRAMS / "race.rev")
RACE_STORE = str(PROGRAMS / "race.json")


def cli(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def cli_json(capsys, *argv):
    code, out, err = cli(capsys, *argv, "--json")
    return code, json.loads(out)


def canonical(name, dialect="sequential"):
    return render_program(parse_program(source(name), dialect))


def test_augment_and_invert_print_reference_texts(capsys):
    code, out, _ = cli(capsys, "augment", FIB)
    assert code == 0 and out == canonical("fib_aug.rev")
    code, out, _ = cli(capsys, "invert", FIB)
    assert code == 0 and out == canonical("fib_inv.rev")


def test_annotate_and_invert_parallel(capsys):
    code, out, _ = cli(capsys, "annotate", RACE)
    assert out == canonical("race_ann.rev", "annotated")
    code, out, _ = cli(capsys, "invert", PROGRAMS / "race_final.rev")
    assert out == canonical("race_inv.rev", "annotated")


def test_empty_program(capsys, tmp_path):
    empty = tmp_path / "empty.rev"
    empty.write_text("")
    assert cli(capsys, "augment", empty)[:2] == (0, "")
    ckpt = tmp_path / "e.json"
    assert cli(capsys, "run", empty, "--augment", "--out", ckpt)[0] == 0
    code, doc = cli_json(capsys, "reverse", ckpt)
    assert code == 0 and doc["restored"] and doc["sigma"] == {}


def test_parse_json(capsys):
    code, doc = cli_json(capsys, "parse", FIB)
    assert code == 0 and doc["dialect"] == "sequential"
    assert doc["variables"] == ["X", "Y", "Z", "N"] and doc["violations"] == []


def test_run_augmented_program(capsys):
    code, doc = cli_json(capsys, "run", PROGRAMS / "fib_aug.rev", "--store", FIB_STORE)
    assert code == 0 and doc["sigma"] == FIB_SIGMA_FINAL
    assert doc["delta"]["W"] == [True, True, True, False]


def test_run_skip_leaves_store(capsys, tmp_path):
    p = tmp_path / "s.rev"
    p.write_text("skip;")
    code, doc = cli_json(capsys, "run", p, "--sigma", "X=3")
    assert doc["sigma"] == {"X": 3}


def test_sequential_checkpoint_round_trip(capsys, tmp_path):
    ckpt = tmp_path / "fib.json"
    assert cli(capsys, "run", PROGRAMS / "fib_aug.rev", "--store", FIB_STORE, "--out", ckpt)[0] == 0
    code, doc = cli_json(capsys, "reverse", ckpt)
    assert code == 0 and doc["sigma"] == FIB_SIGMA and doc["restored"]


def test_checkpoint_needs_augmented_run(capsys, tmp_path):
    code, _, err = cli(capsys, "run", FIB, "--store", FIB_STORE, "--out", tmp_path / "x.json")
    assert code == 1 and "--augment" in err


def test_parallel_checkpoint_round_trip(capsys, tmp_path):
    ckpt = tmp_path / "race.json"
    code, doc = cli_json(capsys, "run", RACE, "--store", RACE_STORE, "--schedule", "L,R,R",
                         "--out", ckpt)
    assert code == 0 and doc["sigma"] == {"X": 4, "Y": 6} and doc["counter"] == 4
    saved = json.loads(ckpt.read_text())
    assert parse_program(saved["program"], "annotated") == parse_program(
        source("race_final.rev"), "annotated")
    code, doc = cli_json(capsys, "reverse", ckpt)
    assert code == 0 and doc["sigma"] == {"X": 1, "Y": 1} and doc["counter"] == 1
    assert [i for i, _ in doc["record"]] == [3, 2, 1]


def test_tampered_checkpoint_is_stuck(capsys, tmp_path):
    ckpt = tmp_path / "race.json"
    cli(capsys, "run", RACE, "--store", RACE_STORE, "--schedule", "L,R,R", "--out", ckpt)
    doc = json.loads(ckpt.read_text())
    doc["counter"] = 3
    ckpt.write_text(json.dumps(doc))
    assert cli(capsys, "reverse", ckpt)[0] == 4


def test_roundtrip_verdicts(capsys):
    code, doc = cli_json(capsys, "roundtrip", FIB, "--store", FIB_STORE)
    assert code == 0 and doc["verdict"] == "PASS"
    code, doc = cli_json(capsys, "roundtrip", RACE, "--store", RACE_STORE, "--all-schedules")
    assert code == 0 and (doc["passed"], doc["total"]) == (3, 3)
    code, doc = cli_json(capsys, "roundtrip", RACE, "--store", RACE_STORE,
                         "--schedule", "P1,Q1,Q2", "--unchecked-order", "P1,Q2,Q1")
    assert code == 5 and doc["verdict"] == "FAIL" and doc["restored"] == {"X": 4, "Y": 1}


def test_interleavings(capsys):
    code, doc = cli_json(capsys, "interleavings", RACE, "--sigma", "X=1,Y=1")
    assert code == 0 and doc["total"] == 3
    assert sorted(tuple(r["sigma"].values()) for r in doc["interleavings"]) == [(4, 3), (4, 6), (9, 3)]


def test_trace_outputs(capsys):
    code, out, _ = cli(capsys, "run", FIB, "--store", FIB_STORE, "--augment", "--trace")
    lines = out.splitlines()
    assert lines[0].startswith("start | if X > Y then")
    assert all(line.count(" | ") == 3 for line in lines[:-2])
    code, out, _ = cli(capsys, "run", FIB, "--store", FIB_STORE, "--trace-json")
    assert json.loads(out)[-1]["sigma"] == FIB_SIGMA_FINAL
    code, out, _ = cli(capsys, "run", RACE, "--store", RACE_STORE, "--trace")
    assert out.splitlines()[0].startswith("P3/")


def test_fuel_exit_code(capsys, tmp_path, monkeypatch):
    p = tmp_path / "loop.rev"
    p.write_text("while T do skip end")
    assert cli(capsys, "run", p, "--fuel", "100")[0] == 2
    monkeypatch.setenv("REVERSO_FUEL", "50")
    assert cli(capsys, "run", p)[0] == 2


def test_input_error_exit_codes(capsys, tmp_path):
    bad = tmp_path / "bad.rev"
    bad.write_text("X = = 1;")
    code, _, err = cli(capsys, "parse", bad)
    assert code == 1 and "1:5" in err
    invalid = tmp_path / "invalid.rev"
    invalid.write_text("X += X;")
    assert cli(capsys, "augment", invalid)[0] == 1
    assert cli(capsys, "parse", tmp_path / "missing.rev")[0] == 1
    assert cli(capsys, "run", RACE, "--schedule", "Z1")[0] == 1
    assert cli(capsys, "augment", RACE)[0] == 1


def test_store_error_exit_code(capsys, tmp_path):
    p = tmp_path / "pop.rev"
    p.write_text("X = pop(delta(X));")
    assert cli(capsys, "run", p)[0] == 3


def test_fuzz(capsys):
    code, doc = cli_json(capsys, "fuzz", "--prop", "2", "--cases", "30", "--seed", "3")
    assert code == 0 and doc["cases"] == 30 and doc["ok"]
    code, doc = cli_json(capsys, "fuzz", "--prop", "34", "--cases", "5", "--dialect", "par")
    assert code == 0 and doc["ok"]
    code, doc = cli_json(capsys, "fuzz", "--prop", "2", "--cases", "300", "--mutant",
                         "inv-same-cop", "--stop-on-first")
    assert code == 5 and doc["failures"][0]["seed"] is not None
    assert cli(capsys, "fuzz", "--prop", "34", "--dialect", "seq")[0] == 1


def test_commands_are_deterministic(capsys):
    first = cli(capsys, "run", RACE, "--schedule", "seed:11", "--json")
    assert first == cli(capsys, "run", RACE, "--schedule", "seed:11", "--json")


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "reverso", "roundtrip", FIB, "--store", FIB_STORE],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.strip().endswith("PASS")
