import json
import pathlib

import jsonschema
import pytest

from conftest import EXAMPLES
from lh.cli import DEFAULT_BUDGET, build_parser, main

SCHEMA = json.loads(
    (pathlib.Path(__file__).resolve().parent.parent / "docs" / "schema.json").read_text()
)


def validate(payload):
    jsonschema.validate(payload, SCHEMA)


TRIPLE = str(EXAMPLES / "triple.lh")
FACT = str(EXAMPLES / "fact.lh")


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def test_check(capsys):
    code, out = run_cli(capsys, "check", TRIPLE)
    assert code == 0
    assert out.strip() == "{x:Int | x <> 0}"


def test_check_json(capsys):
    code, out = run_cli(capsys, "check", TRIPLE, "--json")
    payload = json.loads(out)
    validate(payload)
    assert code == 0 and payload["ok"]


def test_check_rejects_ill_typed(tmp_path, capsys):
    bad = tmp_path / "bad.lh"
    bad.write_text("1 2")
    code, _ = run_cli(capsys, "check", str(bad))
    assert code == 2


def test_run_exit_codes(capsys):
    expectations = {"classic": (1, "blame l1"), "forgetful": (0, "-1"), "heedful": (1, "blame l3"), "eidetic": (1, "blame l1")}
    for mode, (code, text) in expectations.items():
        got, out = run_cli(capsys, "run", TRIPLE, "--mode", mode)
        assert (got, out.strip()) == (code, text), mode


def test_run_stuck_exit_code(tmp_path, capsys):
    f = tmp_path / "stuck.lh"
    # the NZ contract blames before div can get stuck on zero
    f.write_text("4 div (<{x:Int|true} => {y:Int|y <> 0} @ l2> 0)")
    code, _ = run_cli(capsys, "run", str(f), "--mode", "classic")
    assert code == 1
    g = tmp_path / "loop.lh"
    g.write_text("let rec f : {x:Int|true} -> {x:Int|true} = \\x:{x:Int|true}. f x; f 1")
    code, out = run_cli(capsys, "run", str(g), "--budget", "20")
    assert code == 4


def test_run_json_with_trace_and_space(capsys):
    code, out = run_cli(capsys, "run", TRIPLE, "--mode", "eidetic", "--json", "--trace", "--space")
    payload = json.loads(out)
    validate(payload)
    assert payload["mode"] == "eidetic"
    assert payload["result"]["kind"] == "blame"
    assert payload["trace"][0]["rule"] == "E-Coerce"
    assert payload["space"]["max"]["chain"] == 3


def test_run_series_csv(tmp_path, capsys):
    out_csv = tmp_path / "series.csv"
    code, _ = run_cli(capsys, "run", TRIPLE, "--mode", "classic", "--space", "--series", str(out_csv))
    lines = out_csv.read_text().strip().splitlines()
    assert lines[0] == "step,rule,pending,chain,max_reflist,proxy_wrap,live_types"
    assert len(lines) > 1


def test_diff_command(capsys):
    code, out = run_cli(capsys, "diff", TRIPLE)
    payload = json.loads(out)
    validate(payload)
    assert code == 0
    assert payload["eidetic_ok"]["status"] == "pass"


def test_fuzz_command(tmp_path, capsys):
    report_path = tmp_path / "report.json"
    code, out = run_cli(capsys, "fuzz", "--count", "15", "--seed", "3", "--out", str(report_path))
    assert code == 0
    payload = json.loads(report_path.read_text())
    validate(payload)
    assert payload["count"] == 15 and payload["ok"]


def test_lh_budget_env(monkeypatch):
    monkeypatch.setenv("LH_BUDGET", "1234")
    parser = build_parser()
    args = parser.parse_args(["run", TRIPLE])
    assert args.budget == 1234
    monkeypatch.delenv("LH_BUDGET")
    args = build_parser().parse_args(["run", TRIPLE])
    assert args.budget == DEFAULT_BUDGET


def test_run_matches_library_eval(capsys):
    from lh import eval_term, parse
    from lh.syntax import Mode

    code, out = run_cli(capsys, "run", FACT, "--mode", "eidetic")
    lib = eval_term(Mode.EIDETIC, parse(open(FACT).read()), 100_000)
    assert out.strip() == str(lib.term.value)
    assert code == 0


def test_axiom_oracle_flag(tmp_path, capsys):
    axioms = tmp_path / "axioms.json"
    axioms.write_text(json.dumps([["{x:Int|x > 0}", "{x:Int|x >= 0}"]]))
    prog = tmp_path / "p.lh"
    prog.write_text(
        "<{x:Int|x >= 0} => {x:Int|true} @ l2> (<{x:Int|x > 0} => {x:Int|x >= 0} @ l1> "
        "(<{x:Int|true} => {x:Int|x > 0} @ l0> 5))"
    )
    code, out = run_cli(
        capsys, "run", str(prog), "--mode", "eidetic", "--oracle", "axioms", "--axioms", str(axioms)
    )
    assert code == 0 and out.strip() == "5"
