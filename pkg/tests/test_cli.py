from __future__ import annotations

import json
import shutil
import subprocess

import pytest

from eslmc.cli import main

from conftest import DE_DICTO, TOY_PATH

MODEL = str(TOY_PATH)


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_check_de_dicto(capsys):
    code, out, _ = run(capsys, "check", "--model", MODEL, "--formula", DE_DICTO, "--recall", "1")
    assert code == 0
    assert "result: true" in out
    assert "witness" not in out


def test_check_with_witness(capsys):
    code, out, _ = run(capsys, "check", "--model", MODEL, "--formula", DE_DICTO, "--witness")
    assert code == 0
    assert "witness y1:B (recall 1):" in out
    assert "  eA,eB => wait" in out


def test_check_false(capsys):
    code, out, _ = run(capsys, "check", "--model", MODEL, "--formula", "win_A")
    assert code == 1
    assert "result: false" in out


def test_check_formula_file(capsys, tmp_path):
    p = tmp_path / "phi.esl"
    p.write_text("exists x:A. X !win_A\n")
    code, _, _ = run(capsys, "check", "--model", MODEL, "--formula-file", str(p))
    assert code == 0


def test_check_universal_counterexample_json(capsys):
    code, out, _ = run(
        capsys, "check", "--model", MODEL, "--formula", "X X win_B",
        "--closure", "universal", "--witness", "--format", "json",
    )
    assert code == 1
    doc = json.loads(out)
    assert doc["verdict"]["result"] is False
    assert sorted(doc["verdict"]["counterexample"]) == ["y1", "y2"]
    assert "jobs" not in doc["config"]


def test_check_uniform_mode(capsys):
    phi = "exists y:B. forall x:A. X X win_B"
    assert run(capsys, "check", "--model", MODEL, "--formula", phi)[0] == 0
    assert run(capsys, "check", "--model", MODEL, "--formula", phi, "--mode", "uniform")[0] == 1


def test_check_timing(capsys):
    _, out, _ = run(capsys, "check", "--model", MODEL, "--formula", DE_DICTO, "--format", "json", "--timing")
    assert "wall_time" in json.loads(out)["stats"]


def test_cap_exceeded(capsys):
    code, _, err = run(capsys, "check", "--model", MODEL, "--formula", DE_DICTO, "--recall", "2", "--cap", "8")
    assert code == 3
    assert "exceed" in err.lower()


def test_cap_from_environment(capsys, monkeypatch):
    monkeypatch.setenv("ESLMC_CAP", "8")
    code, _, _ = run(capsys, "check", "--model", MODEL, "--formula", DE_DICTO, "--recall", "2")
    assert code == 3


@pytest.mark.parametrize(
    "argv",
    [
        ["check", "--model", MODEL, "--formula", "win_A &"],
        ["check", "--model", MODEL, "--formula", "exists x:Z. win_A"],
        ["check", "--model", "/nonexistent/model.json", "--formula", "win_A"],
        ["check", "--model", MODEL, "--formula", "win_A", "--recall", "0"],
        ["check", "--model", MODEL],
        ["bogus"],
    ],
)
def test_errors_exit_2(capsys, argv):
    code = None
    try:
        code = main(argv)
    except SystemExit as exc:
        code = exc.code
    assert code == 2
    assert capsys.readouterr().err


def test_invalid_model_exit_2(capsys, tmp_path, toy_doc):
    del toy_doc["transitions"][0]
    p = tmp_path / "broken.json"
    p.write_text(json.dumps(toy_doc))
    code, out, err = run(capsys, "validate", "--model", str(p))
    assert code == 2
    assert "MissingEnabledTransition" in err or "missing" in err.lower()


def test_validate(capsys):
    code, out, _ = run(capsys, "validate", "--model", MODEL)
    assert code == 0
    assert out.strip() == "2 agents, 7 reachable states"


def test_info_text(capsys):
    code, out, _ = run(capsys, "info", "--model", MODEL, "--recall", "1")
    assert code == 0
    assert "strategies A: perfect 2, uniform 2" in out
    assert "strategies B: perfect 4, uniform 2" in out
    assert "recall 1: 7 windows" in out
    assert "  0,lam" in out


def test_info_json(capsys):
    code, out, _ = run(capsys, "info", "--model", MODEL, "--recall", "2", "--format", "json")
    doc = json.loads(out)
    assert doc["windows"] == 17
    assert doc["strategies"] == {
        "A": {"perfect": 32, "uniform": 8},
        "B": {"perfect": 16, "uniform": 4},
    }


def test_qptl_sat(capsys):
    code, out, _ = run(capsys, "qptl-sat", "--formula", "exists p. p & X !p", "--recall", "2")
    assert code == 0
    assert "result: SAT" in out
    assert "p: " in out


def test_qptl_unsat_json(capsys):
    code, out, _ = run(capsys, "qptl-sat", "--formula", "exists p. p & !p", "--format", "json")
    assert code == 1
    doc = json.loads(out)
    assert doc["result"] == "UNSAT"
    assert doc["evaluation"] is None
    assert doc["alternation"] == {"qptl": 0, "esl": 0}


def test_qptl_props_order(capsys):
    code, out, _ = run(
        capsys, "qptl-sat", "--formula", "exists p. exists q. p & !q", "--props", "q,p", "--format", "json"
    )
    assert code == 0
    assert json.loads(out)["props"] == ["q", "p"]


def test_qptl_syntax_error(capsys):
    code, _, err = run(capsys, "qptl-sat", "--formula", "exists . p")
    assert code == 2 and err


@pytest.mark.skipif(shutil.which("eslmc") is None, reason="console script not installed")
def test_console_script():
    proc = subprocess.run(
        ["eslmc", "check", "--model", MODEL, "--formula", DE_DICTO],
        capture_output=True, text=True, timeout=60,
    )
    assert proc.returncode == 0
    assert "result: true" in proc.stdout
