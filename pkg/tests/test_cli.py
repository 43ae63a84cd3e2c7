"""End-to-end tests of the command-line interface."""

import json
from pathlib import Path

import pytest

from ipj.cli import main

GOLDEN = Path(__file__).parent / "golden"


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


# -- parse ---------------------------------------------------------------------------


def test_parse_formula(capsys):
    code, out, _ = run(capsys, "parse", "Pr>= 1/2 (p & q)")
    assert code == 0
    assert out.strip() == "Pr>= 1/2 (p & q)"


def test_parse_desugars(capsys):
    code, out, _ = run(capsys, "parse", "Pr< 1/2 (p)")
    assert code == 0
    assert "~" in out and "Pr>=" in out


def test_parse_term(capsys):
    code, out, _ = run(capsys, "parse", "--kind", "term", "(s*t)+!u")
    assert code == 0
    assert out.strip() == "s * t + !u"


def test_parse_error_exit_2(capsys):
    code, _, err = run(capsys, "parse", "Pr>= (p)")
    assert code == 2
    assert "error:" in err


def test_parse_json(capsys):
    code, out, _ = run(capsys, "parse", "--json", "--kind", "eformula", "p&q")
    assert code == 0
    payload = json.loads(out)
    assert payload["ok"] is True
    assert payload["canonical"] == "p & q"


# -- proofs --------------------------------------------------------------------------


@pytest.mark.parametrize(
    "proof", ["probnec.ipjp", "c_axiom.ipjp", "almost_certain.ipjp", "arch.ipjp"]
)
def test_golden_proofs_valid(capsys, proof):
    code, out, _ = run(
        capsys, "check-proof", str(GOLDEN / proof), "--spec", str(GOLDEN / "golden.ispec")
    )
    assert code == 0, out
    assert "VALID" in out


def test_corrupted_proof_invalid(capsys, tmp_path):
    text = (GOLDEN / "probnec.ipjp").read_text()
    bad = tmp_path / "bad.ipjp"
    bad.write_text(text.replace("pnec 1", "pnec 2"))
    code, out, _ = run(capsys, "check-proof", str(bad))
    assert code == 1
    assert "INVALID" in out


def test_missing_proof_file(capsys):
    code, _, err = run(capsys, "check-proof", "/nonexistent/file.ipjp")
    assert code == 2
    assert "error:" in err


def test_malformed_proof_file(capsys, tmp_path):
    bad = tmp_path / "bad.ipjp"
    bad.write_text("1. p ;;; nonsense\n")
    code, _, err = run(capsys, "check-proof", str(bad))
    assert code == 2


# -- models --------------------------------------------------------------------------


def witness_file(capsys, tmp_path, *extra):
    path = tmp_path / "witness.ipjm"
    spec = tmp_path / "w.ispec"
    spec.write_text("p : const 1\n")
    code, out, _ = run(
        capsys,
        "simulate",
        "--witness",
        "p",
        "--spec",
        str(spec),
        "--nmax",
        "5",
        "--emit",
        str(path),
        *extra,
    )
    return code, out, path, spec


def test_simulate_witness_and_check_model(capsys, tmp_path):
    code, out, path, spec = witness_file(capsys, tmp_path)
    assert code == 0
    assert "PASS" in out
    assert path.exists()
    code, out, _ = run(
        capsys, "check-model", str(path), "--spec", str(spec), "--kmax", "1"
    )
    assert code == 0
    assert out.strip().endswith("PASS")


def test_check_model_failure(capsys, tmp_path):
    code, out, path, spec = witness_file(capsys, tmp_path)
    text = path.read_text()
    # break a finite-stage bound by moving mass off the first evidence world
    text = text.replace("u2 = 1/2", "u2 = 1/4").replace("uout = 1 e", "uout = 1/4 + 1 e")
    broken = tmp_path / "broken.ipjm"
    broken.write_text(text)
    code, out, _ = run(
        capsys, "check-model", str(broken), "--spec", str(spec), "--kmax", "1"
    )
    assert code == 1
    assert "FAIL" in out


def test_eval_in_model(capsys, tmp_path):
    _, _, path, _ = witness_file(capsys, tmp_path)
    code, out, _ = run(capsys, "eval", "Pr~ 1/5 (t :[P] p)", "--model", str(path))
    assert code == 0 and out.strip() == "true"
    code, out, _ = run(capsys, "eval", "Pr>= 1/5 (t :[P] p)", "--model", str(path))
    assert code == 1 and out.strip() == "false"


def test_random_harness(capsys):
    code, out, _ = run(
        capsys, "check-model", "--random", "3", "--instances", "50", "--seed", "7"
    )
    assert code == 0
    assert "0 violations" in out
    assert "PASS" in out


# -- simulate ------------------------------------------------------------------------


def test_simulate_round_bound(capsys):
    code, out, _ = run(capsys, "simulate", "--rounds", "10", "--error", "1/3")
    assert code == 0
    assert "59048/59049" in out
    assert "bound met with equality" in out


def test_simulate_json(capsys):
    code, out, _ = run(capsys, "simulate", "--rounds", "2", "--error", "1/3", "--json")
    assert code == 0
    payload = json.loads(out)
    assert payload["ok"] is True
    assert payload["bound"] == "8/9"


def test_simulate_rejects_bad_error(capsys):
    code, _, err = run(capsys, "simulate", "--rounds", "2", "--error", "3/2")
    assert code == 2


# -- arithmetic ----------------------------------------------------------------------


def test_arith_cmp_std_approx(capsys):
    code, out, _ = run(
        capsys, "arith", "(1 + 2 e)/(2 + 1 e)", "--cmp", "1/2", "--std", "--approx", "1/2"
    )
    assert code == 0
    assert "cmp: >" in out
    assert "std: 1/2" in out
    assert "approx 1/2: true" in out


def test_arith_bad_literal(capsys):
    code, _, err = run(capsys, "arith", "1//2")
    assert code == 2
