import json
import subprocess
import sys

import pytest

from qholo.cli import SCHEMA, main
from qholo.groebner import LeftIdeal
from qholo.ore import OreAlgebra, OrePolynomial, qshift
from qholo.parser import parse_operator

import golden

CHU = "qpoch(q^(-n);q;k)/qpoch(q;q;k)*x^k"


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv)
    doc = json.loads(out)
    assert doc["schema"] == SCHEMA
    return code, doc


# --- envelope and exit codes ----------------------------------------------------


def test_eval_json_envelope(capsys):
    code, doc = run_json(capsys, "eval", "(x^2-1)/(x-1)")
    assert code == 0 and doc["ok"] and doc["command"] == "eval"
    assert doc["result"]["value"] == "x + 1"


@pytest.mark.parametrize("where", ["before", "after"])
def test_text_flag_position(capsys, where):
    argv = ["--text", "eval", "x*x"] if where == "before" else ["eval", "x*x", "--text"]
    code, out, _ = run(capsys, *argv)
    assert code == 0 and out.strip() == "x^2"


@pytest.mark.parametrize(
    "argv",
    [["eval", "1/0"], ["eval", "S(N;q"], ["bogus"], ["qzeil", CHU, "--k", "k"], ["eval", "foo(1)"]],
)
def test_usage_errors_exit_2(capsys, argv):
    code, out, err = run(capsys, *argv)
    assert code == 2
    assert "error" in err and out == ""


def test_math_failure_exit_1(capsys):
    # the Euler product is not killed by (1 + w) S_w - 1
    code, out, _ = run(capsys, "--text", "verify-series", "(1+w)*S(w;q) - 1", "--term", "qpoch(w;q)", "--var", "w")
    assert code == 1 and out.startswith("FAIL")
    code, doc = run_json(capsys, "reduce", "S(N;q)^2", "S(N;q)-N", "--expect-zero")
    assert code == 1 and not doc["ok"]


def test_no_telescoper_exit_1(capsys):
    code, doc = run_json(capsys, "qgosper", "qpoch(q;q;k)", "--k", "k")
    assert code == 1 and not doc["ok"]


# --- commands -------------------------------------------------------------------


def test_reduce_to_zero(capsys):
    code, doc = run_json(capsys, "reduce", "S(N;q)^2 - q*N^2", "S(N;q)-N", "--expect-zero")
    assert code == 0 and doc["ok"]


def test_gb_reports_rank(capsys):
    code, doc = run_json(capsys, "gb", "S(M;q)^2 - M, S(V;q) - V", "--algebra", "S(M;q), S(V;q)")
    assert code == 0 and doc["result"]["rank"] == 2


def test_qzeil_matches_library(capsys):
    code, out, _ = run(capsys, "--text", "qzeil", CHU, "--k", "k", "--param", "S(N;q)")
    assert code == 0
    tel = parse_operator(out.split("}")[0].strip("{ "), OreAlgebra(qshift("N")))
    assert tel.equal_up_to_unit(parse_operator("q*N*S(N;q) + x - q*N"))


def test_file_arguments_roundtrip(capsys, tmp_path):
    code, out, _ = run(capsys, "ann", CHU, "--gens", "S(N;q), S(K;q)")
    assert code == 0
    path = tmp_path / "ann.json"
    path.write_text(out)
    code, doc = run_json(
        capsys, "ct-ansatz", f"@{path}", "--delta", "S(K;q)-1", "--params", "S(N;q)",
        "--denominator", "q*N-K", "--degree", "1", "--max-order", "1",
    )
    assert code == 0 and doc["ok"]
    tel = OrePolynomial.from_json(doc["result"]["telescopers"][0])
    assert tel.equal_up_to_unit(parse_operator("q*N*S(N;q) + x - q*N"))


def test_timeout_env(capsys, tmp_path, monkeypatch):
    code, out, _ = run(capsys, "ann", CHU, "--gens", "S(N;q), S(K;q)")
    path = tmp_path / "ann.json"
    path.write_text(out)
    monkeypatch.setenv("QHOLO_TIMEOUT_SECS", "0.001")
    code, doc = run_json(
        capsys, "ct-ansatz", f"@{path}", "--delta", "S(K;q)-1", "--params", "S(N;q)",
        "--denominator", "q*N-K", "--degree", "3", "--max-order", "2",
    )
    assert code == 1 and "timeout" in doc["error"]


def test_guess_and_generating_function(capsys):
    data = json.dumps([1, 1, 2, 3, 5, 8, 13, 21, 34, 55, 89, 144])
    code, out, _ = run(capsys, "--text", "guess", data)
    assert code == 0 and out.startswith("s[n] - s[n-1] - s[n-2] = 0")
    code, out, _ = run(capsys, "--text", "re2se", "s[n+1] - s[n] = 0", "--initial", "1")
    assert code == 0 and out.startswith("(t - 1)*F[t] + 1 = 0")
    code, out, _ = run(capsys, "--text", "se2re", "F[q*t] - (1-t)*F[t]", "--initial", "0=1")
    assert code == 0 and "s[0] = 1" in out
    code, out, _ = run(capsys, "--text", "se2de", "F[q*t] - (1-t)*F[t]")
    assert code == 0 and "f'[t]" in out


def test_closure_commands(capsys):
    code, doc = run_json(capsys, "plus", golden.OP1_RHS, golden.OP2_RHS)
    assert code == 0
    alg = OreAlgebra(qshift("N"))
    got = LeftIdeal([OrePolynomial.from_json(g, alg) for g in doc["result"]["gens"]], alg)
    assert got.contains(parse_operator(golden.OP_RHS, alg))
    code, out, _ = run(capsys, "--text", "subst", "S(N;q)-N", "n=2*n")
    assert code == 0 and out.strip() == "{S(N;q) - q*N^4}"


def test_verify_series_sum(capsys):
    code, out, _ = run(
        capsys, "--text", "verify-series", "(1-w)*S(w;q)-1", "--term", "w^j", "--sum", "j=0..inf",
        "--var", "w", "--specialize", "p=1/7",
    )
    assert code == 1
    code, out, _ = run(
        capsys, "--text", "verify-series", "(1-q*w)*S(w;q)-(1-w)", "--term", "w^j", "--sum", "j=0..inf",
        "--var", "w", "--specialize", "p=1/7",
    )
    assert code == 0 and out.startswith("ok")


def test_replay_is_deterministic(capsys):
    a = run(capsys, "--text", "replay", "qlommel", "--no-timings")
    b = run(capsys, "--text", "replay", "qlommel", "--no-timings")
    assert a[0] == 0 and a[1] == b[1]
    assert "FAIL" not in a[1]


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "qholo", "--text", "eval", "q"], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.strip() == "q"
