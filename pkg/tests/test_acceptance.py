"""End-to-end acceptance criteria, one test per criterion.

Each test prints a ``PASS criterion N`` or ``FAIL criterion N`` line straight to
the terminal (also under ``pytest -v`` without ``-s``) and enforces its time
budget.  Criterion 10 is a stretch goal: its outcome is reported but never
fails the run.  Set ``QHOLO_STRETCH_SECS`` to change its cap (default 1800).
"""

import os
import random
import subprocess
import sys
import time
from pathlib import Path

import pytest

from qholo import catalog as C
from qholo.closure import annihilator, dfinite_plus, dfinite_substitute, dfinite_times
from qholo.field import var
from qholo.genfun import QRecurrence, qre2se, qse2re
from qholo.ore import OreAlgebra, OrePolynomial, qshift
from qholo.replay import replay
from qholo.telescope import ct_hyper

from test_genfun import solves

HERE = Path(__file__).parent


@pytest.fixture(scope="module")
def reports():
    cache = {}

    def get(case):
        if case not in cache:
            cache[case] = replay(case)
        return cache[case]

    return get


def announce(capsys, n, ok, seconds, limit, detail=""):
    tag = "PASS" if ok else "FAIL"
    line = f"{tag} criterion {n} ({seconds:.1f}s, limit {limit:.0f}s)"
    if detail:
        line += f": {detail}"
    with capsys.disabled():
        print("\n" + line)


def check_steps(capsys, report, n, names, limit, each=False):
    """Criterion over replay steps; ``each`` applies the limit per step instead of in total."""
    steps = {s.name: s for s in report.steps}
    missing = [m for m in names if m not in steps]
    picked = [steps[m] for m in names if m in steps]
    failed = [s.name for s in picked if not s.ok]
    total = sum(s.seconds for s in picked)
    slow = [s.name for s in picked if s.seconds > limit] if each else ([] if total <= limit else ["total"])
    ok = not missing and not failed and not slow
    detail = "; ".join(
        part
        for part in (
            f"missing {missing}" if missing else "",
            f"failed {failed}" if failed else "",
            f"over time {slow}" if slow else "",
        )
        if part
    )
    announce(capsys, n, ok, total, limit, detail)
    for s in picked:
        assert s.ok, f"{s.name}\n{s.detail}"
    assert not missing, missing
    assert not slow, slow


def test_criterion_01_qzeilberger(capsys, reports):
    check_steps(capsys, reports("qlommel"), 1, ["q-Zeilberger in v", "q-Zeilberger in n"], 10, each=True)


def test_criterion_02_guessing(capsys, reports):
    check_steps(capsys, reports("qlommel"), 2, ["guessed recurrence with warning", "guess stable on 10 terms"], 5)


def test_criterion_03_ore_arithmetic(capsys, reports):
    names = ["extended reduction", "left multiple product", "iteration table"]
    check_steps(capsys, reports("qlommel"), 3, names, 5)


def test_criterion_04_closure_sum(capsys, reports):
    names = ["shifted recurrences", "closure sum", "r_n = s_n for n <= 6"]
    check_steps(capsys, reports("qlommel"), 4, names, 30)


def _random_recurrence(rng: random.Random) -> QRecurrence:
    r = rng.randint(1, 3)
    N = var("N")
    coeffs = {}
    for i in range(r + 1):
        d = rng.randint(0, 2)
        coeffs[i] = sum((rng.randint(-3, 3) * N ** j for j in range(d + 1)), 0 * N)
    for i in (0, r):
        if coeffs[i].substitute({"N": 1 + 0 * N}).is_zero():
            coeffs[i] = coeffs[i] + 1
    op = OrePolynomial(OreAlgebra(qshift("N")), {(i,): c for i, c in coeffs.items() if not c.is_zero()})
    init = [rng.randint(1, 3)] + [rng.randint(-3, 3) for _ in range(r - 1)]
    return QRecurrence(op, init)


def test_criterion_05_generating_functions(capsys, reports):
    t0 = time.monotonic()
    rng = random.Random(20261016)
    bad = 0
    for _ in range(50):
        rec = _random_recurrence(rng)
        eq = qre2se(rec)
        back = qse2re(eq)
        terms = rec.terms(15)
        if not (back.operator.equal_up_to_unit(rec.operator) and back.terms(15) == terms and solves(eq, terms, 15)):
            bad += 1
    spent = time.monotonic() - t0
    lommel = {s.name: s for s in reports("qlommel").steps}
    iz = {s.name: s for s in reports("ismail-zhang").steps}
    steps = [lommel["q-shift equation"], lommel["recurrence from the equation"], iz["q-differential equation"]]
    spent += sum(s.seconds for s in steps)
    ok = bad == 0 and all(s.ok for s in steps) and spent <= 30
    announce(capsys, 5, ok, spent, 30, f"{bad} roundtrip failures" if bad else "")
    assert bad == 0
    for s in steps:
        assert s.ok, s.detail
    assert spent <= 30


def test_criterion_06_q_telescoping(capsys, reports):
    lommel = reports("qlommel")
    iz = reports("ismail-zhang")
    gen = {s.name: s for s in lommel.steps}["generalized telescoping"]
    names = ["annCos with certificate", "annSin with certificate", "annLHS as a closure sum"]
    picked = [gen] + [{s.name: s for s in iz.steps}[m] for m in names]
    ok = all(s.ok and s.seconds <= 60 for s in picked)
    announce(capsys, 6, ok, sum(s.seconds for s in picked), 60, "limit per computation")
    for s in picked:
        assert s.ok, f"{s.name}\n{s.detail}"
        assert s.seconds <= 60


def test_criterion_07_gegenbauer(capsys, reports):
    rep = reports("gegenbauer")
    check_steps(capsys, rep, 7, [s.name for s in rep.steps], 60)


IZ_STEPS = [
    "annqGegenbauer",
    "annqBesselJ",
    "annh1",
    "annh1h2",
    "annSmnd leading monomials and rank 8",
    "annRHS equals {S_V - 1, annLHS}",
]


def test_criterion_08_iz_pipeline(capsys, reports):
    check_steps(capsys, reports("ismail-zhang"), 8, IZ_STEPS, 900)


def test_criterion_09_series_oracle(capsys, reports):
    names = [
        "series: annLHS on C_q + i S_q to w^16",
        "annSumRHS generators annihilate the sum",
        "initial values l(0), l'(0) agree",
    ]
    check_steps(capsys, reports("ismail-zhang"), 9, names, 600)


def test_criterion_10_stretch(capsys, monkeypatch):
    cap = os.environ.get("QHOLO_STRETCH_SECS", "1800")
    monkeypatch.setenv("QHOLO_TIMEOUT_SECS", cap)
    rep = replay("ismail-zhang-stretch")
    step = {s.name: s for s in rep.steps}["stretch: ct_ansatz on annSmnd"]
    detail = "non-blocking" + ("" if step.ok else f"; {step.detail.splitlines()[0]}")
    announce(capsys, 10, step.ok, step.seconds, float(cap), detail)
    if not step.ok:
        pytest.xfail(f"stretch goal not reached: {step.detail.splitlines()[0]}")


PROPERTY_TESTS = [
    "test_ore.py::test_associativity",
    "test_ore.py::test_reduction_certificate",
    "test_groebner.py::test_spolys_reduce_to_zero",
    "test_closure.py::test_rank_bounds",
    "test_parser.py::test_parse_print_fixpoint",
]


def test_criterion_11_property_suites(capsys):
    t0 = time.monotonic()
    proc = subprocess.run(
        [sys.executable, "-m", "pytest", "-q", "-p", "no:cacheprovider", *PROPERTY_TESTS],
        cwd=HERE,
        capture_output=True,
        text=True,
        timeout=600,
    )
    # rank bounds on the instances the pipelines compute
    gens = [qshift("M"), qshift("V"), qshift("w")]
    bess = ct_hyper(C.term("qbessel2"), "n", gens).ideal()
    h1 = annihilator(C.term("h1"), gens)
    h2 = C.ideal("ann_h2")
    geg = ct_hyper(C.term("qgegenbauer"), "k", gens).ideal()
    sub = dfinite_substitute(bess, {"v": "v+m"})
    h12 = dfinite_times(h1, h2)
    smnd = dfinite_times(h12, sub, geg)
    plus = dfinite_plus(h1, h2)
    op1, op2 = C.ideal("op1_rhs"), C.ideal("op2_rhs")
    lommel = dfinite_plus(op1, op2)
    bounds = [
        lommel.rank() <= op1.rank() + op2.rank(),
        sub.rank() <= bess.rank(),
        h12.rank() <= h1.rank() * h2.rank(),
        smnd.rank() <= h12.rank() * sub.rank() * geg.rank(),
        plus.rank() <= h1.rank() + h2.rank(),
    ]
    spent = time.monotonic() - t0
    ok = proc.returncode == 0 and all(bounds) and spent <= 300
    tail = proc.stdout.strip().splitlines()[-1] if proc.stdout.strip() else proc.stderr[-200:]
    announce(capsys, 11, ok, spent, 300, tail)
    assert proc.returncode == 0, proc.stdout[-3000:]
    assert all(bounds), bounds
    assert spent <= 300
