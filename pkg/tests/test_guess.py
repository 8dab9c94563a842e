from fractions import Fraction

from hypothesis import given, settings
from hypothesis import strategies as st

from qholo.field import Q, RationalFunction, var
from qholo.genfun import QRecurrence, parse_recurrence
from qholo.guess import WARNING_TEXT, GuessProblem, qre_guess
from qholo.ore import OreAlgebra, OrePolynomial, lommel_polys, qshift
from qholo.parser import parse_operator, parse_rf

import golden

AV = OreAlgebra(qshift("V"))


def lommel(count):
    return lommel_polys(parse_operator(golden.J1_REC_V, AV), count)


def srec():
    return parse_recurrence(golden.SREC, initial=golden.SREC_INIT)


def test_lommel_guess_with_warning(caplog):
    res = qre_guess(lommel(7), 2, 2)
    assert res is not None
    assert res.warning and res.message == WARNING_TEXT
    assert res.recurrence.equivalent(srec())
    assert [str(v) for v in res.recurrence.initial] == [str(parse_rf(s)) for s in golden.SREC_INIT]
    assert WARNING_TEXT in caplog.text


def test_lommel_guess_ten_terms_no_warning():
    rec, warn = qre_guess(lommel(10), 2, 2)
    assert not warn
    assert rec.equivalent(srec())


def test_geometric_sequence():
    rec, warn = qre_guess([Q ** k for k in range(6)], 2, 2)
    assert rec.operator.equal_up_to_unit(parse_operator("S(N;q) - q", OreAlgebra(qshift("N"))))
    assert not warn


def test_no_relation_within_bounds():
    data = [RationalFunction(Fraction(1, k * k + 3)) + Q ** (k * k) for k in range(8)]
    assert qre_guess(data, 1, 1) is None


def test_problem_counts():
    pr = GuessProblem(7, 2, 1)
    assert (pr.unknowns, pr.equations) == (6, 5)
    assert not pr.enough_data
    assert GuessProblem(10, 2, 1).enough_data


# --- properties ------------------------------------------------------------


@st.composite
def recurrences(draw, max_order=2, max_degree=1):
    r = draw(st.integers(1, max_order))
    d = draw(st.integers(0, max_degree))
    N = var("N")
    coeffs = {}
    for i in range(r + 1):
        c = sum((draw(st.integers(-3, 3)) * N ** j for j in range(d + 1)), RationalFunction(0))
        coeffs[i] = c
    if coeffs[r].substitute({"N": RationalFunction(1)}).is_zero():
        coeffs[r] = coeffs[r] + 1
    if coeffs[0].substitute({"N": RationalFunction(1)}).is_zero():
        coeffs[0] = coeffs[0] + 1
    op = OrePolynomial(OreAlgebra(qshift("N")), {(i,): c for i, c in coeffs.items() if not c.is_zero()})
    init = [draw(st.integers(1, 3))] + [draw(st.integers(-3, 3)) for _ in range(r - 1)]
    return QRecurrence(op, init)


GUESS = settings(max_examples=25, deadline=None)


def _annihilates(rec, data):
    r = rec.order
    for n in range(len(data) - r):
        acc = RationalFunction(0)
        for i in range(r + 1):
            acc = acc + rec.coefficient(i).substitute({"N": Q ** n}) * data[n + i]
        if not acc.is_zero():
            return False
    return True


@GUESS
@given(recurrences())
def test_guess_annihilates_data(rec):
    data = rec.terms(12)
    res = qre_guess(data, 2, 1)
    assert res is not None
    assert _annihilates(res.recurrence, data)


@GUESS
@given(recurrences())
def test_guess_is_stable(rec):
    res = qre_guess(rec.terms(12), 2, 1)
    again = qre_guess(res.recurrence.terms(16), 2, 1)
    assert again.recurrence.operator.equal_up_to_unit(res.recurrence.operator)


def _rank(rows):
    rows = [list(r) for r in rows]
    rank, ncols = 0, len(rows[0])
    for c in range(ncols):
        piv = next((i for i in range(rank, len(rows)) if rows[i][c] != 0), None)
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        for i in range(len(rows)):
            if i != rank and rows[i][c] != 0:
                f = rows[i][c] / rows[rank][c]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[rank])]
        rank += 1
    return rank


def _numeric_kernel_dim(data, r, d, qval):
    rows = []
    for n in range(len(data) - r):
        rows.append([qval ** (n * j) * data[n + i] for i in range(r + 1) for j in range(d + 1)])
    return (r + 1) * (d + 1) - _rank(rows)


@GUESS
@given(recurrences())
def test_guess_is_minimal(rec):
    data = rec.terms(12)
    res = qre_guess(data, 2, 1)
    r0, d0 = res.problem.order, res.problem.degree
    qval = Fraction(3, 2) ** 4
    num = [v.instantiate({"p": Fraction(3, 2)}).constant_value().re for v in data]
    for r in range(1, 3):
        for d in range(0, 2):
            smaller = (r + d, r) < (r0 + d0, r0)
            eqs, unk = len(data) - r, (r + 1) * (d + 1)
            if smaller and eqs >= unk:
                # a specialization can only add kernel vectors, never remove them
                assert _numeric_kernel_dim(num, r, d, qval) == 0
