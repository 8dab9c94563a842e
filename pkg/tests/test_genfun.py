from hypothesis import given, settings
from hypothesis import strategies as st

from qholo.field import Q, RationalFunction, var
from qholo.genfun import (
    EquationError,
    QRecurrence,
    QShiftEquation,
    ore_to_equation,
    parse_recurrence,
    parse_shift_equation,
    qre2se,
    qse2de,
    qse2re,
)
from qholo.ore import OreAlgebra, OrePolynomial, qder, qshift
from qholo.parser import parse_operator, parse_rf
from qholo.series import TruncatedSeries, apply_operator, series_from_coefficients

import golden

AT, AW = OreAlgebra(qshift("t")), OreAlgebra(qshift("w"))


def srec():
    return parse_recurrence(golden.SREC, initial=golden.SREC_INIT)


def solves(eq: QShiftEquation, coeffs, upto):
    """Apply the shift equation to ``sum coeffs[n] t^n`` and compare below ``upto``."""
    s = series_from_coefficients(coeffs, eq.var)
    out = apply_operator(eq.operator, s)
    if not eq.inhom.is_zero():
        h = TruncatedSeries.from_rf(eq.inhom, eq.var, len(coeffs))
        out = out + h
    return out.truncate(upto).is_zero()


def test_lommel_shift_equation():
    eq = qre2se(srec())
    want = parse_shift_equation(golden.LOMMEL_SE, initial={0: 1})
    assert eq.operator == want.operator and eq.inhom == want.inhom
    assert eq.initial == {0: RationalFunction(1)}


def test_lommel_equation_back_to_recurrence():
    rec = qse2re(parse_shift_equation(golden.LOMMEL_SE, initial={0: 1}))
    assert rec.equivalent(srec())
    assert [str(v) for v in rec.initial] == ["1", str(parse_rf("-2*x*(V-1)"))]


def test_geometric_q_power_sequence():
    rec = QRecurrence(parse_operator("S(N;q) - q"), [1])
    eq = qre2se(rec)
    assert solves(eq, [Q ** n for n in range(10)], 10)
    # (1 - q t) F = 1
    assert eq.operator.equal_up_to_unit(parse_operator("1 - q*t", AT).scale(1)) or eq.operator.degree() == 0


def test_constant_sequence():
    eq = qre2se(QRecurrence(parse_operator("S(N;q) - 1"), [1]))
    assert solves(eq, [1] * 10, 10)
    back = qse2re(eq)
    assert back.operator.equal_up_to_unit(parse_operator("S(N;q) - 1"))
    assert back.initial == [RationalFunction(1)]


def test_geometric_series_equation_to_recurrence():
    eq = parse_shift_equation("(1-t)*F[t] - 1 = 0", initial={0: 1})
    rec = qse2re(eq)
    assert rec.operator.equal_up_to_unit(parse_operator("S(N;q) - 1"))
    assert rec.terms(5) == [RationalFunction(1)] * 5


def test_ore_to_equation_annLHS():
    eq = ore_to_equation(parse_operator(golden.ANN_LHS, AW), "f", "w")
    text = eq.to_text()
    assert text.startswith("(q^2*A^2*w^2 + q*A^2)*f[w]") or "f[q^2*w]" in text
    assert eq.operator == parse_operator(golden.ANN_LHS, AW)


def test_shift_only_equation():
    eq = ore_to_equation(parse_operator("S(w;q)", AW), "f", "w")
    assert eq.to_text() == "f[q*w] = 0"


def test_q_differential_equation():
    de = qse2de(ore_to_equation(parse_operator(golden.ANN_LHS, AW), "f", "w"))
    want = parse_operator(golden.QDE, OreAlgebra(qder("w")))
    assert de.operator.equal_up_to_unit(want)


def test_trivial_qde():
    de = qse2de(ore_to_equation(parse_operator("S(w;q) - 1", AW), "f", "w"))
    assert de.operator.equal_up_to_unit(parse_operator("(q-1)*w*Dq(w)", OreAlgebra(qder("w"))))


def test_qde_annihilates_basic_exponential():
    from qholo import catalog
    from qholo.series import check_annihilation

    s = catalog.eq_series(14, {"p": RationalFunction(1) / 7})
    de = qse2de(ore_to_equation(parse_operator(golden.ANN_LHS, AW), "f", "w"))
    assert check_annihilation(de.operator, s)


def test_inhomogeneous_qde_rejected():
    try:
        qse2de(parse_shift_equation(golden.LOMMEL_SE))
    except EquationError:
        return
    raise AssertionError("expected an error")


def test_json_roundtrips():
    rec = srec()
    assert QRecurrence.from_json(rec.to_json()).equivalent(rec)
    eq = qre2se(rec)
    back = QShiftEquation.from_json(eq.to_json())
    assert back.operator == eq.operator and back.inhom == eq.inhom and back.initial == eq.initial


def test_printed_equation_parses_back():
    eq = qre2se(srec())
    lhs = eq.to_text().split(", <")[0]
    again = parse_shift_equation(lhs, initial={0: 1})
    assert again.operator == eq.operator and again.inhom == eq.inhom


def test_printed_recurrence_parses_back():
    rec = srec()
    text = rec.to_text().split(", s[0]")[0]
    assert parse_recurrence(text, initial=golden.SREC_INIT).equivalent(rec)


# --- roundtrip property ------------------------------------------------------


@st.composite
def recurrences(draw):
    r = draw(st.integers(1, 3))
    N = var("N")
    coeffs = {}
    for i in range(r + 1):
        coeffs[i] = sum((draw(st.integers(-3, 3)) * N ** j for j in range(draw(st.integers(0, 2)) + 1)), RationalFunction(0))
    one = {"N": RationalFunction(1)}
    if coeffs[r].substitute(one).is_zero():
        coeffs[r] = coeffs[r] + 1
    if coeffs[0].substitute(one).is_zero():
        coeffs[0] = coeffs[0] + 1
    op = OrePolynomial(OreAlgebra(qshift("N")), {(i,): c for i, c in coeffs.items() if not c.is_zero()})
    # a zero start gives the zero sequence, whose equation degenerates to F = 0
    init = [draw(st.integers(1, 3))] + [draw(st.integers(-3, 3)) for _ in range(r - 1)]
    return QRecurrence(op, init)


@settings(max_examples=50, deadline=None)
@given(recurrences())
def test_roundtrip(rec):
    eq = qre2se(rec)
    back = qse2re(eq)
    assert back.operator.equal_up_to_unit(rec.operator)
    assert back.terms(20) == rec.terms(20)
    # the generating function of the unrolled sequence solves the equation
    assert solves(eq, rec.terms(20), 20)
