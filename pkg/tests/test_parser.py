import pytest
from hypothesis import given, settings, strategies as st

from qholo.field import I, P, Q, RationalFunction, var
from qholo.hyperterm import QHyperTerm
from qholo.ore import OreAlgebra, OrePolynomial, der, qshift, shift
from qholo.parser import ParseError, infer_algebra, parse_expression, parse_operator, parse_rf, parse_term

import golden
from strategies import mixed_algebra, operators, rfs


# --- examples ---------------------------------------------------------------


def test_names_and_constants():
    assert parse_rf("q") == Q
    assert parse_rf("q") == P ** 4
    assert parse_rf("i^2") == -1
    assert parse_rf("q^(1/2)") == P ** 2
    assert parse_rf("nu") == var("v")


def test_commutator_of_derivation():
    # D x - x D = 1 under the Ore product
    assert parse_expression("D(x)**x - x**D(x)") == RationalFunction(1)


def test_star_collects_coefficients_left():
    alg = OreAlgebra(qshift("N"))
    assert parse_operator("S(N;q)*N", alg) == parse_operator("N*S(N;q)", alg)
    assert parse_operator("S(N;q)**N", alg) == parse_operator("q*N*S(N;q)", alg)


def test_qpower_rewrite():
    # q^(v+1) is q*V through the companion table
    assert parse_rf("q^(v+1)") == Q * var("V")
    assert parse_rf("q^(2*n)") == var("N") ** 2


def test_bessel_summand():
    t = parse_term(golden.J1_SUMMAND)
    assert isinstance(t, QHyperTerm)
    # t(n+1)/t(n) for the summand in n
    r = t.ratio(shift("n"), 1)
    x, N, V = var("x"), var("N"), var("V")
    want = -(x / 2) ** 2 / ((1 - Q * N) * (1 - Q * V * N))
    assert r == want


def test_lhs_operator():
    op = parse_operator(golden.OP_LHS)
    assert op.algebra == OreAlgebra(qshift("N"))
    N, V, x = var("N"), var("V"), var("x")
    assert op.coefficient((2,)) == 1
    assert op.coefficient((1,)) == 2 * N * Q * V / x - 2 / x
    assert op.coefficient((0,)) == N * V


def test_algebra_inference_order():
    alg = infer_algebra("D(x) + S(m) * S(v)")
    assert alg == OreAlgebra(der("x"), shift("m"), shift("v"))
    assert infer_algebra("x + 1") is None


def test_explicit_algebra_rejects_foreign_generator():
    with pytest.raises(ParseError, match="not a generator"):
        parse_operator("S(M;q) + 1", OreAlgebra(qshift("N")))


# --- errors -----------------------------------------------------------------


@pytest.mark.parametrize(
    "text,pos",
    [("S(N;q)*)", 7), ("(x+1", 4), ("1/0", 2), ("", 0), ("qpoch(a;q;k", 11)],
)
def test_syntax_errors_carry_position(text, pos):
    with pytest.raises(ParseError) as exc:
        parse_expression(text)
    assert exc.value.pos == pos
    assert "position" in str(exc.value)


def test_unknown_names_are_named():
    with pytest.raises(ParseError, match="unknown function 'foo'"):
        parse_rf("foo(3)")
    with pytest.raises(ParseError, match="unknown discrete variable 'y'"):
        parse_rf("x^y")
    with pytest.raises(ParseError, match="reserved name"):
        parse_rf("I + 1")


def test_kind_mismatch():
    with pytest.raises(ParseError):
        parse_rf("qpoch(q;q;n)")
    with pytest.raises(ParseError):
        parse_term("S(N;q) + 1")
    with pytest.raises(ParseError):
        parse_operator("x + 1")


# --- print / parse fixpoint ---------------------------------------------------

_FACTORS = [
    "qpoch(q^(v+1);q;n)",
    "qpoch(q;q;n+1)",
    "qpoch(x;q^2;k)",
    "qpoch(-q*A^2;q^2)",
    "(x/2)^(v+2*n)",
    "(-1)^n",
    "q^(n*(n-1)/2)",
    "q^(k*n)",
    "fact(n+2)",
    "poch(x;k)",
    "w^v",
]


@st.composite
def terms(draw):
    picks = draw(st.lists(st.sampled_from(_FACTORS), min_size=1, max_size=4))
    signs = draw(st.lists(st.sampled_from(["*", "/"]), min_size=len(picks), max_size=len(picks)))
    coeff = draw(rfs(names=("q", "x"), nonzero=True))
    text = f"({coeff})" + "".join(f"{s}{f}" for s, f in zip(signs, picks))
    return parse_term(text)


def _again(value):
    if isinstance(value, OrePolynomial):
        return parse_operator(str(value), value.algebra)
    if isinstance(value, QHyperTerm):
        return parse_term(str(value))
    return parse_rf(str(value))


values = st.one_of(
    rfs(),
    rfs(names=("p", "x", "A")),
    operators(),
    operators(OreAlgebra(qshift("N"), qshift("w"))),
    terms(),
)


@settings(max_examples=500, deadline=None)
@given(values)
def test_parse_print_fixpoint(value):
    # independent check: parse(print(x)) = x
    assert _again(value) == value


@settings(max_examples=60, deadline=None)
@given(operators())
def test_operator_json_roundtrip(op):
    assert OrePolynomial.from_json(op.to_json()) == op


def test_imaginary_unit_prints_back():
    r = (1 + I * var("x")) / (2 - I)
    assert parse_rf(str(r)) == r
    assert mixed_algebra().scalar(r) == parse_operator(str(r), mixed_algebra())
