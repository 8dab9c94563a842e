from hypothesis import given, settings
from hypothesis import strategies as st

from qholo.field import RationalFunction, ZERO_RF, var
from qholo.groebner import LeftIdeal, groebner_basis, normal_form, rank, spoly, staircase
from qholo.ore import OreAlgebra, OrePolynomial, der, ore_reduce, qshift, shift
from qholo.parser import parse_operator

import golden

MVX = OreAlgebra(shift("m"), shift("v"), der("x"))


def ideal(texts, alg):
    return LeftIdeal([parse_operator(t, alg) for t in texts], alg)


def test_annG_is_already_a_basis():
    I = ideal(golden.ANN_G, MVX)
    assert sorted(I.leading_monomials()) == sorted([(0, 1, 0), (1, 0, 0), (0, 0, 2)])
    for g in I.gens:
        assert normal_form(g, I).is_zero()
    assert len(I.gb) == 3


def test_annG_rank_two():
    I = ideal(golden.ANN_G, MVX)
    assert I.is_dfinite()
    assert I.rank() == 2
    assert sorted(staircase(I)) == [(0, 0, 0), (0, 0, 1)]


def test_unit_ideal():
    alg = OreAlgebra(qshift("N"))
    I = ideal(["S(N;q)-1", "S(N;q)-q"], alg)
    assert I.is_unit()
    assert [str(g) for g in I.gb] == ["1"]


def test_single_first_order_rank_one():
    alg = OreAlgebra(qshift("N"))
    assert rank(ideal(["S(N;q)-1"], alg)) == 1


def test_not_dfinite_rank_infinite():
    alg = OreAlgebra(qshift("N"), qshift("V"))
    I = ideal(["S(N;q)-1"], alg)
    assert not I.is_dfinite()
    assert I.rank() == float("inf")


def test_membership_and_equality():
    alg = OreAlgebra(qshift("N"))
    I = ideal([golden.OP_LHS], alg)
    assert I.contains(parse_operator(golden.OP_RHS, alg))
    assert not ideal([golden.OP_RHS], alg).contains(parse_operator(golden.OP_LHS, alg))
    assert I.equals(ideal([golden.OP_LHS, golden.OP_RHS], alg))


def test_json_roundtrip():
    I = ideal(golden.ANN_G, MVX)
    assert LeftIdeal.from_json(I.to_json()).equals(I)


# --- properties ------------------------------------------------------------

ALG = OreAlgebra(qshift("N"), der("x"))


@st.composite
def small_ops(draw):
    terms = {}
    for mono in [(1, 0), (0, 1), (0, 0)]:
        if mono != (0, 0) and not draw(st.booleans()):
            continue
        c = ZERO_RF()
        for k, v in enumerate(("x", "N")):
            c = c + draw(st.integers(-2, 2)) * var(v) ** draw(st.integers(0, 1))
        c = c + draw(st.integers(-2, 2))
        if not c.is_zero():
            terms[mono] = c
    if not any(sum(m) for m in terms):
        terms[(1, 0)] = RationalFunction(1)
    return OrePolynomial(ALG, terms)


GB = settings(max_examples=40, deadline=None)


@GB
@given(st.lists(small_ops(), min_size=1, max_size=2))
def test_spolys_reduce_to_zero(gens):
    G = groebner_basis(gens)
    for i in range(len(G)):
        for j in range(i + 1, len(G)):
            assert ore_reduce(spoly(G[i], G[j]), G).remainder.is_zero()


@GB
@given(st.lists(small_ops(), min_size=1, max_size=2))
def test_inputs_reduce_to_zero(gens):
    I = LeftIdeal(gens, ALG)
    for g in gens:
        assert I.normal_form(g).is_zero()


@GB
@given(st.lists(small_ops(), min_size=1, max_size=2), small_ops(), small_ops())
def test_normal_form_idempotent_and_linear(gens, P, R):
    I = LeftIdeal(gens, ALG)
    nf = I.normal_form(P)
    assert I.normal_form(nf) == nf
    c = var("x") + 3
    assert I.normal_form(P.scale(c) + R) == I.normal_form(P).scale(c) + I.normal_form(R)
