from hypothesis import given, settings
from hypothesis import strategies as st

from qholo.closure import (
    ClosureError,
    annihilator,
    dfinite_apply,
    dfinite_plus,
    dfinite_substitute,
    dfinite_times,
    lclm_check,
)
from qholo.field import RationalFunction
from qholo.groebner import LeftIdeal
from qholo.ore import OreAlgebra, qshift
from qholo.parser import parse_operator, parse_term
from qholo.series import HyperSum, check_annihilation, expand_sum

import golden

MVW = OreAlgebra(qshift("M"), qshift("V"), qshift("w"))
VW = OreAlgebra(qshift("V"), qshift("w"))
AN = OreAlgebra(qshift("N"))
AW = OreAlgebra(qshift("w"))


def ideal(texts, alg):
    return LeftIdeal([parse_operator(t, alg) for t in texts], alg)


def rank_bounds_plus(I, J, out):
    assert out.rank() <= I.rank() + J.rank()


def rank_bounds_times(I, J, out):
    assert out.rank() <= I.rank() * J.rank()


def test_annihilator_h1():
    got = annihilator(parse_term("i^m*(1-q^(v+m))"), MVW.gens)
    assert got.equals(ideal(golden.ANN_H1, MVW))


def test_annihilator_quarter_exponent_uses_minimal_step():
    got = annihilator(parse_term("q^(m^2/4)"), [qshift("M")])
    assert [str(g) for g in got.gens] == ["S(M;q)^2 - q*M"]


def test_annihilator_kills_the_term():
    t = parse_term(golden.QGEGENBAUER, ["k"])
    for g in annihilator(t, [qshift("M"), qshift("V"), qshift("K")]).gens:
        assert t.operator_factor(g).is_zero()


def test_plus_of_shifted_bessel_relations():
    got = dfinite_plus(ideal([golden.OP1_RHS], AN), ideal([golden.OP2_RHS], AN))
    assert got.equals(ideal([golden.OP_RHS], AN))
    rank_bounds_plus(ideal([golden.OP1_RHS], AN), ideal([golden.OP2_RHS], AN), got)


def test_plus_cos_sin_gives_same_operator():
    c = ideal([golden.ANN_COS], AW)
    got = dfinite_plus(c, c)
    assert got.equals(ideal([golden.ANN_LHS], AW))


def test_times_h1_h2():
    I, J = ideal(golden.ANN_H1, MVW), ideal(golden.ANN_H2, MVW)
    got = dfinite_times(I, J)
    assert got.equals(ideal(golden.ANN_H1H2, MVW))
    rank_bounds_times(I, J, got)
    t = parse_term("i^m*(1-q^(v+m))*q^(m^2/4)")
    for g in got.gb:
        assert t.operator_factor(g).is_zero()


def test_times_geometric_squares():
    I = ideal(["S(N;q)-q"], AN)
    assert [str(g) for g in dfinite_times(I, I).gb] == ["S(N;q) - q^2"]


def test_annSmnd_pipeline():
    h1h2 = ideal(golden.ANN_H1H2, MVW)
    bess = dfinite_substitute(ideal(golden.ANN_QBESSEL, MVW), {"v": "v+m"})
    assert bess.rank() <= ideal(golden.ANN_QBESSEL, MVW).rank()
    smnd = dfinite_times(h1h2, bess, ideal(golden.ANN_QGEGENBAUER, MVW))
    assert sorted(smnd.leading_monomials()) == sorted([(0, 0, 2), (0, 2, 0), (2, 0, 0)])
    assert smnd.rank() == 8


def test_annRHS_from_prefactor():
    pre = annihilator(parse_term(golden.IZ_PREFACTOR), VW.gens)
    assert all(sum(g.lm()) == 1 for g in pre.gb)
    got = dfinite_times(pre, ideal(golden.ANN_SUM_RHS, VW))
    assert got.equals(ideal(golden.ANN_RHS, VW))


def test_substitute_identity():
    I = ideal(golden.ANN_H1, MVW)
    assert dfinite_substitute(I, {"v": "v"}).equals(I)


def test_substitute_geometric_shift():
    I = ideal(["S(N;q)-q"], AN)
    assert dfinite_substitute(I, {"n": "n+2"}).equals(I)


def test_substitute_bessel_annihilates_shifted_term():
    bess = dfinite_substitute(ideal(golden.ANN_QBESSEL, MVW), {"v": "v+m"})
    hs = HyperSum(parse_term(golden.QBESSEL2.replace("v", "(v+m)"), ["n"]), [("n", 0, None)])
    s = expand_sum(hs, "w", 10)
    assert check_annihilation([g for g in bess.gb if g.degree(qshift("V")) == 0], s)


def test_apply_operator_closure():
    I = ideal(["S(N;q)-q"], AN)
    out = dfinite_apply(I, parse_operator("S(N;q)+1", AN))
    assert out.equals(I)


def test_apply_killing_operator_gives_unit_ideal():
    I = ideal(["S(N;q)-q"], AN)
    assert dfinite_apply(I, parse_operator("S(N;q)-q", AN)).is_unit()


def test_lclm_check():
    assert lclm_check(ideal([golden.OP_RHS], AN), parse_operator(golden.OP_LHS, AN))
    assert not lclm_check(ideal([golden.OP_LHS], AN), parse_operator(golden.OP_RHS, AN))
    assert lclm_check(ideal([golden.OP_LHS], AN), AN.one())


def test_algebra_mismatch_rejected():
    try:
        dfinite_plus(ideal(["S(N;q)-1"], AN), ideal(["S(w;q)-1"], AW))
    except ClosureError:
        return
    raise AssertionError("mismatched algebras accepted")


def test_closure_sum_annihilates_series():
    hs_c = HyperSum(parse_term(golden.COS_SUMMAND, ["j"]), [("j", 0, None)], parse_term(golden.COS_PREFACTOR))
    hs_s = HyperSum(parse_term(golden.SIN_SUMMAND, ["j"]), [("j", 0, None)], parse_term(golden.SIN_PREFACTOR))
    spec = {"p": RationalFunction(1) / 5}
    s = expand_sum(hs_c, "w", 12, spec) + expand_sum(hs_s, "w", 12, spec)
    ann = dfinite_plus(ideal([golden.ANN_COS], AW), ideal([golden.ANN_COS], AW))
    assert check_annihilation(ann, s)


# --- rank bounds on random first-order q-hypergeometric data -------------


@st.composite
def first_order_ideals(draw):
    """Annihilator of a random q-hypergeometric sequence in n (rank 1) or a rank-2 sum."""
    a, b, c = (draw(st.integers(-2, 2)) for _ in range(3))
    op = parse_operator(f"S(N;q) - ({a}*N + q^{abs(b)})/(N + {c or 1})".replace("+ -", "- "), AN)
    return LeftIdeal([op], AN)


@settings(max_examples=25, deadline=None)
@given(first_order_ideals(), first_order_ideals(), first_order_ideals())
def test_rank_bounds(I, J, K):
    P = dfinite_plus(I, J)
    assert P.rank() <= I.rank() + J.rank()
    T = dfinite_times(P, K)
    assert T.rank() <= P.rank() * K.rank()
    S = dfinite_substitute(P, {"n": "2*n+1"})
    assert S.rank() <= P.rank()
    sq = dfinite_times(P, P)
    r = P.rank()
    assert sq.rank() <= r * (r + 1) // 2
