"""Hypothesis strategies shared by the property suites."""

from fractions import Fraction

from hypothesis import strategies as st

from qholo.field import RationalFunction, ZERO_RF
from qholo.ore import OreAlgebra, OrePolynomial, der, qshift

VARNAMES = ("q", "x", "N")

small_int = st.integers(min_value=-3, max_value=3)
small_frac = st.builds(Fraction, st.integers(-4, 4), st.integers(1, 3))


@st.composite
def polys(draw, names=VARNAMES, max_terms=3, max_deg=2):
    n = draw(st.integers(1, max_terms))
    out = ZERO_RF()
    for _ in range(n):
        c = draw(small_frac)
        mono = RationalFunction.constant(c)
        for v in names:
            e = draw(st.integers(0, max_deg))
            if e:
                mono = mono * RationalFunction.var(v) ** e
        out = out + mono
    return out


@st.composite
def rfs(draw, names=VARNAMES, nonzero=False):
    num = draw(polys(names))
    if nonzero and num.is_zero():
        num = RationalFunction.constant(1)
    den = draw(polys(names))
    if den.is_zero():
        den = RationalFunction.constant(1)
    return num / den


def mixed_algebra() -> OreAlgebra:
    return OreAlgebra(qshift("N"), der("x"))


@st.composite
def operators(draw, algebra=None, max_deg=2, max_terms=3):
    alg = algebra or mixed_algebra()
    n = draw(st.integers(1, max_terms))
    terms = {}
    for _ in range(n):
        mono = tuple(draw(st.integers(0, max_deg)) for _ in range(alg.nvars))
        c = draw(rfs())
        if not c.is_zero():
            terms[mono] = terms.get(mono, ZERO_RF()) + c
    terms = {k: v for k, v in terms.items() if not v.is_zero()}
    return OrePolynomial(alg, terms)
