"""Concrete functions and operators used by the worked examples.

Everything is stored as parser input so the definitions stay readable; the
accessors parse on demand.  ``V = q^v``, ``N = q^n``, ``M = q^m`` and
``cos(theta) = (A + 1/A)/2``.
"""

from __future__ import annotations

from functools import lru_cache

from .groebner import LeftIdeal
from .ore import OreAlgebra, qshift, shift, der
from .parser import parse_operator, parse_rf, parse_term
from .series import HyperSum, TruncatedSeries, expand_sum

__all__ = ["TERMS", "OPERATORS", "term", "operator", "algebra", "eq_series", "iz_sum", "iz_rhs_series"]

TERMS = {
    # summand of J^(1)_v(x; q)
    "qbessel1": "qpoch(q^(v+1);q) * (-1)^n * (x/2)^(v+2*n) / (qpoch(q;q)*qpoch(q;q;n)*qpoch(q^(v+1);q;n))",
    # the same with v -> v + n and summation index j
    "qbessel1_shifted": (
        "q^(n*v+n*(n-1)/2) * qpoch(q^(v+n+1);q) * (-1)^j * (x/2)^(v+n+2*j)"
        " / (qpoch(q;q;j)*qpoch(q^(v+n+1);q;j))"
    ),
    # summand of the q-Lommel generating function
    "lommel_gf": "(-2*x*t*V)^j * qpoch(-t/(2*x);q;j) / qpoch(2*x*t;q;j+1) * q^(j*(j-1)/2)",
    "gegenbauer_f": "poch(2*v;m)/fact(m) * poch(-m;k)*poch(m+2*v;k)/(poch(v+1/2;k)*fact(k)) * ((1-x)/2)^k",
    "gegenbauer_g": "poch(v;k)*poch(v;m-k)/(fact(k)*fact(m-k)) * A^(m-2*k)",
    "cos_prefactor": "qpoch(-w^2;q^2)/qpoch(-q*w^2;q^2)",
    "cos_summand": "qpoch(-q*A^2;q^2;j)*qpoch(-q/A^2;q^2;j)/(qpoch(q;q^2;j)*qpoch(q^2;q^2;j)) * (-w^2)^j",
    "sin_prefactor": "i*qpoch(-w^2;q^2)*2*q^(1/4)*w/(qpoch(-q*w^2;q^2)*(1-q)) * (A+1/A)/2",
    "sin_summand": "qpoch(-q^2*A^2;q^2;j)*qpoch(-q^2/A^2;q^2;j)/(qpoch(q^3;q^2;j)*qpoch(q^2;q^2;j)) * (-w^2)^j",
    "qgegenbauer": "qpoch(V;q;k)*qpoch(V;q;m-k)/(qpoch(q;q;k)*qpoch(q;q;m-k)) * A^(m-2*k)",
    # summand of J^(2)_v(2w; q)
    "qbessel2": "q^((v+n)*n) * qpoch(q^(v+1);q) * (-1)^n * w^(v+2*n) / (qpoch(q;q)*qpoch(q;q;n)*qpoch(q^(v+1);q;n))",
    "h1": "i^m*(1-q^(v+m))",
    "h2": "q^(m^2/4)",
    "iz_prefactor": "qpoch(q;q)*w^(-v)/(qpoch(V;q)*qpoch(-q*w^2;q^2))",
    "iz_summand": (
        "i^m*(1-q^(v+m)) * q^(m^2/4) * q^((v+m+n)*n) * qpoch(q^(v+m+1);q) * (-1)^n * w^(v+m+2*n)"
        " / (qpoch(q;q)*qpoch(q;q;n)*qpoch(q^(v+m+1);q;n))"
        " * qpoch(V;q;k)*qpoch(V;q;m-k)/(qpoch(q;q;k)*qpoch(q;q;m-k)) * A^(m-2*k)"
    ),
}

_ALGEBRAS = {
    "V": lambda: OreAlgebra(qshift("V")),
    "N": lambda: OreAlgebra(qshift("N")),
    "w": lambda: OreAlgebra(qshift("w")),
    "MVw": lambda: OreAlgebra(qshift("M"), qshift("V"), qshift("w")),
    "Vw": lambda: OreAlgebra(qshift("V"), qshift("w")),
    "mvx": lambda: OreAlgebra(shift("m"), shift("v"), der("x")),
}

OPERATORS = {
    # second-order recurrence of J^(1) in v
    "qbessel1_v": ("V", ["S(V;q)^2 + (2*(q*V-1)/(q*V*x))*S(V;q) + 1/(q*V)"]),
    "op1_rhs": ("N", ["q^2*S(N;q)^2 + (2*N*q^(v+3)/x - 2*q^2/x)*S(N;q) + N*q^(v+2)"]),
    "op2_rhs": ("N", ["q^2*S(N;q)^2 + (2*N*q^(v+4)/x - 2*q^2/x)*S(N;q) + N*q^(v+3)"]),
    "ann_h2": ("MVw", ["S(V;q)-1", "S(w;q)-1", "S(M;q)^2-M*q"]),
    "ann_gegenbauer_g": (
        "mvx",
        [
            "2*v*S(v) - x*D(x) - m - 2*v",
            "(m+1)*S(m) + (1-x^2)*D(x) - m*x - 2*v*x",
            "(x^2-1)*D(x)^2 + (2*v*x+x)*D(x) - m^2 - 2*m*v",
        ],
    ),
    "ann_sum_rhs": (
        "Vw",
        [
            "(V-1)*S(V;q) + w",
            "(-q^5*A^2*w^4-q^3*A^2*w^2-q^2*A^2*w^2-A^2)*S(w;q)^2"
            " + (-q^2*A^4*V*w^2+q*A^2*V+A^2*V-q^2*V*w^2)*S(w;q) - q*A^2*V^2",
        ],
    ),
    "ann_lhs": (
        "w",
        ["(q^2*A^2*w^2+q*A^2) + (q^2*A^4*w^2-q*A^2-A^2+q^2*w^2)*S(w;q) + (q^2*A^2*w^2+A^2)*S(w;q)^2"],
    ),
}


def algebra(name: str) -> OreAlgebra:
    return _ALGEBRAS[name]()


@lru_cache(maxsize=None)
def term(name: str):
    return parse_term(TERMS[name])


def operator(name: str):
    """First operator of a catalog entry."""
    return ideal(name).gens[0]


@lru_cache(maxsize=None)
def ideal(name: str) -> LeftIdeal:
    alg_name, texts = OPERATORS[name]
    alg = algebra(alg_name)
    return LeftIdeal([parse_operator(t, alg) for t in texts], alg)


def cos_sum() -> HyperSum:
    return HyperSum(term("cos_summand"), [("j", 0, None)], term("cos_prefactor"))


def sin_sum() -> HyperSum:
    return HyperSum(term("sin_summand"), [("j", 0, None)], term("sin_prefactor"))


def eq_series(order: int, spec=None) -> TruncatedSeries:
    """``C_q + i S_q`` expanded in ``w``."""
    return expand_sum(cos_sum(), "w", order, spec) + expand_sum(sin_sum(), "w", order, spec)


def qbessel2_sum() -> HyperSum:
    return HyperSum(term("qbessel2"), [("n", 0, None)])


def iz_sum(prefactor: bool = False) -> HyperSum:
    """Right-hand side of the Ismail-Zhang expansion, as a triple sum over m, n, k."""
    pre = term("iz_prefactor") if prefactor else None
    return HyperSum(term("iz_summand"), [("m", 0, None), ("n", 0, None), ("k", 0, "m")], pre)


def iz_rhs_series(order: int, spec=None) -> TruncatedSeries:
    return expand_sum(iz_sum(True), "w", order, spec)


def lommel_gf_sum() -> HyperSum:
    return HyperSum(term("lommel_gf"), [("j", 0, None)])


def rf(text: str):
    return parse_rf(text)
