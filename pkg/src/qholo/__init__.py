"""Exact algorithms for q-holonomic functions and their annihilating ideals."""

from .closure import annihilator, dfinite_apply, dfinite_plus, dfinite_substitute, dfinite_times
from .field import MultiPoly, RationalFunction
from .genfun import QDifferentialEquation, QRecurrence, QShiftEquation, qre2se, qse2de, qse2re
from .groebner import LeftIdeal, groebner_basis, normal_form
from .guess import qre_guess
from .hyperterm import QHyperTerm
from .ore import OreAlgebra, OreGenerator, OrePolynomial, der, ore_reduce, ore_times, qder, qshift, shift
from .parser import parse_expression, parse_operator, parse_rf, parse_term
from .series import TruncatedSeries, check_annihilation, expand_sum, expand_term
from .telescope import ct_ansatz, ct_hyper, qgosper, qzeilberger

__version__ = "0.1.0"

__all__ = [
    "LeftIdeal",
    "MultiPoly",
    "OreAlgebra",
    "OreGenerator",
    "OrePolynomial",
    "QDifferentialEquation",
    "QHyperTerm",
    "QRecurrence",
    "QShiftEquation",
    "RationalFunction",
    "TruncatedSeries",
    "annihilator",
    "check_annihilation",
    "ct_ansatz",
    "ct_hyper",
    "der",
    "dfinite_apply",
    "dfinite_plus",
    "dfinite_substitute",
    "dfinite_times",
    "expand_sum",
    "expand_term",
    "groebner_basis",
    "normal_form",
    "ore_reduce",
    "ore_times",
    "parse_expression",
    "parse_operator",
    "parse_rf",
    "parse_term",
    "qder",
    "qgosper",
    "qre2se",
    "qse2de",
    "qse2re",
    "qre_guess",
    "qshift",
    "qzeilberger",
    "shift",
]
