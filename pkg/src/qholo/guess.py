"""Guessing q-recurrences from the first terms of a sequence."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence

from .field import VARS, Q, RationalFunction, ZERO_RF
from .genfun import QRecurrence
from .linalg import nullspace
from .ore import OreAlgebra, OrePolynomial, qshift

__all__ = ["GuessProblem", "GuessResult", "qre_guess", "WARNING_TEXT"]

log = logging.getLogger(__name__)

WARNING_TEXT = "Not enough data. The result might be wrong."


@dataclass(frozen=True)
class GuessProblem:
    """Ansatz shape for ``sum_{i<=r, j<=d} c_ij q^(jn) s[n+i] = 0``."""

    length: int
    order: int
    degree: int
    margin: int = 2

    @property
    def unknowns(self) -> int:
        return (self.order + 1) * (self.degree + 1)

    @property
    def equations(self) -> int:
        return self.length - self.order

    @property
    def enough_data(self) -> bool:
        # one unknown is absorbed by normalization
        return self.equations >= self.unknowns - 1 + self.margin


@dataclass
class GuessResult:
    recurrence: QRecurrence
    warning: bool
    problem: GuessProblem

    @property
    def message(self) -> str | None:
        return WARNING_TEXT if self.warning else None

    def __iter__(self):
        yield self.recurrence
        yield self.warning

    def __str__(self):
        text = str(self.recurrence)
        return f"{text}  [{WARNING_TEXT}]" if self.warning else text


def _shapes(maxorder: int, maxdegree: int):
    for total in range(maxorder + maxdegree + 1):
        for r in range(1, maxorder + 1):
            d = total - r
            if 0 <= d <= maxdegree:
                yield r, d


def qre_guess(
    data: Sequence,
    maxorder: int = 2,
    maxdegree: int = 2,
    margin: int = 2,
    seq: str = "s",
    index: str = "n",
) -> GuessResult | None:
    """Smallest recurrence (order ``r``, degree ``d`` in ``q^n``) fitting ``data``.

    Shapes are tried by increasing ``r + d`` and then ``r``.  A shape is
    accepted when the linear system determines the coefficients up to a
    common factor.  Returns ``None`` when nothing fits.
    """
    vals = [RationalFunction.constant(v) if not isinstance(v, RationalFunction) else v for v in data]
    L = len(vals)
    if L < 3:
        raise ValueError("at least three terms are needed")
    big = VARS.qpower_of(index)
    if big is None:
        raise ValueError(f"{index} has no q-power companion")
    for r, d in _shapes(maxorder, maxdegree):
        prob = GuessProblem(L, r, d, margin)
        if prob.equations < prob.unknowns - 1:
            continue
        rows = []
        for n in range(prob.equations):
            qn = Q ** n
            row = []
            for i in range(r + 1):
                for j in range(d + 1):
                    row.append(qn ** j * vals[n + i])
            rows.append(row)
        ker = nullspace(rows, prob.unknowns)
        if len(ker) != 1:
            continue
        vec = ker[0]
        Nv = RationalFunction.var(big)
        terms = {}
        for i in range(r + 1):
            c = ZERO_RF()
            for j in range(d + 1):
                c = c + vec[i * (d + 1) + j] * Nv ** j
            if not c.is_zero():
                terms[(i,)] = c
        if (r,) not in terms or (0,) not in terms:
            # a shorter recurrence is hidden inside this shape
            continue
        op = OrePolynomial(OreAlgebra(qshift(big)), terms).primitive()
        rec = QRecurrence(op, vals[:r], seq, index)
        warn = not prob.enough_data
        if warn:
            log.warning(WARNING_TEXT)
        return GuessResult(rec, warn, prob)
    return None
