"""Left Gröbner bases, normal forms and holonomic rank."""

from __future__ import annotations

import itertools
import math
from typing import Iterable, Sequence

from .ore import OreAlgebra, OreError, OrePolynomial, _divides, _msub, ore_reduce

__all__ = [
    "LeftIdeal",
    "groebner_basis",
    "normal_form",
    "rank",
    "staircase",
    "spoly",
]


def _lcm(u, v):
    return tuple(max(a, b) for a, b in zip(u, v))


def spoly(f: OrePolynomial, g: OrePolynomial) -> OrePolynomial:
    """Left S-polynomial: cancel the leading terms of d^a*f and d^b*g."""
    w = _lcm(f.lm(), g.lm())
    a = f.left_mul_mono(_msub(w, f.lm()))
    b = g.left_mul_mono(_msub(w, g.lm()))
    return a.scale(a.terms[w].inverse()) - b.scale(b.terms[w].inverse())


def _interreduce(G: list[OrePolynomial]) -> list[OrePolynomial]:
    G = [g.monic() for g in G if not g.is_zero()]
    # drop elements whose leading monomial is divisible by another one
    G.sort(key=lambda g: OreAlgebra.key(g.lm()))
    keep: list[OrePolynomial] = []
    for g in G:
        if not any(_divides(h.lm(), g.lm()) for h in keep):
            keep.append(g)
    out = []
    for i, g in enumerate(keep):
        others = keep[:i] + keep[i + 1:]
        if others:
            r = ore_reduce(g, others).remainder
        else:
            r = g
        out.append(r.monic())
    out.sort(key=lambda g: OreAlgebra.key(g.lm()))
    return out


def groebner_basis(gens: Sequence[OrePolynomial] | "LeftIdeal", max_pairs: int | None = None) -> list[OrePolynomial]:
    """Reduced left Gröbner basis (Buchberger with the chain criterion).

    The classical product criterion is not used: it is unsound when
    coefficients do not commute with the generators.
    """
    if isinstance(gens, LeftIdeal):
        gens = gens.gens
    gens = [g for g in gens if not g.is_zero()]
    if not gens:
        raise OreError("empty generator list")
    alg = gens[0].algebra
    for g in gens:
        if g.algebra != alg:
            raise OreError("generators live in different algebras")
    G: list[OrePolynomial] = []
    pairs: set[tuple[int, int]] = set()

    def add(h: OrePolynomial):
        h = h.monic()
        n = len(G)
        G.append(h)
        for i in range(n):
            if G[i] is not None:
                pairs.add((i, n))

    for g in gens:
        if g.is_scalar():
            return [alg.one()]
        add(g)

    done = 0
    while pairs:
        i, j = min(pairs, key=lambda p: (OreAlgebra.key(_lcm(G[p[0]].lm(), G[p[1]].lm())), p))
        pairs.discard((i, j))
        if G[i] is None or G[j] is None:
            continue
        w = _lcm(G[i].lm(), G[j].lm())
        # chain criterion
        skip = False
        for k, gk in enumerate(G):
            if gk is None or k in (i, j):
                continue
            if _divides(gk.lm(), w) and (min(i, k), max(i, k)) not in pairs and (min(j, k), max(j, k)) not in pairs:
                skip = True
                break
        if skip:
            continue
        live = [g for g in G if g is not None]
        r = ore_reduce(spoly(G[i], G[j]), live).remainder
        done += 1
        if max_pairs is not None and done > max_pairs:
            raise OreError("Gröbner basis pair limit exceeded")
        if r.is_zero():
            continue
        if r.is_scalar():
            return [alg.one()]
        add(r)
    return _interreduce([g for g in G if g is not None])


class LeftIdeal:
    """Left ideal in an Ore algebra, with a lazily computed reduced Gröbner basis."""

    def __init__(self, gens: Iterable[OrePolynomial], algebra: OreAlgebra | None = None, is_gb: bool = False):
        gens = [g for g in gens]
        if algebra is None:
            if not gens:
                raise OreError("cannot infer the algebra of an empty ideal")
            algebra = gens[0].algebra
        self.algebra = algebra
        for g in gens:
            if g.algebra != algebra:
                raise OreError("generators live in different algebras")
        self.gens = [g for g in gens if not g.is_zero()]
        self._gb = list(self.gens) if is_gb else None
        self._staircase = None

    def __iter__(self):
        return iter(self.gens)

    def __len__(self):
        return len(self.gens)

    @property
    def gb(self) -> list[OrePolynomial]:
        if self._gb is None:
            self._gb = groebner_basis(self.gens)
        return self._gb

    def groebner(self) -> "LeftIdeal":
        return LeftIdeal(self.gb, self.algebra, is_gb=True)

    def leading_monomials(self) -> list[tuple[int, ...]]:
        return [g.lm() for g in self.gb]

    def normal_form(self, P: OrePolynomial) -> OrePolynomial:
        return ore_reduce(P, self.gb).remainder

    def contains(self, P: OrePolynomial) -> bool:
        return P.is_zero() or self.normal_form(P).is_zero()

    def is_unit(self) -> bool:
        return any(g.is_scalar() for g in self.gb)

    def is_dfinite(self) -> bool:
        n = self.algebra.nvars
        lms = self.leading_monomials()
        for i in range(n):
            if not any(m[i] > 0 and all(m[j] == 0 for j in range(n) if j != i) for m in lms):
                return False
        return True

    def staircase(self) -> list[tuple[int, ...]] | None:
        """Standard monomials in increasing order, ``None`` if infinite."""
        if self._staircase is not None:
            return self._staircase
        if self.is_unit():
            self._staircase = []
            return []
        if not self.is_dfinite():
            return None
        n = self.algebra.nvars
        lms = self.leading_monomials()
        bounds = []
        for i in range(n):
            bounds.append(min(m[i] for m in lms if m[i] > 0 and all(m[j] == 0 for j in range(n) if j != i)))
        out = []
        for mono in itertools.product(*[range(b) for b in bounds]):
            if not any(_divides(m, mono) for m in lms):
                out.append(tuple(mono))
        out.sort(key=OreAlgebra.key)
        self._staircase = out
        return out

    def rank(self) -> float | int:
        st = self.staircase()
        return math.inf if st is None else len(st)

    def equals(self, other: "LeftIdeal") -> bool:
        """Ideal equality by mutual reduction."""
        if other.algebra != self.algebra:
            return False
        return all(self.contains(g) for g in other.gens) and all(other.contains(g) for g in self.gens)

    def __eq__(self, other):
        if not isinstance(other, LeftIdeal):
            return NotImplemented
        return self.equals(other)

    __hash__ = None

    def __str__(self):
        return "{" + ", ".join(str(g) for g in self.gens) + "}"

    __repr__ = __str__

    def to_json(self):
        return {
            "algebra": self.algebra.to_json(),
            "gens": [g.to_json() for g in self.gens],
            "is_gb": self._gb is not None and self._gb == self.gens,
        }

    @classmethod
    def from_json(cls, data):
        alg = OreAlgebra.from_json(data["algebra"])
        gens = [OrePolynomial.from_json(g, alg) for g in data["gens"]]
        return cls(gens, alg, is_gb=data.get("is_gb", False))


def normal_form(P: OrePolynomial, ideal: LeftIdeal | Sequence[OrePolynomial]) -> OrePolynomial:
    if not isinstance(ideal, LeftIdeal):
        ideal = LeftIdeal(ideal)
    return ideal.normal_form(P)


def rank(ideal: LeftIdeal | Sequence[OrePolynomial]):
    if not isinstance(ideal, LeftIdeal):
        ideal = LeftIdeal(ideal)
    return ideal.rank()


def staircase(ideal: LeftIdeal | Sequence[OrePolynomial]):
    if not isinstance(ideal, LeftIdeal):
        ideal = LeftIdeal(ideal)
    return ideal.staircase()
