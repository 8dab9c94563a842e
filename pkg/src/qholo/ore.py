"""Ore algebras, Ore polynomials and left reduction."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
import math
from typing import Iterable, Mapping, Sequence

from .field import (
    VARS,
    FieldError,
    Q,
    RationalFunction,
    ZERO_RF,
    ONE_RF,
)

__all__ = [
    "OreError",
    "OreGenerator",
    "OreAlgebra",
    "OrePolynomial",
    "qshift",
    "shift",
    "der",
    "qder",
    "ore_times",
    "ore_apply",
    "ore_reduce",
    "ReductionResult",
    "lommel_polys",
]

KINDS = ("qshift", "shift", "derivation", "qderivation")


class OreError(ValueError):
    pass


@dataclass(frozen=True)
class OreGenerator:
    """One operator symbol acting on a single coefficient variable.

    ``qshift``      var -> q*var
    ``shift``       var -> var + 1
    ``derivation``  d/dvar
    ``qderivation`` Jackson derivative in var (sigma: var -> q*var)
    """

    kind: str
    target: str

    def __post_init__(self):
        if self.kind not in KINDS:
            raise OreError(f"unknown generator kind {self.kind!r}")
        VARS.ensure(self.target)

    @property
    def symbol(self) -> str:
        if self.kind == "qshift":
            return f"S({self.target};q)"
        if self.kind == "shift":
            return f"S({self.target})"
        if self.kind == "derivation":
            return f"D({self.target})"
        return f"Dq({self.target})"

    def __str__(self):
        return self.symbol

    @property
    def is_shift_like(self) -> bool:
        return self.kind in ("qshift", "shift")

    def discrete(self) -> str | None:
        """The discrete variable this qshift moves (``n`` for ``S(N;q)``)."""
        if self.kind == "qshift":
            return VARS.discrete_of(self.target)
        if self.kind == "shift":
            return self.target
        return None

    def sigma(self, a: RationalFunction, k: int = 1) -> RationalFunction:
        if k == 0 or self.kind == "derivation":
            return a
        if self.kind in ("qshift", "qderivation"):
            return a.qshift(self.target, k)
        return a.shift(self.target, k)

    def delta(self, a: RationalFunction) -> RationalFunction:
        if self.kind == "derivation":
            return a.derivative(self.target)
        if self.kind == "qderivation":
            if a.free_of(self.target):
                return ZERO_RF()
            w = RationalFunction.var(self.target)
            return (a.qshift(self.target) - a) / ((Q - 1) * w)
        return ZERO_RF()

    def to_json(self):
        return {"kind": self.kind, "target": self.target}

    @classmethod
    def from_json(cls, data):
        return cls(data["kind"], data["target"])


def qshift(target: str) -> OreGenerator:
    return OreGenerator("qshift", target)


def shift(target: str) -> OreGenerator:
    return OreGenerator("shift", target)


def der(target: str) -> OreGenerator:
    return OreGenerator("derivation", target)


def qder(target: str) -> OreGenerator:
    return OreGenerator("qderivation", target)


@dataclass(frozen=True)
class OreAlgebra:
    """Commuting operator generators over the global coefficient field.

    Monomials are ordered graded-lexicographically; ties in total degree are
    broken by the exponent of ``gens[0]`` first, then ``gens[1]`` and so on.
    """

    gens: tuple[OreGenerator, ...]

    def __init__(self, *gens):
        if len(gens) == 1 and not isinstance(gens[0], OreGenerator):
            gens = tuple(gens[0])
        object.__setattr__(self, "gens", tuple(gens))
        targets = [g.target for g in self.gens]
        if len(set(targets)) != len(targets):
            raise OreError("generator targets must be distinct")
        if not self.gens:
            raise OreError("an Ore algebra needs at least one generator")

    def __len__(self):
        return len(self.gens)

    @property
    def nvars(self) -> int:
        return len(self.gens)

    def index(self, gen: OreGenerator | str) -> int:
        for i, g in enumerate(self.gens):
            if g == gen or g.symbol == gen or g.target == gen:
                return i
        raise OreError(f"{gen} is not a generator of {self}")

    def __contains__(self, gen) -> bool:
        try:
            self.index(gen)
        except OreError:
            return False
        return True

    @staticmethod
    def key(mono: tuple[int, ...]):
        return (sum(mono), mono)

    def gen(self, i: int | str | OreGenerator) -> "OrePolynomial":
        if not isinstance(i, int):
            i = self.index(i)
        e = [0] * self.nvars
        e[i] = 1
        return OrePolynomial(self, {tuple(e): ONE_RF()})

    def one(self) -> "OrePolynomial":
        return OrePolynomial(self, {self.zero_mono: ONE_RF()})

    def zero(self) -> "OrePolynomial":
        return OrePolynomial(self, {})

    @property
    def zero_mono(self) -> tuple[int, ...]:
        return (0,) * self.nvars

    def monomial(self, mono: Sequence[int], coeff=None) -> "OrePolynomial":
        c = ONE_RF() if coeff is None else RationalFunction.constant(coeff)
        return OrePolynomial(self, {tuple(mono): c})

    def scalar(self, c) -> "OrePolynomial":
        return OrePolynomial(self, {self.zero_mono: RationalFunction.constant(c)})

    def __str__(self):
        return "OreAlgebra[" + ", ".join(g.symbol for g in self.gens) + "]"

    def to_json(self):
        return [g.to_json() for g in self.gens]

    @classmethod
    def from_json(cls, data):
        return cls(*[OreGenerator.from_json(g) for g in data])

    def sigma_mono(self, a: RationalFunction, mono: Sequence[int]) -> RationalFunction:
        """Apply the product of sigma-maps for a monomial to a coefficient."""
        for g, e in zip(self.gens, mono):
            if e:
                a = g.sigma(a, e)
        return a

    def sub_algebra(self, gens: Iterable[OreGenerator]) -> "OreAlgebra":
        return OreAlgebra(*gens)


def _divides(u, v) -> bool:
    return all(a <= b for a, b in zip(u, v))


def _msub(u, v):
    return tuple(b - a for a, b in zip(v, u))


def _madd(u, v):
    return tuple(a + b for a, b in zip(u, v))


class OrePolynomial:
    """Immutable element of an Ore algebra: ``sum c_u * d^u`` with coefficients on the left."""

    __slots__ = ("algebra", "terms", "_lm")

    def __init__(self, algebra: OreAlgebra, terms: Mapping[tuple, RationalFunction] | None = None):
        self.algebra = algebra
        clean = {}
        if terms:
            for mono, c in terms.items():
                if not isinstance(c, RationalFunction):
                    c = RationalFunction.constant(c)
                if not c.is_zero():
                    clean[tuple(int(e) for e in mono)] = c
        self.terms = clean
        self._lm = None

    # basic queries ------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def lm(self) -> tuple[int, ...]:
        if not self.terms:
            raise OreError("zero operator has no leading monomial")
        if self._lm is None:
            self._lm = max(self.terms, key=OreAlgebra.key)
        return self._lm

    def lc(self) -> RationalFunction:
        return self.terms[self.lm()]

    def sorted_monomials(self) -> list[tuple[int, ...]]:
        return sorted(self.terms, key=OreAlgebra.key, reverse=True)

    def degree(self, gen=None) -> int:
        if not self.terms:
            return -1
        if gen is None:
            return max(sum(m) for m in self.terms)
        i = gen if isinstance(gen, int) else self.algebra.index(gen)
        return max(m[i] for m in self.terms)

    def coefficient(self, mono) -> RationalFunction:
        return self.terms.get(tuple(mono), ZERO_RF())

    def is_scalar(self) -> bool:
        return all(not any(m) for m in self.terms)

    def involves(self, gen) -> bool:
        i = gen if isinstance(gen, int) else self.algebra.index(gen)
        return any(m[i] for m in self.terms)

    def coefficient_variables(self) -> set[str]:
        out = set()
        for c in self.terms.values():
            out |= c.variables()
        return out

    # arithmetic ----------------------------------------------------------
    def _check(self, other: "OrePolynomial"):
        if other.algebra != self.algebra:
            raise OreError(f"algebra mismatch: {self.algebra} vs {other.algebra}")

    def _coerce(self, other) -> "OrePolynomial":
        if isinstance(other, OrePolynomial):
            self._check(other)
            return other
        c = RationalFunction.constant(other) if not isinstance(other, RationalFunction) else other
        return self.algebra.scalar(c)

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            if m in out:
                s = out[m] + c
                if s.is_zero():
                    del out[m]
                else:
                    out[m] = s
            else:
                out[m] = c
        return OrePolynomial(self.algebra, out)

    __radd__ = __add__

    def __neg__(self):
        return OrePolynomial(self.algebra, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def scale(self, c) -> "OrePolynomial":
        """Left multiplication by a coefficient."""
        c = RationalFunction.constant(c)
        if c.is_zero():
            return self.algebra.zero()
        return OrePolynomial(self.algebra, {m: c * a for m, a in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, OrePolynomial):
            return ore_times(self, other)
        return ore_times(self, self._coerce(other))

    def __rmul__(self, other):
        return self._coerce(other).__mul__(self)

    __matmul__ = __mul__

    def __pow__(self, e: int):
        if e < 0:
            raise OreError("negative operator power")
        out = self.algebra.one()
        for _ in range(e):
            out = out * self
        return out

    def left_mul_gen(self, i: int) -> "OrePolynomial":
        """``gen_i * self`` via gen*a = sigma(a) gen + delta(a)."""
        g = self.algebra.gens[i]
        out: dict = {}
        for m, c in self.terms.items():
            m2 = list(m)
            m2[i] += 1
            m2 = tuple(m2)
            s = g.sigma(c)
            out[m2] = out[m2] + s if m2 in out else s
            if not g.is_shift_like:
                d = g.delta(c)
                if not d.is_zero():
                    out[m] = out[m] + d if m in out else d
        return OrePolynomial(self.algebra, out)

    def left_mul_mono(self, mono: Sequence[int]) -> "OrePolynomial":
        """``d^mono * self``."""
        alg = self.algebra
        if all(g.is_shift_like for g, e in zip(alg.gens, mono) if e):
            return OrePolynomial(
                alg, {_madd(m, mono): alg.sigma_mono(c, mono) for m, c in self.terms.items()}
            )
        out = self
        for i in reversed(range(alg.nvars)):
            for _ in range(mono[i]):
                out = out.left_mul_gen(i)
        return out

    # normalization -------------------------------------------------------
    def monic(self) -> "OrePolynomial":
        if not self.terms:
            return self
        return self.scale(self.lc().inverse())

    def primitive(self) -> "OrePolynomial":
        """Polynomial coefficients with trivial content; leading numerator coefficient positive."""
        if not self.terms:
            return self
        from .field import _lift  # local helper

        dens = [_lift(c.den) for c in self.terms.values()]
        lcm = dens[0]
        for d in dens[1:]:
            g = lcm.gcd(d)
            lcm = lcm * (d / g)
        nums = [_lift((c * RationalFunction._from_parts(lcm, lcm.context().constant(1))).num) for c in self.terms.values()]
        g = nums[0]
        for n in nums[1:]:
            g = g.gcd(n)
            if g.is_one():
                break
        scale = RationalFunction._from_parts(lcm, g)
        out = self.scale(scale)
        # clear the rational content left over by monic gcds
        coeffs = [c for P in (_lift(c.num) for c in out.terms.values()) for c in P.coeffs()]
        dl = math.lcm(*[int(c.q) for c in coeffs])
        ng = math.gcd(*[int(c.p) for c in coeffs])
        if dl != 1 or ng != 1:
            out = out.scale(RationalFunction(Fraction(dl, ng)))
        lead = _lift(out.lc().num)
        if lead.leading_coefficient() < 0:
            out = -out
        return out

    def normalized(self) -> "OrePolynomial":
        return self.monic()

    # comparison & output -------------------------------------------------
    def __eq__(self, other):
        if isinstance(other, OrePolynomial):
            return self.algebra == other.algebra and self.terms == other.terms
        try:
            return self == self._coerce(other)
        except (FieldError, OreError, TypeError):
            return NotImplemented

    def __hash__(self):
        return hash(str(self))

    def equal_up_to_unit(self, other: "OrePolynomial") -> bool:
        return self.monic() == other.monic()

    def mono_str(self, mono) -> str:
        parts = []
        for g, e in zip(self.algebra.gens, mono):
            if e == 1:
                parts.append(g.symbol)
            elif e:
                parts.append(f"{g.symbol}^{e}")
        return "*".join(parts)

    def __str__(self):
        if not self.terms:
            return "0"
        pieces = []
        for m in self.sorted_monomials():
            c = self.terms[m]
            ms = self.mono_str(m)
            cs = str(c)
            neg = False
            if cs.startswith("-") and _is_single_term(c):
                neg, cs = True, cs[1:]
            if not ms:
                body = cs if not pieces or _is_single_term(c) else f"({cs})"
            elif cs == "1":
                body = ms
            else:
                if not _is_atomic(c, cs):
                    cs = f"({cs})"
                body = f"{cs}*{ms}"
            pieces.append(("-" if neg else "+", body))
        out = ("-" if pieces[0][0] == "-" else "") + pieces[0][1]
        for sign, body in pieces[1:]:
            out += f" {sign} {body}"
        return out

    def __repr__(self):
        return f"OrePolynomial({self})"

    def to_json(self):
        return {
            "algebra": self.algebra.to_json(),
            "terms": [[list(m), c.to_json()] for m, c in sorted(self.terms.items(), key=lambda kv: OreAlgebra.key(kv[0]), reverse=True)],
        }

    @classmethod
    def from_json(cls, data, algebra: OreAlgebra | None = None):
        alg = algebra or OreAlgebra.from_json(data["algebra"])
        return cls(alg, {tuple(m): RationalFunction.from_json(c) for m, c in data["terms"]})

    def substitute(self, mapping) -> "OrePolynomial":
        """Substitute in every coefficient (generators untouched)."""
        return OrePolynomial(self.algebra, {m: c.substitute(mapping) for m, c in self.terms.items()})

    def map_coefficients(self, fn) -> "OrePolynomial":
        return OrePolynomial(self.algebra, {m: fn(c) for m, c in self.terms.items()})

    def change_algebra(self, algebra: OreAlgebra) -> "OrePolynomial":
        """Re-embed into another algebra containing all used generators."""
        idx = []
        for g in self.algebra.gens:
            idx.append(algebra.index(g) if g in algebra.gens else None)
        out = {}
        for m, c in self.terms.items():
            e = [0] * algebra.nvars
            for i, k in enumerate(m):
                if k:
                    if idx[i] is None:
                        raise OreError(f"{self.algebra.gens[i]} missing from target algebra")
                    e[idx[i]] = k
            out[tuple(e)] = c
        return OrePolynomial(algebra, out)


def _is_single_term(c: RationalFunction) -> bool:
    return c.is_polynomial() and len(c.num) == 1


def _is_atomic(c: RationalFunction, text: str) -> bool:
    return c.is_polynomial() and len(c.num) == 1


def ore_times(P: OrePolynomial, Qp: OrePolynomial) -> OrePolynomial:
    P._check(Qp)
    if not P.terms or not Qp.terms:
        return P.algebra.zero()
    alg = P.algebra
    cache: dict[tuple, OrePolynomial] = {alg.zero_mono: Qp}

    def shifted(mono):
        if mono in cache:
            return cache[mono]
        # peel one generator off the first nonzero slot
        i = next(k for k, e in enumerate(mono) if e)
        prev = list(mono)
        prev[i] -= 1
        res = shifted(tuple(prev)).left_mul_gen(i)
        cache[mono] = res
        return res

    all_shift = all(g.is_shift_like for g in alg.gens)
    out: dict = {}
    for m, a in P.terms.items():
        if all_shift:
            for v, b in Qp.terms.items():
                w = _madd(m, v)
                t = a * alg.sigma_mono(b, m)
                out[w] = out[w] + t if w in out else t
            continue
        # generators commute, so d^m = d_first^... in any order
        term = shifted(m)
        for v, b in term.terms.items():
            t = a * b
            out[v] = out[v] + t if v in out else t
    return OrePolynomial(alg, out)


@dataclass
class ReductionResult:
    remainder: OrePolynomial
    unit: RationalFunction
    cofactors: list[OrePolynomial]

    def check(self, P: OrePolynomial, G: Sequence[OrePolynomial]) -> bool:
        lhs = P.scale(self.unit)
        rhs = self.remainder
        for c, g in zip(self.cofactors, G):
            rhs = rhs + c * g
        return (lhs - rhs).is_zero()

    def __iter__(self):
        return iter((self.remainder, self.unit, self.cofactors))


def ore_reduce(
    P: OrePolynomial,
    G: Sequence[OrePolynomial],
    extended: bool = False,
    fraction_free: bool = False,
    full: bool = True,
) -> ReductionResult:
    """Left reduction of ``P`` modulo ``G``.

    Returns ``(remainder, unit, cofactors)`` with
    ``unit*P = sum cofactors[i]*G[i] + remainder``.  With ``fraction_free`` the
    unit clears all denominators of remainder and cofactors.
    """
    G = [g for g in G]
    if not G:
        raise OreError("reduction needs at least one operator")
    for g in G:
        P._check(g)
    alg = P.algebra
    live = [(i, g) for i, g in enumerate(G) if not g.is_zero()]
    lms = [(i, g.lm()) for i, g in live]
    cache: dict[tuple[int, tuple], OrePolynomial] = {}
    cof_terms: list[dict] = [dict() for _ in G]
    rem: dict = {}
    cur = dict(P.terms)
    while cur:
        lm = max(cur, key=OreAlgebra.key)
        c = cur[lm]
        for i, glm in lms:
            if _divides(glm, lm):
                break
        else:
            rem[lm] = c
            del cur[lm]
            if not full:
                rem.update(cur)
                cur = {}
            continue
        u = _msub(lm, glm)
        key = (i, u)
        mg = cache.get(key)
        if mg is None:
            mg = G[i].left_mul_mono(u)
            cache[key] = mg
        f = c / mg.terms[lm]
        for m, a in mg.terms.items():
            t = f * a
            if m in cur:
                s = cur[m] - t
                if s.is_zero():
                    del cur[m]
                else:
                    cur[m] = s
            else:
                cur[m] = -t
        cur.pop(lm, None)
        if extended:
            ct = cof_terms[i]
            ct[u] = ct[u] + f if u in ct else f
    remainder = OrePolynomial(alg, rem)
    cofactors = [OrePolynomial(alg, ct) for ct in cof_terms]
    unit = ONE_RF()
    if fraction_free:
        from .field import _lift

        dens = [c.den for c in remainder.terms.values()]
        for cf in cofactors:
            dens += [c.den for c in cf.terms.values()]
        if dens:
            lcm = _lift(dens[0])
            for d in dens[1:]:
                d = _lift(d)
                lcm = lcm * (d / lcm.gcd(d))
            unit = RationalFunction._from_parts(lcm, lcm.context().constant(1))
            remainder = remainder.scale(unit)
            cofactors = [cf.scale(unit) for cf in cofactors]
    return ReductionResult(remainder, unit, cofactors)


def ore_apply(P: OrePolynomial, f):
    """Apply an operator to a :class:`~qholo.hyperterm.QHyperTerm` or a truncated series."""
    from .hyperterm import QHyperTerm
    from .series import TruncatedSeries, apply_operator

    if isinstance(f, TruncatedSeries):
        return apply_operator(P, f)
    if isinstance(f, QHyperTerm):
        return f.apply_operator(P)
    raise OreError(f"cannot apply operators to {type(f).__name__}")


def lommel_polys(op: OrePolynomial, count: int) -> list[RationalFunction]:
    """Iterate a second-order recurrence in ``S(V;q)`` by operator reduction.

    Entry ``i`` is the leading coefficient of the reduction of
    ``q^(i(i-1)/2) V^(i-1) S^i`` modulo ``op`` with ``x -> 1/x``, followed by
    ``V -> V/q``.
    """
    if count < 1:
        raise OreError("count must be at least 1")
    alg = op.algebra
    i_gen = alg.index("V")
    x = RationalFunction.var("x")
    V = RationalFunction.var("V")
    red = op.substitute({"x": x.inverse()})
    out = []
    for i in range(1, count + 1):
        mono = [0] * alg.nvars
        mono[i_gen] = i
        lhs = alg.monomial(mono, Q ** (i * (i - 1) // 2) * V ** (i - 1))
        res = ore_reduce(lhs, [red]).remainder
        lead = res.lc() if not res.is_zero() else ZERO_RF()
        out.append(lead.substitute({"V": V / Q}))
    return out
