"""Structural q-hypergeometric terms.

A :class:`QHyperTerm` is a product of factors

* ``Rat(r)``             a rational function
* ``Power(b, L)``        ``b^L`` with ``L`` integer-linear in discrete variables
* ``QExp(Qf)``           ``q^Qf`` with ``Qf`` a quadratic form in discrete variables
* ``QPoch(a, e, L)``     ``(a; p^e)_L``, ``L`` linear or ``None`` for infinity
* ``Poch(a, L)``         rising factorial ``(a)_L``

each raised to an integer multiplicity.  Shift quotients are computed per
factor and are always rational functions when the term is (q-)hypergeometric
in the requested direction.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

from .field import VARS, FieldError, P, Q, RationalFunction, ONE_RF, ZERO_RF

__all__ = [
    "NotHypergeometric",
    "Linear",
    "Quadratic",
    "Rat",
    "Power",
    "QExp",
    "QPoch",
    "Poch",
    "QHyperTerm",
    "qpoch_finite",
    "poch_finite",
    "qpow",
]


class NotHypergeometric(ValueError):
    pass


def _frac(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


# ---------------------------------------------------------------------------
# linear and quadratic forms in discrete variables
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Linear:
    coeffs: tuple[tuple[str, Fraction], ...] = ()
    const: Fraction = Fraction(0)

    @classmethod
    def make(cls, coeffs: Mapping[str, object] | None = None, const=0) -> "Linear":
        items = tuple(sorted((k, _frac(v)) for k, v in (coeffs or {}).items() if _frac(v) != 0))
        return cls(items, _frac(const))

    @classmethod
    def constant(cls, c) -> "Linear":
        return cls((), _frac(c))

    @classmethod
    def var(cls, name: str) -> "Linear":
        return cls(((name, Fraction(1)),), Fraction(0))

    def as_dict(self) -> dict[str, Fraction]:
        return dict(self.coeffs)

    def coeff(self, name: str) -> Fraction:
        return self.as_dict().get(name, Fraction(0))

    def variables(self) -> set[str]:
        return {k for k, _ in self.coeffs}

    def is_constant(self) -> bool:
        return not self.coeffs

    def __add__(self, other):
        other = other if isinstance(other, Linear) else Linear.constant(other)
        d = self.as_dict()
        for k, v in other.coeffs:
            d[k] = d.get(k, Fraction(0)) + v
        return Linear.make(d, self.const + other.const)

    __radd__ = __add__

    def __neg__(self):
        return Linear.make({k: -v for k, v in self.coeffs}, -self.const)

    def __sub__(self, other):
        other = other if isinstance(other, Linear) else Linear.constant(other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c) -> "Linear":
        c = _frac(c)
        return Linear.make({k: v * c for k, v in self.coeffs}, self.const * c)

    def shifted(self, name: str, c: int) -> "Linear":
        return self + self.coeff(name) * c

    def evaluate(self, values: Mapping[str, int]) -> Fraction:
        return self.const + sum((v * values[k] for k, v in self.coeffs), Fraction(0))

    def substitute(self, mapping: Mapping[str, "Linear"]) -> "Linear":
        out = Linear.constant(self.const)
        for k, v in self.coeffs:
            out = out + (mapping[k].scale(v) if k in mapping else Linear.make({k: v}))
        return out

    def is_integral(self) -> bool:
        return self.const.denominator == 1 and all(v.denominator == 1 for _, v in self.coeffs)

    def to_rf(self) -> RationalFunction:
        out = RationalFunction.constant(self.const)
        for k, v in self.coeffs:
            out = out + RationalFunction.var(k) * v
        return out

    def __str__(self):
        parts = []
        for k, v in self.coeffs:
            if v == 1:
                parts.append(("+", k))
            elif v == -1:
                parts.append(("-", k))
            else:
                parts.append(("-" if v < 0 else "+", f"{abs(v)}*{k}" if abs(v).denominator == 1 else f"({abs(v)})*{k}"))
        if self.const or not parts:
            c = self.const
            parts.append(("-" if c < 0 else "+", str(abs(c)) if c.denominator == 1 else f"({abs(c)})"))
        out = ("-" if parts[0][0] == "-" else "") + parts[0][1]
        for s, b in parts[1:]:
            out += f"{s}{b}"
        return out


@dataclass(frozen=True)
class Quadratic:
    """Quadratic form: monomials are sorted tuples of variable names (length <= 2)."""

    terms: tuple[tuple[tuple[str, ...], Fraction], ...] = ()

    @classmethod
    def make(cls, d: Mapping[tuple[str, ...], object]) -> "Quadratic":
        items = tuple(sorted((tuple(sorted(k)), _frac(v)) for k, v in d.items() if _frac(v) != 0))
        merged: dict = {}
        for k, v in items:
            merged[k] = merged.get(k, Fraction(0)) + v
        return cls(tuple(sorted((k, v) for k, v in merged.items() if v != 0)))

    @classmethod
    def from_linear(cls, L: Linear) -> "Quadratic":
        d = {(k,): v for k, v in L.coeffs}
        d[()] = L.const
        return cls.make(d)

    def as_dict(self):
        return dict(self.terms)

    def degree(self) -> int:
        return max((len(k) for k, _ in self.terms), default=0)

    def linear_part(self) -> Linear:
        if self.degree() > 1:
            raise ValueError("not linear")
        d = self.as_dict()
        return Linear.make({k[0]: v for k, v in d.items() if len(k) == 1}, d.get((), 0))

    def __add__(self, other: "Quadratic") -> "Quadratic":
        d = self.as_dict()
        for k, v in other.terms:
            d[k] = d.get(k, Fraction(0)) + v
        return Quadratic.make(d)

    def scale(self, c) -> "Quadratic":
        return Quadratic.make({k: v * _frac(c) for k, v in self.terms})

    def __mul__(self, other: "Quadratic") -> "Quadratic":
        d: dict = {}
        for k1, v1 in self.terms:
            for k2, v2 in other.terms:
                k = tuple(sorted(k1 + k2))
                if len(k) > 2:
                    raise ValueError("exponent of degree > 2")
                d[k] = d.get(k, Fraction(0)) + v1 * v2
        return Quadratic.make(d)

    def variables(self) -> set[str]:
        return {x for k, _ in self.terms for x in k}

    def difference(self, name: str, c: int) -> Linear:
        """``Qf(name+c) - Qf(name)`` as a linear form."""
        lin: dict = {}
        const = Fraction(0)
        for k, v in self.terms:
            cnt = k.count(name)
            if cnt == 0:
                continue
            if len(k) == 1:
                const += v * c
            elif cnt == 2:
                # (x+c)^2 - x^2 = 2cx + c^2
                lin[name] = lin.get(name, Fraction(0)) + 2 * c * v
                const += v * c * c
            else:
                other = k[0] if k[1] == name else k[1]
                lin[other] = lin.get(other, Fraction(0)) + c * v
        return Linear.make(lin, const)

    def evaluate(self, values: Mapping[str, int]) -> Fraction:
        total = Fraction(0)
        for k, v in self.terms:
            t = v
            for x in k:
                t *= values[x]
            total += t
        return total

    def substitute(self, mapping: Mapping[str, Linear]) -> "Quadratic":
        out = Quadratic()
        for k, v in self.terms:
            t = Quadratic.make({(): v})
            for x in k:
                t = t * Quadratic.from_linear(mapping.get(x, Linear.var(x)))
            out = out + t
        return out

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for k, v in self.terms:
            mono = "*".join(k)
            mag = abs(v)
            cs = str(mag) if mag.denominator == 1 else f"({mag})"
            if mono:
                body = mono if mag == 1 else f"{cs}*{mono}"
            else:
                body = cs
            parts.append(("-" if v < 0 else "+", body))
        out = ("-" if parts[0][0] == "-" else "") + parts[0][1]
        for s, b in parts[1:]:
            out += f"{s}{b}"
        return out


def qpow(L: Linear, e: int = 4) -> RationalFunction:
    """``(p^e)^L`` expressed with qpower variables; raises if not rational."""
    num = L.const * e
    if num.denominator != 1:
        raise NotHypergeometric(f"non-integral power of p in q^({L})")
    out = P ** int(num)
    for name, c in L.coeffs:
        big = VARS.qpower_of(name)
        if big is None:
            raise NotHypergeometric(f"no qpower variable for {name}")
        k = c * e / 4
        if k.denominator != 1:
            raise NotHypergeometric(f"q^({L}) is not a monomial in qpower variables")
        out = out * RationalFunction.var(big) ** int(k)
    return out


def qpoch_finite(z: RationalFunction, Qb: RationalFunction, h: int) -> RationalFunction:
    """Generalized ``(z; Qb)_h`` for any integer ``h``."""
    out = ONE_RF()
    if h >= 0:
        f = z
        for _ in range(h):
            out = out * (1 - f)
            f = f * Qb
        return out
    f = z / Qb
    for _ in range(-h):
        out = out * (1 - f)
        f = f / Qb
    return out.inverse()


def poch_finite(z: RationalFunction, h: int) -> RationalFunction:
    out = ONE_RF()
    if h >= 0:
        for j in range(h):
            out = out * (z + j)
        return out
    for j in range(1, -h + 1):
        out = out * (z - j)
    return out.inverse()


def _p_exponent(ratio: RationalFunction) -> int | None:
    if ratio.is_one():
        return 0
    return ratio.p_power()


# ---------------------------------------------------------------------------
# factors
# ---------------------------------------------------------------------------


class Factor:
    mult: int = 1

    def ratio(self, gen, c: int) -> RationalFunction:
        raise NotImplementedError

    def logder(self, gen) -> RationalFunction:
        raise NotImplementedError

    def evaluate(self, values: Mapping[str, int]) -> RationalFunction:
        raise NotImplementedError

    def discrete_vars(self) -> set[str]:
        return set()

    def coefficient_vars(self) -> set[str]:
        return set()


def _sigma(gen, a: RationalFunction, c: int) -> RationalFunction:
    return gen.sigma(a, c)


def _disc(gen) -> str | None:
    return gen.discrete()


def _rf_at(a: RationalFunction, values: Mapping[str, int]) -> RationalFunction:
    sub = {}
    for d, v in values.items():
        big = VARS.qpower_of(d)
        if big is not None and not a.free_of(big):
            sub[big] = Q ** v if v >= 0 else (Q ** (-v)).inverse()
        if d in VARS and not a.free_of(d):
            sub[d] = RationalFunction(v)
    return a.substitute(sub) if sub else a


@dataclass(frozen=True)
class Rat(Factor):
    r: RationalFunction

    def ratio(self, gen, c):
        if gen.kind == "derivation":
            raise NotHypergeometric("use logder")
        return _sigma(gen, self.r, c) / self.r

    def logder(self, gen):
        return self.r.derivative(gen.target) / self.r

    def evaluate(self, values):
        return _rf_at(self.r, values)

    def coefficient_vars(self):
        return self.r.variables()

    def __eq__(self, other):
        return isinstance(other, Rat) and self.r == other.r

    def __hash__(self):
        return hash(("Rat", self.r))

    def __str__(self):
        return f"({self.r})"


@dataclass(frozen=True, eq=False)
class Power(Factor):
    base: RationalFunction
    exp: Linear
    mult: int = 1

    def _expo(self) -> Linear:
        return self.exp.scale(self.mult)

    def ratio(self, gen, c):
        L = self._expo()
        d = _disc(gen)
        out = ONE_RF()
        new_base = self.base
        if gen.kind != "derivation":
            new_base = _sigma(gen, self.base, c)
        if new_base != self.base:
            s = _p_exponent(new_base / self.base)
            if s is None:
                raise NotHypergeometric(f"base {self.base} of a symbolic power moves under {gen}")
            out = qpow(L, s)
        if d is not None:
            k = L.coeff(d) * c
            if k.denominator != 1:
                raise NotHypergeometric("fractional exponent step")
            out = out * new_base ** int(k)
        return out

    def logder(self, gen):
        if self.base.free_of(gen.target):
            return ZERO_RF()
        return self._expo().to_rf() * self.base.derivative(gen.target) / self.base

    def evaluate(self, values):
        e = self._expo().evaluate(values)
        if e.denominator != 1:
            raise NotHypergeometric("fractional power at evaluation")
        return _rf_at(self.base, values) ** int(e)

    def discrete_vars(self):
        return self.exp.variables()

    def coefficient_vars(self):
        return self.base.variables()

    def __eq__(self, other):
        return isinstance(other, Power) and (self.base, self.exp, self.mult) == (other.base, other.exp, other.mult)

    def __hash__(self):
        return hash(("Power", self.base, self.exp, self.mult))

    def __str__(self):
        e = str(self._expo())
        return f"({self.base})^({e})"


@dataclass(frozen=True)
class QExp(Factor):
    form: Quadratic

    def ratio(self, gen, c):
        d = _disc(gen)
        if d is None or d not in self.form.variables():
            return ONE_RF()
        if gen.kind != "qshift":
            raise NotHypergeometric("q-power exponent under an ordinary shift")
        return qpow(self.form.difference(d, c), 4)

    def logder(self, gen):
        return ZERO_RF()

    def evaluate(self, values):
        e = self.form.evaluate(values) * 4
        if e.denominator != 1:
            raise NotHypergeometric("fractional power of p at evaluation")
        e = int(e)
        return P ** e if e >= 0 else (P ** (-e)).inverse()

    def discrete_vars(self):
        return self.form.variables()

    def __str__(self):
        return f"q^({self.form})"


@dataclass(frozen=True, eq=False)
class QPoch(Factor):
    a: RationalFunction
    e: int = 4
    length: Linear | None = None
    mult: int = 1

    @property
    def base(self) -> RationalFunction:
        return P ** self.e

    def ratio(self, gen, c):
        d = _disc(gen)
        new_a = _sigma(gen, self.a, c) if gen.kind != "derivation" else self.a
        if new_a == self.a:
            alpha = 0
        else:
            s = _p_exponent(new_a / self.a)
            if s is None or s % self.e:
                raise NotHypergeometric(f"({self.a};q)_ moves by a non-power under {gen}")
            alpha = s // self.e
        Qb = self.base
        if self.length is None:
            out = qpoch_finite(self.a, Qb, alpha).inverse()
        else:
            dl = self.length.coeff(d) * c if d is not None else Fraction(0)
            if dl.denominator != 1:
                raise NotHypergeometric("fractional length step")
            if alpha == 0 and dl == 0:
                return ONE_RF()
            start = self.a * qpow(self.length, self.e)
            out = qpoch_finite(start, Qb, alpha + int(dl)) / qpoch_finite(self.a, Qb, alpha)
        return out ** self.mult

    def logder(self, gen):
        if self.a.free_of(gen.target):
            return ZERO_RF()
        raise NotHypergeometric("derivative of a q-Pochhammer symbol is not rational")

    def evaluate(self, values):
        if self.length is None:
            raise NotHypergeometric("infinite product at evaluation")
        L = self.length.evaluate(values)
        if L.denominator != 1:
            raise NotHypergeometric("fractional length")
        return qpoch_finite(_rf_at(self.a, values), self.base, int(L)) ** self.mult

    def discrete_vars(self):
        return self.length.variables() if self.length is not None else set()

    def coefficient_vars(self):
        return self.a.variables()

    def __eq__(self, other):
        return isinstance(other, QPoch) and (self.a, self.e, self.length, self.mult) == (
            other.a,
            other.e,
            other.length,
            other.mult,
        )

    def __hash__(self):
        return hash(("QPoch", self.a, self.e, self.length, self.mult))

    def base_str(self) -> str:
        if self.e % 4 == 0:
            k = self.e // 4
            return "q" if k == 1 else f"q^{k}"
        return str(self.base)

    def __str__(self):
        inner = f"{self.a};{self.base_str()}" + ("" if self.length is None else f";{self.length}")
        s = f"qpoch({inner})"
        return s if self.mult == 1 else f"{s}^({self.mult})"


@dataclass(frozen=True, eq=False)
class Poch(Factor):
    a: RationalFunction
    length: Linear
    mult: int = 1

    def ratio(self, gen, c):
        d = _disc(gen)
        new_a = _sigma(gen, self.a, c) if gen.kind != "derivation" else self.a
        diff = new_a - self.a
        if diff.is_zero():
            alpha = 0
        else:
            if not diff.is_constant():
                raise NotHypergeometric("Pochhammer argument moves by a non-integer")
            g = diff.constant_value()
            if not g.is_real() or g.re.denominator != 1:
                raise NotHypergeometric("Pochhammer argument moves by a non-integer")
            alpha = int(g.re)
        dl = self.length.coeff(d) * c if d is not None else Fraction(0)
        if dl.denominator != 1:
            raise NotHypergeometric("fractional length step")
        if alpha == 0 and dl == 0:
            return ONE_RF()
        start = self.a + self.length.to_rf()
        return (poch_finite(start, alpha + int(dl)) / poch_finite(self.a, alpha)) ** self.mult

    def logder(self, gen):
        if self.a.free_of(gen.target) and gen.target not in self.length.variables():
            return ZERO_RF()
        raise NotHypergeometric("derivative of a Pochhammer symbol is not rational")

    def evaluate(self, values):
        L = self.length.evaluate(values)
        if L.denominator != 1:
            raise NotHypergeometric("fractional length")
        return poch_finite(_rf_at(self.a, values), int(L)) ** self.mult

    def discrete_vars(self):
        return self.length.variables()

    def coefficient_vars(self):
        return self.a.variables()

    def __eq__(self, other):
        return isinstance(other, Poch) and (self.a, self.length, self.mult) == (other.a, other.length, other.mult)

    def __hash__(self):
        return hash(("Poch", self.a, self.length, self.mult))

    def __str__(self):
        if self.a.is_one():
            s = f"fact({self.length})"
        else:
            s = f"poch({self.a};{self.length})"
        return s if self.mult == 1 else f"{s}^({self.mult})"


# ---------------------------------------------------------------------------
# terms
# ---------------------------------------------------------------------------


class QHyperTerm:
    """Immutable product of factors with a leading rational coefficient."""

    __slots__ = ("coeff", "factors")

    def __init__(self, factors: Iterable[Factor] = (), coeff: RationalFunction | None = None):
        c = ONE_RF() if coeff is None else RationalFunction.constant(coeff)
        qform = Quadratic()
        rest: list[Factor] = []
        for f in factors:
            if isinstance(f, Power) and f.mult != 1:
                f = Power(f.base, f.exp.scale(f.mult))
            if isinstance(f, Rat):
                c = c * f.r
            elif isinstance(f, QExp):
                qform = qform + f.form
            elif isinstance(f, (Power, QPoch, Poch)) and f.mult == 0:
                continue
            elif isinstance(f, Power) and f.exp.is_constant():
                e = f.exp.const * f.mult
                if e.denominator != 1:
                    raise FieldError("fractional constant power")
                c = c * f.base ** int(e)
            elif isinstance(f, QPoch) and f.length is not None and f.length.is_constant():
                c = c * f.evaluate({})
            elif isinstance(f, Poch) and f.length.is_constant():
                c = c * f.evaluate({})
            else:
                rest.append(f)
        if qform.terms:
            if qform.degree() <= 1:
                try:
                    c = c * qpow(qform.linear_part(), 4)
                    qform = Quadratic()
                except NotHypergeometric:
                    pass
            if qform.terms:
                rest.insert(0, QExp(qform))
        if c.is_zero():
            raise FieldError("zero term")
        self.coeff = c
        self.factors = tuple(rest)

    # algebra ---------------------------------------------------------------
    def __mul__(self, other):
        if isinstance(other, QHyperTerm):
            return QHyperTerm(self.factors + other.factors, self.coeff * other.coeff)
        return QHyperTerm(self.factors, self.coeff * RationalFunction.constant(other))

    __rmul__ = __mul__

    def inverse(self) -> "QHyperTerm":
        inv = []
        for f in self.factors:
            inv.append(_power_factor(f, -1))
        return QHyperTerm(inv, self.coeff.inverse())

    def __truediv__(self, other):
        if isinstance(other, QHyperTerm):
            return self * other.inverse()
        return QHyperTerm(self.factors, self.coeff / RationalFunction.constant(other))

    def __rtruediv__(self, other):
        return self.inverse() * other

    def __pow__(self, n: int):
        return QHyperTerm([_power_factor(f, n) for f in self.factors], self.coeff ** n)

    def __eq__(self, other):
        return isinstance(other, QHyperTerm) and self.coeff == other.coeff and self.factors == other.factors

    def __hash__(self):
        return hash(str(self))

    # queries ---------------------------------------------------------------
    def discrete_vars(self) -> set[str]:
        out = set()
        for f in self.factors:
            out |= f.discrete_vars()
        return out

    def coefficient_vars(self) -> set[str]:
        out = set(self.coeff.variables())
        for f in self.factors:
            out |= f.coefficient_vars()
        return out

    def ratio(self, gen, c: int = 1) -> RationalFunction:
        """``term(sigma_gen^c) / term`` as a rational function."""
        if gen.kind in ("derivation", "qderivation"):
            raise NotHypergeometric(f"{gen} is not a shift")
        out = gen.sigma(self.coeff, c) / self.coeff
        for f in self.factors:
            r = f.ratio(gen, c)
            out = out * r
        return out

    def logder(self, gen) -> RationalFunction:
        if gen.kind != "derivation":
            raise NotHypergeometric(f"{gen} is not a derivation")
        out = self.coeff.derivative(gen.target) / self.coeff
        for f in self.factors:
            out = out + f.logder(gen)
        return out

    def minimal_step(self, gen, max_step: int = 4) -> tuple[int, RationalFunction]:
        if gen.kind == "derivation":
            return 1, self.logder(gen)
        last = None
        for c in range(1, max_step + 1):
            try:
                return c, self.ratio(gen, c)
            except NotHypergeometric as exc:
                last = exc
        raise NotHypergeometric(f"term is not q-hypergeometric in {gen} (steps <= {max_step}): {last}")

    def apply_operator(self, P) -> "QHyperTerm | RationalFunction":
        """``P(term)`` as a rational multiple of the term; exact zero when ``P`` kills it."""
        r = self.operator_factor(P)
        return ZERO_RF() if r.is_zero() else self * r

    def operator_factor(self, P) -> RationalFunction:
        """Rational function ``R`` with ``P(term) = R * term``."""
        alg = P.algebra
        cache: dict = {}
        total = ZERO_RF()
        for mono, c in P.terms.items():
            total = total + c * self._mono_factor(alg, mono, cache)
        return total

    def _mono_factor(self, alg, mono, cache) -> RationalFunction:
        key = tuple(mono)
        if key in cache:
            return cache[key]
        shift_part = ONE_RF()
        done = [0] * len(mono)
        for i, (g, e) in enumerate(zip(alg.gens, mono)):
            if e and g.kind in ("qshift", "shift"):
                r = self.ratio(g, e)
                # apply the shifts already performed to the new ratio
                for j, ej in enumerate(done):
                    if ej:
                        r = alg.gens[j].sigma(r, ej)
                shift_part = shift_part * r
                done[i] = e
        out = shift_part
        for i, (g, e) in enumerate(zip(alg.gens, mono)):
            if e and g.kind == "derivation":
                ell = self.logder(g)
                for j, ej in enumerate(done):
                    if ej:
                        ell = alg.gens[j].sigma(ell, ej)
                for _ in range(e):
                    out = out.derivative(g.target) + out * ell
            elif e and g.kind == "qderivation":
                raise NotHypergeometric("q-derivatives of terms are not supported")
        cache[key] = out
        return out

    def evaluate(self, values: Mapping[str, int]) -> RationalFunction:
        """Specialize all discrete variables to integers."""
        out = _rf_at(self.coeff, values)
        for f in self.factors:
            out = out * f.evaluate(values)
        return out

    def substitute_coeffs(self, mapping: Mapping[str, RationalFunction]) -> "QHyperTerm":
        fs = []
        for f in self.factors:
            if isinstance(f, Power):
                fs.append(Power(f.base.substitute(mapping), f.exp, f.mult))
            elif isinstance(f, QPoch):
                fs.append(QPoch(f.a.substitute(mapping), f.e, f.length, f.mult))
            elif isinstance(f, Poch):
                fs.append(Poch(f.a.substitute(mapping), f.length, f.mult))
            else:
                fs.append(f)
        return QHyperTerm(fs, self.coeff.substitute(mapping))

    def substitute_discrete(self, mapping: Mapping[str, Linear]) -> "QHyperTerm":
        """Integer-linear substitution of discrete variables (``v -> v + m``)."""
        rf_map = {}
        for d, L in mapping.items():
            big = VARS.qpower_of(d)
            if big is not None:
                rf_map[big] = qpow(L, 4)
            if d in VARS:
                rf_map[d] = L.to_rf()
        fs = []
        for f in self.factors:
            if isinstance(f, Power):
                fs.append(Power(f.base.substitute(rf_map), f.exp.substitute(mapping), f.mult))
            elif isinstance(f, QPoch):
                fs.append(
                    QPoch(
                        f.a.substitute(rf_map),
                        f.e,
                        None if f.length is None else f.length.substitute(mapping),
                        f.mult,
                    )
                )
            elif isinstance(f, Poch):
                fs.append(Poch(f.a.substitute(rf_map), f.length.substitute(mapping), f.mult))
            elif isinstance(f, QExp):
                fs.append(QExp(f.form.substitute(mapping)))
            else:
                fs.append(f)
        return QHyperTerm(fs, self.coeff.substitute(rf_map))

    def __str__(self):
        parts = []
        if not self.coeff.is_one() or not self.factors:
            parts.append(f"({self.coeff})")
        for f in self.factors:
            parts.append(str(f))
        return "*".join(parts)

    def __repr__(self):
        return f"QHyperTerm({self})"


def _power_factor(f: Factor, n: int) -> Factor:
    if isinstance(f, Power):
        return Power(f.base, f.exp.scale(f.mult * n))
    if isinstance(f, QPoch):
        return QPoch(f.a, f.e, f.length, f.mult * n)
    if isinstance(f, Poch):
        return Poch(f.a, f.length, f.mult * n)
    if isinstance(f, QExp):
        return QExp(f.form.scale(n))
    if isinstance(f, Rat):
        return Rat(f.r ** n)
    raise TypeError(f)
