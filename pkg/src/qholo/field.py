"""Exact coefficient arithmetic.

Every operator coefficient in qholo is a :class:`RationalFunction` over the
Gaussian rationals ``Q(i)`` in a growing set of named variables.  Polynomials
are backed by FLINT's ``fmpq_mpoly``; the imaginary unit is carried as a
hidden polynomial variable that is reduced modulo ``i^2 + 1`` after every
product.  Denominators are kept free of ``i`` (multiply by the conjugate), which
together with a gcd over ``Q`` and a monic denominator yields a canonical form,
so equality is structural.

The symbol ``p`` is always present and ``q`` is *defined* as ``p**4``; this
makes quarter powers such as ``q^(1/4)`` and ``q^(m^2/4)`` exact.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

import flint

__all__ = [
    "FieldError",
    "PoleError",
    "VarTable",
    "VARS",
    "GaussianRational",
    "MultiPoly",
    "RationalFunction",
    "RF",
    "var",
    "const",
    "I",
    "P",
    "Q",
    "ZERO",
    "ONE",
]

IMAG = "_i"
_ORDERING = "deglex"


class FieldError(ArithmeticError):
    pass


class PoleError(FieldError, ZeroDivisionError):
    pass


# ---------------------------------------------------------------------------
# variable table
# ---------------------------------------------------------------------------


class VarTable:
    """Ordered registry of coefficient variables.

    Each entry is ``plain`` or ``qpower``.  A qpower variable stands for
    ``q^d`` of a discrete variable ``d``; e.g. ``N`` for ``q^n``.  Entries are
    append-only, the kind of a name never changes.
    """

    def __init__(self):
        self._lock = threading.RLock()
        self._names: list[str] = [IMAG]
        self._kind: dict[str, str] = {IMAG: "plain"}
        self._discrete_of: dict[str, str] = {}
        self._qpower_of: dict[str, str] = {}
        self._ctx = flint.fmpq_mpoly_ctx.get(tuple(self._names), _ORDERING)

    @property
    def ctx(self):
        return self._ctx

    def names(self) -> tuple[str, ...]:
        return tuple(n for n in self._names if n != IMAG)

    def __contains__(self, name: str) -> bool:
        return name in self._kind

    def kind(self, name: str) -> str:
        return self._kind[name]

    def add(self, name: str, kind: str = "plain", discrete: str | None = None) -> str:
        if not name.isidentifier() or name == IMAG:
            raise FieldError(f"invalid variable name {name!r}")
        if name == "q":
            raise FieldError("q is not a variable; it stands for p^4")
        with self._lock:
            if name in self._kind:
                if self._kind[name] != kind or (kind == "qpower" and self._discrete_of.get(name) != discrete):
                    raise FieldError(f"variable {name!r} already declared as {self._kind[name]}")
                return name
            if kind == "qpower":
                if discrete is None:
                    raise FieldError("qpower variables need a discrete variable")
                if discrete in self._qpower_of:
                    raise FieldError(f"discrete variable {discrete!r} already has qpower {self._qpower_of[discrete]!r}")
                self._discrete_of[name] = discrete
                self._qpower_of[discrete] = name
            elif kind != "plain":
                raise FieldError(f"unknown variable kind {kind!r}")
            self._kind[name] = kind
            self._names.append(name)
            self._ctx = flint.fmpq_mpoly_ctx.get(tuple(self._names), _ORDERING)
            return name

    def ensure(self, name: str) -> str:
        if name not in self._kind:
            self.add(name)
        return name

    def qpower_of(self, discrete: str) -> str | None:
        return self._qpower_of.get(discrete)

    def discrete_of(self, name: str) -> str | None:
        return self._discrete_of.get(name)

    def discrete_names(self) -> tuple[str, ...]:
        return tuple(self._qpower_of)


VARS = VarTable()
VARS.add("p")
for _name in ("x", "t", "A", "w"):
    VARS.add(_name)
for _big, _small in (("N", "n"), ("V", "v"), ("M", "m"), ("K", "k"), ("J", "j")):
    VARS.add(_big, "qpower", _small)
for _small in ("n", "v", "m", "k", "j"):
    VARS.add(_small)


def _ctx():
    return VARS._ctx


def _lift(poly):
    ctx = VARS._ctx
    if poly.context() is ctx:
        return poly
    return poly.project_to_context(ctx)


def _index(name: str) -> int:
    return VARS._names.index(name)


# ---------------------------------------------------------------------------
# Gaussian rationals
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GaussianRational:
    re: Fraction = Fraction(0)
    im: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "re", Fraction(self.re))
        object.__setattr__(self, "im", Fraction(self.im))

    @classmethod
    def coerce(cls, value) -> "GaussianRational":
        if isinstance(value, GaussianRational):
            return value
        if isinstance(value, complex):
            return cls(Fraction(value.real), Fraction(value.imag))
        if isinstance(value, flint.fmpq):
            return cls(Fraction(int(value.p), int(value.q)))
        return cls(Fraction(value))

    def __add__(self, other):
        o = GaussianRational.coerce(other)
        return GaussianRational(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __sub__(self, other):
        return self + (-GaussianRational.coerce(other))

    def __rsub__(self, other):
        return GaussianRational.coerce(other) - self

    def __mul__(self, other):
        o = GaussianRational.coerce(other)
        return GaussianRational(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def conjugate(self):
        return GaussianRational(self.re, -self.im)

    def __truediv__(self, other):
        o = GaussianRational.coerce(other)
        n = o.re * o.re + o.im * o.im
        if n == 0:
            raise ZeroDivisionError("division by zero")
        z = self * o.conjugate()
        return GaussianRational(z.re / n, z.im / n)

    def __rtruediv__(self, other):
        return GaussianRational.coerce(other) / self

    def __pow__(self, e: int):
        if e < 0:
            return GaussianRational(1) / (self ** -e)
        out, base = GaussianRational(1), self
        while e:
            if e & 1:
                out = out * base
            base = base * base
            e >>= 1
        return out

    def __eq__(self, other):
        try:
            o = GaussianRational.coerce(other)
        except (TypeError, ValueError):
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def is_real(self) -> bool:
        return self.im == 0

    def __str__(self):
        if self.im == 0:
            return str(self.re)
        if self.re == 0:
            return f"{self.im}*i"
        return f"({self.re} + {self.im}*i)"

    __repr__ = __str__


# ---------------------------------------------------------------------------
# helpers on raw flint polynomials
# ---------------------------------------------------------------------------


def _fmpq(c) -> flint.fmpq:
    if isinstance(c, flint.fmpq):
        return c
    c = Fraction(c)
    return flint.fmpq(c.numerator, c.denominator)


def _to_fraction(c) -> Fraction:
    return Fraction(int(c.p), int(c.q))


def _has_imag(poly) -> bool:
    return poly.degrees()[0] > 0


def _reduce_imag(poly):
    """Reduce modulo i^2 + 1 (the imaginary unit is variable 0)."""
    deg = poly.degrees()[0]
    if deg < 2:
        return poly
    out: dict = {}
    for exps, c in poly.to_dict().items():
        e0 = exps[0]
        sign = -1 if (e0 // 2) % 2 else 1
        key = (e0 % 2,) + exps[1:]
        out[key] = out.get(key, 0) + sign * c
    return poly.context().from_dict({k: v for k, v in out.items() if v != 0})


def _split_imag(poly):
    """Return (real part, imaginary part) of a polynomial reduced mod i^2+1."""
    if not _has_imag(poly):
        return poly, poly.context().constant(0)
    re: dict = {}
    im: dict = {}
    for exps, c in poly.to_dict().items():
        key = (0,) + exps[1:]
        (im if exps[0] else re)[key] = c
    ctx = poly.context()
    return ctx.from_dict(re), ctx.from_dict(im)


def _conjugate(poly):
    if not _has_imag(poly):
        return poly
    out = {}
    for exps, c in poly.to_dict().items():
        out[exps] = -c if exps[0] else c
    return poly.context().from_dict(out)


def _normalize(num, den):
    ctx = VARS._ctx
    if num.context() is not ctx:
        num = num.project_to_context(ctx)
    if den.context() is not ctx:
        den = den.project_to_context(ctx)
    if den.is_zero():
        raise PoleError("zero denominator")
    if num.is_zero():
        return ctx.constant(0), ctx.constant(1)
    if _has_imag(den):
        den = _reduce_imag(den)
        if _has_imag(den):
            cj = _conjugate(den)
            num = num * cj
            den = _reduce_imag(den * cj)
    if _has_imag(num):
        num = _reduce_imag(num)
        if num.is_zero():
            return ctx.constant(0), ctx.constant(1)
    if not den.is_constant():
        g = num.gcd(den)
        if not g.is_one():
            num = num / g
            den = den / g
    lc = den.leading_coefficient()
    if lc != 1:
        num = num / lc
        den = den / lc
    return num, den


def _poly_str(poly) -> str:
    """Canonical text of a polynomial (p-powers folded into q where possible)."""
    if poly.is_zero():
        return "0"
    names = VARS._names
    ctx_names = poly.context().names()
    pieces = []
    for exps, c in poly.terms():
        c = _to_fraction(c)
        factors = []
        for idx, e in enumerate(exps):
            if not e:
                continue
            name = ctx_names[idx]
            if name == IMAG:
                factors.append("i")
            elif name == "p":
                qe, pe = divmod(e, 4)
                if qe:
                    factors.append("q" if qe == 1 else f"q^{qe}")
                if pe:
                    factors.append("p" if pe == 1 else f"p^{pe}")
            else:
                factors.append(name if e == 1 else f"{name}^{e}")
        mag = abs(c)
        coeff = "" if (mag == 1 and factors) else str(mag)
        body = "*".join(([coeff] if coeff else []) + factors)
        pieces.append(("-" if c < 0 else "+", body))
    del names
    first_sign, first = pieces[0]
    out = ("-" if first_sign == "-" else "") + first
    for sign, body in pieces[1:]:
        out += f" {sign} {body}"
    return out


# ---------------------------------------------------------------------------
# polynomials
# ---------------------------------------------------------------------------


class MultiPoly:
    """Immutable multivariate polynomial over Q(i)."""

    __slots__ = ("_p",)

    def __init__(self, poly=None):
        if poly is None:
            poly = _ctx().constant(0)
        self._p = _reduce_imag(_lift(poly))

    @classmethod
    def from_terms(cls, terms: Mapping[tuple, object], names: Iterable[str]) -> "MultiPoly":
        names = list(names)
        for n in names:
            VARS.ensure(n)
        ctx = _ctx()
        idx = [_index(n) for n in names]
        out = {}
        for exps, c in terms.items():
            g = GaussianRational.coerce(c)
            base = [0] * ctx.nvars()
            for i, e in zip(idx, exps):
                base[i] += int(e)
            if g.re:
                out[tuple(base)] = out.get(tuple(base), 0) + _fmpq(g.re)
            if g.im:
                b2 = list(base)
                b2[0] += 1
                out[tuple(b2)] = out.get(tuple(b2), 0) + _fmpq(g.im)
        return cls(ctx.from_dict({k: v for k, v in out.items() if v != 0}))

    @property
    def raw(self):
        return _lift(self._p)

    def terms(self) -> dict[tuple[tuple[str, int], ...], GaussianRational]:
        """Map from sparse exponent tuples ``((name, e), ...)`` to coefficients."""
        out: dict = {}
        names = self._p.context().names()
        for exps, c in self._p.terms():
            key = tuple((names[i], e) for i, e in enumerate(exps) if e and i)
            val = GaussianRational(0, _to_fraction(c)) if exps[0] else GaussianRational(_to_fraction(c))
            out[key] = out.get(key, GaussianRational()) + val
        return out

    def is_zero(self) -> bool:
        return self._p.is_zero()

    def degree(self, name: str) -> int:
        if name not in VARS:
            return 0
        return _lift(self._p).degrees()[_index(name)]

    def total_degree(self) -> int:
        return int(self._p.total_degree())

    def __add__(self, other):
        return MultiPoly(self.raw + _as_mpoly(other).raw)

    def __sub__(self, other):
        return MultiPoly(self.raw - _as_mpoly(other).raw)

    def __mul__(self, other):
        return MultiPoly(self.raw * _as_mpoly(other).raw)

    __radd__ = __add__
    __rmul__ = __mul__

    def __neg__(self):
        return MultiPoly(-self._p)

    def __pow__(self, e: int):
        return MultiPoly(self._p ** e)

    def __eq__(self, other):
        if not isinstance(other, (MultiPoly, int, Fraction, GaussianRational)):
            return NotImplemented
        return self.raw == _as_mpoly(other).raw

    def __hash__(self):
        return hash(str(self))

    def __str__(self):
        return _poly_str(self._p)

    def __repr__(self):
        return f"MultiPoly({self})"

    def to_rf(self) -> "RationalFunction":
        return RationalFunction._from_parts(self.raw, _ctx().constant(1))

    def to_json(self):
        return _poly_json(self._p)


def _as_mpoly(x) -> MultiPoly:
    if isinstance(x, MultiPoly):
        return x
    if isinstance(x, RationalFunction):
        if not x.is_polynomial():
            raise FieldError("not a polynomial")
        return MultiPoly(x.num)
    return RationalFunction.constant(x).as_multipoly()


def _poly_json(poly):
    poly = _lift(poly)
    names = list(poly.context().names())
    terms = []
    reals: dict = {}
    for exps, c in poly.terms():
        key = (0,) + tuple(exps[1:])
        slot = reals.setdefault(key, [Fraction(0), Fraction(0)])
        slot[1 if exps[0] else 0] += _to_fraction(c)
    for key, (re, im) in reals.items():
        sparse = {names[i]: int(e) for i, e in enumerate(key) if e}
        terms.append([sparse, str(re), str(im)])
    return terms


def _poly_from_json(terms):
    ctx_terms = {}
    for sparse, re, im in terms:
        exps = tuple(sorted(sparse.items()))
        ctx_terms[exps] = GaussianRational(Fraction(re), Fraction(im))
    names = sorted({n for exps in ctx_terms for n, _ in exps})
    for n in names:
        VARS.ensure(n)
    ctx = _ctx()
    out = {}
    for exps, g in ctx_terms.items():
        base = [0] * ctx.nvars()
        for n, e in exps:
            base[_index(n)] = e
        if g.re:
            out[tuple(base)] = _fmpq(g.re)
        if g.im:
            b2 = list(base)
            b2[0] = 1
            out[tuple(b2)] = _fmpq(g.im)
    return ctx.from_dict(out)


# ---------------------------------------------------------------------------
# rational functions
# ---------------------------------------------------------------------------


class RationalFunction:
    """Element of Q(i)(p, vars...) in canonical form.

    ``num/den`` with ``gcd(num, den) = 1``, ``den`` free of ``i`` and with
    leading coefficient 1 in the deglex term order.  Instances are immutable.
    """

    __slots__ = ("num", "den")

    def __init__(self, value=0):
        if isinstance(value, RationalFunction):
            self.num, self.den = value.num, value.den
            return
        if isinstance(value, MultiPoly):
            self.num, self.den = value.raw, _ctx().constant(1)
            return
        g = GaussianRational.coerce(value)
        ctx = _ctx()
        num = ctx.constant(_fmpq(g.re))
        if g.im:
            num = num + ctx.gens()[0] * _fmpq(g.im)
        self.num, self.den = num, ctx.constant(1)

    @classmethod
    def _from_parts(cls, num, den) -> "RationalFunction":
        obj = cls.__new__(cls)
        obj.num, obj.den = _normalize(num, den)
        return obj

    @classmethod
    def _raw(cls, num, den) -> "RationalFunction":
        obj = cls.__new__(cls)
        obj.num, obj.den = num, den
        return obj

    # construction -----------------------------------------------------
    @classmethod
    def var(cls, name: str) -> "RationalFunction":
        if name == "q":
            return Q
        VARS.ensure(name)
        ctx = _ctx()
        return cls._raw(ctx.gens()[_index(name)], ctx.constant(1))

    @classmethod
    def constant(cls, value) -> "RationalFunction":
        if isinstance(value, RationalFunction):
            return value
        return cls(value)

    @classmethod
    def imaginary_unit(cls) -> "RationalFunction":
        ctx = _ctx()
        return cls._raw(ctx.gens()[0], ctx.constant(1))

    @classmethod
    def fraction(cls, num: MultiPoly, den: MultiPoly) -> "RationalFunction":
        return cls._from_parts(_as_mpoly(num).raw, _as_mpoly(den).raw)

    # predicates -------------------------------------------------------
    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_one(self) -> bool:
        return self.num.is_one() and self.den.is_one()

    def is_constant(self) -> bool:
        return self.num.is_constant() and self.den.is_constant()

    def is_polynomial(self) -> bool:
        return self.den.is_constant()

    def __bool__(self):
        return not self.num.is_zero()

    def constant_value(self) -> GaussianRational:
        if not self.den.is_constant():
            raise FieldError(f"{self} is not constant")
        num = _lift(self.num)
        re, im = Fraction(0), Fraction(0)
        for exps, c in num.terms():
            if any(exps[1:]):
                raise FieldError(f"{self} is not constant")
            if exps[0]:
                im += _to_fraction(c)
            else:
                re += _to_fraction(c)
        d = _to_fraction(self.den.leading_coefficient())
        return GaussianRational(re / d, im / d)

    def has_imag(self) -> bool:
        return _has_imag(self.num)

    def variables(self) -> set[str]:
        out = set()
        for poly in (self.num, self.den):
            names = poly.context().names()
            for i, d in enumerate(poly.degrees()):
                if d and i:
                    out.add(names[i])
        return out

    def free_of(self, name: str) -> bool:
        if name not in VARS:
            return True
        idx = _index(name)
        num, den = _lift(self.num), _lift(self.den)
        return num.degrees()[idx] == 0 and den.degrees()[idx] == 0

    def degree(self, name: str) -> int:
        """Degree of the numerator in ``name``."""
        if name not in VARS:
            return 0
        return _lift(self.num).degrees()[_index(name)]

    def den_degree(self, name: str) -> int:
        if name not in VARS:
            return 0
        return _lift(self.den).degrees()[_index(name)]

    def size(self) -> int:
        return len(self.num) + len(self.den)

    # arithmetic -------------------------------------------------------
    def __add__(self, other):
        if not isinstance(other, RationalFunction):
            other = _coerce(other)
            if other is None:
                return NotImplemented
        a, b, c, d = self.num, self.den, other.num, other.den
        if a.context() is not c.context() or b.context() is not d.context():
            a, b, c, d = _lift(a), _lift(b), _lift(c), _lift(d)
        if a.is_zero():
            return other
        if c.is_zero():
            return self
        if b.is_one() and d.is_one():
            num = a + c
            return RationalFunction._raw(num, b) if not num.is_zero() else RationalFunction._raw(num, b)
        if b == d:
            return RationalFunction._from_parts(a + c, b)
        g = b.gcd(d)
        if g.is_one():
            return RationalFunction._from_parts(a * d + c * b, b * d)
        b1 = b / g
        d1 = d / g
        return RationalFunction._from_parts(a * d1 + c * b1, b1 * d)

    __radd__ = __add__

    def __neg__(self):
        return RationalFunction._raw(-self.num, self.den)

    def __sub__(self, other):
        if not isinstance(other, RationalFunction):
            other = _coerce(other)
            if other is None:
                return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other):
        if not isinstance(other, RationalFunction):
            other = _coerce(other)
            if other is None:
                return NotImplemented
        a, b, c, d = self.num, self.den, other.num, other.den
        if a.context() is not c.context() or b.context() is not d.context():
            a, b, c, d = _lift(a), _lift(b), _lift(c), _lift(d)
        if a.is_zero() or c.is_zero():
            return ZERO_RF()
        if _has_imag(a) and _has_imag(c):
            return RationalFunction._from_parts(a * c, b * d)
        if b.is_one() and d.is_one():
            return RationalFunction._raw(a * c, b)
        if not d.is_one():
            g1 = a.gcd(d)
            if not g1.is_one():
                a = a / g1
                d = d / g1
        if not b.is_one():
            g2 = c.gcd(b)
            if not g2.is_one():
                c = c / g2
                b = b / g2
        den = b * d
        num = a * c
        lc = den.leading_coefficient()
        if lc != 1:
            num = num / lc
            den = den / lc
        return RationalFunction._raw(num, den)

    __rmul__ = __mul__

    def inverse(self) -> "RationalFunction":
        if self.num.is_zero():
            raise PoleError("division by zero")
        return RationalFunction._from_parts(self.den, self.num)

    def __truediv__(self, other):
        if not isinstance(other, RationalFunction):
            other = _coerce(other)
            if other is None:
                return NotImplemented
        if other.num.is_zero():
            raise PoleError("division by zero")
        if _has_imag(other.num):
            return self * other.inverse()
        a, b, c, d = self.num, self.den, other.num, other.den
        if a.context() is not c.context() or b.context() is not d.context():
            a, b, c, d = _lift(a), _lift(b), _lift(c), _lift(d)
        if a.is_zero():
            return self
        g1 = a.gcd(c) if not c.is_constant() else None
        if g1 is not None and not g1.is_one():
            a = a / g1
            c = c / g1
        if not b.is_one() and not d.is_one():
            g2 = b.gcd(d)
            if not g2.is_one():
                b = b / g2
                d = d / g2
        num = a * d
        den = b * c
        lc = den.leading_coefficient()
        if lc != 1:
            num = num / lc
            den = den / lc
        return RationalFunction._raw(num, den)

    def __rtruediv__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return other / self

    def __pow__(self, e: int):
        if not isinstance(e, int):
            raise FieldError("only integer powers of rational functions")
        if e < 0:
            return self.inverse() ** (-e)
        if e == 0:
            return ONE_RF()
        if _has_imag(self.num):
            out = ONE_RF()
            base = self
            while e:
                if e & 1:
                    out = out * base
                base = base * base
                e >>= 1
            return out
        return RationalFunction._raw(self.num ** e, self.den ** e)

    def __eq__(self, other):
        if not isinstance(other, RationalFunction):
            other = _coerce(other)
            if other is None:
                return NotImplemented
        a, b, c, d = self.num, self.den, other.num, other.den
        if a.context() is not c.context():
            a, c = _lift(a), _lift(c)
        if b.context() is not d.context():
            b, d = _lift(b), _lift(d)
        return a == c and b == d

    def __hash__(self):
        return hash((_poly_str(_lift(self.num)), _poly_str(_lift(self.den))))

    # transformations ----------------------------------------------------
    def numerator(self) -> MultiPoly:
        return MultiPoly(self.num)

    def denominator(self) -> MultiPoly:
        return MultiPoly(self.den)

    def compose_poly(self, images: Mapping[str, "RationalFunction"]) -> "RationalFunction":
        """Substitute polynomial images for variables (fast path)."""
        ctx = _ctx()
        gens = list(ctx.gens())
        for name, img in images.items():
            VARS.ensure(name)
            ctx = _ctx()
            gens = list(ctx.gens())
        for name, img in images.items():
            if not img.is_polynomial():
                raise FieldError("compose_poly needs polynomial images")
            d = img.den.leading_coefficient()
            gens[_index(name)] = _lift(img.num) / d
        num = _lift(self.num).compose(*gens, ctx=ctx)
        den = _lift(self.den).compose(*gens, ctx=ctx)
        return RationalFunction._from_parts(num, den)

    def substitute(self, mapping: Mapping[str, object]) -> "RationalFunction":
        """Simultaneous substitution ``var -> rational function``."""
        images = {k: _coerce(v) for k, v in mapping.items()}
        for k, v in list(images.items()):
            # n -> n + c on a discrete variable also moves its companion q^n
            big = VARS.qpower_of(k) if k in VARS else None
            if big is None or big in images:
                continue
            off = v - RationalFunction.var(k)
            if off.is_constant() and off.constant_value().is_real():
                c = off.constant_value().re
                if c.denominator == 1:
                    images[big] = Q ** int(c) * RationalFunction.var(big)
        images = {k: v for k, v in images.items() if k in VARS and not self.free_of(k)}
        if not images:
            return self
        if all(v.is_polynomial() for v in images.values()):
            return self.compose_poly(images)
        return _eval_poly(self.num, images) / _eval_poly(self.den, images)

    def instantiate(self, assignments: Mapping[str, object]) -> "RationalFunction":
        """Assign Gaussian-rational values to variables."""
        images = {}
        for name, value in assignments.items():
            if name == "q":
                raise FieldError("assign p instead of q (q = p^4)")
            images[name] = RationalFunction(GaussianRational.coerce(value))
        try:
            return self.substitute(images)
        except PoleError:
            raise PoleError(f"pole of {self} at {', '.join(f'{k}={v}' for k, v in assignments.items())}") from None

    def qshift(self, name: str, k: int = 1) -> "RationalFunction":
        """``name -> q^k * name``."""
        if k == 0 or self.free_of(name):
            return self
        return self.compose_poly({name: Q ** k * RationalFunction.var(name)}) if k > 0 else self.substitute(
            {name: RationalFunction.var(name) / Q ** (-k)}
        )

    def shift(self, name: str, k: int = 1) -> "RationalFunction":
        """``name -> name + k``."""
        if k == 0 or self.free_of(name):
            return self
        return self.compose_poly({name: RationalFunction.var(name) + k})

    def derivative(self, name: str) -> "RationalFunction":
        if self.free_of(name):
            return ZERO_RF()
        num, den = _lift(self.num), _lift(self.den)
        idx = _index(name)
        dn = num.derivative(idx)
        dd = den.derivative(idx)
        return RationalFunction._from_parts(dn * den - num * dd, den * den)

    def coefficients_in(self, name: str) -> list["RationalFunction"]:
        """Coefficients of this polynomial-in-``name`` (denominator must be free of it)."""
        VARS.ensure(name)
        idx = _index(name)
        num, den = _lift(self.num), _lift(self.den)
        if den.degrees()[idx]:
            raise FieldError(f"denominator depends on {name}")
        buckets: dict[int, dict] = {}
        for exps, c in num.terms():
            e = int(exps[idx])
            key = exps[:idx] + (0,) + exps[idx + 1:]
            buckets.setdefault(e, {})[key] = c
        deg = max(buckets) if buckets else -1
        ctx = num.context()
        out = []
        for e in range(deg + 1):
            part = buckets.get(e)
            if part is None:
                out.append(ZERO_RF())
            else:
                out.append(RationalFunction._from_parts(ctx.from_dict(part), den))
        return out

    def monomial_form(self):
        """If num and den are monomials return (coefficient, {var: exponent}), else None."""
        num, den = _lift(self.num), _lift(self.den)
        if len(num) != 1 or len(den) != 1 or _has_imag(num):
            return None
        (en, cn), = num.terms()
        (ed, cd), = den.terms()
        names = num.context().names()
        exps = {}
        for i in range(1, len(en)):
            e = en[i] - ed[i]
            if e:
                exps[names[i]] = int(e)
        return _to_fraction(cn) / _to_fraction(cd), exps

    def p_power(self) -> int | None:
        """Return s if this equals p^s exactly, else None."""
        mf = self.monomial_form()
        if mf is None:
            return None
        c, exps = mf
        if c != 1 or set(exps) - {"p"}:
            return None
        return exps.get("p", 0)

    def conjugate(self) -> "RationalFunction":
        return RationalFunction._from_parts(_conjugate(_lift(self.num)), self.den)

    # output -----------------------------------------------------------
    def __str__(self):
        num, den = _lift(self.num), _lift(self.den)
        if den.is_one():
            return _poly_str(num)
        # clear rational coefficients of the denominator for display
        scale = 1
        for c in den.coeffs():
            scale = scale * int(c.q) // _gcd(scale, int(c.q))
        num = num * scale
        den = den * scale
        n_s, d_s = _poly_str(num), _poly_str(den)
        if len(num) > 1 or _has_imag(num) and len(num) > 1:
            n_s = f"({n_s})"
        if len(den) > 1:
            d_s = f"({d_s})"
        elif den.is_constant():
            pass
        elif "*" in d_s or "^" in d_s:
            d_s = f"({d_s})"
        return f"{n_s}/{d_s}"

    def __repr__(self):
        return f"RF({self})"

    def to_json(self):
        return {"num": _poly_json(self.num), "den": _poly_json(self.den)}

    @classmethod
    def from_json(cls, data) -> "RationalFunction":
        return cls._from_parts(_poly_from_json(data["num"]), _poly_from_json(data["den"]))

    def as_multipoly(self) -> MultiPoly:
        if not self.is_polynomial():
            raise FieldError(f"{self} is not a polynomial")
        return MultiPoly(_lift(self.num) / self.den.leading_coefficient())


def _gcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return a


def _coerce(x) -> RationalFunction | None:
    if isinstance(x, RationalFunction):
        return x
    if isinstance(x, MultiPoly):
        return x.to_rf()
    if isinstance(x, (int, Fraction, GaussianRational, flint.fmpq)):
        return RationalFunction(x)
    return None


def _eval_poly(poly, images: Mapping[str, RationalFunction]) -> RationalFunction:
    """Evaluate a raw polynomial with rational-function images (term loop)."""
    poly = _lift(poly)
    names = poly.context().names()
    idxs = [(i, images[n]) for i, n in enumerate(names) if n in images]
    subs_idx = {i for i, _ in idxs}
    ctx = poly.context()
    # group by the exponents of substituted variables
    groups: dict[tuple, dict] = {}
    for exps, c in poly.terms():
        key = tuple(exps[i] for i, _ in idxs)
        rest = tuple(0 if i in subs_idx else e for i, e in enumerate(exps))
        groups.setdefault(key, {})[rest] = c
    powers: dict[tuple[int, int], RationalFunction] = {}

    def power(slot: int, e: int) -> RationalFunction:
        k = (slot, e)
        if k not in powers:
            powers[k] = idxs[slot][1] ** int(e)
        return powers[k]

    total = ZERO_RF()
    for key, rest in groups.items():
        term = RationalFunction._from_parts(ctx.from_dict(rest), ctx.constant(1))
        for slot, e in enumerate(key):
            if e:
                term = term * power(slot, e)
        total = total + term
    return total


RF = RationalFunction


def ZERO_RF() -> RationalFunction:
    ctx = _ctx()
    return RationalFunction._raw(ctx.constant(0), ctx.constant(1))


def ONE_RF() -> RationalFunction:
    ctx = _ctx()
    return RationalFunction._raw(ctx.constant(1), ctx.constant(1))


def var(name: str) -> RationalFunction:
    return RationalFunction.var(name)


def const(value) -> RationalFunction:
    return RationalFunction(value)


I = RationalFunction.imaginary_unit()
P = RationalFunction.var("p")
Q = P ** 4
ZERO = ZERO_RF()
ONE = ONE_RF()
