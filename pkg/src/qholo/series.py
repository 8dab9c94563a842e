"""Truncated power series used to check annihilators on concrete functions.

A :class:`TruncatedSeries` stands for ``prefix * sum_i c_i var^(val+i)``
known modulo ``var^order``.  The prefix collects everything that has no
expansion in ``var`` but whose shift quotients are rational: infinite
q-Pochhammer symbols free of ``var``, powers with symbolic exponents such as
``var^v`` or ``2^(-v)``, and quadratic q-powers in free discrete variables.
Operators act on the prefix through those quotients and on the
coefficients by substitution.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .field import VARS, P, Q, RationalFunction, ZERO_RF, ONE_RF
from .hyperterm import Linear, Power, QExp, QHyperTerm, QPoch, Poch, Quadratic, qpoch_finite

__all__ = [
    "SeriesError",
    "TruncatedSeries",
    "HyperSum",
    "expand_term",
    "expand_sum",
    "apply_operator",
    "check_annihilation",
    "residuals",
    "series_from_coefficients",
    "iz_initial_check",
]


class SeriesError(ValueError):
    pass


def _spec(c: RationalFunction, spec: Mapping | None) -> RationalFunction:
    return c.substitute(spec) if spec else c


# ---------------------------------------------------------------------------
# prefix
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Prefix:
    """Product of non-expandable factors; ``var`` exponents carry no constant."""

    qpochs: tuple = ()  # ((a, e), mult)
    powers: tuple = ()  # (base, Linear)
    qform: Quadratic = field(default_factory=Quadratic)

    @staticmethod
    def build(qpochs: Mapping, powers: Mapping, qform: Quadratic) -> "Prefix":
        qp = tuple(sorted(((k, m) for k, m in qpochs.items() if m), key=lambda kv: (str(kv[0][0]), kv[0][1])))
        pw = tuple(sorted(((b, L) for b, L in powers.items() if L != Linear()), key=lambda kv: str(kv[0])))
        return Prefix(qp, pw, qform)

    def __mul__(self, other: "Prefix") -> "Prefix":
        qp = dict(self.qpochs)
        for k, m in other.qpochs:
            qp[k] = qp.get(k, 0) + m
        pw = dict(self.powers)
        for b, L in other.powers:
            pw[b] = pw[b] + L if b in pw else L
        return Prefix.build(qp, pw, self.qform + other.qform)

    def is_trivial(self) -> bool:
        return not self.qpochs and not self.powers and not self.qform.terms

    def term(self) -> QHyperTerm:
        fs = [QPoch(a, e, None, m) for (a, e), m in self.qpochs]
        fs += [Power(b, L) for b, L in self.powers]
        if self.qform.terms:
            fs.append(QExp(self.qform))
        return QHyperTerm(fs)

    def ratio(self, gen) -> RationalFunction:
        if self.is_trivial():
            return ONE_RF()
        return self.term().ratio(gen, 1)

    def logder(self, gen) -> RationalFunction:
        if self.is_trivial():
            return ZERO_RF()
        return self.term().logder(gen)

    def __str__(self):
        return "1" if self.is_trivial() else str(self.term())


_TRIVIAL = Prefix()


# ---------------------------------------------------------------------------
# series
# ---------------------------------------------------------------------------


class TruncatedSeries:
    """``prefix * sum_i coeffs[i] * var^(val+i) + O(var^order)``."""

    __slots__ = ("var", "val", "coeffs", "order", "prefix", "spec")

    def __init__(self, var: str, coeffs: Sequence, order: int | None = None, val: int = 0, prefix: Prefix = _TRIVIAL, spec=None):
        VARS.ensure(var)
        self.var = var
        self.val = int(val)
        self.spec = dict(spec) if spec else None
        cs = [_spec(RationalFunction.constant(c), self.spec) for c in coeffs]
        self.order = self.val + len(cs) if order is None else int(order)
        cs = cs[: max(0, self.order - self.val)]
        cs += [ZERO_RF()] * (self.order - self.val - len(cs))
        self.coeffs = cs
        self.prefix = prefix

    # construction ----------------------------------------------------------
    @classmethod
    def zero(cls, var, order, prefix=_TRIVIAL, spec=None):
        return cls(var, [], order, 0, prefix, spec)

    @classmethod
    def from_rf(cls, r: RationalFunction, var: str, order: int, spec=None) -> "TruncatedSeries":
        """Laurent expansion of a rational function at ``var = 0``."""
        r = _spec(RationalFunction.constant(r), spec)
        if r.is_zero():
            return cls.zero(var, order, spec=spec)
        num = r.numerator().to_rf()
        den = r.denominator().to_rf()
        nc = num.coefficients_in(var)
        dc = den.coefficients_in(var)
        dv = next(i for i, c in enumerate(dc) if not c.is_zero())
        nv = next(i for i, c in enumerate(nc) if not c.is_zero())
        nc, dc = nc[nv:], dc[dv:]
        val = nv - dv
        n = max(0, order - val)
        inv0 = dc[0].inverse()
        out: list[RationalFunction] = []
        for k in range(n):
            acc = nc[k] if k < len(nc) else ZERO_RF()
            for j in range(1, min(k, len(dc) - 1) + 1):
                if not dc[j].is_zero() and not out[k - j].is_zero():
                    acc = acc - dc[j] * out[k - j]
            out.append(acc * inv0)
        return cls(var, out, max(order, val), val, _TRIVIAL, spec)

    # access ------------------------------------------------------------------
    def coefficient(self, k: int) -> RationalFunction:
        """Coefficient of ``var^k`` (prefix excluded)."""
        if k >= self.order:
            raise SeriesError(f"coefficient {k} beyond the truncation order {self.order}")
        i = k - self.val
        return self.coeffs[i] if 0 <= i < len(self.coeffs) else ZERO_RF()

    def valuation(self) -> int | None:
        for i, c in enumerate(self.coeffs):
            if not c.is_zero():
                return self.val + i
        return None

    def is_zero(self, upto: int | None = None) -> bool:
        top = self.order if upto is None else min(upto, self.order)
        return all(c.is_zero() for i, c in enumerate(self.coeffs) if self.val + i < top)

    def truncate(self, order: int) -> "TruncatedSeries":
        return self._new(self.coeffs, min(order, self.order), self.val)

    def _new(self, coeffs, order, val, prefix=None):
        s = object.__new__(TruncatedSeries)
        s.var, s.spec = self.var, self.spec
        s.val = val
        s.order = order
        cs = list(coeffs[: max(0, order - val)])
        cs += [ZERO_RF()] * (order - val - len(cs))
        s.coeffs = cs
        s.prefix = self.prefix if prefix is None else prefix
        return s

    # arithmetic --------------------------------------------------------------
    def _align(self, other: "TruncatedSeries"):
        if other.var != self.var:
            raise SeriesError("series in different variables")
        if other.prefix != self.prefix:
            raise SeriesError(f"incompatible prefixes {self.prefix} and {other.prefix}")

    def __add__(self, other):
        if not isinstance(other, TruncatedSeries):
            other = TruncatedSeries.from_rf(RationalFunction.constant(other), self.var, self.order, self.spec)
            other.prefix = self.prefix
        self._align(other)
        order = min(self.order, other.order)
        val = min(self.val, other.val)
        cs = []
        for k in range(val, order):
            a = self.coeffs[k - self.val] if self.val <= k else ZERO_RF()
            b = other.coeffs[k - other.val] if other.val <= k else ZERO_RF()
            cs.append(a + b)
        return self._new(cs, order, val)

    __radd__ = __add__

    def __neg__(self):
        return self._new([-c for c in self.coeffs], self.order, self.val)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c: RationalFunction) -> "TruncatedSeries":
        """Multiply by a coefficient free of ``var``."""
        c = _spec(RationalFunction.constant(c), self.spec)
        return self._new([c * a for a in self.coeffs], self.order, self.val)

    def shift_exponent(self, k: int) -> "TruncatedSeries":
        return self._new(self.coeffs, self.order + k, self.val + k)

    def __mul__(self, other):
        if isinstance(other, TruncatedSeries):
            if other.var != self.var:
                raise SeriesError("series in different variables")
            order = min(self.order + (other.valuation() or other.val), other.order + (self.valuation() or self.val))
            val = self.val + other.val
            n = max(0, order - val)
            cs = [ZERO_RF()] * n
            for i, a in enumerate(self.coeffs):
                if a.is_zero() or i >= n:
                    continue
                for j, b in enumerate(other.coeffs):
                    if i + j >= n:
                        break
                    if not b.is_zero():
                        cs[i + j] = cs[i + j] + a * b
            return self._new(cs, order, val, self.prefix * other.prefix)
        c = RationalFunction.constant(other)
        if c.free_of(self.var):
            return self.scale(c)
        return self * TruncatedSeries.from_rf(c, self.var, self.order - self.val + 1, self.spec)

    __rmul__ = __mul__

    def map_coefficients(self, fn) -> "TruncatedSeries":
        return self._new([_spec(fn(c), self.spec) for c in self.coeffs], self.order, self.val)

    def with_prefix(self, prefix: Prefix) -> "TruncatedSeries":
        return self._new(self.coeffs, self.order, self.val, prefix)

    def __eq__(self, other):
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        if self.var != other.var or self.prefix != other.prefix:
            return False
        return (self - other).is_zero()

    def __str__(self):
        parts = []
        for i, c in enumerate(self.coeffs):
            if c.is_zero():
                continue
            k = self.val + i
            mono = "1" if k == 0 else (self.var if k == 1 else f"{self.var}^{k}")
            parts.append(f"({c})*{mono}")
        body = " + ".join(parts) or "0"
        body += f" + O({self.var}^{self.order})"
        return body if self.prefix.is_trivial() else f"{self.prefix} * ({body})"

    __repr__ = __str__


def series_from_coefficients(coeffs: Sequence, var: str = "t", spec=None) -> TruncatedSeries:
    return TruncatedSeries(var, coeffs, spec=spec)


# ---------------------------------------------------------------------------
# expansion of terms and sums
# ---------------------------------------------------------------------------


def _var_monomial(a: RationalFunction, var: str):
    """``a = c * var^s`` with ``c`` free of ``var``: return ``(c, s)`` or ``None``."""
    if a.free_of(var):
        return a, 0
    num, den = a.numerator().to_rf(), a.denominator().to_rf()
    nc = num.coefficients_in(var)
    if not den.free_of(var):
        dc = den.coefficients_in(var)
        nzd = [i for i, c in enumerate(dc) if not c.is_zero()]
        if len(nzd) != 1:
            return None
        sd, dcoef = nzd[0], dc[nzd[0]]
    else:
        sd, dcoef = 0, den
    nzn = [i for i, c in enumerate(nc) if not c.is_zero()]
    if len(nzn) != 1:
        return None
    return nc[nzn[0]] / dcoef, nzn[0] - sd


def _euler(c: RationalFunction, s: int, e: int, mult: int, var: str, order: int, spec) -> TruncatedSeries:
    """Expansion of ``(c*var^s; p^e)_inf ^ mult``."""
    if s <= 0:
        raise SeriesError("infinite product does not converge formally")
    Qb = _spec(P ** e, spec)
    c = _spec(c, spec)
    n = (order - 1) // s + 1 if order > 0 else 0
    sign = 1 if mult > 0 else -1
    coeffs = [ZERO_RF()] * max(order, 0)
    poch = ONE_RF()  # (Qb; Qb)_j
    for j in range(n):
        if j:
            poch = poch * (1 - Qb ** j)
        if j * s >= order:
            break
        if sign > 0:
            cj = (-1) ** j * Qb ** (j * (j - 1) // 2) * c ** j / poch
        else:
            cj = c ** j / poch
        coeffs[j * s] = cj
    base = TruncatedSeries(var, coeffs, order, 0, spec=spec)
    out = base
    for _ in range(abs(mult) - 1):
        out = out * base
    return out


def _normalize_qpoch(a: RationalFunction, e: int):
    """``(a; p^e)_inf = (a0; p^e)_inf * corr`` with ``a0`` in a canonical p-power class."""
    mf = a.monomial_form()
    if mf is None:
        return a, ONE_RF()
    s = mf[1].get("p", 0)
    s0 = ((s - 1) % e) + 1
    alpha = (s - s0) // e
    a0 = a / P ** (s - s0) if s - s0 >= 0 else a * P ** (s0 - s)
    if alpha == 0:
        return a, ONE_RF()
    return a0, qpoch_finite(a0, P ** e, alpha).inverse()


def expand_term(term, var: str, order: int, spec=None) -> TruncatedSeries:
    """Expand a term free of summation indices in powers of ``var``."""
    if isinstance(term, RationalFunction):
        term = QHyperTerm(coeff=term)
    VARS.ensure(var)
    out = TruncatedSeries.from_rf(term.coeff, var, order, spec)
    qp: dict = {}
    pw: dict = {}
    qform = Quadratic()
    extra = ONE_RF()
    var_sym: Linear | None = None
    series_parts: list[TruncatedSeries] = []
    for f in term.factors:
        if isinstance(f, QExp):
            qform = qform + f.form
        elif isinstance(f, Power):
            L = f.exp.scale(f.mult)
            mono = _var_monomial(f.base, var)
            if mono is None:
                raise SeriesError(f"{f} has no expansion in {var}")
            c, s = mono
            if s:
                lin = L.scale(s)
                if lin.const.denominator != 1:
                    raise SeriesError(f"fractional power of {var}")
                sym = Linear(lin.coeffs)
                var_sym = sym if var_sym is None else var_sym + sym
                out = out.shift_exponent(int(lin.const))
            if not c.is_one():
                if L.is_constant():
                    extra = extra * c ** int(L.const)
                else:
                    pw[c] = pw[c] + L if c in pw else L
        elif isinstance(f, QPoch):
            if f.length is None:
                if f.a.free_of(var):
                    a0, corr = _normalize_qpoch(f.a, f.e)
                    extra = extra * corr ** f.mult
                    qp[(a0, f.e)] = qp.get((a0, f.e), 0) + f.mult
                else:
                    mono = _var_monomial(f.a, var)
                    if mono is None:
                        raise SeriesError(f"{f} has no expansion in {var}")
                    series_parts.append((mono[0], mono[1], f.e, f.mult))
            else:
                raise SeriesError(f"{f} has a symbolic length")
        elif isinstance(f, Poch):
            raise SeriesError(f"{f} has a symbolic length")
        else:
            raise SeriesError(f"cannot expand factor {f}")
    if var_sym is not None and var_sym != Linear():
        pw[RationalFunction.var(var)] = var_sym
    if not extra.is_one():
        out = out * extra
    for c, s, e, m in series_parts:
        out = out * _euler(c, s, e, m, var, order - (out.valuation() or 0), spec)
    out = out.truncate(order)
    return out.with_prefix(Prefix.build(qp, pw, qform))


@dataclass
class HyperSum:
    """``sum`` of a term over nested index ranges.

    ``ranges`` lists ``(index, lower, upper)`` from the outermost sum inwards;
    ``upper`` is an int, a string linear in outer indices, or ``None`` for an
    infinite range cut by the ``var``-valuation of the summands.
    """

    term: QHyperTerm
    ranges: list
    prefactor: QHyperTerm | None = None

    def expand(self, var: str, order: int, spec=None, patience: int = 2) -> TruncatedSeries:
        return expand_sum(self, var, order, spec, patience)


def _upper(bound, values):
    if bound is None or isinstance(bound, int):
        return bound
    from .closure import _to_linear

    L = _to_linear(bound) if isinstance(bound, str) else bound
    v = L.evaluate(values)
    if v.denominator != 1:
        raise SeriesError(f"non-integral bound {bound}")
    return int(v)


def expand_sum(hs: HyperSum, var: str, order: int, spec=None, patience: int = 2) -> TruncatedSeries:
    """Truncated expansion of a nested sum (and its prefactor)."""
    acc: list = [None]

    def add(s: TruncatedSeries):
        acc[0] = s if acc[0] is None else acc[0] + s

    def rec(level: int, term: QHyperTerm, values: dict) -> bool:
        """Expand the inner sums; return ``True`` if something below ``order`` was produced."""
        if level == len(hs.ranges):
            s = expand_term(term, var, order, spec)
            add(s)
            return not s.is_zero()
        name, lo, hi = hs.ranges[level]
        hi = _upper(hi, values)
        quiet = 0
        k = lo
        seen = False
        while hi is None or k <= hi:
            t = term.substitute_discrete({name: Linear.constant(k)})
            got = rec(level + 1, t, {**values, name: k})
            seen = seen or got
            if hi is None:
                quiet = 0 if got else quiet + 1
                if quiet >= patience:
                    break
                if k - lo > 4 * order + 8 * patience:
                    raise SeriesError(f"sum over {name} does not truncate below order {order}")
            k += 1
        return seen

    rec(0, hs.term, {})
    out = acc[0] if acc[0] is not None else TruncatedSeries.zero(var, order, spec=spec)
    if hs.prefactor is not None:
        out = expand_term(hs.prefactor, var, order - (out.valuation() or 0), spec) * out
        out = out.truncate(order)
    return out


# ---------------------------------------------------------------------------
# operators
# ---------------------------------------------------------------------------


def _act(gen, s: TruncatedSeries) -> TruncatedSeries:
    var = s.var
    kind = gen.kind
    if kind == "qshift":
        if gen.target == var:
            q = _spec(Q, s.spec)
            cs = [c * q ** (s.val + i) if s.val + i >= 0 else c / q ** (-(s.val + i)) for i, c in enumerate(s.coeffs)]
            out = s._new(cs, s.order, s.val)
        else:
            out = s.map_coefficients(lambda c: gen.sigma(c))
        r = s.prefix.ratio(gen)
        return out if r.is_one() else out * r
    if kind == "shift":
        if gen.target == var:
            raise SeriesError(f"{gen} shifts the series variable")
        out = s.map_coefficients(lambda c: gen.sigma(c))
        r = s.prefix.ratio(gen)
        return out if r.is_one() else out * r
    if kind == "derivation":
        if gen.target == var:
            if any(b == RationalFunction.var(var) for b, _ in s.prefix.powers):
                raise SeriesError(f"cannot differentiate a symbolic power of {var}")
            cs = [c * (s.val + i) for i, c in enumerate(s.coeffs)]
            return s._new(cs, s.order - 1, s.val - 1)
        out = s.map_coefficients(lambda c: c.derivative(gen.target))
        ell = s.prefix.logder(gen)
        return out if ell.is_zero() else out + s * ell
    if kind == "qderivation":
        from .ore import qshift

        sh = _act(qshift(gen.target), s)
        diff = sh - s
        if gen.target == var:
            return diff.scale((_spec(Q, s.spec) - 1).inverse()).shift_exponent(-1)
        return diff * ((Q - 1) * RationalFunction.var(gen.target)).inverse()
    raise SeriesError(f"unknown generator kind {kind}")


def apply_operator(op, s: TruncatedSeries) -> TruncatedSeries:
    """``op(s)``; generators act right to left, coefficients multiply on the left."""
    alg = op.algebra
    total = None
    cache: dict = {}
    for mono, c in op.terms.items():
        key = tuple(mono)
        if key not in cache:
            cur = s
            for i in range(alg.nvars - 1, -1, -1):
                for _ in range(mono[i]):
                    cur = _act(alg.gens[i], cur)
            cache[key] = cur
        piece = cache[key] * c
        total = piece if total is None else total + piece
    if total is None:
        return TruncatedSeries.zero(s.var, s.order, s.prefix, s.spec)
    return total


def _var_degree(op, var: str) -> int:
    deg = 0
    for c in op.terms.values():
        deg = max(deg, c.degree(var), c.den_degree(var))
    return deg


def residuals(op, s: TruncatedSeries, slack: int | None = None) -> list[tuple[int, RationalFunction]]:
    """Nonzero coefficients of ``op(s)`` below the trusted order."""
    if slack is None:
        slack = _var_degree(op, s.var)
    res = apply_operator(op, s)
    top = res.order - slack
    return [(res.val + i, c) for i, c in enumerate(res.coeffs) if res.val + i < top and not c.is_zero()]


def check_annihilation(ops, s: TruncatedSeries, slack: int | None = None) -> bool:
    """Whether every operator maps ``s`` to zero up to the trusted order."""
    from .groebner import LeftIdeal
    from .ore import OrePolynomial

    if isinstance(ops, LeftIdeal):
        ops = list(ops.gens)
    elif isinstance(ops, OrePolynomial):
        ops = [ops]
    for op in ops:
        stray = op.coefficient_variables() - set(VARS.names())
        if stray:
            raise SeriesError(f"undeclared variables {sorted(stray)}")
        if residuals(op, s, slack):
            return False
    return True


# ---------------------------------------------------------------------------
# Ismail-Zhang initial values
# ---------------------------------------------------------------------------


def iz_initial_check(spec=None, order: int = 2) -> bool:
    """Compare both sides of the Ismail-Zhang expansion to ``w^(order-1)``."""
    from . import catalog

    lhs = catalog.eq_series(order, spec)
    rhs = catalog.iz_rhs_series(order, spec)
    if lhs.prefix != rhs.prefix:
        return False
    return all(lhs.coefficient(k) == rhs.coefficient(k) for k in range(order))
