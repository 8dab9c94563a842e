"""q-recurrences, q-shift equations and q-differential equations.

A sequence ``s[n]`` with generating function ``F(t) = sum s[n] t^n`` is
handled through three representations:

* :class:`QRecurrence` – ``sum_i c_i(q^n) s[n+i] = 0`` for ``n >= 0`` plus
  the initial values ``s[0..r-1]``;
* :class:`QShiftEquation` – ``L(t, S_t) F + h(t) = 0`` with ``S_t F(t) = F(qt)``;
* :class:`QDifferentialEquation` – the same equation in terms of the Jackson
  derivative ``D_q``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Mapping

from .field import VARS, Q, RationalFunction, ZERO_RF, ONE_RF
from .ore import OreAlgebra, OrePolynomial, qder, qshift

__all__ = [
    "QRecurrence",
    "QShiftEquation",
    "QDifferentialEquation",
    "qre2se",
    "qse2re",
    "qse2de",
    "ore_to_equation",
    "parse_recurrence",
    "parse_shift_equation",
]


class EquationError(ValueError):
    pass


def _qpow(e: int) -> RationalFunction:
    return Q ** e if e >= 0 else (Q ** (-e)).inverse()


def _poly_coeffs(c: RationalFunction, name: str) -> list[RationalFunction]:
    if c.is_zero():
        return []
    if c.den_degree(name):
        raise EquationError(f"coefficient {c} is not polynomial in {name}")
    return c.coefficients_in(name)


# ---------------------------------------------------------------------------
# recurrences
# ---------------------------------------------------------------------------


@dataclass
class QRecurrence:
    """``sum_i c_i(N) s[n+i] = 0`` (``N = q^n``) together with ``s[0..r-1]``."""

    operator: OrePolynomial
    initial: list = field(default_factory=list)
    seq: str = "s"
    index: str = "n"

    def __post_init__(self):
        alg = self.operator.algebra
        if alg.nvars != 1 or alg.gens[0].kind != "qshift":
            raise EquationError("a q-recurrence lives in a single q-shift algebra")
        self.initial = [RationalFunction.constant(v) for v in self.initial]

    @property
    def qvar(self) -> str:
        return self.operator.algebra.gens[0].target

    @property
    def order(self) -> int:
        return self.operator.lm()[0]

    def coefficient(self, i: int) -> RationalFunction:
        return self.operator.terms.get((i,), ZERO_RF())

    def normalized(self) -> "QRecurrence":
        return QRecurrence(self.operator.primitive(), list(self.initial), self.seq, self.index)

    def equivalent(self, other: "QRecurrence") -> bool:
        """Same operator up to a unit and the same initial values."""
        if not self.operator.equal_up_to_unit(other.operator):
            return False
        k = min(len(self.initial), len(other.initial))
        return all(a == b for a, b in zip(self.initial[:k], other.initial[:k]))

    def terms(self, count: int) -> list[RationalFunction]:
        """Unroll the recurrence to ``count`` terms."""
        r = self.order
        if len(self.initial) < r:
            raise EquationError(f"need {r} initial values")
        vals = list(self.initial[:count])
        lead = self.coefficient(r)
        name = self.qvar
        n = len(vals) - r
        while len(vals) < count:
            qn = {name: _qpow(n)}
            acc = ZERO_RF()
            for i in range(r):
                c = self.coefficient(i)
                if not c.is_zero():
                    acc = acc + c.substitute(qn) * vals[n + i]
            den = lead.substitute(qn)
            if den.is_zero():
                raise EquationError(f"leading coefficient vanishes at n={n}")
            vals.append(-acc / den)
            n += 1
        return vals

    def to_text(self) -> str:
        """Render with the highest index equal to ``n`` (``s[n], s[n-1], ...``)."""
        r = self.order
        name = self.qvar
        back = self.operator.substitute({name: RationalFunction.var(name) / _qpow(r)}).primitive()
        pieces = []
        for i in range(r, -1, -1):
            c = back.coefficient((i,))
            if c.is_zero():
                continue
            idx = self.index if i == r else f"{self.index}-{r - i}"
            pieces.append((c, f"{self.seq}[{idx}]"))
        eq = _join(pieces) + " = 0"
        inits = [f"{self.seq}[{j}] = {v}" for j, v in enumerate(self.initial)]
        return ", ".join([eq] + inits)

    __str__ = to_text

    def to_json(self):
        return {
            "type": "qrecurrence",
            "operator": self.operator.to_json(),
            "initial": [v.to_json() for v in self.initial],
            "seq": self.seq,
            "index": self.index,
        }

    @classmethod
    def from_json(cls, data):
        return cls(
            OrePolynomial.from_json(data["operator"]),
            [RationalFunction.from_json(v) for v in data["initial"]],
            data.get("seq", "s"),
            data.get("index", "n"),
        )


def _join(pieces) -> str:
    out = ""
    for c, sym in pieces:
        cs = str(c)
        if cs == "1":
            body, neg = sym, False
        elif cs == "-1":
            body, neg = sym, True
        else:
            single = not any(ch in cs.lstrip("-") for ch in "+-")
            neg = cs.startswith("-") and single
            if neg:
                cs = cs[1:]
            if not single:
                cs = f"({cs})"
            body = f"{cs}*{sym}"
        if not out:
            out = ("-" if neg else "") + body
        else:
            out += (" - " if neg else " + ") + body
    return out or "0"


# ---------------------------------------------------------------------------
# q-shift equations
# ---------------------------------------------------------------------------


@dataclass
class QShiftEquation:
    """``operator(F) + inhom = 0`` in a q-shift algebra over the series variable.

    ``initial`` maps ``k`` to the prescribed coefficient ``<t^k> F``.
    """

    operator: OrePolynomial
    inhom: RationalFunction = field(default_factory=ZERO_RF)
    initial: dict = field(default_factory=dict)
    fname: str = "F"

    def __post_init__(self):
        alg = self.operator.algebra
        if alg.nvars != 1 or alg.gens[0].kind != "qshift":
            raise EquationError("a q-shift equation needs a single q-shift generator")
        self.inhom = RationalFunction.constant(self.inhom)
        self.initial = {int(k): RationalFunction.constant(v) for k, v in self.initial.items()}

    @property
    def var(self) -> str:
        return self.operator.algebra.gens[0].target

    def to_text(self) -> str:
        t = self.var
        pieces = []
        for (e,), c in sorted(self.operator.terms.items()):
            arg = t if e == 0 else (f"q*{t}" if e == 1 else f"q^{e}*{t}")
            pieces.append((c, f"{self.fname}[{arg}]"))
        lhs = _join(pieces)
        if not self.inhom.is_zero():
            h = str(self.inhom)
            if h.startswith("-") and not any(ch in h[1:] for ch in "+-"):
                lhs += f" - {h[1:]}"
            else:
                lhs += f" + ({h})" if any(ch in h.lstrip("-") for ch in "+-") else f" + {h}"
        parts = [lhs + " = 0"]
        for k, v in sorted(self.initial.items()):
            mono = "1" if k == 0 else (t if k == 1 else f"{t}^{k}")
            parts.append(f"<{mono}>[{self.fname}] = {v}")
        return ", ".join(parts)

    __str__ = to_text

    def to_json(self):
        return {
            "type": "qshift_equation",
            "operator": self.operator.to_json(),
            "inhom": self.inhom.to_json(),
            "initial": {str(k): v.to_json() for k, v in self.initial.items()},
            "fname": self.fname,
        }

    @classmethod
    def from_json(cls, data):
        return cls(
            OrePolynomial.from_json(data["operator"]),
            RationalFunction.from_json(data["inhom"]),
            {int(k): RationalFunction.from_json(v) for k, v in data.get("initial", {}).items()},
            data.get("fname", "F"),
        )


@dataclass
class QDifferentialEquation:
    """``operator(f) = 0`` with ``operator`` a polynomial in the Jackson derivative."""

    operator: OrePolynomial
    initial: dict = field(default_factory=dict)
    fname: str = "f"

    @property
    def var(self) -> str:
        return self.operator.algebra.gens[0].target

    def derivative_values(self) -> dict[int, RationalFunction]:
        """``(D_q^k f)(0) = [k]_q! <t^k> f``."""
        out = {}
        for k, v in self.initial.items():
            fac = ONE_RF()
            for j in range(1, k + 1):
                fac = fac * (_qpow(j) - ONE_RF()) / (Q - ONE_RF())
            out[k] = fac * v
        return out

    def to_text(self) -> str:
        w = self.var
        pieces = []
        for (e,), c in sorted(self.operator.terms.items()):
            pieces.append((c, f"{self.fname}{chr(39) * e}[{w}]"))
        return _join(pieces) + " = 0"

    __str__ = to_text

    def to_json(self):
        return {
            "type": "qdifferential_equation",
            "operator": self.operator.to_json(),
            "initial": {str(k): v.to_json() for k, v in self.initial.items()},
            "fname": self.fname,
        }


# ---------------------------------------------------------------------------
# conversions
# ---------------------------------------------------------------------------


def qre2se(rec: QRecurrence, t: str = "t", fname: str = "F") -> QShiftEquation:
    """Functional equation for ``F(t) = sum s[n] t^n``."""
    VARS.ensure(t)
    r = rec.order
    if len(rec.initial) < r:
        raise EquationError(f"need {r} initial values")
    name = rec.qvar
    alg = OreAlgebra(qshift(t))
    tv = RationalFunction.var(t)
    op_terms: dict = {}
    inhom = ZERO_RF()
    s = rec.initial
    for i in range(r + 1):
        ci = _poly_coeffs(rec.coefficient(i), name)
        for j, cij in enumerate(ci):
            if cij.is_zero():
                continue
            # c_ij q^(jn) s[n+i] t^(n+r)  ->  c_ij q^(-ij) t^(r-i) S^j, summed over m = n+i >= i
            w = cij * _qpow(-i * j)
            op_terms[(j,)] = op_terms.get((j,), ZERO_RF()) + w * tv ** (r - i)
            for m in range(i):
                inhom = inhom + w * _qpow(j * m) * s[m] * tv ** (m + r - i)
    op = OrePolynomial(alg, op_terms)
    # L F - h = 0  with h the missing low-order terms
    eq_op, eq_h = op, -inhom
    prim = eq_op.primitive()
    u = prim.lc() / eq_op.lc()
    eq_op, eq_h = prim, eq_h * u
    if not eq_h.is_zero() and eq_h.den_degree(t):
        # content removal may have divided by a factor of the inhomogeneity
        d = eq_h.denominator().to_rf()
        eq_op, eq_h = eq_op.scale(d), eq_h * d
    deg_h = eq_h.degree(t) if not eq_h.is_zero() else -1
    count = deg_h + 1 if deg_h >= 0 else r
    init = {k: s[k] for k in range(min(count, len(s)))}
    return QShiftEquation(eq_op, eq_h, init, fname)



def qse2re(eq: QShiftEquation, seq: str = "s", index: str = "n") -> QRecurrence:
    """Coefficient recurrence of a q-shift equation (``t^a S^e -> q^(e(n-a)) s[n-a]``)."""
    t = eq.var
    VARS.ensure(index)
    big = VARS.qpower_of(index)
    if big is None:
        raise EquationError(f"{index} has no q-power companion")
    Nv = RationalFunction.var(big)
    # coefficient of s[n-a]: sum_e c_{a,e} q^(-ea) N^e
    back: dict[int, RationalFunction] = {}
    for (e,), c in eq.operator.terms.items():
        for a, cae in enumerate(_poly_coeffs(c, t)):
            if cae.is_zero():
                continue
            back[a] = back.get(a, ZERO_RF()) + cae * _qpow(-e * a) * Nv ** e
    r = max(back)
    h = _poly_coeffs(eq.inhom, t) if not eq.inhom.is_zero() else []
    # forward form: n -> n + r,  s[n+r-a]
    fwd = {big: Nv * _qpow(r)}
    alg = OreAlgebra(qshift(big))
    op = OrePolynomial(alg, {(r - a,): c.substitute(fwd) for a, c in back.items()})
    op = op.primitive()
    # initial values from the equation itself at n = 0..r-1 (and the given constraints)
    vals: list[RationalFunction] = []
    # the homogeneous recurrence holds once the inhomogeneous part is exhausted
    for n in range(max(r, len(h))):
        acc = ZERO_RF()
        lead = ZERO_RF()
        for a, c in back.items():
            cn = c.substitute({big: _qpow(n)})
            if a == 0:
                lead = cn
            elif n - a >= 0:
                acc = acc + cn * vals[n - a]
        hn = h[n] if n < len(h) else ZERO_RF()
        if not lead.is_zero():
            vals.append(-(acc + hn) / lead)
        elif n in eq.initial:
            vals.append(eq.initial[n])
        else:
            raise EquationError(f"coefficient <t^{n}> is not determined")
    return QRecurrence(op, vals, seq, index)


def qse2de(eq: QShiftEquation, fname: str = "f") -> QDifferentialEquation:
    """Rewrite with ``S = 1 + (q-1) w D_q`` and clear denominators."""
    if not eq.inhom.is_zero():
        raise EquationError("qse2de expects a homogeneous equation")
    w = eq.var
    alg = OreAlgebra(qder(w))
    D = alg.gen(0)
    S = alg.one() + D.scale((Q - ONE_RF()) * RationalFunction.var(w))
    out = alg.zero()
    power = alg.one()
    top = eq.operator.lm()[0]
    for e in range(top + 1):
        c = eq.operator.terms.get((e,))
        if c is not None:
            out = out + power.scale(c)
        power = S * power
    return QDifferentialEquation(out.primitive(), dict(eq.initial), fname)


def ore_to_equation(P: OrePolynomial, fname: str = "f", var: str | None = None) -> QShiftEquation:
    """Read a one-generator q-shift operator as a functional equation.

    For a q-power target (``M``) the equation is expressed in ``var`` with
    ``q^(a m + b) -> q^b var^a``; a plain target (``w``) is kept as is.
    """
    alg = P.algebra
    if alg.nvars != 1:
        used = [g for g in alg.gens if P.degree(g) > 0]
        if len(used) != 1:
            raise EquationError("equation form needs a univariate q-shift operator")
        g = used[0]
        i = alg.index(g)
        P = OrePolynomial(OreAlgebra(g), {(m[i],): c for m, c in P.terms.items()})
        alg = P.algebra
    g = alg.gens[0]
    if g.kind != "qshift":
        raise EquationError("equation form needs a q-shift generator")
    if var is not None and var != g.target:
        VARS.ensure(var)
        sub = {g.target: RationalFunction.var(var)}
        P = OrePolynomial(OreAlgebra(qshift(var)), {m: c.substitute(sub) for m, c in P.terms.items()})
    return QShiftEquation(P, ZERO_RF(), {}, fname)


# ---------------------------------------------------------------------------
# text input
# ---------------------------------------------------------------------------

_SEQ_RE = r"{name}\[\s*{idx}\s*(?:([+-])\s*(\d+))?\s*\]"
_FUN_RE = r"{name}\[\s*(?:q(?:\^\(?(\d+)\)?)?\s*\*\s*)?{var}\s*\]"


def _split_eq(text: str) -> str:
    if "=" not in text:
        return text
    lhs, rhs = text.split("=", 1)
    return f"({lhs}) - ({rhs})"


def parse_recurrence(text: str, seq: str = "s", index: str = "n", initial=()) -> QRecurrence:
    """Parse ``"q^2*s[n+2] - ... = 0"``; indices may be ``n``, ``n+i`` or ``n-i``."""
    from .parser import parse_expression

    VARS.ensure(index)
    big = VARS.qpower_of(index)
    pat = re.compile(_SEQ_RE.format(name=re.escape(seq), idx=re.escape(index)))
    offs = []
    for m in pat.finditer(text):
        off = int(m.group(2) or 0) * (-1 if m.group(1) == "-" else 1)
        offs.append(off)
    if not offs:
        raise EquationError(f"no {seq}[{index}...] terms found")
    low = min(offs)

    def repl(m):
        off = int(m.group(2) or 0) * (-1 if m.group(1) == "-" else 1)
        return f"S({big};q)^({off - low + 1})"

    body = _split_eq(pat.sub(repl, text))
    alg = OreAlgebra(qshift(big))
    val = parse_expression(body, alg)
    if not isinstance(val, OrePolynomial):
        raise EquationError("recurrence has no sequence terms")
    terms = {}
    for (e,), c in val.terms.items():
        if e == 0:
            raise EquationError("inhomogeneous recurrences are not supported")
        terms[(e - 1,)] = c
    op = OrePolynomial(alg, terms)
    if low:
        # shift so that the lowest index is n
        op = OrePolynomial(alg, {k: c.substitute({big: RationalFunction.var(big) * _qpow(-low)}) for k, c in op.terms.items()})
    return QRecurrence(op, [RationalFunction.constant(v) if not isinstance(v, str) else _rf(v) for v in initial], seq, index)


def _rf(text):
    from .parser import parse_rf

    return parse_rf(text)


def parse_shift_equation(text: str, fname: str = "F", var: str = "t", initial: Mapping | None = None) -> QShiftEquation:
    """Parse ``"t*V*(t+2*x)*F[q*t] + F[t]*(1-2*t*x) - 1 = 0"``."""
    from .parser import parse_expression

    VARS.ensure(var)
    pat = re.compile(_FUN_RE.format(name=re.escape(fname), var=re.escape(var)))
    if not pat.search(text):
        raise EquationError(f"no {fname}[...] terms found")

    def repl(m):
        e = 0
        if m.group(0).replace(" ", "").startswith(f"{fname}[q"):
            e = int(m.group(1) or 1)
        return f"S({var};q)^({e + 1})"

    body = _split_eq(pat.sub(repl, text))
    alg = OreAlgebra(qshift(var))
    val = parse_expression(body, alg)
    if not isinstance(val, OrePolynomial):
        val = alg.scalar(val)
    terms, inhom = {}, ZERO_RF()
    for (e,), c in val.terms.items():
        if e == 0:
            inhom = c
        else:
            terms[(e - 1,)] = c
    init = {int(k): (_rf(v) if isinstance(v, str) else RationalFunction.constant(v)) for k, v in (initial or {}).items()}
    return QShiftEquation(OrePolynomial(alg, terms), inhom, init, fname)
