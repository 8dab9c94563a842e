"""Expression parser for rational functions, q-hypergeometric terms and operators.

Grammar (loosest binding first)::

    expr    := ['+'|'-'] product (('+'|'-') product)*
    product := unary (('*'|'/'|'**') unary)*
    unary   := '-' unary | power
    power   := atom ('^' exponent)?
    atom    := INT | NAME | NAME '(' args ')' | '(' expr ')'

``**`` is the Ore product.  ``*`` is the commutative product used in
printed operators: coefficients are collected on the left, so ``S(N;q)*N``
means ``N*S(N;q)`` while ``S(N;q)**N`` means ``q*N*S(N;q)``.

Names: ``q`` is ``p^4``, ``i`` is the imaginary unit, ``nu`` and ``ω`` are
aliases of ``v`` and ``w``.  Exponents may be linear or quadratic in the
discrete variables; ``q^(v+1)`` becomes ``q*V`` via the qpower table.

Function calls: ``qpoch(a;q^s;L)``, ``qpoch(a;q^s)`` (infinite),
``poch(a;L)``, ``fact(L)``, ``S(N;q)``, ``S(n)``, ``D(x)``, ``Dq(w)``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .field import VARS, FieldError, I, P, Q, RationalFunction
from .hyperterm import Linear, Poch, Power, QExp, QHyperTerm, QPoch, Quadratic, NotHypergeometric
from .ore import OreAlgebra, OreGenerator, OrePolynomial

__all__ = ["ParseError", "parse_expression", "parse_rf", "parse_term", "parse_operator", "infer_algebra"]

ALIASES = {"nu": "v", "ω": "w", "omega": "w"}

_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+)|(?P<name>[A-Za-z_ω][A-Za-z_0-9ω]*)|(?P<op>\*\*|[-+*/^(),;]))"
)

_GEN_CALL = re.compile(r"\b(S|D|Dq)\(\s*([A-Za-zω_][A-Za-z_0-9ω]*)\s*(;\s*q\s*)?\)")


class ParseError(ValueError):
    def __init__(self, msg: str, pos: int | None = None, text: str | None = None):
        self.pos = pos
        if pos is not None and text is not None:
            msg = f"{msg} at position {pos}: {text[:pos]}<<{text[pos:pos + 12]}"
        super().__init__(msg)


@dataclass
class Tok:
    kind: str
    val: str
    pos: int


def tokenize(text: str) -> list[Tok]:
    out = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError("unexpected character", pos, text)
        kind = m.lastgroup
        out.append(Tok(kind, m.group(kind), m.start(kind)))
        pos = m.end()
    out.append(Tok("end", "", len(text)))
    return out


def _gen_from_call(fn: str, target: str, is_q: bool) -> OreGenerator:
    target = ALIASES.get(target, target)
    if fn == "S":
        return OreGenerator("qshift" if is_q else "shift", target)
    if fn == "D":
        return OreGenerator("derivation", target)
    return OreGenerator("qderivation", target)


def infer_algebra(text: str) -> OreAlgebra | None:
    """Generators in order of first appearance, or ``None`` when there are none."""
    gens = []
    for m in _GEN_CALL.finditer(text):
        g = _gen_from_call(m.group(1), m.group(2), bool(m.group(3)))
        if g not in gens:
            gens.append(g)
    return OreAlgebra(*gens) if gens else None


def _is_rf(v) -> bool:
    return isinstance(v, RationalFunction)


def _as_rf(v) -> RationalFunction | None:
    if isinstance(v, RationalFunction):
        return v
    if isinstance(v, QHyperTerm) and not v.factors:
        return v.coeff
    if isinstance(v, OrePolynomial) and v.is_scalar():
        return v.coefficient(v.algebra.zero_mono)
    return None


def _simplify(v):
    if isinstance(v, QHyperTerm) and not v.factors:
        return v.coeff
    return v


class _Parser:
    def __init__(self, text: str, algebra: OreAlgebra | None, discrete: Sequence[str]):
        self.text = text
        self.toks = tokenize(text)
        self.i = 0
        self.algebra = algebra
        self.discrete = set(discrete) | set(VARS.discrete_names())

    # token helpers -------------------------------------------------------
    @property
    def tok(self) -> Tok:
        return self.toks[self.i]

    def error(self, msg: str, tok: Tok | None = None):
        t = tok or self.tok
        raise ParseError(msg, t.pos, self.text)

    def accept(self, val: str) -> bool:
        if self.tok.kind == "op" and self.tok.val == val:
            self.i += 1
            return True
        return False

    def expect(self, val: str):
        if not self.accept(val):
            self.error(f"expected {val!r}")

    # value arithmetic ---------------------------------------------------------
    def add(self, a, b, sign=1):
        if sign < 0:
            b = self.neg(b)
        ra, rb = _as_rf(a), _as_rf(b)
        if ra is not None and rb is not None and not isinstance(a, OrePolynomial) and not isinstance(b, OrePolynomial):
            return ra + rb
        if isinstance(a, OrePolynomial) or isinstance(b, OrePolynomial):
            return self.to_ore(a) + self.to_ore(b)
        raise ParseError("sums of hypergeometric terms are not single terms; use separate terms")

    def neg(self, a):
        if isinstance(a, QHyperTerm):
            return a * RationalFunction(-1)
        return -a

    def to_ore(self, v) -> OrePolynomial:
        if isinstance(v, OrePolynomial):
            return v
        r = _as_rf(v)
        if r is None:
            raise ParseError("cannot mix hypergeometric terms and operators")
        if self.algebra is None:
            raise ParseError("no operator algebra")
        return self.algebra.scalar(r)

    def mul(self, a, b, ore: bool):
        if isinstance(a, OrePolynomial) or isinstance(b, OrePolynomial):
            A, B = self.to_ore(a), self.to_ore(b)
            if ore:
                return A * B
            out = {}
            for u, x in A.terms.items():
                for v, y in B.terms.items():
                    w = tuple(s + t for s, t in zip(u, v))
                    out[w] = out[w] + x * y if w in out else x * y
            return OrePolynomial(A.algebra, out)
        if _is_rf(a) and _is_rf(b):
            return a * b
        ta = a if isinstance(a, QHyperTerm) else QHyperTerm(coeff=a)
        tb = b if isinstance(b, QHyperTerm) else QHyperTerm(coeff=b)
        return _simplify(ta * tb)

    def div(self, a, b):
        rb = _as_rf(b)
        if isinstance(b, OrePolynomial) and rb is None:
            self.error("division by an operator")
        if isinstance(a, OrePolynomial):
            return a.scale(rb.inverse())
        if rb is not None and _is_rf(a):
            return a / rb
        ta = a if isinstance(a, QHyperTerm) else QHyperTerm(coeff=a)
        tb = b if isinstance(b, QHyperTerm) else QHyperTerm(coeff=b)
        return _simplify(ta / tb)

    def power(self, base, expo: Quadratic, tok: Tok):
        if expo.degree() == 0:
            c = expo.as_dict().get((), Fraction(0))
            if c.denominator == 1:
                n = int(c)
                if isinstance(base, OrePolynomial):
                    if n < 0:
                        self.error("negative operator power", tok)
                    return base ** n
                if isinstance(base, QHyperTerm):
                    return _simplify(base ** n)
                return base ** n
        rb = _as_rf(base)
        if rb is None:
            self.error("symbolic exponent of a non-rational base", tok)
        s = rb.p_power()
        if s is not None:
            # (p^s)^E = q^(s E / 4)
            return _simplify(QHyperTerm([QExp(expo.scale(Fraction(s, 4)))]))
        if expo.degree() > 1:
            self.error("quadratic exponent needs base q", tok)
        L = expo.linear_part()
        if L.const.denominator != 1:
            self.error("fractional exponent", tok)
        return _simplify(QHyperTerm([Power(rb, L)]))

    # grammar -------------------------------------------------------------
    def parse(self):
        v = self.expr()
        if self.tok.kind != "end":
            self.error("unexpected token")
        return v

    def expr(self):
        sign = 1
        if self.accept("+"):
            pass
        elif self.accept("-"):
            sign = -1
        v = self.product()
        if sign < 0:
            v = self.neg(v)
        while True:
            if self.accept("+"):
                v = self.add(v, self.product())
            elif self.accept("-"):
                v = self.add(v, self.product(), -1)
            else:
                return v

    def product(self):
        v = self.unary()
        while True:
            if self.accept("**"):
                v = self.mul(v, self.unary(), True)
            elif self.accept("*"):
                v = self.mul(v, self.unary(), False)
            elif self.accept("/"):
                t = self.tok
                d = self.unary()
                try:
                    v = self.div(v, d)
                except (FieldError, ZeroDivisionError):
                    self.error("division by zero", t)
            else:
                return v

    def unary(self):
        if self.accept("-"):
            return self.neg(self.unary())
        if self.accept("+"):
            return self.unary()
        return self.power_expr()

    def power_expr(self):
        base = self.atom()
        if self.tok.kind == "op" and self.tok.val == "^":
            t = self.tok
            self.i += 1
            expo = self.exponent()
            return self.power(base, expo, t)
        return base

    # exponent sub-language: quadratic forms in discrete variables
    def exponent(self) -> Quadratic:
        if self.accept("-"):
            return self.exponent().scale(-1)
        if self.accept("("):
            v = self.e_expr()
            self.expect(")")
            return v
        return self.e_atom()

    def e_expr(self) -> Quadratic:
        sign = 1
        if self.accept("-"):
            sign = -1
        else:
            self.accept("+")
        v = self.e_product().scale(sign)
        while True:
            if self.accept("+"):
                v = v + self.e_product()
            elif self.accept("-"):
                v = v + self.e_product().scale(-1)
            else:
                return v

    def e_product(self) -> Quadratic:
        v = self.e_unary()
        while True:
            t = self.tok
            if self.accept("*"):
                try:
                    v = v * self.e_unary()
                except ValueError:
                    self.error("exponent of degree > 2", t)
            elif self.accept("/"):
                d = self.e_unary()
                if d.degree() != 0 or not d.terms:
                    self.error("exponent division by a non-constant", t)
                v = v.scale(1 / d.as_dict()[()])
            else:
                return v

    def e_unary(self) -> Quadratic:
        if self.accept("-"):
            return self.e_unary().scale(-1)
        v = self.e_atom()
        if self.accept("^"):
            t = self.tok
            e = self.e_atom()
            if e.degree() or e.as_dict().get((), 0) not in (0, 1, 2):
                self.error("exponent powers must be 0, 1 or 2", t)
            k = int(e.as_dict().get((), 0))
            out = Quadratic.make({(): 1})
            for _ in range(k):
                out = out * v
            v = out
        return v

    def e_atom(self) -> Quadratic:
        t = self.tok
        if t.kind == "num":
            self.i += 1
            return Quadratic.make({(): int(t.val)})
        if t.kind == "name":
            self.i += 1
            name = ALIASES.get(t.val, t.val)
            if name not in self.discrete:
                self.error(f"unknown discrete variable {t.val!r}", t)
            return Quadratic.make({(name,): 1})
        if self.accept("("):
            v = self.e_expr()
            self.expect(")")
            return v
        self.error("bad exponent")

    def args(self) -> list:
        """Arguments separated by ';' or ','; each returned as a token span start index."""
        spans = []
        depth = 0
        start = self.i
        while True:
            t = self.tok
            if t.kind == "end":
                self.error("unterminated call")
            if t.kind == "op" and t.val == "(":
                depth += 1
            elif t.kind == "op" and t.val == ")":
                if depth == 0:
                    spans.append((start, self.i))
                    self.i += 1
                    return spans
                depth -= 1
            elif t.kind == "op" and t.val in ";," and depth == 0:
                spans.append((start, self.i))
                start = self.i + 1
            self.i += 1

    def sub_value(self, span):
        saved = self.i
        end_tok = self.toks[span[1]]
        sub = _Parser.__new__(_Parser)
        sub.text = self.text
        sub.toks = self.toks[span[0]:span[1]] + [Tok("end", "", end_tok.pos)]
        sub.i = 0
        sub.algebra = self.algebra
        sub.discrete = self.discrete
        v = sub.parse()
        self.i = saved
        return v

    def sub_exponent(self, span) -> Quadratic:
        end_tok = self.toks[span[1]]
        sub = _Parser.__new__(_Parser)
        sub.text = self.text
        sub.toks = self.toks[span[0]:span[1]] + [Tok("end", "", end_tok.pos)]
        sub.i = 0
        sub.algebra = self.algebra
        sub.discrete = self.discrete
        v = sub.e_expr()
        if sub.tok.kind != "end":
            sub.error("unexpected token in length")
        return v

    def sub_linear(self, span, tok) -> Linear:
        q = self.sub_exponent(span)
        if q.degree() > 1:
            self.error("length must be linear", tok)
        return q.linear_part()

    def call(self, name: str, tok: Tok):
        self.expect("(")
        spans = self.args()
        if name in ("S", "D", "Dq"):
            toks = [self.toks[j] for j in range(spans[0][0], spans[0][1])]
            if len(toks) != 1 or toks[0].kind != "name":
                self.error("operator target must be a variable name", tok)
            is_q = False
            if len(spans) == 2:
                qt = [self.toks[j] for j in range(spans[1][0], spans[1][1])]
                if len(qt) != 1 or qt[0].val != "q":
                    self.error("only base q is supported for S(var;q)", tok)
                is_q = True
            elif len(spans) != 1:
                self.error("bad operator call", tok)
            g = _gen_from_call(name, toks[0].val, is_q)
            if self.algebra is None:
                self.algebra = OreAlgebra(g)
            if g not in self.algebra.gens:
                self.error(f"{g} is not a generator of {self.algebra}", tok)
            return self.algebra.gen(g)
        if name == "qpoch":
            if len(spans) not in (2, 3):
                self.error("qpoch takes 2 or 3 arguments", tok)
            a = _as_rf(self.sub_value(spans[0]))
            base = _as_rf(self.sub_value(spans[1]))
            if a is None or base is None:
                self.error("qpoch arguments must be rational", tok)
            e = base.p_power()
            if e is None or e == 0:
                self.error("qpoch base must be a power of q", tok)
            length = self.sub_linear(spans[2], tok) if len(spans) == 3 else None
            if length is not None and not length.is_integral():
                self.error("qpoch length must be integer-linear", tok)
            return _simplify(QHyperTerm([QPoch(a, e, length)]))
        if name == "poch":
            if len(spans) != 2:
                self.error("poch takes 2 arguments", tok)
            a = _as_rf(self.sub_value(spans[0]))
            if a is None:
                self.error("poch argument must be rational", tok)
            return _simplify(QHyperTerm([Poch(a, self.sub_linear(spans[1], tok))]))
        if name == "fact":
            if len(spans) != 1:
                self.error("fact takes 1 argument", tok)
            return _simplify(QHyperTerm([Poch(RationalFunction(1), self.sub_linear(spans[0], tok))]))
        self.error(f"unknown function {name!r}", tok)

    def atom(self):
        t = self.tok
        if t.kind == "num":
            self.i += 1
            return RationalFunction(int(t.val))
        if t.kind == "name":
            self.i += 1
            if self.tok.kind == "op" and self.tok.val == "(":
                return self.call(t.val, t)
            name = ALIASES.get(t.val, t.val)
            if name == "q":
                return Q
            if name == "p":
                return P
            if name == "i":
                return I
            if name in ("I", "S", "D", "Dq"):
                self.error(f"reserved name {t.val!r}", t)
            try:
                return RationalFunction.var(name)
            except FieldError as exc:
                self.error(str(exc), t)
        if self.accept("("):
            v = self.expr()
            self.expect(")")
            return v
        self.error("unexpected token")


def parse_expression(text: str, algebra: OreAlgebra | None = None, discrete: Sequence[str] = ()):
    """Parse text into a RationalFunction, QHyperTerm or OrePolynomial.

    When ``algebra`` is omitted and the text mentions operators, the algebra
    consists of the generators in order of first appearance.
    """
    if algebra is None:
        algebra = infer_algebra(text)
    p = _Parser(text, algebra, discrete)
    try:
        return p.parse()
    except NotHypergeometric as exc:
        raise ParseError(str(exc)) from None
    except FieldError as exc:
        raise ParseError(str(exc)) from None


def parse_rf(text: str) -> RationalFunction:
    v = parse_expression(text)
    r = _as_rf(v)
    if r is None:
        raise ParseError(f"not a rational function: {text!r}")
    return r


def parse_term(text: str, discrete: Sequence[str] = ()) -> QHyperTerm:
    v = parse_expression(text, discrete=discrete)
    if isinstance(v, OrePolynomial):
        raise ParseError("expected a term, got an operator")
    if isinstance(v, RationalFunction):
        return QHyperTerm(coeff=v)
    return v


def parse_operator(text: str, algebra: OreAlgebra | None = None) -> OrePolynomial:
    if algebra is None:
        algebra = infer_algebra(text)
        if algebra is None:
            raise ParseError("no operator generators in text; pass an algebra")
    v = parse_expression(text, algebra)
    if not isinstance(v, OrePolynomial):
        r = _as_rf(v)
        if r is None:
            raise ParseError("expected an operator")
        v = algebra.scalar(r)
    return v
