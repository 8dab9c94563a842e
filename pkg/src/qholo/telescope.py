"""Creative telescoping for (q-)hypergeometric summands and ∂-finite ideals.

Conventions.  A telescoping pair ``(P, R)`` for a function ``f`` and the
delta operator ``Δ = S_k - 1`` satisfies

    P f + Δ(R f) = 0,

i.e. ``P + Δ·R`` lies in the annihilator of ``f``; summing over ``k`` with
vanishing boundary terms gives ``P (sum_k f) = 0``.  :func:`qgosper` instead
returns the antidifference certificate ``R`` with ``t = Δ(R t)``.
"""

from __future__ import annotations

import heapq
import logging
import time
from dataclasses import dataclass, field
from typing import Sequence

from .field import VARS, RationalFunction, ZERO_RF, ONE_RF
from .groebner import LeftIdeal
from .hyperterm import QHyperTerm
from .linalg import nullspace
from .ore import OreAlgebra, OreGenerator, OrePolynomial, _divides

__all__ = [
    "TelescopingError",
    "TelescopingResult",
    "qgosper",
    "qzeilberger",
    "ct_hyper",
    "ct_ansatz",
    "denominator_candidates",
]

log = logging.getLogger(__name__)

CONVERGENCE_NOTE = "Assuming appropriate convergence."


class TelescopingError(RuntimeError):
    """Raised when no telescoper exists within the configured bounds."""


@dataclass
class TelescopingResult:
    telescopers: list
    certificates: list
    delta: OrePolynomial | None = None
    bounds: dict = field(default_factory=dict)

    def __iter__(self):
        return iter((self.telescopers, self.certificates))

    def __len__(self):
        return len(self.telescopers)

    def ideal(self) -> LeftIdeal:
        return LeftIdeal(self.telescopers, is_gb=True)

    def verify(self, term: QHyperTerm, kgen: OreGenerator) -> bool:
        """Check ``P t + Δ(R t) = 0`` as a rational identity for every pair."""
        r = term.ratio(kgen, 1)
        for P, R in zip(self.telescopers, self.certificates):
            if isinstance(R, OrePolynomial):
                R = R.terms.get(R.algebra.zero_mono, ZERO_RF()) if R.is_scalar() else None
                if R is None:
                    raise TelescopingError("operator certificates need ideal verification")
            res = term.operator_factor(P) + kgen.sigma(R) * r - R
            if not res.is_zero():
                return False
        return True

    def to_json(self):
        return {
            "telescopers": [P.to_json() for P in self.telescopers],
            "certificates": [R.to_json() for R in self.certificates],
        }

    def __str__(self):
        tel = ", ".join(str(P) for P in self.telescopers)
        cert = ", ".join(str(R) for R in self.certificates)
        return "{{" + tel + "}, {" + cert + "}}"


# ---------------------------------------------------------------------------
# univariate polynomial helpers (coefficients in the remaining variables)
# ---------------------------------------------------------------------------


class _Shift:
    """The summation direction: either K -> qK or k -> k+1."""

    def __init__(self, gen: OreGenerator):
        if gen.kind not in ("qshift", "shift"):
            raise TelescopingError(f"cannot sum along {gen}")
        self.gen = gen
        self.var = gen.target
        self.q = gen.kind == "qshift"

    def sigma(self, a: RationalFunction, h: int = 1) -> RationalFunction:
        return self.gen.sigma(a, h)


def _coeffs(a: RationalFunction, name: str) -> list[RationalFunction]:
    return a.coefficients_in(name) if not a.is_zero() else []


def _ldeg(cs) -> int:
    for i, c in enumerate(cs):
        if not c.is_zero():
            return i
    return 0


def _poly_gcd(a: RationalFunction, b: RationalFunction) -> RationalFunction:
    return RationalFunction._from_parts(a.num.gcd(b.num), a.den.context().constant(1))


def _factors(a: RationalFunction, name: str) -> list[RationalFunction]:
    """Irreducible factors of the numerator that involve ``name``."""
    out = []
    _, facs = a.num.factor()
    for f, _e in facs:
        rf = RationalFunction._from_parts(f, f.context().constant(1))
        if rf.degree(name) > 0:
            out.append(rf)
    return out


def _dispersions(a, b, sh: _Shift) -> list[int]:
    """Integers h >= 0 with gcd(a(x), b(sigma^h x)) nontrivial."""
    name = sh.var
    hs = set()
    for f in _factors(a, name):
        fc = _coeffs(f, name)
        for g in _factors(b, name):
            gc = _coeffs(g, name)
            if len(fc) != len(gc):
                continue
            h = _match_shift(fc, gc, sh)
            if h is not None and h >= 0:
                if _poly_gcd(f, sh.sigma(g, h)).degree(name) > 0:
                    hs.add(h)
    return sorted(hs)


def _match_shift(fc, gc, sh: _Shift) -> int | None:
    d = len(fc) - 1
    if sh.q:
        nz = [j for j in range(d + 1) if not fc[j].is_zero() and not gc[j].is_zero()]
        if len(nz) < 2:
            return None
        j0, j1 = nz[0], nz[-1]
        ratio = (fc[j1] * gc[j0]) / (fc[j0] * gc[j1])
        s = ratio.p_power()
        if s is None or s % (4 * (j1 - j0)):
            return None
        return s // (4 * (j1 - j0))
    if d < 1:
        return None
    diff = fc[d - 1] / fc[d] - gc[d - 1] / gc[d]
    if not diff.is_constant():
        return None
    v = diff.constant_value()
    if not v.is_real():
        return None
    h = v.re / d
    if h.denominator != 1:
        return None
    return int(h)


def _gp_form(r: RationalFunction, sh: _Shift):
    """Split ``r = a/b * c(sigma x)/c(x)`` with the Gosper coprimality condition."""
    one = ONE_RF()
    a = RationalFunction._from_parts(r.num, r.den.context().constant(1))
    b = RationalFunction._from_parts(r.den, r.den.context().constant(1))
    c = one
    for h in _dispersions(a, b, sh):
        while True:
            g = _poly_gcd(a, sh.sigma(b, h))
            if g.degree(sh.var) <= 0:
                break
            a = a / g
            b = b / sh.sigma(g, -h)
            for j in range(1, h + 1):
                c = c * sh.sigma(g, -j)
    return a, b, c


# ---------------------------------------------------------------------------
# parameterized Gosper
# ---------------------------------------------------------------------------


def _common_den(rs: Sequence[RationalFunction], name: str) -> RationalFunction:
    """Least common multiple of the K-dependent parts of the denominators."""
    d = ONE_RF()
    for r in rs:
        if r.is_zero():
            continue
        den = RationalFunction._from_parts(r.den, r.den.context().constant(1))
        if den.degree(name) <= 0:
            continue
        g = _poly_gcd(d, den)
        d = d * (den / g)
    return d


def _top_candidate(ac, bc, sh: _Shift) -> int | None:
    """Degree at which the leading terms of the key equation can cancel."""
    da, db = len(ac) - 1, len(bc) - 1
    if da != db or da < 0:
        return None
    la, lb = ac[-1], bc[-1]
    if sh.q:
        # a_top q^D = b1_top, where b1(x) = b(x/q) is already shifted
        s = (lb / la).p_power()
        if s is None or s % 4:
            return None
        D = s // 4
        return D if D >= 0 else None
    if not (la - lb).is_zero():
        return None
    if da < 1:
        return None
    val = (bc[-2] - ac[-2]) / la
    if not val.is_constant() or not val.constant_value().is_real():
        return None
    D = val.constant_value().re - da
    if D.denominator != 1 or D < 0:
        return None
    return int(D)


def _bottom_candidate(ac, bc, sh: _Shift) -> int | None:
    la, lb = _ldeg(ac), _ldeg(bc)
    if la != lb:
        return None
    s = (bc[lb] / ac[la]).p_power()
    if s is None or s % 4:
        return None
    return s // 4


def _shifted_basis(i: int, sh: _Shift, h: int):
    """Coefficients of sigma^h(x^i) as a polynomial in x (dict power -> value)."""
    if sh.q:
        return {i: _qpow(h * i)}
    # (x + h)^i
    from math import comb

    return {j: RationalFunction(comb(i, j) * h ** (i - j)) for j in range(i + 1)}


def _qpow(e: int) -> RationalFunction:
    from .field import P

    return P ** (4 * e) if e >= 0 else (P ** (-4 * e)).inverse()


def _param_gosper(rhos: Sequence[RationalFunction], r: RationalFunction, sh: _Shift, slack: int = 0):
    """Solve ``sum_a c_a rho_a t = Δ(R t)`` for constants ``c`` free of the summation variable.

    Returns a list of ``(c_vector, R)`` spanning the solution space projected to
    nonzero ``c``.
    """
    name = sh.var
    d = _common_den(rhos, name)
    ps = [rho * d for rho in rhos]
    # t' = t/d has ratio r * d / sigma(d)
    rp = r * d / sh.sigma(d)
    a, b, c = _gp_form(rp, sh)
    b1 = sh.sigma(b, -1)
    ac, bc = _coeffs(a, name), _coeffs(b1, name)
    cps = [c * pp for pp in ps]
    cpc = [_coeffs(x, name) for x in cps]
    nzc = [x for x in cpc if any(not y.is_zero() for y in x)]
    deg_cp = max((len(x) - 1 for x in nzc), default=-1)
    ldeg_cp = min((_ldeg(x) for x in nzc), default=0)
    da, db = len(ac) - 1, len(bc) - 1
    hi = deg_cp - max(da, db)
    if da == db and not sh.q:
        hi = deg_cp - da + 1
    cand = _top_candidate(ac, bc, sh)
    if cand is not None:
        hi = max(hi, cand)
    hi += slack
    if sh.q:
        lo = ldeg_cp - min(_ldeg(ac), _ldeg(bc))
        cb = _bottom_candidate(ac, bc, sh)
        if cb is not None:
            lo = min(lo, cb)
        lo = min(lo, 0) - slack
    else:
        lo = 0
    xs = list(range(lo, hi + 1)) if hi >= lo else []
    npar = len(rhos)
    ncols = npar + len(xs)
    rows: dict[int, list] = {}

    def add(power, col, val):
        if val.is_zero():
            return
        row = rows.get(power)
        if row is None:
            row = [ZERO_RF() for _ in range(ncols)]
            rows[power] = row
        row[col] = row[col] + val

    # - sum_a c_a c p_a
    for ai, coeffs in enumerate(cpc):
        for j, v in enumerate(coeffs):
            add(j, ai, -v)
    # a(x) X(sigma x) - b(sigma^-1 x) X(x)
    for xi, i in enumerate(xs):
        col = npar + xi
        if sh.q:
            f = _qpow(i)
            for j, v in enumerate(ac):
                add(j + i, col, v * f)
            for j, v in enumerate(bc):
                add(j + i, col, -v)
        else:
            sb = _shifted_basis(i, sh, 1)
            for j, v in enumerate(ac):
                for e, w in sb.items():
                    add(j + e, col, v * w)
            for j, v in enumerate(bc):
                add(j + i, col, -v)
    A = [rows[k] for k in sorted(rows)]
    if not A:
        ker = [[ONE_RF() if i == j else ZERO_RF() for i in range(ncols)] for j in range(ncols)]
    else:
        ker = nullspace(A, ncols)
    out = []
    xvar = RationalFunction.var(name)
    for v in ker:
        cvec = v[:npar]
        if all(x.is_zero() for x in cvec):
            continue
        X = ZERO_RF()
        for xi, i in enumerate(xs):
            if not v[npar + xi].is_zero():
                X = X + v[npar + xi] * (xvar ** i if i >= 0 else (xvar ** (-i)).inverse())
        R = b1 * X / (c * d)
        out.append((cvec, R))
    return out


def qgosper(term: QHyperTerm, k: str | OreGenerator) -> RationalFunction | None:
    """Rational ``R`` with ``t(k) = R(k+1) t(k+1) - R(k) t(k)``, or ``None``."""
    gen = _sum_gen(k, term)
    sh = _Shift(gen)
    r = term.ratio(gen, 1)
    sols = _param_gosper([ONE_RF()], r, sh)
    if not sols:
        return None
    cvec, R = sols[0]
    return R / cvec[0]


def _is_q_term(term: QHyperTerm | None, discrete: str) -> bool:
    from .hyperterm import QExp, QPoch

    if term is None:
        return True
    big = VARS.qpower_of(discrete)
    if big is not None and big in term.coefficient_vars():
        return True
    return any(isinstance(f, (QPoch, QExp)) for f in term.factors)


def _sum_gen(k, term: QHyperTerm | None = None) -> OreGenerator:
    """Generator for a summation/parameter name.

    Upper-case q-power names (``K``) give q-shifts; a discrete name (``k``)
    gives a q-shift when the term is of q-type and an ordinary shift otherwise.
    """
    if isinstance(k, OreGenerator):
        return k
    if isinstance(k, OrePolynomial):
        gens = [g for i, g in enumerate(k.algebra.gens) if k.degree(g) > 0]
        if len(gens) != 1:
            raise TelescopingError("delta must involve exactly one generator")
        return gens[0]
    VARS.ensure(k)
    if VARS.kind(k) == "qpower":
        return OreGenerator("qshift", k)
    big = VARS.qpower_of(k)
    if big is not None and _is_q_term(term, k):
        return OreGenerator("qshift", big)
    if big is None and term is not None and _is_q_term(term, k):
        # plain continuous variable of a q-term (t, w): q-shift it
        return OreGenerator("qshift", k)
    return OreGenerator("shift", k)


def _param_gen(x, term: QHyperTerm | None = None) -> OreGenerator:
    if isinstance(x, OreGenerator):
        return x
    return _sum_gen(x, term)


def _scaled(P: OrePolynomial, R: RationalFunction):
    """Normalize the telescoper to primitive form and rescale the certificate alike."""
    Pn = P.primitive()
    lead = P.terms[P.lm()]
    u = Pn.terms[Pn.lm()] / lead
    return Pn, R * u


def ct_hyper(
    term: QHyperTerm,
    delta,
    params: Sequence,
    max_monomials: int = 40,
    slack: int = 0,
    timeout: float | None = None,
) -> TelescopingResult:
    """Telescoper ideal of a hypergeometric summand, as a Gröbner basis in ``params``."""
    kgen = _sum_gen(delta, term)
    sh = _Shift(kgen)
    pgens = [_param_gen(g, term) for g in params]
    alg = OreAlgebra(*pgens)
    n = alg.nvars
    r = term.ratio(kgen, 1)
    start = time.monotonic()

    rho_cache: dict[tuple, RationalFunction] = {}

    def rho(m):
        if m not in rho_cache:
            rho_cache[m] = term.operator_factor(alg.monomial(m))
        return rho_cache[m]

    zero = alg.zero_mono
    heap = [(OreAlgebra.key(zero), zero)]
    seen = {zero}
    stair: list[tuple] = []
    lms: list[tuple] = []
    tels: list[OrePolynomial] = []
    certs: list[RationalFunction] = []
    tried = 0
    while heap:
        if _directions_closed(lms, n):
            break
        _, m = heapq.heappop(heap)
        if any(_divides(l, m) for l in lms):
            continue
        tried += 1
        if tried > max_monomials:
            raise TelescopingError(
                f"no closed telescoper ideal within {max_monomials} ansatz monomials (found {len(tels)})"
            )
        if timeout is not None and time.monotonic() - start > timeout:
            raise TelescopingError(f"timeout after {timeout} s (found {len(tels)} telescopers)")
        support = stair + [m]
        sols = _param_gosper([rho(b) for b in support], r, sh, slack=slack)
        sol = next((s for s in sols if not s[0][-1].is_zero()), None)
        if sol is None:
            stair.append(m)
            for i in range(n):
                nxt = tuple(e + (1 if j == i else 0) for j, e in enumerate(m))
                if nxt not in seen:
                    seen.add(nxt)
                    heapq.heappush(heap, (OreAlgebra.key(nxt), nxt))
            continue
        cvec, Rp = sol
        lead = cvec[-1]
        terms = {b: cv / lead for b, cv in zip(support, cvec) if not cv.is_zero()}
        P = OrePolynomial(alg, terms)
        # P t = Δ(R' t)  =>  P + Δ·(-R') annihilates t
        P, R = _scaled(P, -Rp / lead)
        tels.append(P)
        certs.append(R)
        lms.append(m)
    order = sorted(range(len(tels)), key=lambda i: OreAlgebra.key(tels[i].lm()))
    log.info(CONVERGENCE_NOTE)
    kalg = OreAlgebra(kgen)
    return TelescopingResult(
        [tels[i] for i in order],
        [certs[i] for i in order],
        kalg.monomial((1,)) - kalg.one(),
        {"max_monomials": max_monomials, "slack": slack},
    )


def _directions_closed(lms, n) -> bool:
    for i in range(n):
        if not any(m[i] > 0 and all(m[j] == 0 for j in range(n) if j != i) for m in lms):
            return False
    return True


def qzeilberger(term: QHyperTerm, k, param, maxorder: int = 4, slack: int = 0) -> TelescopingResult:
    """Minimal-order telescoper in a single parameter (q-Zeilberger)."""
    kgen = _sum_gen(k, term)
    pgen = _param_gen(param, term)
    sh = _Shift(kgen)
    alg = OreAlgebra(pgen)
    r = term.ratio(kgen, 1)
    rhos = []
    for order in range(maxorder + 1):
        rhos.append(term.operator_factor(alg.monomial((order,))))
        sols = _param_gosper(rhos, r, sh, slack=slack)
        sol = next((s for s in sols if not s[0][-1].is_zero()), None)
        if sol is None:
            continue
        cvec, Rp = sol
        lead = cvec[-1]
        P = OrePolynomial(alg, {(j,): cv / lead for j, cv in enumerate(cvec) if not cv.is_zero()})
        P, R = _scaled(P, -Rp / lead)
        log.info(CONVERGENCE_NOTE)
        kalg = OreAlgebra(kgen)
        return TelescopingResult([P], [R], kalg.monomial((1,)) - kalg.one(), {"maxorder": maxorder})
    raise TelescopingError(f"order exceeded: no telescoper of order <= {maxorder}")


# ---------------------------------------------------------------------------
# ansatz telescoping over a ∂-finite ideal
# ---------------------------------------------------------------------------


def denominator_candidates(ideal: LeftIdeal, delta) -> list[RationalFunction]:
    """Irreducible factors of leading coefficients that involve the delta variable."""
    kgen = _sum_gen(delta)
    name = kgen.target
    seen: list[RationalFunction] = []
    for g in ideal.gb:
        for c in g.terms.values():
            for part in (c.num, c.den):
                rf = RationalFunction._from_parts(part, part.context().constant(1))
                if rf.degree(name) <= 0:
                    continue
                for f in _factors(rf, name):
                    if not any(f == s or (f / s).is_constant() for s in seen):
                        seen.append(f)
    return seen


def ct_ansatz(
    ideal: LeftIdeal,
    delta,
    params: Sequence,
    denominator: RationalFunction,
    degree: int,
    max_order: int = 2,
    lower: int = 0,
    timeout: float | None = None,
) -> TelescopingResult:
    """Telescoping by undetermined coefficients modulo a ∂-finite ideal.

    Ansatz: ``P = sum_alpha c_alpha d^alpha`` over parameter monomials of total
    degree ``<= max_order`` and certificate ``R = sum_b (u_b(x)/denominator) b``
    over the staircase of ``ideal``, where ``u_b`` is a Laurent polynomial in
    the delta variable with exponents ``lower..degree``.  The normal form of
    ``P + Δ·R`` is forced to vanish coefficientwise.
    """
    from .closure import FiniteModule

    start = time.monotonic()
    kgen = _sum_gen(delta)
    alg = ideal.algebra
    ki = alg.index(kgen)
    pgens = [_param_gen(g) for g in params]
    palg = OreAlgebra(*pgens)
    pidx = [alg.index(g) for g in pgens]
    mod = FiniteModule.from_ideal(ideal)
    nst = mod.dim
    xname = kgen.target
    xvar = RationalFunction.var(xname)
    den = denominator

    def expired():
        return timeout is not None and time.monotonic() - start > timeout

    # parameter monomials in increasing order
    import itertools

    pmonos = [m for m in itertools.product(range(max_order + 1), repeat=len(pgens)) if sum(m) <= max_order]
    pmonos.sort(key=OreAlgebra.key)

    def embed(pm):
        full = [0] * alg.nvars
        for i, e in zip(pidx, pm):
            full[i] = e
        return tuple(full)

    pvecs = [mod.act_poly(alg.monomial(embed(pm))) for pm in pmonos]
    if expired():
        raise TelescopingError("timeout while building the ansatz")
    # columns: c_alpha, then u_{b,i}
    powers = list(range(lower, degree + 1))
    ucols = [(b, i) for b in range(nst) for i in powers]
    ncols = len(pmonos) + len(ucols)
    # Δ applied to e_b scaled by x^i/den:  S(x^i/den e_b) - x^i/den e_b
    rows_by_coord: list[list[RationalFunction]] = [[ZERO_RF() for _ in range(ncols)] for _ in range(nst)]
    for ci, v in enumerate(pvecs):
        for j in range(nst):
            rows_by_coord[j][ci] = v[j]
    for ui, (b, i) in enumerate(ucols):
        mono = (xvar ** i if i >= 0 else (xvar ** (-i)).inverse()) / den
        e = [ZERO_RF() for _ in range(nst)]
        e[b] = mono
        img = mod.act(ki, e)
        col = len(pmonos) + ui
        for j in range(nst):
            val = img[j] - e[j]
            if not val.is_zero():
                rows_by_coord[j][col] = val
        if expired():
            raise TelescopingError("timeout while building the ansatz")
    # each coordinate is a rational function in x; clear denominators and split by powers of x
    eqs = []
    for row in rows_by_coord:
        nz = [c for c in row if not c.is_zero()]
        if not nz:
            continue
        L = _common_den(nz + [ONE_RF()], xname)
        for c in nz:
            Lc = RationalFunction._from_parts(c.den, c.den.context().constant(1))
            L = L * (Lc / _poly_gcd(L, Lc)) if Lc.degree(xname) > 0 else L
        cols = [(c * L) for c in row]
        polys = [_coeffs_laurent(c, xname) for c in cols]
        powers_seen = set()
        for pc in polys:
            powers_seen.update(pc)
        for pw in sorted(powers_seen):
            eqs.append([pc.get(pw, ZERO_RF()) for pc in polys])
        if expired():
            raise TelescopingError("timeout while building the linear system")
    ker = nullspace(eqs, ncols) if eqs else []
    if expired():
        raise TelescopingError("timeout while solving the linear system")
    npm = len(pmonos)
    cands = [v for v in ker if any(not x.is_zero() for x in v[:npm])]
    if not cands:
        raise TelescopingError(
            f"no telescoper with parameter order <= {max_order} and numerator degree {lower}..{degree}"
        )
    stair = ideal.staircase()
    tels, certs = _echelon_telescopers(cands, npm, pmonos, palg, alg, stair, ucols, den, xvar)
    return TelescopingResult(tels, certs, None, {"degree": degree, "max_order": max_order, "lower": lower})


def _coeffs_laurent(c: RationalFunction, name: str) -> dict[int, RationalFunction]:
    if c.is_zero():
        return {}
    dd = c.den_degree(name)
    if dd:
        # denominator is a pure power of the variable after clearing
        shifted = c * RationalFunction.var(name) ** dd
        return {i - dd: v for i, v in enumerate(shifted.coefficients_in(name)) if not v.is_zero()}
    return {i: v for i, v in enumerate(c.coefficients_in(name)) if not v.is_zero()}


def _echelon_telescopers(cands, npm, pmonos, palg, alg, stair, ucols, den, xvar):
    """Turn kernel vectors into a reduced set of telescopers with distinct leading monomials."""
    # Gaussian elimination on the c-part, pivoting on the largest monomial.
    vecs = [list(v) for v in cands]
    order = sorted(range(npm), key=lambda i: OreAlgebra.key(pmonos[i]), reverse=True)
    basis = []
    for col in order:
        piv = next((v for v in vecs if not v[col].is_zero()), None)
        if piv is None:
            continue
        vecs.remove(piv)
        inv = piv[col].inverse()
        piv = [x * inv for x in piv]
        vecs = [[a - v[col] * b for a, b in zip(v, piv)] if not v[col].is_zero() else v for v in vecs]
        basis = [[a - w[col] * b for a, b in zip(w, piv)] if not w[col].is_zero() else w for w in basis]
        basis.append(piv)
    tels, certs = [], []
    for v in basis:
        P = OrePolynomial(palg, {pmonos[i]: v[i] for i in range(npm) if not v[i].is_zero()})
        Rterms: dict = {}
        for ui, (b, i) in enumerate(ucols):
            c = v[npm + ui]
            if c.is_zero():
                continue
            x_i = xvar ** i if i >= 0 else (xvar ** (-i)).inverse()
            Rterms[stair[b]] = Rterms.get(stair[b], ZERO_RF()) + c * x_i / den
        tels.append(P)
        certs.append(OrePolynomial(alg, Rterms))
    # keep only telescopers with minimal leading monomials
    keep = [i for i, t in enumerate(tels) if not any(j != i and _divides(s.lm(), t.lm()) for j, s in enumerate(tels))]
    keep.sort(key=lambda i: OreAlgebra.key(tels[i].lm()))
    out_t, out_c = [], []
    for i in keep:
        Pn = tels[i].primitive()
        u = Pn.terms[Pn.lm()] / tels[i].terms[tels[i].lm()]
        out_t.append(Pn)
        out_c.append(certs[i].scale(u))
    return out_t, out_c
