"""Command-line front end.

Every subcommand prints a JSON document ``{"schema": ..., "command": ...,
"ok": ..., "result": ...}``; ``--text`` switches to a plain rendering.
Operator and ideal arguments are either literal text in the parser syntax or
``@path`` naming a JSON file written by an earlier invocation.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from typing import Sequence

from . import closure, genfun, telescope
from .groebner import LeftIdeal
from .guess import qre_guess
from .ore import OreAlgebra, OrePolynomial, ore_reduce
from .parser import ParseError, infer_algebra, parse_expression, parse_operator, parse_rf, parse_term
from .series import HyperSum, expand_sum, residuals

SCHEMA = "qholo/1"

EXIT_OK, EXIT_MATH, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


class MathFailure(Exception):
    pass


def timeout_secs(default: float | None = None) -> float | None:
    raw = os.environ.get("QHOLO_TIMEOUT_SECS")
    if raw is None:
        return default
    try:
        return float(raw)
    except ValueError:
        raise UsageError(f"QHOLO_TIMEOUT_SECS is not a number: {raw!r}") from None


# ---------------------------------------------------------------------------
# argument decoding
# ---------------------------------------------------------------------------


def _load(arg: str):
    """Literal text, or the decoded JSON payload of ``@file``."""
    if not arg.startswith("@"):
        return arg
    path = arg[1:]
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path} is not JSON: {exc}") from None
    if isinstance(data, dict) and "schema" in data:
        if data["schema"] != SCHEMA:
            raise UsageError(f"unsupported schema {data['schema']!r}")
        data = data["result"]
    return data


def _split_list(text: str) -> list[str]:
    text = text.strip()
    if text.startswith("{") and text.endswith("}"):
        text = text[1:-1]
    parts = [p.strip() for p in text.split(",")]
    return [p for p in parts if p]


def _algebra(spec: str | None, *texts: str) -> OreAlgebra | None:
    if spec:
        alg = infer_algebra(spec)
        if alg is None:
            raise UsageError(f"no generators in --algebra {spec!r}")
        return alg
    merged = " ".join(texts)
    return infer_algebra(merged)


def _ideal_texts(arg: str) -> list[str] | dict:
    data = _load(arg)
    if isinstance(data, str):
        stripped = data.strip()
        if stripped.startswith("["):
            try:
                data = json.loads(stripped)
            except json.JSONDecodeError as exc:
                raise UsageError(f"bad JSON list: {exc}") from None
        else:
            return _split_list(data)
    if isinstance(data, list):
        return [str(x) for x in data]
    if isinstance(data, dict):
        return data
    raise UsageError("an ideal must be text, a JSON list of operators or an ideal JSON object")


def _ideals(args: Sequence[str], alg_spec: str | None) -> list[LeftIdeal]:
    raw = [_ideal_texts(a) for a in args]
    texts = [t for r in raw if isinstance(r, list) for t in r]
    alg = _algebra(alg_spec, *texts)
    out = []
    for r in raw:
        if isinstance(r, dict):
            out.append(_ideal_from_json(r))
            continue
        if alg is None:
            raise UsageError("cannot infer the operator algebra; pass --algebra")
        out.append(LeftIdeal([parse_operator(t, alg) for t in r], alg))
    return out


def _ideal_from_json(data) -> LeftIdeal:
    if "gens" in data:
        return LeftIdeal.from_json(data)
    if "telescopers" in data:
        tels = [OrePolynomial.from_json(t) for t in data["telescopers"]]
        return LeftIdeal(tels, tels[0].algebra)
    raise UsageError("JSON object is not an ideal")


def _operator(arg: str, alg: OreAlgebra | None) -> OrePolynomial:
    data = _load(arg)
    if isinstance(data, dict):
        return OrePolynomial.from_json(data, alg)
    return parse_operator(data, alg)


def _term(arg: str, discrete: Sequence[str] = ()):
    data = _load(arg)
    if not isinstance(data, str):
        raise UsageError("terms are given as text")
    return parse_term(data, discrete)


def _gens(spec: str):
    alg = infer_algebra(spec)
    if alg is None:
        raise UsageError(f"no generators in {spec!r}")
    return list(alg.gens)


def _delta(text: str):
    try:
        return parse_operator(text)
    except ParseError:
        return text.strip()


def _rf_map(items: Sequence[str]) -> dict:
    out = {}
    for it in items or ():
        if "=" not in it:
            raise UsageError(f"expected name=value, got {it!r}")
        k, v = it.split("=", 1)
        out[k.strip()] = parse_rf(v)
    return out


def _values(arg: str) -> list:
    data = _load(arg)
    if isinstance(data, str):
        try:
            data = json.loads(data)
        except json.JSONDecodeError:
            data = _split_list(data.strip().strip("[]"))
    if not isinstance(data, list):
        raise UsageError("data must be a list")
    return [parse_rf(str(x)) for x in data]


# ---------------------------------------------------------------------------
# subcommands: each returns (ok, json-result, text)
# ---------------------------------------------------------------------------


def _ideal_out(I: LeftIdeal):
    return I.to_json(), str(I)


def cmd_ann(a):
    t = _term(a.term)
    gens = _gens(a.gens)
    I = closure.annihilator(t, gens)
    js, txt = _ideal_out(I)
    return True, js, txt


def cmd_plus(a):
    I, J = _ideals([a.first, a.second], a.algebra)
    return (True, *_ideal_out(closure.dfinite_plus(I, J)))


def cmd_times(a):
    ideals = _ideals(a.ideals, a.algebra)
    return (True, *_ideal_out(closure.dfinite_times(*ideals)))


def cmd_subst(a):
    (I,) = _ideals([a.ideal], a.algebra)
    subst = {}
    for it in a.map:
        if "=" not in it:
            raise UsageError(f"expected var=expr, got {it!r}")
        k, v = it.split("=", 1)
        subst[k.strip()] = v.strip()
    return (True, *_ideal_out(closure.dfinite_substitute(I, subst)))


def cmd_reduce(a):
    texts = _ideal_texts(a.basis)
    if isinstance(texts, dict):
        G = _ideal_from_json(texts).gens
        alg = G[0].algebra
    else:
        alg = _algebra(a.algebra, a.operator if not a.operator.startswith("@") else "", *texts)
        if alg is None:
            raise UsageError("cannot infer the operator algebra; pass --algebra")
        G = [parse_operator(t, alg) for t in texts]
    P = _operator(a.operator, alg)
    res = ore_reduce(P, G, extended=True)
    if not res.check(P, G):
        raise MathFailure("reduction certificate does not re-multiply")
    js = {
        "remainder": res.remainder.to_json(),
        "unit": res.unit.to_json(),
        "cofactors": [c.to_json() for c in res.cofactors],
    }
    txt = "\n".join(
        [f"remainder: {res.remainder}", f"unit: {res.unit}"] + [f"cofactor {i}: {c}" for i, c in enumerate(res.cofactors)]
    )
    ok = res.remainder.is_zero() if a.expect_zero else True
    return ok, js, txt


def cmd_gb(a):
    (I,) = _ideals([a.ideal], a.algebra)
    G = LeftIdeal(I.gb, I.algebra, is_gb=True)
    js, txt = _ideal_out(G)
    js["leading_monomials"] = [list(m) for m in G.leading_monomials()]
    js["rank"] = G.rank() if G.is_dfinite() else None
    txt += f"\nrank: {js['rank'] if js['rank'] is not None else 'infinite'}"
    return True, js, txt


def cmd_qgosper(a):
    t = _term(a.term)
    R = telescope.qgosper(t, a.k)
    if R is None:
        return False, {"certificate": None}, "not Gosper-summable"
    return True, {"certificate": R.to_json()}, str(R)


def cmd_qzeil(a):
    t = _term(a.term)
    param = _gens(a.param)[0] if "(" in a.param else a.param
    try:
        res = telescope.qzeilberger(t, a.k, param, maxorder=a.maxorder)
    except telescope.TelescopingError as exc:
        raise MathFailure(str(exc)) from None
    return True, res.to_json(), str(res)


def cmd_ct(a):
    t = _term(a.term)
    try:
        res = telescope.ct_hyper(t, _delta(a.delta), _gens(a.params), timeout=timeout_secs())
    except telescope.TelescopingError as exc:
        raise MathFailure(str(exc)) from None
    return True, res.to_json(), str(res)


def cmd_ct_ansatz(a):
    (I,) = _ideals([a.ideal], a.algebra)
    den = parse_rf(a.denominator)
    lower, degree = 0, a.degree
    if a.bounds:
        try:
            lo, hi = a.bounds.split("..")
            lower, degree = int(lo), int(hi)
        except ValueError:
            raise UsageError("--bounds takes LOW..HIGH") from None
    delta = parse_operator(a.delta, I.algebra)
    try:
        res = telescope.ct_ansatz(
            I, delta, _gens(a.params), den, degree=degree, max_order=a.max_order, lower=lower,
            timeout=timeout_secs(1800.0),
        )
    except telescope.TelescopingError as exc:
        raise MathFailure(str(exc)) from None
    return True, res.to_json(), str(res)


def cmd_guess(a):
    data = _values(a.data)
    res = qre_guess(data, maxorder=a.maxorder, maxdegree=a.maxdegree, seq=a.seq, index=a.index)
    if res is None:
        raise MathFailure("no recurrence fits the data")
    js = {"recurrence": res.recurrence.to_json(), "warning": res.message}
    return True, js, str(res)


def _initial_list(items):
    return [parse_rf(x) for x in items or ()]


def _initial_dict(items):
    out = {}
    for it in items or ():
        k, v = it.split("=", 1)
        out[int(k)] = parse_rf(v)
    return out


def cmd_re2se(a):
    rec = genfun.parse_recurrence(a.recurrence, a.seq, a.index, [str(x) for x in (a.initial or [])])
    eq = genfun.qre2se(rec, a.var, a.fname)
    return True, eq.to_json(), eq.to_text()


def cmd_se2re(a):
    eq = genfun.parse_shift_equation(a.equation, a.fname, a.var, {k: str(v) for k, v in _initial_dict(a.initial).items()})
    rec = genfun.qse2re(eq, a.seq, a.index)
    return True, rec.to_json(), rec.to_text()


def cmd_se2de(a):
    eq = genfun.parse_shift_equation(a.equation, a.fname, a.var, {k: str(v) for k, v in _initial_dict(a.initial).items()})
    de = genfun.qse2de(eq, a.out_fname)
    return True, de.to_json(), de.to_text()


def _range(text: str):
    if "=" not in text or ".." not in text:
        raise UsageError(f"ranges look like k=0..inf or k=0..m, got {text!r}")
    idx, rest = text.split("=", 1)
    lo, hi = rest.split("..", 1)
    hi = hi.strip()
    hi_v = None if hi in ("inf", "oo", "") else (int(hi) if hi.lstrip("-").isdigit() else hi)
    return idx.strip(), int(lo), hi_v


def cmd_verify_series(a):
    ranges = [_range(r) for r in a.sum]
    discrete = [r[0] for r in ranges]
    term = _term(a.term, discrete)
    pre = _term(a.prefactor) if a.prefactor else None
    spec = _rf_map(a.specialize)
    s = expand_sum(HyperSum(term, ranges, pre), a.var, a.order, spec or None)
    texts = _ideal_texts(a.operators)
    if isinstance(texts, dict):
        ops = _ideal_from_json(texts).gens
    else:
        alg = _algebra(a.algebra, *texts)
        if alg is None:
            raise UsageError("cannot infer the operator algebra; pass --algebra")
        ops = [parse_operator(t, alg) for t in texts]
    report, ok = [], True
    for P in ops:
        bad = [(k, c) for k, c in residuals(P, s) if not c.is_zero()]
        ok = ok and not bad
        report.append({"operator": str(P), "residuals": [{"exponent": k, "value": str(c)} for k, c in bad]})
    lines = []
    for r in report:
        lines.append(f"{'ok' if not r['residuals'] else 'FAIL'}: {r['operator']}")
        lines.extend(f"  [{a.var}^{x['exponent']}] {x['value']}" for x in r["residuals"])
    return ok, {"order": a.order, "operators": report}, "\n".join(lines)


def cmd_replay(a):
    from .replay import replay

    try:
        rep = replay(a.case)
    except KeyError as exc:
        raise UsageError(str(exc.args[0])) from None
    timings = not a.no_timings
    return rep.ok, rep.to_json(timings), rep.text(timings)


def cmd_eval(a):
    v = parse_expression(a.expression)
    return True, {"type": type(v).__name__, "value": str(v)}, str(v)


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


class _ArgParser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    top = _ArgParser(prog="qholo", description="q-holonomic functions: operators, closure, telescoping, guessing.")
    top.add_argument("--text", action="store_true", help="human-readable output instead of JSON")
    top.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = top.add_subparsers(dest="command", required=True, parser_class=_ArgParser)

    def add(name, fn, help_):
        p = sub.add_parser(name, help=help_)
        p.set_defaults(func=fn)
        p.add_argument("--text", action="store_true", default=argparse.SUPPRESS, help=argparse.SUPPRESS)
        return p

    def alg_opt(p):
        p.add_argument("--algebra", help='generators, e.g. "S(M;q), S(V;q), S(w;q)"')

    p = add("ann", cmd_ann, "annihilating ideal of a hypergeometric term")
    p.add_argument("term")
    p.add_argument("--gens", required=True, help='generators, e.g. "S(M;q), S(V;q)"')

    p = add("plus", cmd_plus, "annihilator of f + g")
    p.add_argument("first")
    p.add_argument("second")
    alg_opt(p)

    p = add("times", cmd_times, "annihilator of a product")
    p.add_argument("ideals", nargs="+")
    alg_opt(p)

    p = add("subst", cmd_subst, "integer-linear substitution, e.g. v=v+m")
    p.add_argument("ideal")
    p.add_argument("map", nargs="+")
    alg_opt(p)

    p = add("reduce", cmd_reduce, "extended left reduction of an operator")
    p.add_argument("operator")
    p.add_argument("basis")
    p.add_argument("--expect-zero", action="store_true", help="exit 1 unless the remainder vanishes")
    alg_opt(p)

    p = add("gb", cmd_gb, "left Groebner basis")
    p.add_argument("ideal")
    alg_opt(p)

    p = add("qgosper", cmd_qgosper, "indefinite q-hypergeometric summation")
    p.add_argument("term")
    p.add_argument("--k", required=True, help="summation variable")

    p = add("qzeil", cmd_qzeil, "q-Zeilberger in one parameter")
    p.add_argument("term")
    p.add_argument("--k", required=True, help="summation variable")
    p.add_argument("--param", required=True, help='parameter name or generator, e.g. "S(V;q)"')
    p.add_argument("--maxorder", type=int, default=4)

    p = add("ct", cmd_ct, "creative telescoping for a hypergeometric summand")
    p.add_argument("term")
    p.add_argument("--delta", required=True, help='e.g. "S(K;q)-1" or "S(k)-1"')
    p.add_argument("--params", required=True, help='e.g. "S(M;q), S(V;q)"')

    p = add("ct-ansatz", cmd_ct_ansatz, "telescoping over an ideal with a given denominator")
    p.add_argument("ideal")
    p.add_argument("--delta", required=True)
    p.add_argument("--params", required=True)
    p.add_argument("--denominator", required=True)
    p.add_argument("--degree", type=int, default=2, help="numerator degree bound in the delta variable")
    p.add_argument("--bounds", help="LOW..HIGH exponents of the delta variable in numerators")
    p.add_argument("--max-order", type=int, default=2)
    alg_opt(p)

    p = add("guess", cmd_guess, "guess a q-recurrence from data")
    p.add_argument("data", help="JSON list of expressions, or @file")
    p.add_argument("--maxorder", type=int, default=2)
    p.add_argument("--maxdegree", type=int, default=2)
    p.add_argument("--seq", default="s")
    p.add_argument("--index", default="n")

    p = add("re2se", cmd_re2se, "recurrence to q-shift equation of the generating function")
    p.add_argument("recurrence")
    p.add_argument("--initial", nargs="*", help="s[0], s[1], ...")
    p.add_argument("--seq", default="s")
    p.add_argument("--index", default="n")
    p.add_argument("--var", default="t")
    p.add_argument("--fname", default="F")

    for name, fn, h in (
        ("se2re", cmd_se2re, "q-shift equation to recurrence of the coefficients"),
        ("se2de", cmd_se2de, "q-shift equation to Jackson q-differential equation"),
    ):
        p = add(name, fn, h)
        p.add_argument("equation")
        p.add_argument("--initial", nargs="*", help="k=value pairs for coefficients of t^k")
        p.add_argument("--var", default="t")
        p.add_argument("--fname", default="F")
        if name == "se2re":
            p.add_argument("--seq", default="s")
            p.add_argument("--index", default="n")
        else:
            p.add_argument("--out-fname", default="f")

    p = add("verify-series", cmd_verify_series, "check operators against a truncated series expansion")
    p.add_argument("operators")
    p.add_argument("--term", required=True)
    p.add_argument("--sum", action="append", default=[], help="range such as j=0..inf or k=0..m; repeatable")
    p.add_argument("--prefactor")
    p.add_argument("--var", required=True)
    p.add_argument("--order", type=int, default=8)
    p.add_argument("--specialize", action="append", default=[], help="name=value, e.g. p=1/7")
    alg_opt(p)

    p = add("replay", cmd_replay, "rerun a worked example against stored results")
    p.add_argument("case")
    p.add_argument("--no-timings", action="store_true")

    p = add("eval", cmd_eval, "parse and print an expression")
    p.add_argument("expression")
    return top


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    out = sys.stdout
    try:
        a = parser.parse_args(argv)
    except UsageError as exc:
        print(f"qholo: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.INFO if a.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        ok, result, text = a.func(a)
        code = EXIT_OK if ok else EXIT_MATH
        error = None
    except UsageError as exc:
        print(f"qholo: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ParseError as exc:
        print(f"qholo: parse error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except MathFailure as exc:
        ok, result, text, code, error = False, None, f"failed: {exc}", EXIT_MATH, str(exc)
    except (ValueError, ArithmeticError) as exc:
        ok, result, text, code, error = False, None, f"failed: {exc}", EXIT_MATH, str(exc)
    if a.text:
        print(text, file=out)
    else:
        doc = {"schema": SCHEMA, "command": a.command, "ok": ok, "result": result}
        if error:
            doc["error"] = error
        json.dump(doc, out, indent=1)
        out.write("\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
