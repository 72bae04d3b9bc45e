"""Command-line interface and descriptor files.

A descriptor is a UTF-8 text file of ``key value`` lines; ``#`` starts a
comment.  Keys:

    digits 30
    weight 1
    lambda 0 1
    sign 1                      # or: unknown
    conductor 4                 # or: A <positive real>
    pole 0 sqrt(pi)/2           # repeatable "location residue"; residue may be unknown
    growth 0
    coeffs builtin:dedekind-quadratic:-4
    dual_coeffs file:dual.txt   # optional, with dual_conductor / dual_A

Coefficient sources: builtin:one, builtin:dirichlet:M:v1,...,vM,
builtin:dedekind-quadratic:D, builtin:tau, file:PATH (one a_n per line) and
eulerfile:PATH (lines "p c_1 ... c_r" for the local factor 1/(1 + c_1 p^-s + ...)).
Numeric values accept rationals, decimals, ``a+bi`` and expressions in pi, e,
sqrt, log, exp.
"""

from __future__ import annotations

import argparse
import ast
import csv
import logging
import operator
import sys
from fractions import Fraction
from pathlib import Path

import mpmath
from mpmath import mp

from .coeffs import (
    DedekindQuadraticProvider,
    DirichletCharacterProvider,
    EulerProductProvider,
    ListProvider,
    OneProvider,
    TauProvider,
    conjugate_provider,
)
from .errors import LFunctionError, ParseError, ValidationError
from .lseries import UNKNOWN, LFunctionDescriptor, PoleReport, feq_residual, l_value
from .numerics import Precision, complex_from_string
from .solver import solve_bad_prime, solve_sign_residues

__all__ = ["load_descriptor", "parse_value", "main", "cmd_check", "cmd_value", "cmd_solve", "cmd_table"]

KEYS = {
    "digits", "weight", "lambda", "sign", "conductor", "A", "pole", "growth", "coeffs",
    "dual_coeffs", "dual_conductor", "dual_A", "name",
}

DEFAULT_DIGITS = 30

# --- value expressions --------------------------------------------------------

_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv, ast.Pow: operator.pow}
_FUNCS = {"sqrt": mpmath.sqrt, "log": mpmath.log, "exp": mpmath.exp, "gamma": mpmath.gamma}


def _eval_node(node):
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) and not isinstance(node.value, bool):
        return mpmath.mpf(node.value) if isinstance(node.value, int) else mpmath.mpf(repr(node.value))
    if isinstance(node, ast.Name):
        if node.id == "pi":
            return +mp.pi
        if node.id == "e":
            return +mp.e
        if node.id in ("i", "I", "j"):
            return mpmath.mpc(0, 1)
        raise ValueError(f"unknown name {node.id!r}")
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        return _BINOPS[type(node.op)](_eval_node(node.left), _eval_node(node.right))
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        v = _eval_node(node.operand)
        return -v if isinstance(node.op, ast.USub) else v
    if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and node.func.id in _FUNCS and len(node.args) == 1:
        return _FUNCS[node.func.id](_eval_node(node.args[0]))
    raise ValueError("unsupported expression")


def parse_value(text: str, exact: bool = False):
    """A number from a descriptor: exact Fraction when ``exact`` and rational, else mpmath."""
    text = text.strip()
    if exact:
        try:
            value = Fraction(text)
            return int(value) if value.denominator == 1 else value
        except (ValueError, ZeroDivisionError):
            pass
    try:
        if text.endswith(("i", "j")) and not any(f in text for f in ("pi", "sqrt", "(")):
            return complex_from_string(text)
        expr = text.replace("^", "**")
        tree = ast.parse(expr, mode="eval")
        return _eval_node(tree.body)
    except (ValueError, SyntaxError, TypeError, ZeroDivisionError) as exc:
        raise ValueError(f"cannot parse number {text!r}: {exc}") from None


# --- descriptor files ----------------------------------------------------------


def _read_pairs(path):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from None
    pairs = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split(None, 1)
        key = parts[0]
        if key not in KEYS:
            raise ParseError(f"unknown key {key!r}", lineno)
        if len(parts) < 2:
            raise ParseError(f"key {key!r} needs a value", lineno)
        pairs.append((key, parts[1].strip(), lineno))
    return pairs


def _provider(spec: str, base_dir: Path, lineno: int):
    if spec.startswith("builtin:"):
        rest = spec[len("builtin:"):]
        if rest == "one":
            return OneProvider(), 0.0
        if rest == "tau":
            return TauProvider(), 6.0
        if rest.startswith("dedekind-quadratic:"):
            try:
                D = int(rest.split(":", 1)[1])
                return DedekindQuadraticProvider(D), 0.5
            except ValueError as exc:
                raise ParseError(f"bad discriminant: {exc}", lineno) from None
        if rest.startswith("dirichlet:"):
            fields = rest.split(":")
            if len(fields) != 3:
                raise ParseError("expected builtin:dirichlet:M:v1,...,vM", lineno)
            try:
                M = int(fields[1])
                values = [parse_value(v, exact=True) for v in fields[2].split(",")]
                return DirichletCharacterProvider(M, values), 0.0
            except ValueError as exc:
                raise ParseError(str(exc), lineno) from None
        raise ParseError(f"unknown builtin coefficients {spec!r}", lineno)
    if spec.startswith("file:"):
        return ListProvider.from_file(base_dir / spec[len("file:"):]), 0.0
    if spec.startswith("eulerfile:"):
        return EulerProductProvider.from_file(base_dir / spec[len("eulerfile:"):]), 0.0
    raise ParseError(f"unknown coefficient source {spec!r}", lineno)


def load_descriptor(path, digits: int | None = None):
    """Parse and validate a descriptor file; returns (descriptor, digits)."""
    path = Path(path)
    pairs = _read_pairs(path)
    file_digits = None
    for key, value, lineno in pairs:
        if key == "digits":
            try:
                file_digits = int(value)
            except ValueError:
                raise ParseError(f"digits must be an integer, got {value!r}", lineno) from None
            if file_digits < 1:
                raise ParseError("digits must be positive", lineno)
    digits = digits or file_digits or DEFAULT_DIGITS
    prec = Precision(digits)
    fields: dict = {"poles": []}
    seen = set()
    with mp.workdps(prec.working_digits + 20):
        for key, value, lineno in pairs:
            if key in seen and key != "pole":
                raise ParseError(f"key {key!r} given twice", lineno)
            seen.add(key)
            try:
                if key == "digits":
                    continue
                if key == "weight":
                    fields["weight"] = parse_value(value, exact=True)
                elif key == "lambda":
                    fields["lambdas"] = tuple(parse_value(v, exact=True) for v in value.split())
                elif key == "sign":
                    fields["sign"] = UNKNOWN if value.lower() == "unknown" else parse_value(value, exact=True)
                elif key in ("conductor", "A", "dual_conductor", "dual_A"):
                    v = parse_value(value, exact=True)
                    if mpmath.mpmathify(v) <= 0:
                        raise ValidationError(f"{key} must be positive (Assumption 2.2)")
                    fields[key] = v
                elif key == "pole":
                    parts = value.split(None, 1)
                    if len(parts) != 2:
                        raise ParseError("pole needs a location and a residue", lineno)
                    loc = parse_value(parts[0], exact=True)
                    res = UNKNOWN if parts[1].lower() == "unknown" else parse_value(parts[1], exact=True)
                    fields["poles"].append((loc, res))
                elif key == "growth":
                    fields["growth"] = float(parse_value(value))
                elif key == "name":
                    fields["name"] = value
                elif key == "coeffs":
                    fields["coeffs"], fields["_growth"] = _provider(value, path.parent, lineno)
                elif key == "dual_coeffs":
                    fields["dual_coeffs"], _ = _provider(value, path.parent, lineno)
            except ValueError as exc:
                if isinstance(exc, (ParseError, ValidationError)):
                    if isinstance(exc, ParseError) and exc.line is None:
                        raise ParseError(str(exc), lineno) from None
                    raise
                raise ParseError(str(exc), lineno) from None
        for required in ("weight", "lambdas", "coeffs"):
            if required not in fields:
                raise ParseError(f"missing key {'lambda' if required == 'lambdas' else required!r}")
        if ("conductor" in fields) == ("A" in fields):
            raise ParseError("give exactly one of 'conductor' and 'A'")
        if "dual_conductor" in fields and "dual_A" in fields:
            raise ParseError("give at most one of 'dual_conductor' and 'dual_A'")
        growth = fields.pop("_growth")
        coeffs = fields["coeffs"]
        dual = fields.get("dual_coeffs")
        if dual is None and isinstance(coeffs, DirichletCharacterProvider):
            if any(not isinstance(v, (int, Fraction)) and mpmath.im(v) != 0 for v in coeffs.values):
                dual = conjugate_provider(coeffs)
        dual_A = fields.get("dual_A")
        if "dual_conductor" in fields:
            d = len(fields["lambdas"])
            dual_A = mpmath.sqrt(mpmath.mpmathify(fields["dual_conductor"])) / mp.pi ** (mpmath.mpf(d) / 2)
        desc = LFunctionDescriptor(
            coeffs=coeffs,
            lambdas=fields["lambdas"],
            weight=fields["weight"],
            sign=fields.get("sign", 1),
            A=fields.get("A"),
            conductor=fields.get("conductor"),
            poles=tuple(fields["poles"]),
            growth=fields.get("growth", growth),
            dual_coeffs=dual,
            dual_A=dual_A,
            name=fields.get("name", path.stem),
        )
    return desc, digits


# --- formatting -------------------------------------------------------------------


def _fmt(x, digits: int) -> str:
    x = mpmath.mpmathify(x)
    if isinstance(x, mpmath.mpc):
        re = mpmath.nstr(x.real, digits, strip_zeros=False)
        im = mpmath.nstr(abs(x.imag), digits, strip_zeros=False)
        sign = "-" if x.imag < 0 else "+"
        return f"{re} {sign} {im}i"
    return mpmath.nstr(x, digits, strip_zeros=False)


def _label(s) -> str:
    s = mpmath.mpmathify(s)
    if isinstance(s, mpmath.mpc) and s.imag != 0:
        sign = "-" if s.imag < 0 else "+"
        return f"{mpmath.nstr(s.real, 12)} {sign} {mpmath.nstr(abs(s.imag), 12)}i"
    return mpmath.nstr(mpmath.re(s), 12)


def _err(x) -> str:
    return mpmath.nstr(mpmath.mpmathify(x), 2)


# --- commands -----------------------------------------------------------------------


def cmd_check(desc, digits: int, t_values, out=None) -> int:
    out = out or sys.stdout
    prec = Precision(digits)
    tol = mpmath.mpf(10) ** (-digits + 3)
    ok = True
    with prec.workdps():
        for t in t_values:
            t = parse_value(t) if isinstance(t, str) else mpmath.mpmathify(t)
            res = feq_residual(desc, t, prec)
            passed = res < tol
            ok = ok and passed
            print(f"t = {mpmath.nstr(t, 10)}  residual = {_err(res)}  {'PASS' if passed else 'FAIL'}", file=out)
    print("PASS" if ok else "FAIL", file=out)
    return 0 if ok else 1


def cmd_value(desc, digits: int, s, k: int = 0, out=None) -> int:
    out = out or sys.stdout
    prec = Precision(digits)
    with prec.workdps():
        s = parse_value(s) if isinstance(s, str) else mpmath.mpmathify(s)
        rep = l_value(desc, s, k, prec)
    label = "L" + "'" * k if k <= 3 else f"L^({k})"
    if isinstance(rep, PoleReport):
        print(f"{label}({_label(s)}) : pole of order {rep.order}, residue {_fmt(rep.residue, digits)}", file=out)
        return 0
    print(f"{label}({_label(s)}) = {_fmt(rep.value, digits)} +/- {_err(rep.est_error)}", file=out)
    return 0


def _parse_unknowns(spec: str):
    sign = residues = False
    prime = None
    for item in spec.split(","):
        item = item.strip()
        if item == "sign":
            sign = True
        elif item == "residues":
            residues = True
        elif item.startswith("coeffs:"):
            opts = dict(part.split("=", 1) for part in item.split(":")[1:] if "=" in part)
            try:
                prime = (int(opts["p"]), int(opts.get("K", "1")))
            except (KeyError, ValueError):
                raise ParseError(f"expected coeffs:p=P:K=K, got {item!r}") from None
        elif item:
            raise ParseError(f"unknown item {item!r} in --unknown")
    return sign, residues, prime


def cmd_solve(desc, digits: int, spec: str, out=None) -> int:
    out = out or sys.stdout
    prec = Precision(digits)
    sign, residues, prime = _parse_unknowns(spec)
    if sign:
        desc = desc.replace(sign=UNKNOWN)
    if residues:
        desc = desc.replace(poles=tuple((p, UNKNOWN) for p, _ in desc.poles))
    ok = True
    if desc.unknowns():
        result = solve_sign_residues(desc, None, prec)
        for name, value in result.values.items():
            print(f"{name} = {_fmt(value, digits)}", file=out)
        print(f"condition = {mpmath.nstr(result.condition, 4)}  lsq residual = {_err(result.residual)}", file=out)
        for r in result.verification:
            print(f"verification residual = {_err(r)}", file=out)
        ok = result.verified
        desc = result.descriptor
    if prime is not None:
        p, K = prime
        result = solve_bad_prime(desc, p, K, None, prec, integer_coeffs=desc.coeffs.integral)
        for n, value in result.values.items():
            shown = "undetermined" if value is None else (str(value) if isinstance(value, int) else _fmt(value, digits))
            print(f"a_{n} = {shown}", file=out)
        for r in result.verification:
            print(f"verification residual = {_err(r)}", file=out)
        ok = ok and result.verified
    print("verified" if ok else "NOT verified", file=out)
    return 0 if ok else 1


def cmd_table(desc, digits: int, s_from, s_to, steps: int, out_path=None, k: int = 0, out=None) -> int:
    out = out or sys.stdout
    prec = Precision(digits)
    if steps < 1:
        raise ParseError("--steps must be at least 1")
    rows = []
    with prec.workdps():
        a = parse_value(s_from) if isinstance(s_from, str) else mpmath.mpmathify(s_from)
        b = parse_value(s_to) if isinstance(s_to, str) else mpmath.mpmathify(s_to)
        for i in range(steps + 1):
            s = a + (b - a) * i / steps if steps else a
            rep = l_value(desc, s, k, prec)
            s = mpmath.mpc(s)
            if isinstance(rep, PoleReport):
                rows.append([_num(s.real, digits), _num(s.imag, digits), "inf", "inf", "nan"])
                continue
            v = mpmath.mpc(rep.value)
            rows.append([_num(s.real, digits), _num(s.imag, digits), _num(v.real, digits), _num(v.imag, digits),
                         mpmath.nstr(rep.est_error, 3)])
    handle = open(out_path, "w", newline="", encoding="utf-8") if out_path else out
    try:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["re(s)", "im(s)", "re(L)", "im(L)", "est_error"])
        writer.writerows(rows)
    finally:
        if out_path:
            handle.close()
    return 0


def _num(x, digits: int) -> str:
    return mpmath.nstr(x, digits) if x != 0 else "0"


# --- entry point --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="motivic-lfunc", description="High-precision motivic L-functions")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("descriptor", help="descriptor file")
        p.add_argument("--digits", type=int, default=None, help="target decimal digits")

    p = sub.add_parser("check", help="verify the functional equation at given t")
    common(p)
    p.add_argument("--t", action="append", default=None, help="sample point > 1 (repeatable)")

    for name, helptext in (("value", "L^(k)(s)"), ("deriv", "L^(k)(s), k from --deriv (default 1)")):
        p = sub.add_parser(name, help=helptext)
        common(p)
        p.add_argument("--s", required=True, help="point, e.g. 2 or 0.5+14.1347i")
        p.add_argument("--deriv", type=int, default=None, help="derivative order k")

    p = sub.add_parser("solve", help="recover unknown sign, residues or coefficients at a prime")
    common(p)
    p.add_argument("--unknown", default="", help="comma list of: sign, residues, coeffs:p=P:K=K")

    p = sub.add_parser("table", help="CSV of L(s) on a segment")
    common(p)
    p.add_argument("--from", dest="s_from", required=True)
    p.add_argument("--to", dest="s_to", required=True)
    p.add_argument("--steps", type=int, default=10)
    p.add_argument("--deriv", type=int, default=0)
    p.add_argument("--out", default=None, help="output file (default stdout)")
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        desc, digits = load_descriptor(args.descriptor, args.digits)
        if args.command == "check":
            return cmd_check(desc, digits, args.t or ["1.2", "1.5"])
        if args.command in ("value", "deriv"):
            k = args.deriv if args.deriv is not None else (1 if args.command == "deriv" else 0)
            if k < 0:
                raise ParseError("--deriv must be nonnegative")
            return cmd_value(desc, digits, args.s, k)
        if args.command == "solve":
            return cmd_solve(desc, digits, args.unknown)
        if args.command == "table":
            return cmd_table(desc, digits, args.s_from, args.s_to, args.steps, args.out, args.deriv)
    except (ParseError, ValidationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except LFunctionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 2


if __name__ == "__main__":
    sys.exit(main())
