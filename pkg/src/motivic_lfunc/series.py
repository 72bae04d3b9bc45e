"""Truncated Laurent series in one local variable ε, and series-valued Γ.

A ``TruncatedLaurentSeries`` stores the coefficients of ε^v, ..., ε^(v+L-1);
everything from ε^(v+L) on is unknown.  Arithmetic narrows the window the
way exact truncated arithmetic must: a product of windows of lengths L1 and
L2 has min(L1, L2) trustworthy terms.
"""

from __future__ import annotations

import mpmath
from mpmath import mp

from .errors import DivisionByZeroSeries, WindowError
from .numerics import (
    as_precision,
    bernoulli_numbers,
    nearest_pole,
    stirling_shift,
    stirling_terms,
    to_mp,
)

__all__ = [
    "TruncatedLaurentSeries",
    "series_arith",
    "gamma_series",
    "gamma_factor_series",
    "star_extract",
]

_ZERO = 0


def _is_scalar(x) -> bool:
    return not isinstance(x, TruncatedLaurentSeries)


class TruncatedLaurentSeries:
    """Coefficients of ε^valuation ... ε^(valuation + len - 1)."""

    __slots__ = ("valuation", "coeffs")

    def __init__(self, valuation: int, coeffs):
        coeffs = list(coeffs)
        if not coeffs:
            raise ValueError("a truncated series needs at least one coefficient")
        self.valuation = int(valuation)
        self.coeffs = coeffs

    # -- construction ------------------------------------------------------

    @classmethod
    def constant(cls, value, length: int) -> TruncatedLaurentSeries:
        return cls(0, [to_mp(value)] + [mpmath.mpf(0)] * (length - 1))

    @classmethod
    def linear(cls, a, b, length: int) -> TruncatedLaurentSeries:
        """a + b·ε"""
        coeffs = [to_mp(a)] + [mpmath.mpf(0)] * (length - 1)
        if length > 1:
            coeffs[1] = to_mp(b)
        return cls(0, coeffs)

    @classmethod
    def monomial(cls, power: int, length: int, coeff=1) -> TruncatedLaurentSeries:
        return cls(power, [to_mp(coeff)] + [mpmath.mpf(0)] * (length - 1))

    # -- inspection --------------------------------------------------------

    def __len__(self) -> int:
        return len(self.coeffs)

    @property
    def top(self) -> int:
        """First exponent that is *not* known."""
        return self.valuation + len(self.coeffs)

    def coeff(self, exponent: int):
        if exponent < self.valuation:
            return mpmath.mpf(0)
        if exponent >= self.top:
            raise WindowError(f"exponent {exponent} outside window [{self.valuation}, {self.top})")
        return self.coeffs[exponent - self.valuation]

    def __getitem__(self, exponent: int):
        return self.coeff(exponent)

    def __repr__(self) -> str:
        body = ", ".join(mpmath.nstr(c, 8) for c in self.coeffs)
        return f"TruncatedLaurentSeries(v={self.valuation}, [{body}])"

    def truncate(self, top: int) -> TruncatedLaurentSeries:
        """Drop everything from ε^top on."""
        keep = min(len(self.coeffs), top - self.valuation)
        if keep < 1:
            raise WindowError("truncation would leave an empty window")
        return TruncatedLaurentSeries(self.valuation, self.coeffs[:keep])

    def normalized(self, tolerance=None) -> TruncatedLaurentSeries:
        """Strip leading coefficients that are zero (or below ``tolerance``)."""
        k = 0
        while k < len(self.coeffs):
            c = self.coeffs[k]
            if c == 0 or (tolerance is not None and abs(c) <= tolerance):
                k += 1
                continue
            break
        if k == len(self.coeffs):
            raise DivisionByZeroSeries("series vanishes on its window")
        return TruncatedLaurentSeries(self.valuation + k, self.coeffs[k:])

    def is_zero(self, tolerance=None) -> bool:
        if tolerance is None:
            return all(c == 0 for c in self.coeffs)
        return all(abs(c) <= tolerance for c in self.coeffs)

    # -- arithmetic ---------------------------------------------------------

    def _aligned(self, other):
        lo = min(self.valuation, other.valuation)
        hi = min(self.top, other.top)
        if hi <= lo:
            raise WindowError("windows do not overlap")
        return lo, hi

    def __add__(self, other):
        if _is_scalar(other):
            other = to_mp(other)
            if self.valuation > 0:
                if self.top <= 0:
                    raise WindowError("scalar lies outside the window")
                coeffs = [other] + [mpmath.mpf(0)] * (self.valuation - 1) + self.coeffs
                return TruncatedLaurentSeries(0, coeffs)
            if self.top <= 0:
                raise WindowError("scalar lies outside the window")
            coeffs = list(self.coeffs)
            coeffs[-self.valuation] += other
            return TruncatedLaurentSeries(self.valuation, coeffs)
        lo, hi = self._aligned(other)
        coeffs = [self.coeff(e) + other.coeff(e) for e in range(lo, hi)]
        return TruncatedLaurentSeries(lo, coeffs)

    __radd__ = __add__

    def __neg__(self):
        return TruncatedLaurentSeries(self.valuation, [-c for c in self.coeffs])

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if _is_scalar(other):
            other = to_mp(other)
            return TruncatedLaurentSeries(self.valuation, [c * other for c in self.coeffs])
        n = min(len(self.coeffs), len(other.coeffs))
        a, b = self.coeffs, other.coeffs
        coeffs = []
        for i in range(n):
            acc = mpmath.mpf(0)
            for j in range(i + 1):
                acc += a[j] * b[i - j]
            coeffs.append(acc)
        return TruncatedLaurentSeries(self.valuation + other.valuation, coeffs)

    __rmul__ = __mul__

    def reciprocal(self) -> TruncatedLaurentSeries:
        b = self.normalized()
        n = len(b.coeffs)
        inv0 = 1 / b.coeffs[0]
        out = [inv0]
        for i in range(1, n):
            acc = mpmath.mpf(0)
            for j in range(1, i + 1):
                acc += b.coeffs[j] * out[i - j]
            out.append(-acc * inv0)
        return TruncatedLaurentSeries(-b.valuation, out)

    def __truediv__(self, other):
        if _is_scalar(other):
            other = to_mp(other)
            if other == 0:
                raise ZeroDivisionError("division of a series by exact zero")
            return self * (1 / other)
        return self * other.reciprocal()

    def __rtruediv__(self, other):
        return self.reciprocal() * to_mp(other)

    def __pow__(self, k: int):
        if not isinstance(k, int):
            raise TypeError("only integer powers of series are supported")
        if k < 0:
            return self.reciprocal() ** (-k)
        result = TruncatedLaurentSeries.constant(1, len(self.coeffs))
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def derivative(self) -> TruncatedLaurentSeries:
        """Term-wise d/dε."""
        coeffs = [c * (self.valuation + i) for i, c in enumerate(self.coeffs)]
        if self.valuation == 0:
            if len(coeffs) == 1:
                return TruncatedLaurentSeries(0, [mpmath.mpf(0)])
            return TruncatedLaurentSeries(0, coeffs[1:])
        return TruncatedLaurentSeries(self.valuation - 1, coeffs)

    def exp(self) -> TruncatedLaurentSeries:
        """exp of a series with valuation >= 0."""
        if self.valuation < 0:
            raise ValueError("exp needs a series without a principal part")
        if self.valuation > 0:
            base = TruncatedLaurentSeries(0, [mpmath.mpf(0)] * self.valuation + self.coeffs)
        else:
            base = self
        f = base.coeffs
        n = len(f)
        out = [mpmath.exp(f[0])]
        # E' = f' E
        for i in range(1, n):
            acc = mpmath.mpf(0)
            for j in range(1, i + 1):
                acc += j * f[j] * out[i - j]
            out.append(acc / i)
        return TruncatedLaurentSeries(0, out)

    def log(self) -> TruncatedLaurentSeries:
        """Principal log of a series with valuation 0 and nonzero constant term."""
        if self.valuation != 0 or self.coeffs[0] == 0:
            raise ValueError("log needs valuation 0 and a nonzero constant term")
        f = self.coeffs
        n = len(f)
        inv0 = 1 / f[0]
        out = [mpmath.log(f[0])]
        # g' = f'/f, solved coefficient-wise
        for i in range(1, n):
            acc = i * f[i]
            for j in range(1, i):
                acc -= j * out[j] * f[i - j]
            out.append(acc * inv0 / i)
        return TruncatedLaurentSeries(0, out)

    def scale_variable(self, factor) -> TruncatedLaurentSeries:
        """The series in δ obtained by substituting ε = factor·δ."""
        factor = to_mp(factor)
        coeffs = [c * factor ** (self.valuation + i) for i, c in enumerate(self.coeffs)]
        return TruncatedLaurentSeries(self.valuation, coeffs)

    def evaluate(self, eps):
        """Sum of the stored terms at ε = eps."""
        eps = to_mp(eps)
        acc = mpmath.mpf(0)
        for c in reversed(self.coeffs):
            acc = acc * eps + c
        return acc * eps ** self.valuation


def series_arith(a: TruncatedLaurentSeries, b: TruncatedLaurentSeries, op: str) -> TruncatedLaurentSeries:
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    raise ValueError(f"unknown series operation {op!r}")


def star_extract(f: TruncatedLaurentSeries):
    """Constant term of a Laurent expansion."""
    return f.coeff(0)


def _stirling_log_gamma_series(x: TruncatedLaurentSeries, center, dps: int):
    """log Γ(center + ε) for |center| past the Stirling radius."""
    n = len(x.coeffs)
    terms = stirling_terms(dps + n, float(abs(center)))
    bern = bernoulli_numbers(terms, mp.dps)
    # log(center + ε) = log(center) + log(1 + ε/center)
    inv = 1 / center
    log_coeffs = [mpmath.log(center)]
    power = mpmath.mpf(1)
    for i in range(1, n):
        power *= -inv
        log_coeffs.append(-power / i)
    logx = TruncatedLaurentSeries(0, log_coeffs)
    recip = x.reciprocal()
    recip2 = recip * recip
    acc = (x - mpmath.mpf(0.5)) * logx - x + mpmath.log(2 * mp.pi) / 2
    power_series = recip
    for k in range(1, terms + 1):
        acc = acc + power_series * (bern[k - 1] / (2 * k * (2 * k - 1)))
        power_series = power_series * recip2
    return acc


def gamma_series(z0, terms: int, prec=None) -> TruncatedLaurentSeries:
    """Laurent expansion of Γ(z0 + ε) with ``terms`` trustworthy coefficients.

    At a nonpositive integer z0 = -n the result has valuation -1 and
    leading coefficient (-1)^n/n!; elsewhere it is a Taylor series.
    """
    if terms < 1:
        raise ValueError("terms must be >= 1")
    prec = as_precision(prec)
    wd = prec.working_digits
    extra = 10 + terms
    with mp.workdps(wd + extra):
        z0 = to_mp(z0)
        pole = nearest_pole(z0, mpmath.mpf(10) ** (-wd / 2))
        if pole is not None:
            z0 = mpmath.mpf(pole)
        m = stirling_shift(z0, wd + extra)
        center = z0 + m
        x = TruncatedLaurentSeries.linear(center, 1, terms)
        result = _stirling_log_gamma_series(x, center, wd + extra).exp()
        if m:
            denom = TruncatedLaurentSeries.constant(1, terms)
            for i in range(m):
                a = z0 + i
                if a == 0:
                    factor = TruncatedLaurentSeries.monomial(1, terms)
                else:
                    factor = TruncatedLaurentSeries.linear(a, 1, terms)
                denom = denom * factor
            result = result / denom
    with mp.workdps(wd):
        return TruncatedLaurentSeries(result.valuation, [+c for c in result.coeffs])


def _lambda_values(shape_or_lambdas):
    lambdas = getattr(shape_or_lambdas, "lambda_values", None)
    if lambdas is not None:
        return lambdas()
    return [to_mp(x) for x in shape_or_lambdas]


def gamma_factor_series(shape, s0, terms: int, prec=None) -> TruncatedLaurentSeries:
    """Laurent expansion of γ(s0 + ε) = ∏ Γ((s0 + λ_j + ε)/2).

    ``terms`` trustworthy coefficients; the valuation is minus the pole
    order of γ at s0.
    """
    prec = as_precision(prec)
    with prec.workdps(5):
        s0 = to_mp(s0)
        lambdas = _lambda_values(shape)
        result = None
        for lam in lambdas:
            factor = gamma_series((s0 + lam) / 2, terms, prec.raised(5)).scale_variable(mpmath.mpf(0.5))
            result = factor if result is None else result * factor
    with prec.workdps():
        return TruncatedLaurentSeries(result.valuation, [+c for c in result.coeffs])
