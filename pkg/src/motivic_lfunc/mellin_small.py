"""Power series (with logarithms) for φ(t) and ∂^k G_s(t) near t = 0.

φ is the inverse Mellin transform of γ(s) = ∏ Γ((s+λ_j)/2); it is the sum of
the residues of γ(s)·t^(-s).  Grouping the λ_j into classes modulo 2Z, every
pole lies at m_j - 2n for some class j, and the Laurent expansion of
γ(s + m_j - 2n) is obtained from that of γ(s + m_j) by repeated division by
∏_k ((s + λ_k + m_j)/2 - n).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
from mpmath import mp

from .errors import AmbiguityError, PrecisionError, TruncationError
from .numerics import Precision, as_precision, to_mp
from .series import TruncatedLaurentSeries, gamma_factor_series

__all__ = [
    "GammaFactorShape",
    "PhiCoefficientTable",
    "build_shape",
    "compute_phi_coefficients",
    "phi_small",
    "g_small",
    "taylor_terms_needed",
    "GSmallPlan",
]


def exact_rational(x):
    """Fraction for ints, Fractions and rational strings; None otherwise."""
    if isinstance(x, bool):
        return None
    if isinstance(x, (int, Fraction)):
        return Fraction(x)
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except ValueError:
            return None
    return None


@dataclass(frozen=True)
class GammaFactorShape:
    """Hodge numbers λ_1..λ_d grouped into classes modulo 2Z.

    ``classes[j]`` lists indices into ``lambdas`` with the element of smallest
    real part first; ``offsets[j][i]`` is the integer (λ_k - λ_min)/2 for the
    i-th member k of that class.
    """

    lambdas: tuple
    classes: tuple
    offsets: tuple

    @property
    def d(self) -> int:
        return len(self.lambdas)

    @property
    def N(self) -> int:
        return len(self.classes)

    @property
    def class_sizes(self) -> tuple:
        return tuple(len(c) for c in self.classes)

    @property
    def exact(self):
        """The λ as Fractions when all of them are rational, else None."""
        if all(isinstance(x, Fraction) for x in self.lambdas):
            return self.lambdas
        return None

    def lambda_values(self) -> list:
        return [to_mp(x) for x in self.lambdas]

    def base_exponents(self) -> list:
        """m_j = 2 - λ_min(j); γ(s) is analytic at every m_j."""
        vals = self.lambda_values()
        return [2 - vals[c[0]] for c in self.classes]

    def class_of(self, index: int) -> int:
        for j, members in enumerate(self.classes):
            if index in members:
                return j
        raise IndexError(index)

    def pole_order(self, s, tolerance=None) -> int:
        """Order of the pole of γ at s (0 when γ is analytic there)."""
        tolerance = mpmath.mpf(10) ** (-mp.dps / 2) if tolerance is None else tolerance
        s = to_mp(s)
        order = 0
        for lam in self.lambda_values():
            z = (s + lam) / 2
            n = mpmath.nint(mpmath.re(z))
            if n <= 0 and abs(z - n) < tolerance:
                order += 1
        return order


def _parse_lambda(x):
    exact = exact_rational(x)
    if exact is not None:
        return exact
    val = to_mp(x)
    if isinstance(val, mpmath.mpc) and val.imag == 0:
        val = val.real
    return val


def build_shape(lambdas, class_tolerance=None, prec=None) -> GammaFactorShape:
    """Group λ_1..λ_d into classes of mutually 2Z-congruent values."""
    parsed = [_parse_lambda(x) for x in lambdas]
    d = len(parsed)
    if d < 1:
        raise ValueError("a Gamma factor needs at least one lambda")
    prec = as_precision(prec)
    if class_tolerance is None:
        class_tolerance = mpmath.mpf(10) ** (-prec.target_digits / 2)
    class_tolerance = to_mp(class_tolerance)

    parent = list(range(d))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    with prec.workdps():
        for a in range(d):
            for b in range(a + 1, d):
                la, lb = parsed[a], parsed[b]
                if isinstance(la, Fraction) and isinstance(lb, Fraction):
                    same = ((la - lb) / 2).denominator == 1
                else:
                    delta = (to_mp(la) - to_mp(lb)) / 2
                    dist = abs(delta - mpmath.nint(mpmath.re(delta)))
                    if dist < class_tolerance:
                        same = True
                    elif dist < 10 * class_tolerance:
                        raise AmbiguityError(
                            f"lambda_{a + 1} - lambda_{b + 1} is within {mpmath.nstr(dist, 3)} of 2Z"
                        )
                    else:
                        same = False
                if same:
                    parent[find(a)] = find(b)

        groups: dict[int, list[int]] = {}
        for i in range(d):
            groups.setdefault(find(i), []).append(i)
        classes = []
        offsets = []
        for members in sorted(groups.values(), key=lambda g: g[0]):
            members = sorted(members, key=lambda i: (float(mpmath.re(to_mp(parsed[i]))), i))
            base = to_mp(parsed[members[0]])
            offs = []
            for i in members:
                if isinstance(parsed[i], Fraction) and isinstance(parsed[members[0]], Fraction):
                    offs.append(int((parsed[i] - parsed[members[0]]) / 2))
                else:
                    offs.append(int(mpmath.nint(mpmath.re((to_mp(parsed[i]) - base) / 2))))
            classes.append(tuple(members))
            offsets.append(tuple(offs))
    return GammaFactorShape(tuple(parsed), tuple(classes), tuple(offsets))


# --- coefficient table -------------------------------------------------------


def _divide_linear(series: TruncatedLaurentSeries, a, exact_zero: bool) -> TruncatedLaurentSeries:
    """series / (a + s/2), with ``exact_zero`` marking a == 0."""
    if exact_zero:
        return TruncatedLaurentSeries(series.valuation - 1, [2 * c for c in series.coeffs])
    inv = 1 / a
    out = []
    prev = mpmath.mpf(0)
    for c in series.coeffs:
        prev = (c - prev / 2) * inv
        out.append(prev)
    return TruncatedLaurentSeries(series.valuation, out)


@dataclass
class PhiCoefficientTable:
    """c^(n)_{j,k}: coefficient of s^-k in the Laurent series of γ(s + m_j - 2n).

    ``entries[j][n-1][k-1]`` for classes j, 1 <= n <= n_max, 1 <= k <= l_j.
    """

    shape: GammaFactorShape
    dps: int
    n_max: int = 0
    entries: list = field(default_factory=list)
    _state: list = field(default_factory=list, repr=False)

    def entry(self, j: int, n: int, k: int):
        return self.entries[j][n - 1][k - 1]

    def magnitude(self, n: int) -> float:
        """max_{j,k} |c^(n)_{j,k}| as a float (0 when every entry vanishes)."""
        best = 0.0
        for rows in self.entries:
            for c in rows[n - 1]:
                best = max(best, float(abs(c)))
        return best

    def extend(self, n_max: int) -> PhiCoefficientTable:
        if n_max <= self.n_max:
            return self
        shape = self.shape
        with mp.workdps(self.dps):
            lambdas = shape.lambda_values()
            m = shape.base_exponents()
            for j, members in enumerate(shape.classes):
                series = self._state[j]
                member_offsets = dict(zip(members, shape.offsets[j]))
                for n in range(self.n_max + 1, n_max + 1):
                    for idx, lam in enumerate(lambdas):
                        if idx in member_offsets:
                            a = member_offsets[idx] + 1 - n
                            series = _divide_linear(series, mpmath.mpf(a), a == 0)
                        else:
                            series = _divide_linear(series, (lam + m[j]) / 2 - n, False)
                    l_j = len(members)
                    self.entries[j].append([series.coeff(-k) for k in range(1, l_j + 1)])
                self._state[j] = series
        self.n_max = n_max
        return self


def compute_phi_coefficients(shape: GammaFactorShape, n_max: int, prec=None) -> PhiCoefficientTable:
    """Laurent coefficients driving the small-t expansions of φ and G."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    prec = as_precision(prec)
    table = PhiCoefficientTable(shape, prec.working_digits)
    with prec.workdps():
        for j, members in enumerate(shape.classes):
            m_j = shape.base_exponents()[j]
            c0 = gamma_factor_series(shape, m_j, len(members), prec)
            table._state.append(c0)
            table.entries.append([])
    return table.extend(n_max)


def taylor_terms_needed(shape: GammaFactorShape, t: float, digits: int) -> int:
    """Heuristic n_max so that the tail of the series at t is below 10^-digits.

    Uses |c^(n)| ≈ 1/(n - n0)!^d with n0 absorbing the shift by m_j, which
    the coefficient recursion makes exact up to polynomial factors.
    """
    d = shape.d
    t = max(float(t), 1e-300)
    lnt2 = 2.0 * math.log(t)
    n0 = 2 + int(max(abs(float(mpmath.re(m))) for m in shape.base_exponents()) / 2)
    target = -digits * math.log(10.0)
    n = n0 + 1
    slack = d * math.log(1 + abs(math.log(t))) + 5.0
    def logterm(n):
        return n * lnt2 - d * math.lgamma(n - n0 + 1) + d * n0 * math.log(n) + slack

    while True:
        if logterm(n) < target and logterm(n) < logterm(n - 1):
            return n + 4
        n += 1
        if n > 100000:
            raise TruncationError("series at this t needs more than 1e5 terms")


def _check_cancellation(max_term, value, dps: int, prec: Precision, abs_tol):
    # with an absolute tolerance the rounding error max_term·10^-dps is what counts
    if abs_tol is not None:
        scale = to_mp(abs_tol) * mpmath.mpf(10) ** prec.target_digits
    else:
        scale = abs(value)
    if max_term == 0:
        return
    if scale == 0 or max_term / scale > mpmath.mpf(10) ** (dps - prec.target_digits - 3):
        lost = mpmath.log10(max_term / scale) if scale else mpmath.inf
        raise PrecisionError(
            f"series cancellation lost {mpmath.nstr(lost, 4)} digits with {dps} working digits"
        )


def _check_tail(last, max_term, value, dps: int):
    ref = max(max_term, abs(value))
    if ref and last > ref * mpmath.mpf(10) ** (-dps + 2):
        raise TruncationError("coefficient table too short for this t")


def phi_small(t, shape: GammaFactorShape, table: PhiCoefficientTable, prec=None, abs_tol=None):
    """φ(t) from its expansion at the origin.

    Raises ``PrecisionError`` when cancellation exceeds the guard digits of
    the table and ``TruncationError`` when the table is too short for t.
    """
    prec = as_precision(prec)
    with mp.workdps(table.dps):
        t = to_mp(t)
        if t <= 0:
            raise ValueError("phi is defined for t > 0")
        x = -mpmath.log(t)
        t2 = t * t
        m = shape.base_exponents()
        total = mpmath.mpf(0)
        max_term = mpmath.mpf(0)
        last = mpmath.mpf(0)
        for j, members in enumerate(shape.classes):
            l_j = len(members)
            xpowers = [x**k / math.factorial(k) for k in range(l_j)]
            prefactor = t ** (-m[j])
            power = prefactor
            for n in range(1, table.n_max + 1):
                power *= t2
                row = table.entries[j][n - 1]
                coef = row[0]
                for k in range(1, l_j):
                    coef += xpowers[k] * row[k]
                term = coef * power
                total += term
                mag = abs(term)
                if mag > max_term:
                    max_term = mag
                if n >= table.n_max - 1:
                    last = max(last, mag)
        _check_cancellation(max_term, total, table.dps, prec, abs_tol)
        _check_tail(last, max_term, total, table.dps)
    with prec.workdps():
        return +total


def _falling(m: int, k: int) -> int:
    out = 1
    for i in range(k):
        out *= m - i
    return out


class GSmallPlan:
    """Per-(s, k) data for the small-t expansion of ∂^k G_s(t).

    Holds the Laurent window of γ(s + ε) needed by the constant-term
    extraction and the polynomials S^(n)_{j,k,s}(x) built from L_{α,i,k}.
    """

    def __init__(self, shape: GammaFactorShape, s, k: int, table: PhiCoefficientTable):
        self.shape = shape
        self.k = int(k)
        self.table = table
        self.dps = table.dps
        with mp.workdps(self.dps):
            self.s = to_mp(s)
            inner = Precision(max(5, self.dps - 10), self.dps)
            self.gamma = gamma_factor_series(shape, self.s, self.k + 1 + shape.d, inner)
            self.m = shape.base_exponents()
            self.polys = [[] for _ in shape.classes]
        self.n_built = 0
        self._build(table.n_max)

    def _build(self, n_max: int):
        k = self.k
        zero_tol = mpmath.mpf(10) ** (-self.dps / 2)
        with mp.workdps(self.dps):
            for j, members in enumerate(self.shape.classes):
                l_j = len(members)
                for n in range(self.n_built + 1, n_max + 1):
                    alpha = 2 * n + self.s - self.m[j]
                    coeffs = [mpmath.mpf(0)] * l_j
                    if abs(alpha) >= zero_tol:
                        row = self.table.entries[j][n - 1]
                        for i in range(1, l_j + 1):
                            c = row[i - 1]
                            if c == 0:
                                continue
                            # L_{α,i,k}(x) = k! Σ_r C(r-i, k) α^(r-i-k) (-x)^r / r!
                            for r in range(i):
                                fall = _falling(r - i, k)
                                coeffs[r] += c * fall * alpha ** (r - i - k) * (-1) ** r / math.factorial(r)
                    self.polys[j].append(coeffs)
        self.n_built = n_max

    def refresh(self):
        if self.table.n_max > self.n_built:
            self._build(self.table.n_max)

    def star_term(self, t):
        """k!·[ε^k] γ(s+ε) t^(-s-ε): the constant term of ∂^k(γ(S) t^-S) at S = s."""
        k = self.k
        x = -mpmath.log(t)
        acc = mpmath.mpf(0)
        for e in range(self.gamma.valuation, k + 1):
            acc += self.gamma.coeff(e) * x ** (k - e) / math.factorial(k - e)
        return math.factorial(k) * acc * t ** (-self.s)


def g_small(s, k: int, t, shape: GammaFactorShape, table: PhiCoefficientTable, prec=None,
            plan: GSmallPlan | None = None, abs_tol=None):
    """∂^k/∂s^k G_s(t) from its expansion at the origin.

    Terms whose exponent α = 2n + s - m_j vanishes are the principal parts
    cancelled by the poles of γ and are dropped.
    """
    prec = as_precision(prec)
    if plan is None:
        plan = GSmallPlan(shape, s, k, table)
    plan.refresh()
    with mp.workdps(table.dps):
        t = to_mp(t)
        if t <= 0:
            raise ValueError("G_s is defined for t > 0")
        lnt = mpmath.log(t)
        t2 = t * t
        star = plan.star_term(t)
        total = mpmath.mpf(0)
        max_term = abs(star)
        last = mpmath.mpf(0)
        for j, polys in enumerate(plan.polys):
            power = t ** (-plan.m[j])
            for n in range(1, table.n_max + 1):
                power *= t2
                coeffs = polys[n - 1]
                val = mpmath.mpf(0)
                for c in reversed(coeffs):
                    val = val * lnt + c
                term = val * power
                total += term
                mag = abs(term)
                if mag > max_term:
                    max_term = mag
                if n >= table.n_max - 1:
                    last = max(last, mag)
        value = star - total
        _check_cancellation(max_term, value, table.dps, prec, abs_tol)
        _check_tail(last, max_term, value, table.dps)
    with prec.workdps():
        return +value
