"""Large-t asymptotics of φ and ∂^k G_s, and their continued fractions.

With u = t^(2/d),

    φ(t)         ~ 2(2π)^((d-1)/2)/√d · e^(-du) u^κ       Σ M_n u^-n
    ∂^k G_s(t)   ~  (2π)^((d-1)/2)/√d · e^(-du) u^(κ-1-k) Σ ∂^k μ_(n+k)(s) u^-n

The formal series are turned into C-fractions α_0 + x^k0/(α_1 + x^k1/(...))
in x = 1/u, whose convergents are used as approximants.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import mpmath
from mpmath import mp

from .errors import CFDivisionByZero, DegenerateError, TruncationError
from .mellin_small import GammaFactorShape
from .numerics import bernoulli_exact, to_mp

__all__ = [
    "SymmetricData",
    "ContinuedFraction",
    "symmetric_data",
    "delta_polys",
    "nu",
    "m_coefficients",
    "mu_coefficients",
    "mu_taylor",
    "series_to_cf",
    "cf_eval",
    "asymptotic_prefactor",
    "phi_asym",
    "g_asym",
]


def _value(x, exact: bool):
    if exact:
        return x
    return to_mp(x)


@dataclass(frozen=True)
class SymmetricData:
    """Elementary symmetric functions S_m of the λ, the modified S~_m and κ.

    Entries are Fractions when every λ is rational, mpmath numbers otherwise.
    """

    S: tuple
    S_tilde: tuple
    kappa: object
    exact: bool

    @property
    def d(self) -> int:
        return len(self.S) - 1


def symmetric_data(lambdas) -> SymmetricData:
    if isinstance(lambdas, GammaFactorShape):
        exact_vals = lambdas.exact
        vals = list(exact_vals) if exact_vals is not None else lambdas.lambda_values()
    else:
        vals = list(lambdas)
        exact_vals = vals if all(isinstance(v, (int, Fraction)) for v in vals) else None
        vals = [Fraction(v) for v in vals] if exact_vals is not None else [to_mp(v) for v in vals]
    exact = exact_vals is not None
    d = len(vals)
    zero = Fraction(0) if exact else mpmath.mpf(0)
    one = Fraction(1) if exact else mpmath.mpf(1)
    S = [one] + [zero] * d
    for lam in vals:
        for m in range(d, 0, -1):
            S[m] += S[m - 1] * lam
    S_tilde = []
    dd = Fraction(d) if exact else mpmath.mpf(d)
    for m in range(d + 1):
        acc = zero
        for k in range(m + 1):
            acc += (-S[1]) ** k * dd ** (m - 1 - k) * math.comb(k + d - m, k) * S[m - k]
        S_tilde.append(acc)
    S_tilde.append(zero)
    kappa = (1 - d + S[1]) / 2
    return SymmetricData(tuple(S), tuple(S_tilde), kappa, exact)


@lru_cache(maxsize=None)
def _log_sinhc_coefficients(k_max: int) -> tuple:
    """log(sinh t / t) = Σ_{k>=1} 2^(2k) B_2k / (2k (2k)!) t^(2k)."""
    bern = bernoulli_exact(2 * k_max)
    out = [Fraction(0)]
    for k in range(1, k_max + 1):
        out.append(Fraction(2 ** (2 * k)) * bern[2 * k] / (2 * k * math.factorial(2 * k)))
    return tuple(out)


@lru_cache(maxsize=None)
def _delta_cached(k_max: int) -> tuple:
    ell = _log_sinhc_coefficients(k_max)
    polys = [(Fraction(1),)]
    # E = exp(x·f), E' = x f' E coefficient-wise in t^2
    for k in range(1, k_max + 1):
        acc = [Fraction(0)] * (k + 1)
        for j in range(1, k + 1):
            for i, c in enumerate(polys[k - j]):
                acc[i + 1] += j * ell[j] * c
        polys.append(tuple(c / k for c in acc))
    return tuple(polys)


def delta_polys(k_max: int) -> list:
    """Δ_0..Δ_k_max with (sinh t / t)^x = Σ Δ_k(x) t^(2k); coefficient lists in x."""
    if k_max < 0:
        raise ValueError("k_max must be >= 0")
    return [list(p) for p in _delta_cached(k_max)]


def _poly_eval(poly, x):
    acc = 0
    for c in reversed(poly):
        acc = acc * x + c
    return acc


@lru_cache(maxsize=4096)
def _delta_at(k: int, x: int) -> Fraction:
    return _poly_eval(_delta_cached(k)[k], Fraction(x))


def nu(p: int, n: int, sym: SymmetricData):
    """ν_p(n) from the modified symmetric functions and the Δ_k."""
    d = sym.d
    exact = sym.exact
    total = Fraction(0) if exact else mpmath.mpf(0)
    for m in range(0, min(p, d + 1) + 1):
        s_t = sym.S_tilde[m]
        if s_t == 0:
            continue
        prod = 1
        for j in range(m, p):
            prod *= d - j
        if prod == 0:
            continue
        inner = Fraction(0)
        for k in range((p - m) // 2 + 1):
            e = p - m - 2 * k
            inner += Fraction(2 * n - p + 1) ** e / math.factorial(e) * _delta_at(k, d - p)
        total += s_t * (prod * _value(inner, exact))
    return -_value(Fraction(d, (2 * d) ** p), exact) * total


def m_coefficients(shape, sym: SymmetricData, n_max: int) -> list:
    """M_0..M_n_max of the asymptotic series of φ (Fractions when λ are rational).

    Recursion: M_0 = 1 and n·M_n = Σ_{p=1}^{d} ν_{p+1}(n) M_{n-p}.
    """
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    d = sym.d
    one = Fraction(1) if sym.exact else mpmath.mpf(1)
    M = [one]
    for n in range(1, n_max + 1):
        acc = 0 * one
        for p in range(1, d + 1):
            if n - p < 0:
                break
            if M[n - p] == 0:
                continue
            acc += nu(p + 1, n, sym) * M[n - p]
        M.append(acc / n)
    return M


def _mu_factors(sym: SymmetricData, n: int, p: int):
    """(A, B) with ν_{p+1}(n) - ((S_1 + d(s-1) - 2(n-p) - 1)/(2d)) ν_p(n) = A + B·s."""
    d = sym.d
    nu_p = nu(p, n, sym)
    nu_p1 = nu(p + 1, n, sym)
    exact = sym.exact
    two_d = Fraction(2 * d) if exact else mpmath.mpf(2 * d)
    a = nu_p1 - (sym.S[1] - d - 2 * (n - p) - 1) / two_d * nu_p
    b = -nu_p / 2
    return a, b


def mu_coefficients(shape, sym: SymmetricData, s, n_max: int) -> list:
    """μ_0..μ_n_max for the asymptotic series of G_s.

    With ``s=None`` every μ_n is returned as a coefficient list in s (lowest
    degree first); otherwise the values μ_n(s).
    """
    if s is None:
        one = Fraction(1) if sym.exact else mpmath.mpf(1)
        mu = [[one]]
        for n in range(1, n_max + 1):
            acc = [0 * one] * (n + 1)
            for p in range(1, sym.d + 1):
                if n - p < 0:
                    break
                a, b = _mu_factors(sym, n, p)
                for i, c in enumerate(mu[n - p]):
                    acc[i] += a * c
                    acc[i + 1] += b * c
            mu.append([c / n for c in acc])
        return mu
    return [w[0] for w in mu_taylor(sym, s, n_max, 0)]


def mu_taylor(sym: SymmetricData, s, n_max: int, order: int) -> list:
    """Taylor windows of μ_n(s + ε): ``out[n][j]`` = ∂^j μ_n(s) / j!, j <= order."""
    s = to_mp(s)
    length = order + 1
    mu = [[mpmath.mpf(1)] + [mpmath.mpf(0)] * order]
    for n in range(1, n_max + 1):
        acc = [mpmath.mpf(0)] * length
        for p in range(1, sym.d + 1):
            if n - p < 0:
                break
            a, b = _mu_factors(sym, n, p)
            a = to_mp(a)
            b = to_mp(b)
            lin0 = a + b * s
            prev = mu[n - p]
            for i in range(length):
                acc[i] += lin0 * prev[i]
                if i + 1 < length:
                    acc[i + 1] += b * prev[i]
        mu.append([c / n for c in acc])
    return mu


# --- continued fractions ------------------------------------------------------


@dataclass(frozen=True)
class ContinuedFraction:
    """α_0 + x^k_0/(α_1 + x^k_1/(α_2 + ...)).

    ``len(exponents) == len(alphas) - 1``.  ``terminated`` means the input
    series is represented exactly by the full fraction.
    """

    alphas: tuple
    exponents: tuple
    terminated: bool

    @property
    def depth(self) -> int:
        """Largest n for which C_n is available."""
        return len(self.alphas) - 1

    def order_available(self, n: int) -> int:
        if n <= self.depth:
            return n
        if self.terminated:
            return self.depth
        raise TruncationError(f"convergent C_{n} needs more series coefficients (have C_{self.depth})")

    def convergents(self, x, n_max: int) -> list:
        """[C_0(x), ..., C_n_max(x)] by the forward three-term recurrence."""
        top = min(n_max, self.depth)
        p_prev, q_prev = mpmath.mpf(1), mpmath.mpf(0)
        p_cur, q_cur = self.alphas[0], mpmath.mpf(1)
        out = [p_cur / q_cur]
        for i in range(1, top + 1):
            xk = x ** self.exponents[i - 1]
            p_new = self.alphas[i] * p_cur + xk * p_prev
            q_new = self.alphas[i] * q_cur + xk * q_prev
            p_prev, q_prev, p_cur, q_cur = p_cur, q_cur, p_new, q_new
            if q_cur == 0:
                raise CFDivisionByZero(f"convergent {i} has a vanishing denominator")
            out.append(p_cur / q_cur)
            scale = abs(q_cur)
            if scale > mpmath.mpf(10) ** 100 or scale < mpmath.mpf(10) ** -100:
                p_prev, q_prev, p_cur, q_cur = p_prev / scale, q_prev / scale, p_cur / scale, q_cur / scale
        if n_max > top:
            if not self.terminated:
                raise TruncationError("not enough series coefficients for the requested convergents")
            out.extend([out[-1]] * (n_max - top))
        return out

    def taylor(self, n: int, length: int) -> list:
        """Taylor coefficients of C_n about x = 0 (used to check faithfulness)."""
        from .series import TruncatedLaurentSeries

        n = self.order_available(n)
        value = TruncatedLaurentSeries.constant(self.alphas[n], length)
        for i in range(n - 1, -1, -1):
            value = TruncatedLaurentSeries.monomial(self.exponents[i], length) / value + self.alphas[i]
            value = value.truncate(length)
        return [value.coeff(e) for e in range(length)]


def series_to_cf(coeffs, dps: int | None = None, strict: bool = True) -> ContinuedFraction:
    """C-fraction of the formal series Σ coeffs[n] x^n.

    Runs the recursion p_n = α_n + x^k_n / p_(n+1) with p_n carried as a
    quotient of two truncated series (so no series inversion is needed).
    Leading coefficients lost to cancellation down to the noise level are
    treated as zero; ones just above it raise ``DegenerateError`` (or, with
    ``strict=False``, end the fraction early).
    """
    dps = mp.dps if dps is None else dps
    with mp.workdps(dps):
        num = [to_mp(c) for c in coeffs]
        if not num:
            raise ValueError("need at least one coefficient")
        den = [mpmath.mpf(1)] + [mpmath.mpf(0)] * (len(num) - 1)
        noise = mpmath.mpf(10) ** (-(2 * dps) // 3)
        doubt = noise * mpmath.mpf(10) ** (dps // 6)
        alphas = []
        exponents = []
        terminated = False
        while True:
            if den[0] == 0:
                raise DegenerateError("continued fraction hit a zero denominator")
            alpha = num[0] / den[0]
            alphas.append(alpha)
            length = min(len(num), len(den))
            rem = [mpmath.mpf(0)]
            scales = [mpmath.mpf(0)]
            for i in range(1, length):
                rem.append(num[i] - alpha * den[i])
                scales.append(abs(num[i]) + abs(alpha * den[i]))
            if length == 1:
                break
            k = None
            for i in range(1, length):
                mag = abs(rem[i])
                if rem[i] == 0 or mag <= noise * scales[i]:
                    continue
                if mag <= doubt * scales[i]:
                    if strict:
                        raise DegenerateError(
                            f"coefficient {i} after alpha_{len(alphas) - 1} is indistinguishable from zero"
                        )
                    return ContinuedFraction(tuple(alphas), tuple(exponents), False)
                k = i
                break
            if k is None:
                terminated = True
                break
            new_den = rem[k:length]
            new_num = den[: len(new_den)]
            exponents.append(k)
            num, den = new_num, new_den
        return ContinuedFraction(tuple(alphas), tuple(exponents), terminated)


def cf_eval(cf: ContinuedFraction, n: int, x):
    """C_n(x), evaluated from the innermost level outwards."""
    n = cf.order_available(n)
    value = cf.alphas[n]
    for i in range(n - 1, -1, -1):
        if value == 0:
            raise CFDivisionByZero(f"level {i + 1} of the continued fraction vanishes")
        value = cf.alphas[i] + x ** cf.exponents[i] / value
    return value


def asymptotic_prefactor(d: int):
    """(2π)^((d-1)/2)/√d."""
    return (2 * mp.pi) ** (mpmath.mpf(d - 1) / 2) / mpmath.sqrt(d)


def phi_asym(t, n: int, shape: GammaFactorShape, sym: SymmetricData, cf: ContinuedFraction):
    """n-th approximant φ_n(t) = 2(2π)^((d-1)/2)/√d e^(-d u) u^κ C_n(1/u), u = t^(2/d)."""
    d = shape.d
    t = to_mp(t)
    u = t ** (mpmath.mpf(2) / d)
    kappa = to_mp(sym.kappa)
    return 2 * asymptotic_prefactor(d) * mpmath.exp(-d * u) * u**kappa * cf_eval(cf, n, 1 / u)


def g_asym(s, k: int, t, n: int, shape: GammaFactorShape, sym: SymmetricData, cf: ContinuedFraction):
    """n-th approximant to ∂^k G_s(t); ``cf`` is built from ∂^k μ_(m+k)(s)."""
    d = shape.d
    t = to_mp(t)
    u = t ** (mpmath.mpf(2) / d)
    kappa = to_mp(sym.kappa)
    return asymptotic_prefactor(d) * mpmath.exp(-d * u) * u ** (kappa - 1 - k) * cf_eval(cf, n, 1 / u)


def g_series_coefficients(sym: SymmetricData, s, k: int, n_max: int) -> list:
    """∂^k μ_(m+k)(s) for m = 0..n_max (the series behind g_asym)."""
    windows = mu_taylor(sym, s, n_max + k, k)
    kf = math.factorial(k)
    return [kf * windows[m + k][k] for m in range(n_max + 1)]
