"""High-precision scalar substrate: precision policy, constants and Γ.

All arithmetic runs on mpmath numbers (``mpf``/``mpc``); a complex value at
working precision is simply an mpmath number evaluated inside
``Precision.workdps()``.  Γ is computed by shifting the argument to the right
and summing Stirling's series with a cached Bernoulli table, so that the
same machinery can be lifted to series-valued arguments (see ``series``).
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

import mpmath
from mpmath import mp

from .errors import PoleError

__all__ = [
    "Precision",
    "Constants",
    "as_precision",
    "constants",
    "gamma",
    "log_gamma",
    "bernoulli_exact",
    "bernoulli_numbers",
    "stirling_shift",
    "nearest_pole",
    "to_mp",
]


@dataclass(frozen=True)
class Precision:
    """Decimal precision policy.

    ``target_digits`` is what the caller asked for; ``working_digits`` is what
    the internals compute with.  When not given, the guard is
    ``max(10, 10% of target)`` digits.
    """

    target_digits: int
    working_digits: int | None = None

    def __post_init__(self):
        if int(self.target_digits) < 1:
            raise ValueError("target_digits must be positive")
        object.__setattr__(self, "target_digits", int(self.target_digits))
        if self.working_digits is None:
            guard = max(10, math.ceil(0.1 * self.target_digits))
            object.__setattr__(self, "working_digits", self.target_digits + guard)
        object.__setattr__(self, "working_digits", int(self.working_digits))
        if self.working_digits < self.target_digits + 5:
            raise ValueError("working_digits must exceed target_digits by at least 5")

    @property
    def guard_digits(self) -> int:
        return self.working_digits - self.target_digits

    def raised(self, extra: int) -> Precision:
        """Same target, ``extra`` more working digits."""
        return Precision(self.target_digits, self.working_digits + max(0, int(extra)))

    def workdps(self, extra: int = 0):
        return mp.workdps(self.working_digits + extra)

    def eps(self):
        """One unit in the last working digit, as an mpf."""
        return mpmath.mpf(10) ** (-self.working_digits)

    def tolerance(self):
        """Requested accuracy ``10^-target_digits``."""
        return mpmath.mpf(10) ** (-self.target_digits)


def as_precision(prec) -> Precision:
    if isinstance(prec, Precision):
        return prec
    if prec is None:
        return Precision(max(15, mp.dps - 10))
    return Precision(int(prec))


def to_mp(x):
    """Convert ints, Fractions, strings and Python complex numbers to mpmath."""
    if isinstance(x, Fraction):
        return mpmath.mpf(x.numerator) / x.denominator
    if isinstance(x, str):
        x = x.strip().replace(" ", "")
        if "/" in x and "i" not in x:
            return to_mp(Fraction(x))
        if x.endswith("i") or x.endswith("j"):
            return mpmath.mpc(complex_from_string(x))
        return mpmath.mpf(x)
    return mpmath.mpmathify(x)


def complex_from_string(text: str):
    """Parse ``a``, ``a+bi``, ``a-bi``, ``bi`` into an mpmath number."""
    s = text.strip().replace(" ", "").replace("j", "i")
    if not s.endswith("i"):
        return to_mp(s)
    body = s[:-1]
    # split at the last sign that is not part of an exponent
    cut = None
    for pos in range(len(body) - 1, 0, -1):
        if body[pos] in "+-" and body[pos - 1] not in "eE":
            cut = pos
            break
    if cut is None:
        re_part, im_part = "0", body
    else:
        re_part, im_part = body[:cut], body[cut:]
    if im_part in ("", "+"):
        im_part = "1"
    elif im_part == "-":
        im_part = "-1"
    return mpmath.mpc(to_mp(re_part), to_mp(im_part))


class Constants(NamedTuple):
    pi: object
    ln_2pi: object
    euler_gamma: object


def constants(prec) -> Constants:
    """π, ln 2π and Euler's γ_e at the working precision of ``prec``."""
    prec = as_precision(prec)
    with prec.workdps():
        pi = +mp.pi
        return Constants(pi, mpmath.log(2 * pi), +mp.euler)


# --- Bernoulli numbers -----------------------------------------------------

_bern_lock = threading.Lock()
_bern_exact: list[Fraction] = [Fraction(1)]
_bern_float: dict[tuple[int, int], list] = {}


def bernoulli_exact(n: int) -> list[Fraction]:
    """Exact B_0..B_n (with B_1 = -1/2), extending the shared cache."""
    if len(_bern_exact) > n:
        return _bern_exact[: n + 1]
    with _bern_lock:
        # classical recurrence sum_{k<=m} C(m+1, k) B_k = 0
        for m in range(len(_bern_exact), n + 1):
            if m > 1 and m % 2 == 1:
                _bern_exact.append(Fraction(0))
                continue
            acc = Fraction(0)
            binom = 1
            for k in range(m):
                acc += binom * _bern_exact[k]
                binom = binom * (m + 1 - k) // (k + 1)
            _bern_exact.append(-acc / (m + 1))
    return _bern_exact[: n + 1]


def bernoulli_numbers(count: int, dps: int | None = None) -> list:
    """B_2, B_4, ..., B_{2*count} as mpf at ``dps`` digits (cached)."""
    dps = mp.dps if dps is None else dps
    key = (dps, count)
    cached = _bern_float.get(key)
    if cached is not None:
        return cached
    exact = bernoulli_exact(2 * count)
    with mp.workdps(dps):
        vals = [mpmath.mpf(exact[2 * k].numerator) / exact[2 * k].denominator for k in range(1, count + 1)]
    with _bern_lock:
        _bern_float[key] = vals
    return vals


# --- Γ ----------------------------------------------------------------------


def stirling_radius(dps: int) -> float:
    """|z| beyond which Stirling's series reaches ``dps`` digits."""
    # the smallest term is about exp(-2 pi |z|)
    return 0.37 * dps + 6.0


def stirling_shift(z, dps: int) -> int:
    """Smallest m >= 0 with Re(z+m) >= 1/2 and |z+m| >= stirling_radius(dps)."""
    radius = stirling_radius(dps)
    x = float(mpmath.re(z))
    y = float(mpmath.im(z))
    m = 0
    if x < 0.5:
        m = math.ceil(0.5 - x)
    need = radius * radius - y * y
    if need > 0:
        m = max(m, math.ceil(math.sqrt(need) - x))
    return max(m, 0)


def stirling_terms(dps: int, zabs: float) -> int:
    """Number of Bernoulli terms after which the series is below 10^-dps."""
    target = -dps * math.log(10.0)
    k = 1
    while True:
        b = float(abs(bernoulli_exact(2 * k)[2 * k]))
        logterm = math.log(b) - math.log(2 * k * (2 * k - 1)) - (2 * k - 1) * math.log(zabs)
        if logterm < target or k > 4 * dps:
            return k
        k += 1


def nearest_pole(z, tolerance) -> int | None:
    """The nonpositive integer within ``tolerance`` of z, if any."""
    re = mpmath.re(z)
    if re > 0.5:
        return None
    n = int(mpmath.nint(re))
    if n > 0:
        return None
    if abs(z - n) < tolerance:
        return n
    return None


def _log_gamma_stirling(z, dps: int):
    terms = stirling_terms(dps, float(abs(z)))
    bern = bernoulli_numbers(terms, mp.dps)
    acc = (z - mpmath.mpf(0.5)) * mpmath.log(z) - z + mpmath.log(2 * mp.pi) / 2
    zinv = 1 / z
    z2inv = zinv * zinv
    power = zinv
    for k in range(1, terms + 1):
        acc += bern[k - 1] / (2 * k * (2 * k - 1)) * power
        power *= z2inv
    return acc


def log_gamma(z, prec=None):
    """A logarithm of Γ(z) (principal on the shifted argument)."""
    return mpmath.log(gamma(z, prec))


def gamma(z, prec=None):
    """Γ(z) to relative accuracy ~10^(2 - working_digits).

    Raises ``PoleError`` when z is within 10^(-working_digits/2) of a
    nonpositive integer.
    """
    prec = as_precision(prec)
    wd = prec.working_digits
    with mp.workdps(wd + 10):
        z = to_mp(z)
        if nearest_pole(z, mpmath.mpf(10) ** (-wd / 2)) is not None:
            raise PoleError(f"Gamma has a pole at {mpmath.nstr(z, 10)}")
        m = stirling_shift(z, wd + 10)
        shifted = z + m
        value = mpmath.exp(_log_gamma_stirling(shifted, wd + 10))
        if m:
            denom = mpmath.mpf(1)
            for i in range(m):
                denom *= z + i
            value /= denom
    with mp.workdps(wd):
        return +value
