"""Dirichlet coefficient providers.

A provider maps n to a_n (an mpmath number or a Python int) and advertises
the largest n it can supply (``max_n``, None when unbounded).  Multiplicative
providers additionally expose the prime-power coefficients at each prime, so
that one Euler factor can be replaced without touching the rest.
"""

from __future__ import annotations

import math
import threading
from fractions import Fraction
from pathlib import Path

import mpmath

from .errors import ParseError, TruncationError
from .numerics import complex_from_string

__all__ = [
    "CoefficientProvider",
    "ListProvider",
    "OneProvider",
    "DirichletCharacterProvider",
    "DedekindQuadraticProvider",
    "TauProvider",
    "EulerProductProvider",
    "PrimePowerOverride",
    "kronecker",
    "factorize",
    "primes_up_to",
    "tau_coefficients",
    "conjugate_provider",
]


def primes_up_to(n: int) -> list[int]:
    if n < 2:
        return []
    sieve = bytearray([1]) * (n + 1)
    sieve[0] = sieve[1] = 0
    for p in range(2, int(n**0.5) + 1):
        if sieve[p]:
            sieve[p * p :: p] = bytearray(len(range(p * p, n + 1, p)))
    return [i for i, flag in enumerate(sieve) if flag]


def factorize(n: int) -> list[tuple[int, int]]:
    """Prime factorization by trial division (n is small here)."""
    out = []
    p = 2
    while p * p <= n:
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            out.append((p, e))
        p += 1 if p == 2 else 2
    if n > 1:
        out.append((n, 1))
    return out


def kronecker(a: int, n: int) -> int:
    """Kronecker symbol (a/n)."""
    if n == 0:
        return 1 if abs(a) == 1 else 0
    result = 1
    if n < 0:
        n = -n
        if a < 0:
            result = -result
    while n % 2 == 0:
        n //= 2
        if a % 2 == 0:
            return 0
        if a % 8 in (3, 5):
            result = -result
    a %= n
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


class CoefficientProvider:
    """n ↦ a_n, 1-indexed."""

    max_n: int | None = None
    multiplicative: bool = False
    integral: bool = False

    def coefficient(self, n: int):
        raise NotImplementedError

    def __call__(self, n: int):
        if n < 1:
            raise ValueError("coefficients are indexed from 1")
        if self.max_n is not None and n > self.max_n:
            raise TruncationError(f"a_{n} requested but only {self.max_n} coefficients are available")
        return self.coefficient(n)

    def coefficients(self, count: int) -> list:
        """[a_1, ..., a_count]."""
        return [self(n) for n in range(1, count + 1)]

    def growth_constant(self, alpha, sample: int = 200):
        """max |a_n| / n^alpha over the first ``sample`` available coefficients (at least 1)."""
        top = sample if self.max_n is None else min(sample, self.max_n)
        best = 1.0
        for n in range(1, top + 1):
            best = max(best, float(abs(mpmath.mpmathify(self(n)))) / n ** float(alpha))
        return best

    def prime_powers(self, p: int, K: int) -> list:
        """[a_p, a_p^2, ..., a_p^K]."""
        return [self(p**k) for k in range(1, K + 1)]


class ListProvider(CoefficientProvider):
    """Explicit table a_1..a_N."""

    def __init__(self, values, multiplicative: bool = False):
        self.values = list(values)
        self.max_n = len(self.values)
        self.multiplicative = multiplicative
        self.integral = all(isinstance(v, int) for v in self.values)

    def coefficient(self, n):
        return self.values[n - 1]

    @classmethod
    def from_file(cls, path) -> ListProvider:
        """One value per line, line n holds a_n; '#' starts a comment."""
        values = []
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise ParseError(f"cannot read coefficient file {path}: {exc}") from None
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            values.append(_parse_number(line, lineno))
        if not values:
            raise ParseError(f"coefficient file {path} is empty")
        return cls(values)


def _parse_number(text: str, lineno=None):
    try:
        if "i" in text or "j" in text:
            return complex_from_string(text)
        if "/" in text:
            return Fraction(text)
        if any(c in text for c in ".eE"):
            return mpmath.mpf(text)
        return int(text)
    except (ValueError, TypeError):
        raise ParseError(f"not a number: {text!r}", lineno) from None


class OneProvider(CoefficientProvider):
    """a_n = 1 (Riemann ζ)."""

    multiplicative = True
    integral = True

    def coefficient(self, n):
        return 1


class DirichletCharacterProvider(CoefficientProvider):
    """a_n = χ(n mod M) from the value table χ(1), ..., χ(M)."""

    multiplicative = True

    def __init__(self, modulus: int, values):
        if len(values) != modulus:
            raise ValueError(f"need {modulus} character values, got {len(values)}")
        self.modulus = modulus
        self.values = list(values)
        self.integral = all(isinstance(v, int) for v in self.values)

    def coefficient(self, n):
        return self.values[(n - 1) % self.modulus]

    def conjugate(self) -> DirichletCharacterProvider:
        vals = [v if isinstance(v, (int, Fraction)) else mpmath.conj(v) for v in self.values]
        return DirichletCharacterProvider(self.modulus, vals)


class DedekindQuadraticProvider(CoefficientProvider):
    """a_n = Σ_{m | n} (D/m): the Dedekind ζ of the quadratic field of discriminant D."""

    multiplicative = True
    integral = True

    def __init__(self, discriminant: int):
        if discriminant in (0, 1):
            raise ValueError("discriminant must be a nonsquare")
        self.D = discriminant

    def coefficient(self, n):
        total = 0
        for m in range(1, math.isqrt(n) + 1):
            if n % m == 0:
                total += kronecker(self.D, m)
                if m * m != n:
                    total += kronecker(self.D, n // m)
        return total


_tau_lock = threading.Lock()
_tau_cache: list[int] = [0]


def _pack(coeffs, nbytes: int) -> int:
    """Σ c_i 2^(8·nbytes·i) for signed integers c_i."""
    pos = b"".join(max(c, 0).to_bytes(nbytes, "little") for c in coeffs)
    neg = b"".join(max(-c, 0).to_bytes(nbytes, "little") for c in coeffs)
    return int.from_bytes(pos, "little") - int.from_bytes(neg, "little")


def _unpack(value: int, nbytes: int, count: int) -> list[int]:
    """Inverse of ``_pack`` for digits below 2^(8·nbytes-1) in magnitude."""
    half = 1 << (8 * nbytes - 1)
    shifted = value + int.from_bytes(half.to_bytes(nbytes, "little") * count, "little")
    raw = shifted.to_bytes(nbytes * (count + 1) + 1, "little")
    return [int.from_bytes(raw[i * nbytes : (i + 1) * nbytes], "little") - half for i in range(count)]


def _mul_truncated(a: list[int], b: list[int], count: int) -> list[int]:
    """First ``count`` coefficients of a·b via one big-integer product (Kronecker substitution)."""
    big = max(max(abs(x) for x in a), max(abs(x) for x in b), 1)
    bits = 2 * big.bit_length() + max(len(a), len(b)).bit_length() + 2
    nbytes = (bits + 7) // 8
    a = a[:count]
    b = b[:count]
    product = _pack(a, nbytes) * _pack(b, nbytes)
    # drop everything from degree ``count`` on
    product &= (1 << (8 * nbytes * count)) - 1
    return _unpack(product, nbytes, count)


def tau_coefficients(count: int) -> list[int]:
    """τ(1..count) from q·∏(1 - q^m)^24.

    ∏(1 - q^m)^3 = Σ_k (-1)^k (2k+1) q^(k(k+1)/2) (Jacobi), raised to the
    eighth power by three squarings.
    """
    with _tau_lock:
        if len(_tau_cache) > count:
            return _tau_cache[1 : count + 1]
        N = max(count, 2 * (len(_tau_cache) - 1), 16)
        f = [0] * N
        k = 0
        while k * (k + 1) // 2 < N:
            f[k * (k + 1) // 2] = (-1) ** k * (2 * k + 1)
            k += 1
        for _ in range(3):
            f = _mul_truncated(f, f, N)
        _tau_cache[:] = [0] + f
        return _tau_cache[1 : count + 1]


class TauProvider(CoefficientProvider):
    """Ramanujan τ(n), coefficients of the weight-12 cusp form Δ."""

    multiplicative = True
    integral = True

    def coefficient(self, n):
        if n >= len(_tau_cache):
            tau_coefficients(n)
        return _tau_cache[n]


class EulerProductProvider(CoefficientProvider):
    """Coefficients from local polynomials: L = ∏_p 1/(1 + c_1 p^-s + ... + c_r p^-rs).

    ``local`` maps each prime p to [c_1, ..., c_r].  Every prime up to the
    largest listed one must be present; ``max_n`` is that prime's successor
    minus one.
    """

    multiplicative = True

    def __init__(self, local: dict, max_n: int | None = None):
        self.local = {int(p): list(c) for p, c in local.items()}
        largest = max(self.local) if self.local else 1
        missing = [p for p in primes_up_to(largest) if p not in self.local]
        if missing:
            raise ValueError(f"Euler factors missing for primes {missing[:5]}")
        bound = largest
        while bound + 1 <= 2 * largest + 2 and not _is_prime(bound + 1):
            bound += 1
        self.max_n = bound if max_n is None else min(max_n, bound)
        self.integral = all(isinstance(c, int) for cs in self.local.values() for c in cs)
        self._pp: dict = {}

    def prime_power(self, p: int, k: int):
        series = self._pp.get(p)
        if series is None or len(series) <= k:
            series = _local_series(self.local[p], max(k, 8))
            self._pp[p] = series
        return series[k]

    def coefficient(self, n):
        value = 1
        for p, e in factorize(n):
            value = value * self.prime_power(p, e)
        return value

    @classmethod
    def from_file(cls, path) -> EulerProductProvider:
        """Lines ``p c_1 c_2 ... c_r``: the local factor at p is 1/(1 + c_1 X + ... + c_r X^r)."""
        local = {}
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise ParseError(f"cannot read Euler factor file {path}: {exc}") from None
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            try:
                p = int(parts[0])
            except ValueError:
                raise ParseError(f"expected a prime, got {parts[0]!r}", lineno) from None
            if not _is_prime(p):
                raise ParseError(f"{p} is not prime", lineno)
            local[p] = [_parse_number(x, lineno) for x in parts[1:]]
        if not local:
            raise ParseError(f"Euler factor file {path} is empty")
        try:
            return cls(local)
        except ValueError as exc:
            raise ParseError(str(exc)) from None


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    return factorize(n) == [(n, 1)]


def _local_series(poly, K: int) -> list:
    """Coefficients of 1/(1 + c_1 X + ... + c_r X^r) up to X^K."""
    out = [1]
    for k in range(1, K + 1):
        acc = 0
        for i, c in enumerate(poly, 1):
            if i > k:
                break
            acc -= c * out[k - i]
        out.append(acc)
    return out


def local_polynomial_from_powers(powers, degree: int) -> list:
    """Fit [c_1..c_degree] so that 1/(1 + c_1 X + ...) starts 1 + a_p X + a_p2 X^2 + ...

    Requires ``len(powers) >= degree``.
    """
    series = [1] + list(powers)
    c = []
    for k in range(1, degree + 1):
        # series_k + Σ_{i=1}^{k} c_i series_(k-i) = 0
        acc = series[k]
        for i in range(1, k):
            acc += c[i - 1] * series[k - i]
        c.append(-acc)
    return c


class PrimePowerOverride(CoefficientProvider):
    """A multiplicative provider with the coefficients at one prime replaced.

    ``powers[k-1]`` is a_(p^k) for k <= len(powers); higher powers follow
    ``tail(k)`` when given, otherwise they are zero.
    """

    multiplicative = True

    def __init__(self, base: CoefficientProvider, p: int, powers, tail=None):
        if not base.multiplicative:
            raise ValueError("prime-power overrides need a multiplicative provider")
        self.base = base
        self.p = p
        self.powers = list(powers)
        self.tail = tail
        self.max_n = base.max_n
        self.integral = base.integral and all(isinstance(v, int) for v in self.powers)

    def local(self, k: int):
        if k == 0:
            return 1
        if k <= len(self.powers):
            return self.powers[k - 1]
        return self.tail(k) if self.tail is not None else 0

    def coefficient(self, n):
        e = 0
        while n % self.p == 0:
            n //= self.p
            e += 1
        rest = self.base(n) if n > 1 else 1
        return self.local(e) * rest


class _Conjugate(CoefficientProvider):
    def __init__(self, base: CoefficientProvider):
        self.base = base
        self.max_n = base.max_n
        self.multiplicative = base.multiplicative
        self.integral = base.integral

    def coefficient(self, n):
        v = self.base(n)
        if isinstance(v, (int, Fraction)):
            return v
        return mpmath.conj(v)


def conjugate_provider(base: CoefficientProvider) -> CoefficientProvider:
    """n ↦ conj(a_n)."""
    if isinstance(base, DirichletCharacterProvider):
        return base.conjugate()
    return _Conjugate(base)
