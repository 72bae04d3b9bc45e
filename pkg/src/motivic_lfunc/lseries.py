"""L-function descriptors, Θ(t), the functional-equation residual, L*(s), L(s).

Conventions.  L*(s) = A^s γ(s) L(s) with γ(s) = ∏ Γ((s + λ_j)/2) satisfies
L*(s) = ϵ L̂*(w - s), where L̂ has the dual coefficients (the same series in
the self-dual case).  A pole of L* is recorded as (p_j, r_j) with
L*(s) ≈ r_j/(p_j - s) nearby, so that

    Θ(1/t) = ϵ t^w Θ̂(t) - Σ_j r_j t^(p_j)
    L*(s)  = Σ a_n G_s(n/A) + ϵ Σ â_n G_(w-s)(n/Â) + Σ_j r_j/(p_j - s).

For ζ this gives poles (0, 1) and (1, -1).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import mpmath
from mpmath import mp

from .coeffs import CoefficientProvider
from .errors import TruncationError, UnknownParameterError, ValidationError
from .hybrid import GEvaluator, PhiEvaluator
from .mellin_small import GammaFactorShape, build_shape
from .numerics import Precision, as_precision, to_mp
from .series import TruncatedLaurentSeries, gamma_factor_series

__all__ = [
    "UNKNOWN",
    "Unknown",
    "LFunctionDescriptor",
    "EvaluationReport",
    "PoleReport",
    "theta",
    "feq_residual",
    "lstar_deriv",
    "l_value",
    "plan_truncation",
]

log = logging.getLogger(__name__)


class Unknown:
    """Marker for a parameter that is to be solved for."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "UNKNOWN"


UNKNOWN = Unknown()


def is_unknown(x) -> bool:
    return x is UNKNOWN


@dataclass(eq=False)
class LFunctionDescriptor:
    """All data describing one L-series and its functional equation.

    Give either ``A`` or ``conductor`` (then A = √N / π^(d/2)).
    """

    coeffs: CoefficientProvider
    lambdas: tuple
    weight: object
    sign: object = 1
    A: object = None
    conductor: object = None
    poles: tuple = ()
    growth: float = 0.0
    growth_constant: float | None = None
    dual_coeffs: CoefficientProvider | None = None
    dual_A: object = None
    name: str = ""
    shape: GammaFactorShape = field(init=False)
    _cache: dict = field(default_factory=dict, init=False, repr=False)

    def __post_init__(self):
        self.lambdas = tuple(self.lambdas)
        if not self.lambdas:
            raise ValidationError("the Gamma factor needs at least one lambda")
        self.shape = build_shape(self.lambdas)
        if (self.A is None) == (self.conductor is None):
            raise ValidationError("give exactly one of A and conductor")
        if self.A is None:
            n = to_mp(self.conductor)
            if n <= 0:
                raise ValidationError("conductor must be positive")
        elif to_mp(self.A) <= 0:
            raise ValidationError("exponential factor A must be positive (Assumption 2.2)")
        self.poles = tuple((p, r) for p, r in self.poles)
        locs = [to_mp(p) for p, _ in self.poles]
        for i in range(len(locs)):
            for j in range(i):
                if abs(locs[i] - locs[j]) < mpmath.mpf(10) ** -12:
                    raise ValidationError("poles of L* must be simple and distinct (Assumption 2.3)")
        if float(self.growth) < 0:
            raise ValidationError("growth exponent must be nonnegative (Assumption 2.1)")

    @property
    def d(self) -> int:
        return self.shape.d

    @property
    def self_dual(self) -> bool:
        return self.dual_coeffs is None

    def exp_factor(self):
        if self.A is not None:
            return to_mp(self.A)
        return mpmath.sqrt(to_mp(self.conductor)) / mp.pi ** (mpmath.mpf(self.d) / 2)

    def dual_exp_factor(self):
        return to_mp(self.dual_A) if self.dual_A is not None else self.exp_factor()

    def dual(self) -> CoefficientProvider:
        return self.coeffs if self.dual_coeffs is None else self.dual_coeffs

    def bound_constant(self) -> float:
        if self.growth_constant is not None:
            return float(self.growth_constant)
        key = ("C", float(self.growth))
        if key not in self._cache:
            c = self.coeffs.growth_constant(self.growth)
            if self.dual_coeffs is not None:
                c = max(c, self.dual_coeffs.growth_constant(self.growth))
            self._cache[key] = c
        return self._cache[key]

    def unknowns(self) -> list[str]:
        out = []
        if is_unknown(self.sign):
            out.append("sign")
        for j, (_, r) in enumerate(self.poles):
            if is_unknown(r):
                out.append(f"r{j + 1}")
        return out

    def replace(self, **changes) -> LFunctionDescriptor:
        fields = dict(
            coeffs=self.coeffs, lambdas=self.lambdas, weight=self.weight, sign=self.sign, A=self.A,
            conductor=self.conductor, poles=self.poles, growth=self.growth,
            growth_constant=self.growth_constant, dual_coeffs=self.dual_coeffs, dual_A=self.dual_A,
            name=self.name,
        )
        if "A" in changes and "conductor" not in changes:
            fields["conductor"] = None
        if "conductor" in changes and "A" not in changes:
            fields["A"] = None
        fields.update(changes)
        return LFunctionDescriptor(**fields)


@dataclass(frozen=True)
class EvaluationReport:
    value: object
    est_error: object
    terms_used: int
    working_digits_used: int


@dataclass(frozen=True)
class PoleReport:
    """L(s) has a pole at ``location``; ``laurent`` holds the principal part coefficients."""

    location: object
    order: int
    residue: object
    laurent: tuple


# --- evaluators and truncation ----------------------------------------------------


def _eps_total(prec: Precision):
    return mpmath.mpf(10) ** (-(prec.target_digits + prec.guard_digits // 2))


def plan_truncation(desc: LFunctionDescriptor, t_min, prec=None) -> int:
    """Smallest n with C n^α P(n t_min) exp(-d (n t_min)^(2/d)) < 10^-target.

    P is the prefactor of the leading asymptotic term of φ; the last three
    included terms are then checked against tolerance/10 with the same bound.
    """
    prec = as_precision(prec)
    d = desc.d
    t_min = float(t_min)
    if t_min <= 0:
        raise ValueError("t_min must be positive")
    alpha = float(desc.growth)
    C = desc.bound_constant()
    kappa = float(mpmath.re(to_mp(_kappa(desc.shape))))
    front = math.log(2 * (2 * math.pi) ** ((d - 1) / 2) / math.sqrt(d))
    target = -prec.target_digits * math.log(10.0)

    def log_bound(n: int) -> float:
        u = (n * t_min) ** (2.0 / d)
        return math.log(C) + alpha * math.log(n) + front + kappa * math.log(u) - d * u

    n = 1
    while True:
        if log_bound(n) < target and log_bound(n + 1) < log_bound(n):
            break
        n += 1 if n < 64 else max(1, n // 16)
    # walk back to the smallest n that still satisfies the bound
    while n > 1 and log_bound(n - 1) < target and log_bound(n) < log_bound(n - 1):
        n -= 1
    while any(log_bound(m) > target - math.log(10.0) for m in range(n + 1, n + 4)):
        n += 1
    return n


def _kappa(shape):
    from .mellin_large import symmetric_data

    return symmetric_data(shape).kappa


def _coeff_values(provider: CoefficientProvider, count: int, cache: dict, key) -> list:
    vals = cache.get(key)
    if vals is None or len(vals) < count:
        if provider.max_n is not None and count > provider.max_n:
            raise TruncationError(f"{count} coefficients needed, provider has {provider.max_n}")
        vals = [to_mp(v) for v in provider.coefficients(count)]
        cache[key] = vals
    return vals


def _eval_eps(desc, prec: Precision, t_min):
    """Per-term accuracy so that the truncated sum is good to ε_total."""
    n_cut = plan_truncation(desc, t_min, prec)
    C = desc.bound_constant()
    scale = C * n_cut ** (float(desc.growth) + 1)
    return _eps_total(prec) / mpmath.mpf(scale)


def _phi_evaluator(desc, prec: Precision, eps) -> PhiEvaluator:
    key = ("phi", prec, mpmath.nstr(eps, 5))
    ev = desc._cache.get(key)
    if ev is None:
        ev = PhiEvaluator(desc.shape, prec, eps)
        desc._cache[key] = ev
    return ev


def _g_evaluator(desc, s, k: int, prec: Precision, eps) -> GEvaluator:
    key = ("G", mpmath.nstr(s, prec.working_digits), k, prec, mpmath.nstr(eps, 5))
    ev = desc._cache.get(key)
    if ev is None:
        ev = GEvaluator(desc.shape, s, k, prec, eps)
        desc._cache[key] = ev
    return ev


def _theta_sum(desc, provider, A, t, prec: Precision, eps, key):
    ev = _phi_evaluator(desc, prec, eps)
    with prec.workdps():
        t0 = ev.schedule.t0
        n_cut = int(mpmath.floor(t0 * A / t)) + 1
        vals = _coeff_values(provider, n_cut, desc._cache, key)
        total = mpmath.mpf(0)
        for n in range(1, n_cut + 1):
            a = vals[n - 1]
            if a == 0:
                continue
            total += a * ev(n * t / A)
    return total, n_cut


def theta(desc: LFunctionDescriptor, t, prec=None, dual: bool = False) -> EvaluationReport:
    """Θ(t) = Σ a_n φ(n t / A) (Θ̂ with the dual data when ``dual``)."""
    prec = as_precision(prec)
    with prec.workdps():
        t = to_mp(t)
        if t <= 0:
            raise ValueError("t must be positive")
        A = desc.dual_exp_factor() if dual else desc.exp_factor()
        provider = desc.dual() if dual else desc.coeffs
        eps = _eval_eps(desc, prec, t / A)
        value, n_cut = _theta_sum(desc, provider, A, t, prec, eps, "dual" if dual and not desc.self_dual else "a")
    return EvaluationReport(value, _eps_total(prec), n_cut, prec.working_digits)


def _require_known(desc):
    missing = desc.unknowns()
    if missing:
        raise UnknownParameterError(f"parameters {', '.join(missing)} are unknown; use the solver")


def feq_residual(desc: LFunctionDescriptor, t, prec=None):
    """|Θ(1/t) - ϵ t^w Θ̂(t) + Σ r_j t^(p_j)|."""
    _require_known(desc)
    prec = as_precision(prec)
    with prec.workdps():
        t = to_mp(t)
        if t <= 1:
            raise ValueError("the residual is taken at t > 1")
        left = theta(desc, 1 / t, prec).value
        right = theta(desc, t, prec, dual=not desc.self_dual).value
        w = to_mp(desc.weight)
        eps_sign = to_mp(desc.sign)
        value = left - eps_sign * t**w * right
        for p, r in desc.poles:
            value += to_mp(r) * t ** to_mp(p)
        return abs(value)


def _gamma_bump(desc, s) -> int:
    """Extra digits for s where |γ(s)| is tiny (large imaginary part)."""
    total = 0.0
    for lam in desc.shape.lambda_values():
        z = (s + lam) / 2
        if abs(mpmath.im(z)) < 1:
            continue
        total += float(mpmath.re(mpmath.loggamma(z)))
    extra = int(math.ceil(-total / math.log(10))) if total < 0 else 0
    if 0 < extra < 5:
        log.debug("raising working precision by %d digits at s = %s", extra, mpmath.nstr(s, 8))
    if extra >= 5:
        log.warning("|gamma(s)| ~ 1e-%d at s = %s; raising working precision", extra, mpmath.nstr(s, 8))
    return extra


def lstar_deriv(desc: LFunctionDescriptor, s, k: int = 0, prec=None, exclude_poles=()) -> EvaluationReport:
    """∂^k L*(s) from the incomplete Mellin transforms.

    Pole terms contribute Σ r_j k!/(p_j - s)^(k+1); poles whose indices are in
    ``exclude_poles`` are left out (their principal part is handled by the
    caller).
    """
    _require_known(desc)
    prec = as_precision(prec)
    k = int(k)
    if k < 0:
        raise ValueError("derivative order must be nonnegative")
    with prec.workdps():
        s = to_mp(s)
        for j, (p, _) in enumerate(desc.poles):
            if j not in exclude_poles and abs(s - to_mp(p)) < mpmath.mpf(10) ** (-prec.working_digits // 2):
                raise ZeroDivisionError(f"L* has a pole at s = {mpmath.nstr(to_mp(p), 10)}")
    extra = _gamma_bump(desc, s)
    if extra:
        prec = prec.raised(extra)
    with prec.workdps():
        s = to_mp(s)
        w = to_mp(desc.weight)
        A = desc.exp_factor()
        Ad = desc.dual_exp_factor()
        eps = _eval_eps(desc, prec, 1 / max(A, Ad))
        g1 = _g_evaluator(desc, s, k, prec, eps)
        s_dual = w - s
        g2 = _g_evaluator(desc, s_dual, k, prec, eps)
        total = mpmath.mpf(0)
        n1 = int(mpmath.floor(g1.schedule.t0 * A)) + 1
        vals = _coeff_values(desc.coeffs, n1, desc._cache, "a")
        for n in range(1, n1 + 1):
            if vals[n - 1] != 0:
                total += vals[n - 1] * g1(n / A)
        n2 = int(mpmath.floor(g2.schedule.t0 * Ad)) + 1
        dual_key = "a" if desc.self_dual else "dual"
        dvals = _coeff_values(desc.dual(), n2, desc._cache, dual_key)
        second = mpmath.mpf(0)
        for n in range(1, n2 + 1):
            if dvals[n - 1] != 0:
                second += dvals[n - 1] * g2(n / Ad)
        total += to_mp(desc.sign) * (-1) ** k * second
        kf = math.factorial(k)
        for j, (p, r) in enumerate(desc.poles):
            if j in exclude_poles:
                continue
            total += to_mp(r) * kf / (to_mp(p) - s) ** (k + 1)
    return EvaluationReport(total, _eps_total(prec), max(n1, n2), prec.working_digits)


def l_value(desc: LFunctionDescriptor, s, k: int = 0, prec=None):
    """L^(k)(s) as an EvaluationReport, or a PoleReport when L has a pole at s.

    The Taylor (or Laurent) window of L*(s + ε) is divided by the expansion of
    A^(s+ε) γ(s+ε); poles of γ then produce the trivial zeros.
    """
    _require_known(desc)
    prec = as_precision(prec)
    k = int(k)
    with prec.workdps():
        s = to_mp(s)
    hit_tol = mpmath.mpf(10) ** (-prec.working_digits // 2)
    hit = []
    bump = 0
    for j, (p, _) in enumerate(desc.poles):
        delta = abs(s - to_mp(p))
        if delta < hit_tol:
            hit.append(j)
        elif delta < mpmath.mpf("1e-3"):
            bump = max(bump, int(math.ceil((k + 1) * float(-mpmath.log10(delta)))))
    if bump:
        prec = prec.raised(bump)
    with prec.workdps():
        s = to_mp(s)
        for j in hit:
            s = to_mp(desc.poles[j][0])
        p_gamma = desc.shape.pole_order(s)
        v_num = -1 if hit else 0
        top = k - p_gamma
        if top < v_num:
            return EvaluationReport(mpmath.mpf(0), mpmath.mpf(0), 0, prec.working_digits)
        coeffs = []
        est = mpmath.mpf(0)
        terms = 0
        if hit:
            coeffs.append(-sum(to_mp(desc.poles[j][1]) for j in hit))
        for m in range(0, top + 1):
            rep = lstar_deriv(desc, s, m, prec, exclude_poles=tuple(hit))
            coeffs.append(rep.value / math.factorial(m))
            est = max(est, rep.est_error)
            terms = max(terms, rep.terms_used)
        numerator = TruncatedLaurentSeries(v_num, coeffs)
        length = len(coeffs) + p_gamma
        gam = gamma_factor_series(desc.shape, s, length, prec)
        A = desc.exp_factor()
        a_series = TruncatedLaurentSeries.linear(0, mpmath.log(A), length).exp() * A**s
        quotient = numerator / (gam * a_series)
        if quotient.valuation < 0 and any(
            quotient.coeff(e) != 0 for e in range(quotient.valuation, 0)
        ):
            principal = tuple(quotient.coeff(e) for e in range(quotient.valuation, 0))
            order = -quotient.valuation
            return PoleReport(s, order, quotient.coeff(-1), principal)
        value = math.factorial(k) * quotient.coeff(k)
        scale = abs(gam.coeff(gam.valuation) * A**s)
        err = est / scale if scale else est
    return EvaluationReport(value, err * math.factorial(k), terms, prec.working_digits)
