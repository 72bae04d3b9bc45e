"""Hybrid evaluators for φ(t) and ∂^k G_s(t).

Below a crossover point t_K the expansions at the origin are summed; above
it the continued-fraction convergents of the asymptotic series take over,
with the convergent order chosen per interval [t_i, t_(i-1)).  Above t_0
the functions are below ε/2 and are returned as 0.
"""

from __future__ import annotations

import bisect
import logging
import math
import threading
from dataclasses import dataclass, field

import mpmath
from mpmath import mp

from .errors import CFDivisionByZero, CrossoverError, PrecisionError, TruncationError
from .mellin_large import (
    ContinuedFraction,
    asymptotic_prefactor,
    cf_eval,
    g_series_coefficients,
    m_coefficients,
    series_to_cf,
    symmetric_data,
)
from .mellin_small import (
    GammaFactorShape,
    GSmallPlan,
    PhiCoefficientTable,
    compute_phi_coefficients,
    g_small,
    phi_small,
    taylor_terms_needed,
)
from .numerics import Precision, as_precision, to_mp

__all__ = ["HybridSchedule", "HybridEvaluator", "PhiEvaluator", "GEvaluator", "build_hybrid", "shared_table"]

log = logging.getLogger(__name__)

_LOG10E = 0.4342944819032518

_tables: dict = {}
_tables_lock = threading.Lock()


def shared_table(shape: GammaFactorShape, dps: int, n_min: int) -> PhiCoefficientTable:
    """Coefficient table for ``shape`` at ``dps`` digits with at least ``n_min`` rows."""
    key = (shape, dps)
    with _tables_lock:
        table = _tables.get(key)
        if table is None:
            table = compute_phi_coefficients(shape, max(n_min, 8), Precision(dps - 5, dps))
            _tables[key] = table
        elif table.n_max < n_min:
            table.extend(n_min)
        return table


@dataclass(frozen=True)
class HybridSchedule:
    """Crossover thresholds t_0 > t_1 > ... > t_K and convergent orders n_1..n_K.

    ``taylor_only`` marks the fallback in which every t <= t_0 goes through the
    expansion at the origin.
    """

    eps: object
    thresholds: tuple
    orders: tuple
    crossover_residual: object
    taylor_only: bool = False
    threshold_residuals: tuple = field(default=())

    @property
    def t0(self):
        return self.thresholds[0]

    @property
    def t_cross(self):
        return self.thresholds[-1]


def _eps_digits(eps) -> int:
    return max(5, int(math.ceil(-float(mpmath.log10(eps)))))


class HybridEvaluator:
    """Common machinery; subclasses supply the series and both regimes."""

    ratio = 0.6
    t_floor = 1.0

    def __init__(self, shape: GammaFactorShape, prec=None, eps=None, *, thresholds=None, orders=None,
                 fallback: bool = True, check_all: bool = False, t_floor=None):
        self.shape = shape
        self.prec = as_precision(prec)
        self.sym = symmetric_data(shape)
        self.d = shape.d
        wd = self.prec.working_digits
        with mp.workdps(wd):
            self.eps = to_mp(eps) if eps is not None else mpmath.mpf(10) ** (-(self.prec.target_digits + self.prec.guard_digits // 2))
        self.eps_digits = _eps_digits(self.eps)
        if t_floor is not None:
            self.t_floor = float(t_floor)
        extra = self._magnitude_digits()
        if extra > 0:
            self.prec = self.prec.raised(extra)
            wd = self.prec.working_digits
        self.cf_dps = max(wd + 10, (3 * wd + 1) // 2)
        self._plans: dict = {}
        self._lock = threading.Lock()
        with mp.workdps(self.cf_dps):
            self.cf = self._build_cf()
        with mp.workdps(wd):
            self.kappa = to_mp(self.sym.kappa)
            self.front = self._front_constant()
        self.fallback_used = False
        try:
            self.schedule = self._make_schedule(thresholds, orders, check_all)
        except CrossoverError:
            if not fallback:
                raise
            log.warning("crossover check failed; using the expansion at the origin for all t")
            self.fallback_used = True
            self.schedule = self._taylor_only_schedule()

    # -- hooks -----------------------------------------------------------------

    def _build_cf(self) -> ContinuedFraction:
        raise NotImplementedError

    def _front_constant(self):
        raise NotImplementedError

    def _power(self) -> object:
        """Exponent of u in the asymptotic prefactor."""
        raise NotImplementedError

    def _small(self, t, table, dps):
        raise NotImplementedError

    def _magnitude_digits(self) -> int:
        """Digits by which values for t >= t_floor may exceed 1 (absolute ε needs them)."""
        return 0

    def _cf_terms(self) -> int:
        return 4 * self.prec.working_digits + 3

    # -- large t -----------------------------------------------------------------

    def _prefactor(self, t):
        u = t ** (mpmath.mpf(2) / self.d)
        return self.front * mpmath.exp(-self.d * u) * u ** self._power(), 1 / u

    def approximant(self, t, n: int):
        """n-th large-t approximant at t."""
        with mp.workdps(self.prec.working_digits):
            t = to_mp(t)
            pre, x = self._prefactor(t)
            return pre * cf_eval(self.cf, n, x)

    def approximants(self, t, n_max: int) -> list:
        with mp.workdps(self.prec.working_digits):
            t = to_mp(t)
            pre, x = self._prefactor(t)
            return [pre * c for c in self.cf.convergents(x, n_max)]

    # -- small t -----------------------------------------------------------------

    def taylor(self, t):
        """Value from the expansion at the origin, with automatic precision control."""
        wd = self.prec.working_digits
        with mp.workdps(wd):
            t = to_mp(t)
        u = float(t) ** (2.0 / self.d)
        dps = max(wd, self.eps_digits) + 10 + int(math.ceil(_LOG10E * self.d * u))
        dps = 8 * ((dps + 7) // 8)
        for _ in range(8):
            n_min = taylor_terms_needed(self.shape, float(t), dps)
            table = shared_table(self.shape, dps, n_min)
            try:
                return self._small(t, table, dps)
            except PrecisionError:
                dps = 8 * ((dps + max(10, dps // 2) + 7) // 8)
            except TruncationError:
                shared_table(self.shape, dps, int(table.n_max * 1.5) + 10)
        raise PrecisionError("expansion at the origin did not settle after raising precision")

    # -- schedule ------------------------------------------------------------------

    def _leading(self, t):
        with mp.workdps(self.prec.working_digits):
            pre, _ = self._prefactor(to_mp(t))
            return abs(pre * self.cf.alphas[0])

    def _find_t0(self):
        d = self.d
        half = self.eps / 2
        kre = float(mpmath.re(self._power()))
        u = max(1.0, kre / d + 1.0)
        lo = u ** (d / 2.0)
        hi = lo
        while self._leading(hi) >= half:
            lo = hi
            hi *= 1.25
        if hi == lo:
            return mpmath.mpf(hi)
        for _ in range(40):
            mid = (lo + hi) / 2
            if self._leading(mid) >= half:
                lo = mid
            else:
                hi = mid
        return mpmath.mpf(hi)

    def _order_at(self, t, start: int):
        cf = self.cf
        cap = 4 * self.prec.working_digits
        if not cf.terminated:
            cap = min(cap, cf.depth - 2)
        if cap < 0:
            return None
        top = cap + 2
        try:
            vals = self.approximants(t, top)
        except (CFDivisionByZero, TruncationError):
            return None
        half = self.eps / 2
        n = start - (start % 2)
        while n <= cap:
            if abs(vals[n] - vals[n + 1]) < half and abs(vals[n] - vals[n + 2]) < half:
                return n
            n += 2
        return None

    def _make_schedule(self, thresholds, orders, check_all) -> HybridSchedule:
        wd = self.prec.working_digits
        if thresholds is not None:
            with mp.workdps(wd):
                ts = tuple(to_mp(t) for t in thresholds)
            ns = tuple(int(n) for n in orders)
            if len(ns) != len(ts) - 1:
                raise ValueError("need one convergent order per interval")
        else:
            t0 = self._find_t0()
            ts = [t0]
            ns = []
            start = 0
            while True:
                t_next = ts[-1] * self.ratio
                if t_next < self.t_floor:
                    break
                n = self._order_at(t_next, start)
                if n is None:
                    break
                ts.append(t_next)
                ns.append(n)
                start = n
            ts = tuple(ts)
            ns = tuple(ns)
        with mp.workdps(wd):
            # step back to an earlier threshold when the slowest interval misleads the order test
            while True:
                t_k = ts[-1]
                large = self.approximant(t_k, ns[-1]) if ns else mpmath.mpf(0)
                residual = abs(self.taylor(t_k) - large)
                if residual <= self.eps or thresholds is not None or not ns:
                    break
                log.debug("crossover residual %s at t = %s; moving the crossover up",
                          mpmath.nstr(residual, 5), mpmath.nstr(t_k, 8))
                ts = ts[:-1]
                ns = ns[:-1]
            residuals = []
            if check_all:
                for i, t in enumerate(ts):
                    if i == 0:
                        big = self.approximant(t, ns[0]) if ns else mpmath.mpf(0)
                    else:
                        big = self.approximant(t, ns[i - 1])
                    residuals.append(abs(self.taylor(t) - big))
        if residual > self.eps:
            raise CrossoverError(
                f"crossover residual {mpmath.nstr(residual, 5)} exceeds {mpmath.nstr(self.eps, 5)} at t = {mpmath.nstr(t_k, 8)}"
            )
        return HybridSchedule(self.eps, ts, ns, residual, False, tuple(residuals))

    def _taylor_only_schedule(self) -> HybridSchedule:
        self.prec = self.prec.raised(self.prec.guard_digits)
        t0 = self._find_t0()
        return HybridSchedule(self.eps, (t0,), (), mpmath.mpf(0), True, ())

    # -- evaluation ----------------------------------------------------------------

    def __call__(self, t):
        sched = self.schedule
        wd = self.prec.working_digits
        with mp.workdps(wd):
            t = to_mp(t)
            if t <= 0:
                raise ValueError("t must be positive")
            ts = sched.thresholds
            if t > ts[0]:
                return mpmath.mpf(0)
            if t < ts[-1] or not sched.orders:
                return self.taylor(t)
            # thresholds decrease; find i with t_i <= t < t_(i-1)
            neg = [-x for x in ts]
            i = bisect.bisect_right(neg, -t)
            i = min(max(i, 1), len(ts) - 1)
            return self.approximant(t, sched.orders[i - 1])


class PhiEvaluator(HybridEvaluator):
    """φ(t) for the Γ-factor ``shape``."""

    def _build_cf(self):
        M = m_coefficients(self.shape, self.sym, self._cf_terms())
        return series_to_cf(M, self.cf_dps, strict=False)

    def _front_constant(self):
        return 2 * asymptotic_prefactor(self.d)

    def _power(self):
        return self.kappa if hasattr(self, "kappa") else to_mp(self.sym.kappa)

    def _small(self, t, table, dps):
        return phi_small(t, self.shape, table, Precision(self.eps_digits, max(dps, self.eps_digits + 5)), abs_tol=self.eps)


class GEvaluator(HybridEvaluator):
    """∂^k/∂s^k G_s(t) for fixed (s, k)."""

    def __init__(self, shape, s, k: int = 0, prec=None, eps=None, **kwargs):
        prec = as_precision(prec)
        with prec.workdps():
            self.s = to_mp(s)
        self.k = int(k)
        super().__init__(shape, prec, eps, **kwargs)

    def _build_cf(self):
        coeffs = g_series_coefficients(self.sym, self.s, self.k, self._cf_terms())
        return series_to_cf(coeffs, self.cf_dps, strict=False)

    def _front_constant(self):
        return asymptotic_prefactor(self.d)

    def _power(self):
        kappa = self.kappa if hasattr(self, "kappa") else to_mp(self.sym.kappa)
        return kappa - 1 - self.k

    def _magnitude_digits(self) -> int:
        # |G_s(t)| <= |γ(σ) t^-σ|-ish for σ = Re s beyond the poles of γ
        sigma = float(mpmath.re(self.s))
        total = 0.0
        for lam in self.shape.lambda_values():
            z = (sigma + float(mpmath.re(lam))) / 2
            if z <= 0:
                return 0
            total += math.lgamma(z)
        total -= sigma * math.log(self.t_floor) if self.t_floor > 0 else 0.0
        total += self.k * math.log(1 + abs(math.log(self.t_floor)) + 1)
        return max(0, int(math.ceil(total / math.log(10))))

    def _plan(self, table):
        key = table.dps
        with self._lock:
            plan = self._plans.get(key)
            if plan is None or plan.table is not table:
                plan = GSmallPlan(self.shape, self.s, self.k, table)
                self._plans[key] = plan
            return plan

    def _small(self, t, table, dps):
        plan = self._plan(table)
        return g_small(self.s, self.k, t, self.shape, table,
                       Precision(self.eps_digits, max(dps, self.eps_digits + 5)), plan=plan, abs_tol=self.eps)


def build_hybrid(shape: GammaFactorShape, eps, prec=None, *, s=None, k: int = 0, **kwargs) -> HybridEvaluator:
    """Prepared evaluator for φ (``s is None``) or for ∂^k G_s; its ``schedule`` is the HybridSchedule."""
    if s is None:
        return PhiEvaluator(shape, prec, eps, **kwargs)
    return GEvaluator(shape, s, k, prec, eps, **kwargs)
