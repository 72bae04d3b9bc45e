"""Recovering unknown invariants from the functional equation.

Θ(1/t) = ϵ t^w Θ̂(t) - Σ_j r_j t^(p_j) is linear in ϵ, in the r_j and (for a
multiplicative series) in the coefficients at a single prime, so sampling it
at several t gives an overdetermined linear system.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import mpmath
from mpmath import mp

from .coeffs import CoefficientProvider, PrimePowerOverride, local_polynomial_from_powers
from .errors import IllConditionedError, NonIntegralError, TruncationError, UnknownParameterError, ValidationError
from .lseries import (
    LFunctionDescriptor,
    _coeff_values,
    _eval_eps,
    _phi_evaluator,
    feq_residual,
    is_unknown,
    theta,
)
from .numerics import Precision, as_precision, to_mp

__all__ = ["SolveResult", "default_samples", "solve_sign_residues", "solve_bad_prime", "conductor_search"]

log = logging.getLogger(__name__)


@dataclass
class SolveResult:
    """Solved values keyed by name, with least-squares and verification diagnostics."""

    values: dict
    residual: object
    condition: object
    verification: list = field(default_factory=list)
    tolerance: object = None
    descriptor: LFunctionDescriptor | None = None

    @property
    def verified(self) -> bool:
        return bool(self.verification) and max(self.verification) <= self.tolerance


def default_samples(count: int, lo=1.1, hi=3.0) -> list:
    """Geometric grid of ``count`` points on [lo, hi]."""
    if count == 1:
        return [mpmath.mpf(lo)]
    ratio = (mpmath.mpf(hi) / lo) ** (mpmath.mpf(1) / (count - 1))
    return [mpmath.mpf(lo) * ratio**i for i in range(count)]


def _fresh_samples(samples, count: int = 3) -> list:
    """Points strictly between consecutive samples (geometric midpoints)."""
    srt = sorted(samples)
    out = []
    for a, b in zip(srt, srt[1:]):
        out.append(mpmath.sqrt(a * b) * mpmath.mpf("1.0137"))
        if len(out) == count:
            return out
    while len(out) < count:
        out.append(srt[-1] * (1 + mpmath.mpf(len(out) + 1) / 7))
    return out


def _least_squares(rows, rhs, prec: Precision):
    """Solve rows·x ≈ rhs (complex allowed) via a real column-scaled QR.

    Returns (x, residual norm, condition number of the scaled system).
    """
    m = len(rows)
    u = len(rows[0])
    is_complex = any(mpmath.im(v) != 0 for row in rows for v in row) or any(mpmath.im(b) != 0 for b in rhs)
    if is_complex:
        real_rows = []
        real_rhs = []
        for row, b in zip(rows, rhs):
            real_rows.append([mpmath.re(v) for v in row] + [-mpmath.im(v) for v in row])
            real_rows.append([mpmath.im(v) for v in row] + [mpmath.re(v) for v in row])
            real_rhs.extend([mpmath.re(b), mpmath.im(b)])
        rows, rhs = real_rows, real_rhs
    else:
        rows = [[mpmath.re(v) for v in row] for row in rows]
        rhs = [mpmath.re(b) for b in rhs]
    # mpmath's Householder step divides by the sign of the pivot entry, so
    # put the largest rows first (identically zero rows carry no information)
    order = sorted(range(len(rows)), key=lambda i: -mpmath.fsum(v**2 for v in rows[i]))
    rows = [rows[i] for i in order]
    rhs = [rhs[i] for i in order]
    cols = len(rows[0])
    scales = []
    for j in range(cols):
        norm = mpmath.sqrt(mpmath.fsum(rows[i][j] ** 2 for i in range(len(rows))))
        if norm == 0:
            raise IllConditionedError(f"unknown {j % u + 1} does not enter the equations")
        scales.append(norm)
    A = mpmath.matrix([[rows[i][j] / scales[j] for j in range(cols)] for i in range(len(rows))])
    b = mpmath.matrix(rhs)
    sv = mpmath.svd_r(A, compute_uv=False)
    smax = max(abs(x) for x in sv)
    smin = min(abs(x) for x in sv)
    cond = smax / smin if smin else mpmath.inf
    limit = mpmath.mpf(10) ** (prec.guard_digits - 5)
    if cond > limit:
        raise IllConditionedError(
            f"sample matrix condition {mpmath.nstr(cond, 4)} exceeds 1e{prec.guard_digits - 5}"
        )
    x, res = mpmath.qr_solve(A, b)
    sol = [x[j] / scales[j] for j in range(cols)]
    if is_complex:
        sol = [mpmath.mpc(sol[j], sol[j + u]) for j in range(u)]
    return sol, res, cond


def _verification_tolerance(prec: Precision):
    return mpmath.mpf(10) ** (-prec.target_digits + 3)


def solve_sign_residues(desc: LFunctionDescriptor, t_samples=None, prec=None) -> SolveResult:
    """Least-squares solution for the unknown sign and residues.

    Each sample t contributes Θ(1/t) + Σ_known r_j t^(p_j) = ϵ t^w Θ̂(t) - Σ_unknown r_j t^(p_j).
    The result is re-checked on three fresh values of t.
    """
    prec = as_precision(prec)
    names = desc.unknowns()
    if not names:
        raise UnknownParameterError("nothing to solve for: sign and residues are all known")
    with prec.workdps():
        if t_samples is None:
            t_samples = default_samples(len(names) + 2)
        samples = [to_mp(t) for t in t_samples]
        if len(samples) < len(names):
            raise ValueError(f"{len(names)} unknowns need at least as many samples")
        if any(t <= 1 for t in samples):
            raise ValueError("samples must exceed 1")
        w = to_mp(desc.weight)
        rows = []
        rhs = []
        for t in samples:
            left = theta(desc, 1 / t, prec).value
            right = theta(desc, t, prec, dual=not desc.self_dual).value
            row = []
            b = left
            if is_unknown(desc.sign):
                row.append(t**w * right)
            else:
                b -= to_mp(desc.sign) * t**w * right
            for p, r in desc.poles:
                tp = t ** to_mp(p)
                if is_unknown(r):
                    row.append(-tp)
                else:
                    b += to_mp(r) * tp
            rows.append(row)
            rhs.append(b)
        sol, res, cond = _least_squares(rows, rhs, prec)
        values = dict(zip(names, sol))
        sign = values.get("sign", desc.sign)
        poles = []
        for j, (p, r) in enumerate(desc.poles):
            poles.append((p, values.get(f"r{j + 1}", r)))
        solved = desc.replace(sign=sign, poles=tuple(poles))
        fresh = _fresh_samples(samples)
        verification = [feq_residual(solved, t, prec) for t in fresh]
    return SolveResult(values, res, cond, verification, _verification_tolerance(prec), solved)


class _Stripped(CoefficientProvider):
    """a_m for p ∤ m, 0 otherwise."""

    def __init__(self, base: CoefficientProvider, p: int):
        self.base = base
        self.p = p
        self.max_n = base.max_n

    def coefficient(self, n):
        return 0 if n % self.p == 0 else self.base(n)


def _theta_parts(desc, stripped_vals, p: int, k_max: int, t, prec: Precision, ev):
    """θ_k(t) = Σ_{p∤m} a_m φ(p^k m t / A) for k = 0..k_max."""
    A = desc.exp_factor()
    t0 = ev.schedule.t0
    out = []
    for k in range(k_max + 1):
        pk = p**k
        top = int(mpmath.floor(t0 * A / (pk * t))) + 1
        total = mpmath.mpf(0)
        for m in range(1, top + 1):
            a = stripped_vals[m - 1]
            if a != 0:
                total += a * ev(pk * m * t / A)
        out.append(total)
    return out


def _tail_series(powers, degree: int, k_max: int) -> list:
    """a_(p^k), k = 0..k_max, extending ``powers`` by its fitted local recurrence."""
    seq = [mpmath.mpf(1)] + list(powers)
    deg = min(degree, len(powers))
    c = local_polynomial_from_powers(powers[:deg], deg) if deg else []
    while len(seq) <= k_max:
        k = len(seq)
        acc = mpmath.mpf(0)
        for i, ci in enumerate(c, 1):
            acc -= ci * seq[k - i]
        seq.append(acc)
    return seq


def solve_bad_prime(desc: LFunctionDescriptor, p: int, K: int, t_samples=None, prec=None,
                    integer_coeffs: bool = True, round_tolerance=None, max_iter: int = 12) -> SolveResult:
    """Recover a_p, ..., a_(p^K) of a multiplicative, self-dual L-series.

    Θ(t) is split as Σ_k a_(p^k) θ_k(t).  Powers above K are extended with the
    local recurrence (degree <= d) fitted to the current estimates, iterated
    to a fixed point.  With ``integer_coeffs`` each a_(p^k) is rounded in turn
    (if it is within ``round_tolerance`` of an integer), fixed and the rest
    re-solved.
    """
    prec = as_precision(prec)
    if not desc.coeffs.multiplicative:
        raise ValidationError("bad-prime solving needs multiplicative coefficients")
    if not desc.self_dual:
        raise ValidationError("bad-prime solving is implemented for self-dual descriptors")
    if desc.unknowns():
        raise UnknownParameterError("solve for the sign and residues first")
    if K < 1:
        raise ValueError("K must be >= 1")
    if p < 5:
        log.warning("solving at the small prime %d is often unstable; trying candidate local factors may work better", p)
    if round_tolerance is None:
        round_tolerance = mpmath.mpf(10) ** (-prec.target_digits / 3)
    d = desc.d
    with prec.workdps():
        if t_samples is None:
            t_samples = default_samples(K + 2)
        samples = [to_mp(t) for t in t_samples]
        if len(samples) < K:
            raise ValueError(f"{K} unknowns need at least as many samples")
        A = desc.exp_factor()
        t_small = min(min(samples), 1 / max(samples))
        eps = _eval_eps(desc, prec, t_small / A)
        ev = _phi_evaluator(desc, prec, eps)
        stripped = _Stripped(desc.coeffs, p)
        top = int(mpmath.floor(ev.schedule.t0 * A / t_small)) + 1
        if desc.coeffs.max_n is not None and top > desc.coeffs.max_n:
            raise TruncationError(f"{top} coefficients needed, provider has {desc.coeffs.max_n}")
        vals = [to_mp(stripped(n)) for n in range(1, top + 1)]
        k_max = 1
        while p**k_max * t_small / A <= ev.schedule.t0:
            k_max += 1
        k_max = max(k_max, K)
        w = to_mp(desc.weight)
        sign = to_mp(desc.sign)
        # per sample: e_k(t) = θ_k(1/t) - ϵ t^w θ_k(t) and the pole term
        parts = []
        for t in samples:
            inv = _theta_parts(desc, vals, p, k_max, 1 / t, prec, ev)
            fwd = _theta_parts(desc, vals, p, k_max, t, prec, ev)
            e = [inv[k] - sign * t**w * fwd[k] for k in range(k_max + 1)]
            pole = mpmath.fsum(to_mp(r) * t ** to_mp(pp) for pp, r in desc.poles)
            parts.append((e, pole))

        # a_(p^k) whose θ-terms vanish to working precision are invisible to the
        # equations; they follow from the local recurrence of degree <= d instead
        visible = [k for k in range(1, K + 1) if max(abs(e[k]) for e, _ in parts) > eps * 1000]
        n_vis = 0
        while n_vis + 1 in visible:
            n_vis += 1
        if n_vis == 0:
            raise IllConditionedError(f"a_{p} does not enter the sampled equations")
        if n_vis < K:
            if n_vis < min(d, K):
                log.warning("only a_%d..a_%d^%d are visible; higher powers assume a local factor of degree %d",
                            p, p, n_vis, n_vis)
            K_solve = n_vis
        else:
            K_solve = K
        K_req, K = K, K_solve

        fixed: dict[int, object] = {}
        estimate = [mpmath.mpf(0)] * K
        cond = mpmath.mpf(1)
        res = mpmath.mpf(0)
        while True:
            free = [k for k in range(1, K + 1) if k not in fixed]
            prev = None
            for _ in range(max_iter):
                powers = [fixed.get(k, estimate[k - 1]) for k in range(1, K + 1)]
                seq = _tail_series(powers, d, k_max)
                rows = []
                rhs = []
                for e, pole in parts:
                    b = -(e[0] + pole)
                    for k in range(1, k_max + 1):
                        if k > K or k in fixed:
                            b -= seq[k] * e[k]
                    rows.append([e[k] for k in free] if free else [])
                    rhs.append(b)
                if not free:
                    break
                sol, res, cond = _least_squares(rows, rhs, prec)
                for k, v in zip(free, sol):
                    estimate[k - 1] = v
                if prev is not None and max(abs(a - b) for a, b in zip(sol, prev)) < eps * 10**6:
                    break
                prev = sol
            if not free or not integer_coeffs:
                break
            k = free[0]
            value = estimate[k - 1]
            nearest = mpmath.nint(mpmath.re(value))
            if abs(value - nearest) > round_tolerance:
                raise NonIntegralError(
                    f"a_{p}^{k} = {mpmath.nstr(value, 12)} is not within {mpmath.nstr(round_tolerance, 3)} of an integer"
                )
            fixed[k] = nearest
            estimate[k - 1] = nearest

        powers = [fixed.get(k, estimate[k - 1]) for k in range(1, K + 1)]
        seq = _tail_series(powers, d, max(k_max, K_req, 64))
        powers = seq[1 : K_req + 1]
        if integer_coeffs:
            powers_out = [int(mpmath.nint(mpmath.re(v))) for v in powers]
        else:
            powers_out = list(powers)
        override = PrimePowerOverride(desc.coeffs, p, powers_out, tail=lambda k: seq[k] if k < len(seq) else 0)
        solved = desc.replace(coeffs=override)
        fresh = _fresh_samples(samples)
        verification = [feq_residual(solved, t, prec) for t in fresh]
    values = {p**k: v for k, v in zip(range(1, K_req + 1), powers_out)}
    if n_vis < min(d, K_req):
        # the local factor is not pinned down: report only what the data determines
        for k in range(n_vis + 1, K_req + 1):
            values[p**k] = None
    return SolveResult(values, res, cond, verification, _verification_tolerance(prec), solved)


def conductor_search(desc: LFunctionDescriptor, candidates, t_samples=None, prec=None):
    """Try each conductor N; return (N, SolveResult) for the unique candidate that verifies.

    Raises ``ValidationError`` when no candidate or more than one passes.
    """
    prec = as_precision(prec)
    passing = []
    results = {}
    for N in candidates:
        trial = desc.replace(conductor=N)
        try:
            if trial.unknowns():
                result = solve_sign_residues(trial, t_samples, prec)
                ok = result.verified
            else:
                with prec.workdps():
                    fresh = _fresh_samples(t_samples or default_samples(4))
                    ver = [feq_residual(trial, t, prec) for t in fresh]
                result = SolveResult({}, mpmath.mpf(0), mpmath.mpf(1), ver, _verification_tolerance(prec), trial)
                ok = result.verified
        except IllConditionedError:
            continue
        results[N] = result
        if ok:
            passing.append(N)
    if not passing:
        raise ValidationError("no candidate conductor satisfies the functional equation")
    if len(passing) > 1:
        raise ValidationError(f"several conductors pass: {passing}")
    return passing[0], results[passing[0]]
