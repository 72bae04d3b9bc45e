"""Acceptance criteria, each at its stated tolerance and runtime budget.

Every test records one PASS/FAIL line, printed in the terminal summary.
"""

import os
import time
from fractions import Fraction

import mpmath
import pytest

from motivic_lfunc.cli import load_descriptor
from motivic_lfunc.coeffs import tau_coefficients
from motivic_lfunc.hybrid import build_hybrid
from motivic_lfunc.lseries import UNKNOWN, feq_residual, l_value
from motivic_lfunc.mellin_large import (
    m_coefficients, mu_coefficients, series_to_cf, symmetric_data,
)
from motivic_lfunc.mellin_small import build_shape
from motivic_lfunc.numerics import Precision, to_mp
from motivic_lfunc.solver import default_samples, solve_bad_prime, solve_sign_residues

from conftest import DESCRIPTORS, record_acceptance
from oracles import bessel_k0


def mp10(e):
    return mpmath.mpf(10) ** e


class Checks:
    """Collects named boolean checks and the worst observed error."""

    def __init__(self):
        self.failed = []
        self.worst = None

    def check(self, name, ok, err=None):
        if not ok:
            self.failed.append(name)
        if err is not None:
            err = mpmath.mpf(err)
            self.worst = err if self.worst is None else max(self.worst, err)

    def detail(self):
        parts = []
        if self.worst is not None:
            parts.append(f"max err {mpmath.nstr(self.worst, 3)}")
        if self.failed:
            parts.append("failed: " + ", ".join(self.failed))
        return "; ".join(parts) or "ok"


def finish(number, title, checks, start, budget):
    elapsed = time.perf_counter() - start
    checks.check(f"runtime {elapsed:.1f} s > {budget} s", elapsed < budget)
    passed = not checks.failed
    record_acceptance(number, title, passed, checks.detail(), elapsed)
    assert passed, checks.detail()


def load(name, digits):
    desc, _ = load_descriptor(os.path.join(DESCRIPTORS, name), digits)
    return desc


@pytest.mark.xfail(strict=True, raises=AssertionError, reason="M_2 = -9/512 contradicts the two-term recursion, which forces M_2 = +9/512")
def test_criterion_1_asymptotic_coefficients():
    start = time.perf_counter()
    c = Checks()
    wd = 30
    shape = build_shape([0, 0])
    M = m_coefficients(shape, symmetric_data(shape), 20)
    c.check("M_1 = -1/16", M[1] == Fraction(-1, 16))
    c.check(f"M_2 = -9/512 (got {M[2]})", M[2] == Fraction(-9, 512))
    with mpmath.workdps(wd):
        worst = max(abs(to_mp(16 * n * M[n] + (2 * n - 1) ** 2 * M[n - 1])) for n in range(1, 21))
    c.check("16nM_n = -(2n-1)^2 M_(n-1)", worst < mp10(-wd + 5), worst)
    finish(1, "asymptotic coefficients, lambda = (0,0)", c, start, 1.0)


def test_criterion_2_hybrid_crossover():
    start = time.perf_counter()
    c = Checks()
    eps = mp10(-10) / 2
    ev = build_hybrid(build_shape([0, 0]), eps, Precision(15, 25), thresholds=(12, 7, 2), orders=(6, 20))
    with mpmath.workdps(25):
        res = abs(ev.taylor(2) - ev.approximant(2, 20))
    c.check("|phi_taylor(2) - phi_20(2)| <= 1e-13", res <= mp10(-13), res)
    c.check("schedule residual recorded", ev.schedule.crossover_residual == res)
    finish(2, "hybrid crossover (12, 7, 2)/(6, 20)", c, start, 5.0)


def test_criterion_3_bessel_oracle():
    start = time.perf_counter()
    c = Checks()
    ev = build_hybrid(build_shape([0, 0]), None, Precision(20, 30))
    with mpmath.workdps(40):
        for t in ("0.5", "1", "3", "10"):
            t = mpmath.mpf(t)
            ref = 4 * bessel_k0(2 * t)
            err = abs(ev(t) / ref - 1)
            c.check(f"t = {t}", err < mp10(-12), err)
    finish(3, "phi(t) = 4 K_0(2t) against an independent Bessel oracle", c, start, 5.0)


def test_criterion_4_riemann_zeta():
    start = time.perf_counter()
    c = Checks()
    z = load("zeta.lf", 30)
    prec = Precision(30)
    with mpmath.workdps(50):
        for t in ("1.1", "1.5", mpmath.e):
            r = feq_residual(z, t, prec)
            c.check(f"feq at t = {mpmath.nstr(mpmath.mpmathify(t), 5)}", r < mp10(-27), r)
        e = abs(l_value(z, 2, 0, prec).value - mpmath.pi**2 / 6)
        c.check("zeta(2)", e < mp10(-27), e)
        e = abs(l_value(z, -1, 0, prec).value + mpmath.mpf(1) / 12)
        c.check("zeta(-1)", e < mp10(-25), e)
        e = abs(l_value(z, 0, 1, prec).value + mpmath.log(2 * mpmath.pi) / 2)
        c.check("zeta'(0)", e < mp10(-25), e)
        e = abs(l_value(z, -2, 0, prec).value)
        c.check("zeta(-2)", e < mp10(-25), e)
    finish(4, "Riemann zeta at 30 digits", c, start, 30.0)


def test_criterion_5_dirichlet_chi4():
    start = time.perf_counter()
    c = Checks()
    chi = load("chi4.lf", 20)
    prec = Precision(20)
    with mpmath.workdps(40):
        e = abs(l_value(chi, 1, 0, prec).value - mpmath.pi / 4)
        c.check("L(1) = pi/4", e < mp10(-18), e)
        r = feq_residual(chi, "1.4", prec)
        c.check("feq at t = 1.4", r < mp10(-17), r)
    finish(5, "Dirichlet chi_-4 at 20 digits", c, start, 10.0)


def test_criterion_6_dedekind_factorization():
    start = time.perf_counter()
    c = Checks()
    prec = Precision(20)
    qi, z, chi = load("zetaQi.lf", 20), load("zeta.lf", 20), load("chi4.lf", 20)
    with mpmath.workdps(40):
        for s in (2, 3, mpmath.mpc("0.5", 2)):
            lhs = l_value(qi, s, 0, prec).value
            rhs = l_value(z, s, 0, prec).value * l_value(chi, s, 0, prec).value
            e = abs(lhs - rhs)
            c.check(f"s = {mpmath.nstr(s, 3)}", e < mp10(-17), e)
    finish(6, "zeta_Q(i) = zeta * L(chi_-4)", c, start, 60.0)


def test_criterion_7_modular_delta():
    start = time.perf_counter()
    c = Checks()
    prec = Precision(20)
    delta = load("delta.lf", 20)
    c.check("descriptor", delta.weight == 12 and delta.lambdas == (0, 1) and delta.sign == 1 and delta.conductor == 1)
    with mpmath.workdps(40):
        for t in ("1.2", "1.7"):
            r = feq_residual(delta, t, prec)
            c.check(f"feq at t = {t}", r < mp10(-17), r)
        tau = tau_coefficients(2000)
        direct = mpmath.fsum(mpmath.mpf(tau[n - 1]) / mpmath.mpf(n) ** 12 for n in range(1, 2001))
        e = abs(l_value(delta, 12, 0, prec).value - direct)
        c.check("L(Delta, 12) vs direct sum", e < mp10(-10), e)
    finish(7, "modular form Delta", c, start, 60.0)


def test_criterion_8_solver_round_trips():
    start = time.perf_counter()
    c = Checks()
    prec = Precision(20)
    z = load("zeta.lf", 20)
    with mpmath.workdps(40):
        res = solve_sign_residues(z.replace(sign=UNKNOWN), None, prec)
        e = abs(res.values["sign"] - 1)
        c.check("sign of zeta", e < mp10(-15) and res.verified, e)
        res = solve_sign_residues(z.replace(poles=((0, UNKNOWN), (1, UNKNOWN))), None, prec)
        e = max(abs(res.values["r1"] - 1), abs(res.values["r2"] + 1))
        c.check("residues (1, -1)", e < mp10(-15) and res.verified, e)
        qi = load("zetaQi.lf", 20)
        res = solve_bad_prime(qi, 2, 2, None, prec)
        c.check(f"a_2 = a_4 = 1 (got {res.values})", res.values == {2: 1, 4: 1} and res.verified)
        bad = z.replace(conductor=2, sign=UNKNOWN, poles=((0, UNKNOWN), (1, UNKNOWN)))
        res = solve_sign_residues(bad, default_samples(5), prec)
        c.check("conductor 2 fails verification", not res.verified)
    finish(8, "solver round trips and negative control", c, start, 60.0)


def test_criterion_9_property_suites():
    start = time.perf_counter()
    c = Checks()
    wd = 30
    with mpmath.workdps(wd):
        # d = 1: asymptotic series is identically 1
        for lam in (0, 1, Fraction(1, 3)):
            shape = build_shape([lam])
            M = m_coefficients(shape, symmetric_data(shape), 20)
            worst = max(abs(to_mp(m)) for m in M[1:])
            c.check(f"d = 1, lambda = {lam}: M_n = 0", M[0] == 1 and worst < mp10(-wd + 5), worst)
        # continued fraction re-expansion
        for lambdas in ([0, 0], [0, 1], [0, 0, 0]):
            shape = build_shape(lambdas)
            M = m_coefficients(shape, symmetric_data(shape), 30)
            cf = series_to_cf(M, dps=int(1.5 * wd))
            for n in (4, 10, min(20, cf.depth)):
                length = min(len(M), sum(cf.exponents[:n]) + 1)
                re = cf.taylor(n, length)
                err = max(abs(a - to_mp(b)) / max(1, abs(to_mp(b))) for a, b in zip(re, M))
                c.check(f"cf faithful {lambdas} n = {n}", err < mp10(-wd + n + 3), err)
    # G_2(t) = exp(-t^2)/t^2
    ev = build_hybrid(build_shape([0]), mp10(-25), Precision(25, 35), s=2)
    with mpmath.workdps(40):
        for t in ("0.3", "1", "2"):
            t = mpmath.mpf(t)
            err = abs(ev(t) - mpmath.exp(-t * t) / t**2)
            c.check(f"G_2({t})", err < mp10(-20), err)
    # dG/ds against central differences, h = 10^(-wd/3)
    prec = Precision(20, wd)
    shape = build_shape([0, 1])
    with mpmath.workdps(wd + 10):
        s = mpmath.mpf("2.5")
        h = mp10(-wd / 3)
        sp, sm = s + h, s - h
    d1 = build_hybrid(shape, mp10(-25), prec, s=s, k=1)
    gp = build_hybrid(shape, mp10(-25), prec, s=sp)
    gm = build_hybrid(shape, mp10(-25), prec, s=sm)
    with mpmath.workdps(wd + 10):
        for t in ("0.7", "1.5", "4"):
            fd = (gp(t) - gm(t)) / (2 * h)
            err = abs(d1(t) - fd) / max(1, abs(fd))
            c.check(f"dG/ds at t = {t}", err < mp10(-(wd / 3) + 2), err)
    # leading coefficient of mu_n is 2^-n
    for lambdas in ([0], [0, 0], [0, 1], [0, 1, Fraction(1, 6), Fraction(-1, 6)]):
        shape = build_shape(lambdas)
        mu = mu_coefficients(shape, symmetric_data(shape), None, 10)
        c.check(f"mu leading {lambdas}", all(mu[n][n] == Fraction(1, 2**n) and len(mu[n]) == n + 1 for n in range(11)))
    finish(9, "property suites", c, start, 60.0)
