import mpmath
import pytest
from hypothesis import given, strategies as st

from motivic_lfunc.errors import DivisionByZeroSeries, WindowError
from motivic_lfunc.mellin_small import build_shape
from motivic_lfunc.numerics import Precision, gamma
from motivic_lfunc.series import (
    TruncatedLaurentSeries as TLS, gamma_factor_series, gamma_series, series_arith, star_extract,
)

P30 = Precision(30, 40)
TOL = mpmath.mpf(10) ** -35


def close(a, b, tol=TOL):
    return abs(a - b) <= tol * max(1, abs(b))


def test_monomial_identity():
    r = series_arith(TLS.monomial(-1, 3), TLS.monomial(1, 3), "mul")
    assert r.valuation == 0 and r.coeff(0) == 1


def test_geometric():
    r = series_arith(TLS.constant(1, 4), TLS.linear(1, -1, 4), "div")
    assert [r.coeff(i) for i in range(4)] == [1, 1, 1, 1]


def test_pole_quotient():
    a = TLS.monomial(-1, 4, 2)
    b = TLS.linear(-1, mpmath.mpf(1) / 2, 4)
    r = series_arith(a, b, "div")
    assert r.valuation == -1
    assert [r.coeff(i) for i in range(-1, 2)] == [-2, -1, -mpmath.mpf(1) / 2]


def test_division_by_zero():
    with pytest.raises(DivisionByZeroSeries):
        series_arith(TLS.constant(1, 3), TLS(0, [0, 0, 0]), "div")


def test_gamma_series_examples():
    with mpmath.workdps(40):
        g1 = gamma_series(1, 2, P30)
        assert close(g1.coeff(0), 1) and close(g1.coeff(1), -mpmath.euler)
        g0 = gamma_series(0, 2, P30)
        assert g0.valuation == -1 and close(g0.coeff(-1), 1) and close(g0.coeff(0), -mpmath.euler)
        gm1 = gamma_series(-1, 1, P30)
        assert gm1.valuation == -1 and close(gm1.coeff(-1), -1)


def test_gamma_factor_series_examples():
    with mpmath.workdps(40):
        a = gamma_factor_series(build_shape([0]), 2, 3, P30)
        assert a.valuation == 0 and close(a.coeff(0), 1)
        b = gamma_factor_series(build_shape([0, 0]), 0, 3, P30)
        assert b.valuation == -2
        c = gamma_factor_series(build_shape([0]), 1, 3, P30)
        assert close(c.coeff(0), mpmath.sqrt(mpmath.pi))


def test_star_extract():
    f = TLS(-1, [1, -mpmath.euler, mpmath.mpf(1) / 4])
    assert star_extract(f) == -mpmath.euler
    assert star_extract(TLS(0, [3, 0])) == 3
    assert star_extract(TLS(-2, [5, 2, 7])) == 7
    with pytest.raises(WindowError):
        star_extract(TLS(-3, [1, 2]))


def test_gamma_series_taylor_coefficients():
    # Γ^(k)(z0)/k! from mpmath differentiation
    with mpmath.workdps(40):
        z0 = mpmath.mpc("0.7", "1.3")
        g = gamma_series(z0, 5, P30)
        for k in range(5):
            ref = mpmath.diff(mpmath.gamma, z0, k) / mpmath.factorial(k)
            assert close(g.coeff(k), ref, mpmath.mpf(10) ** -30)


coef = st.floats(min_value=-3, max_value=3, allow_nan=False)


@given(st.lists(coef, min_size=5, max_size=5), st.lists(coef, min_size=5, max_size=5),
       st.integers(-2, 2), st.integers(-2, 2))
def test_div_mul_roundtrip(ca, cb, va, vb):
    with mpmath.workdps(40):
        cb = [mpmath.mpf(c) for c in cb]
        if abs(cb[0]) < 0.1:
            cb[0] += 1
        a = TLS(va, [mpmath.mpf(c) for c in ca])
        b = TLS(vb, cb)
        back = (a / b) * b
        assert back.valuation == a.valuation
        for e in range(a.valuation, a.valuation + len(back)):
            assert abs(back.coeff(e) - a.coeff(e)) < mpmath.mpf(10) ** -34


@given(st.floats(min_value=0.2, max_value=6), st.floats(min_value=-4, max_value=4))
def test_termwise_derivative_matches_differences(x, y):
    with mpmath.workdps(40):
        z0 = mpmath.mpc(x, y)
        g = gamma_series(z0, 4, P30)
        h = mpmath.mpf(10) ** -12
        fd = (gamma(z0 + h, P30) - gamma(z0 - h, P30)) / (2 * h)
        assert abs(g.derivative().coeff(0) - fd) <= mpmath.mpf(10) ** -15 * max(1, abs(fd))


@given(st.floats(min_value=-6, max_value=6), st.floats(min_value=-3, max_value=3))
def test_gamma_factor_series_constant_term(x, y):
    shape = build_shape([0, 1])
    s0 = mpmath.mpc(x, y)
    with mpmath.workdps(40):
        if abs(y) < 1e-3 and min(abs(x - n) for n in range(-8, 1)) < 1e-3:
            return
        ser = gamma_factor_series(shape, s0, 2, P30)
        ref = gamma(s0 / 2, P30) * gamma((s0 + 1) / 2, P30)
        assert ser.valuation == 0
        assert abs(ser.coeff(0) - ref) <= mpmath.mpf(10) ** -36 * max(1, abs(ref))
