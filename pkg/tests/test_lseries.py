import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from motivic_lfunc.coeffs import DirichletCharacterProvider, OneProvider, tau_coefficients
from motivic_lfunc.errors import UnknownParameterError, ValidationError
from motivic_lfunc.lseries import (
    UNKNOWN, EvaluationReport, LFunctionDescriptor, PoleReport, feq_residual, l_value, lstar_deriv,
    plan_truncation, theta,
)
from motivic_lfunc.numerics import Precision

from descs import chi4, delta, zeta, zeta_qi

P30 = Precision(30, 40)
P20 = Precision(20, 30)
P15 = Precision(15, 25)


def test_validation():
    with pytest.raises(ValidationError):
        LFunctionDescriptor(OneProvider(), (0,), 1, 1)
    with pytest.raises(ValidationError):
        LFunctionDescriptor(OneProvider(), (0,), 1, 1, A=1, conductor=1)
    with pytest.raises(ValidationError):
        LFunctionDescriptor(OneProvider(), (0,), 1, 1, A=-1)
    with pytest.raises(ValidationError):
        LFunctionDescriptor(OneProvider(), (0,), 1, 1, A=1, poles=((1, 1), (1, 2)))
    with pytest.raises(ValidationError):
        LFunctionDescriptor(OneProvider(), (), 1, 1, A=1)
    with pytest.raises(ValidationError):
        LFunctionDescriptor(OneProvider(), (0,), 1, 1, A=1, growth=-1)
    z = zeta()
    assert z.replace(conductor=2).A is None
    assert z.replace(sign=UNKNOWN).unknowns() == ["sign"]


def test_exp_factor():
    with mpmath.workdps(30):
        assert abs(zeta().exp_factor() - 1 / mpmath.sqrt(mpmath.pi)) < 1e-28
        assert abs(delta().exp_factor() - 1 / mpmath.pi) < 1e-28


def test_theta_zeta():
    z = zeta()
    with mpmath.workdps(40):
        ref = mpmath.nsum(lambda n: 2 * mpmath.exp(-mpmath.pi * n * n), [1, mpmath.inf])
        rep = theta(z, 1, P30)
        assert isinstance(rep, EvaluationReport)
        assert abs(rep.value - ref) < mpmath.mpf(10) ** -30
        assert abs(theta(z, 10, P30).value) < mpmath.mpf(10) ** -30


def test_theta_delta_direct():
    d = delta()
    tau = tau_coefficients(1000)
    with mpmath.workdps(30):
        # λ = (0, 1): φ(x) = 2√π e^(-2x), A = 1/π
        ref = mpmath.fsum(tau[n - 1] * 2 * mpmath.sqrt(mpmath.pi) * mpmath.exp(-4 * mpmath.pi * n) for n in range(1, 1001))
        assert abs(theta(d, 2, P20).value - ref) < mpmath.mpf(10) ** -20


def test_feq_zeta():
    z = zeta()
    assert feq_residual(z, 1.0000001, P30) < mpmath.mpf(10) ** -27
    assert feq_residual(z, "1.3", P30) < mpmath.mpf(10) ** -27
    assert feq_residual(z.replace(sign=-1), "1.3", P30) > mpmath.mpf(10) ** -3
    with pytest.raises(UnknownParameterError):
        feq_residual(z.replace(sign=UNKNOWN), "1.3", P30)
    with pytest.raises(ValueError):
        feq_residual(z, "0.9", P30)


def test_feq_chi4_and_qi():
    assert feq_residual(chi4(), "1.4", P20) < mpmath.mpf(10) ** -17
    assert feq_residual(zeta_qi(), "1.25", P20) < mpmath.mpf(10) ** -17


def test_feq_complex_character_dual():
    # χ mod 5 with χ(2) = i is odd and not real; its dual is the conjugate character
    with mpmath.workdps(40):
        vals = [1, mpmath.mpc(0, 1), mpmath.mpc(0, -1), -1, 0]
        gauss = mpmath.fsum(vals[a - 1] * mpmath.expjpi(2 * mpmath.mpf(a) / 5) for a in range(1, 5))
        sign = gauss / (mpmath.mpc(0, 1) * mpmath.sqrt(5))
    chi = DirichletCharacterProvider(5, vals)
    desc = LFunctionDescriptor(chi, (1,), 1, sign, conductor=5, dual_coeffs=chi.conjugate())
    assert feq_residual(desc, "1.3", P20) < mpmath.mpf(10) ** -17
    assert feq_residual(desc.replace(sign=mpmath.conj(sign)), "1.3", P20) > mpmath.mpf(10) ** -5
    with mpmath.workdps(30):
        s = mpmath.mpc("0.5", 2)
        direct = mpmath.fsum(vals[(n - 1) % 5] * mpmath.zeta(s, mpmath.mpf(n) / 5) for n in range(1, 6)) / 5**s
        assert abs(l_value(desc, s, 0, P20).value - direct) < mpmath.mpf(10) ** -17


def test_lstar_zeta():
    z = zeta()
    with mpmath.workdps(40):
        assert abs(lstar_deriv(z, 2, 0, P30).value - mpmath.pi / 6) < mpmath.mpf(10) ** -29
        a = lstar_deriv(z, "0.5", 0, P30).value
        assert abs(a - lstar_deriv(z, "0.5", 0, P30).value) == 0
    with pytest.raises(ZeroDivisionError):
        lstar_deriv(z, 1, 0, P30)


def test_lstar_odd_sign_vanishes():
    desc = chi4().replace(sign=-1)
    assert abs(lstar_deriv(desc, "0.5", 0, P20).value) < mpmath.mpf(10) ** -25


@settings(max_examples=5)
@given(st.floats(min_value=0.05, max_value=0.95), st.floats(min_value=-8, max_value=8))
def test_lstar_symmetry(x, y):
    z = zeta()
    with mpmath.workdps(30):
        s = mpmath.mpc(x, y)
        a = lstar_deriv(z, s, 0, P20)
        b = lstar_deriv(z, 1 - s, 0, P20)
        assert abs(a.value - b.value) <= 10 * (a.est_error + b.est_error)


def test_l_value_zeta_special():
    z = zeta()
    with mpmath.workdps(40):
        assert abs(l_value(z, 2, 0, P30).value - mpmath.pi**2 / 6) < mpmath.mpf(10) ** -27
        assert l_value(z, -2, 0, P30).value == 0
        assert abs(l_value(z, -1, 0, P30).value + mpmath.mpf(1) / 12) < mpmath.mpf(10) ** -25
        assert abs(l_value(z, 0, 1, P30).value + mpmath.log(2 * mpmath.pi) / 2) < mpmath.mpf(10) ** -25
        assert abs(l_value(z, 0, 0, P30).value + mpmath.mpf(1) / 2) < mpmath.mpf(10) ** -25
        s = mpmath.mpc("0.5", 14)
        assert abs(l_value(z, s, 0, P20).value - mpmath.zeta(s)) < mpmath.mpf(10) ** -18


def test_l_value_pole():
    rep = l_value(zeta(), 1, 0, P20)
    assert isinstance(rep, PoleReport)
    assert rep.order == 1
    assert abs(rep.residue - 1) < mpmath.mpf(10) ** -18


def test_l_value_near_pole():
    with mpmath.workdps(40):
        s = 1 + mpmath.mpf(10) ** -5
        val = l_value(zeta(), s, 0, P20).value
        assert abs(val - mpmath.zeta(s)) < mpmath.mpf(10) ** -15 * abs(val)


@pytest.mark.parametrize("s", ["2.5", "0.5+3i"])
def test_l_derivative_finite_difference(s):
    z = zeta()
    with mpmath.workdps(40):
        s = mpmath.mpmathify(s.replace("i", "j"))
        h = mpmath.mpf(10) ** (-P20.working_digits / 3)
        d1 = l_value(z, s, 1, P20).value
        fd = (l_value(z, s + h, 0, P20).value - l_value(z, s - h, 0, P20).value) / (2 * h)
        assert abs(d1 - fd) < mpmath.mpf(10) ** (-P20.working_digits / 3 + 2) * max(1, abs(d1))
        assert abs(d1 - mpmath.zeta(s, 1, 1)) < mpmath.mpf(10) ** -18


def test_plan_truncation():
    z = zeta()
    with mpmath.workdps(40):
        assert plan_truncation(z, 1 / z.exp_factor(), Precision(30)) >= 5
    d2 = LFunctionDescriptor(OneProvider(), (0, 0), 1, 1, A=1)
    n = plan_truncation(d2, 1, Precision(20))
    assert 18 <= n <= 30
    d2a = LFunctionDescriptor(OneProvider(), (0, 0), 1, 1, A=1, growth=1)
    assert plan_truncation(d2a, 1, Precision(20)) >= n


def test_dedekind_product_single_point():
    with mpmath.workdps(30):
        s = 3
        lhs = l_value(zeta_qi(), s, 0, P15).value
        rhs = l_value(zeta(), s, 0, P15).value * l_value(chi4(), s, 0, P15).value
        assert abs(lhs - rhs) < mpmath.mpf(10) ** -14


def test_theta_decay():
    z = zeta()
    vals = [abs(theta(z, t, P15).value) for t in (1, 1.5, 2, 3, 4)]
    assert all(a > b for a, b in zip(vals, vals[1:]))
