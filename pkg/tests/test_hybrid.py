import mpmath
import pytest

from motivic_lfunc.errors import CrossoverError
from motivic_lfunc.hybrid import build_hybrid
from motivic_lfunc.mellin_small import build_shape
from motivic_lfunc.numerics import Precision

from oracles import bessel_k0, g_quad

EPS_EX = mpmath.mpf(10) ** -10 / 2


def test_explicit_schedule():
    ev = build_hybrid(build_shape([0, 0]), EPS_EX, Precision(15, 25), thresholds=(12, 7, 2), orders=(6, 20))
    sch = ev.schedule
    assert not sch.taylor_only
    assert sch.crossover_residual <= mpmath.mpf(10) ** -13


def test_d1_schedule_exact():
    ev = build_hybrid(build_shape([0]), mpmath.mpf(10) ** -25, Precision(25, 35))
    assert ev.schedule.crossover_residual < mpmath.mpf(10) ** -30
    with mpmath.workdps(35):
        for t in ("0.3", "1.5", "4"):
            t = mpmath.mpf(t)
            assert abs(ev(t) - 2 * mpmath.exp(-t * t)) < mpmath.mpf(10) ** -30


def test_t0_decay():
    ev = build_hybrid(build_shape([0, 0]), EPS_EX, Precision(15, 25))
    t0 = ev.schedule.t0
    lead0 = abs(ev.approximant(t0, 0))
    assert lead0 < EPS_EX / 2
    assert abs(ev.approximant(2 * t0, 0)) < lead0
    assert ev(t0 * 1.01) == 0


@pytest.mark.parametrize("lambdas", [[0, 0], [0, 1], [0, 0, 0]])
def test_schedule_invariants_and_continuity(lambdas):
    ev = build_hybrid(build_shape(lambdas), mpmath.mpf(10) ** -20, Precision(20, 30), check_all=True)
    sch = ev.schedule
    assert not sch.taylor_only
    assert sch.crossover_residual <= sch.eps
    ts = sch.thresholds
    assert all(a > b for a, b in zip(ts, ts[1:]))
    for i, n in enumerate(sch.orders):
        vals = ev.approximants(ts[i + 1], n + 2)
        assert abs(vals[n] - vals[n + 1]) < sch.eps / 2
        assert abs(vals[n] - vals[n + 2]) < sch.eps / 2
    assert len(sch.threshold_residuals) == len(ts)
    assert max(sch.threshold_residuals) <= sch.eps


def test_bad_schedule_raises_or_falls_back():
    shape = build_shape([0, 0])
    with pytest.raises(CrossoverError):
        build_hybrid(shape, mpmath.mpf(10) ** -20, Precision(20, 30), thresholds=(20, 1.5), orders=(1,), fallback=False)
    ev = build_hybrid(shape, mpmath.mpf(10) ** -20, Precision(20, 30), thresholds=(20, 1.5), orders=(1,))
    assert ev.fallback_used and ev.schedule.taylor_only
    with mpmath.workdps(40):
        t = mpmath.mpf(5)
        assert abs(ev(t) - 4 * bessel_k0(2 * t)) < mpmath.mpf(10) ** -20


@pytest.mark.parametrize("t", ["0.5", "1", "3", "5.5", "10", "15"])
def test_phi_bessel_everywhere(t):
    ev = build_hybrid(build_shape([0, 0]), mpmath.mpf(10) ** -30, Precision(30, 40))
    with mpmath.workdps(50):
        t = mpmath.mpf(t)
        assert abs(ev(t) - 4 * bessel_k0(2 * t)) < 2 * mpmath.mpf(10) ** -30


@pytest.mark.parametrize("s", [2, 3, mpmath.mpc("0.5", 1)])
def test_g_consistency_zeta_shape(s):
    ev = build_hybrid(build_shape([0]), mpmath.mpf(10) ** -20, Precision(20, 30), s=s, check_all=True)
    assert max(ev.schedule.threshold_residuals) <= ev.schedule.eps
    with mpmath.workdps(30):
        for t in (mpmath.mpf("0.8"), mpmath.mpf("2.5"), mpmath.mpf(4)):
            ref = g_quad(lambda x: 2 * mpmath.exp(-x * x), s, t)
            assert abs(ev(t) - ref) < mpmath.mpf(10) ** -19


def test_g_closed_form():
    ev = build_hybrid(build_shape([0]), mpmath.mpf(10) ** -25, Precision(25, 35), s=2)
    with mpmath.workdps(35):
        for t in ("0.3", "1", "2", "3"):
            t = mpmath.mpf(t)
            assert abs(ev(t) - mpmath.exp(-t * t) / t**2) < mpmath.mpf(10) ** -24


def test_g_derivative_d2():
    shape = build_shape([0, 1])
    with mpmath.workdps(34):
        s = mpmath.mpf("6.5")
        h = mpmath.mpf(10) ** -8
        sp, sm = s + h, s - h
    ev1 = build_hybrid(shape, mpmath.mpf(10) ** -20, Precision(20, 30), s=s, k=1)
    evp = build_hybrid(shape, mpmath.mpf(10) ** -24, Precision(24, 34), s=sp)
    evm = build_hybrid(shape, mpmath.mpf(10) ** -24, Precision(24, 34), s=sm)
    with mpmath.workdps(34):
        for t in (mpmath.mpf("1.2"), mpmath.mpf(6)):
            fd = (evp(t) - evm(t)) / (2 * h)
            assert abs(ev1(t) - fd) < mpmath.mpf(10) ** -12 * max(1, abs(fd))


def test_g_large_sigma_magnitude():
    # λ = (0, 1) at s = 12: |G| is far above 1 near t = 1
    shape = build_shape([0, 1])
    ev = build_hybrid(shape, mpmath.mpf(10) ** -20, Precision(20, 30), s=12)
    assert not ev.fallback_used
    with mpmath.workdps(40):
        t = mpmath.mpf(2)
        phi = lambda x: 2 * mpmath.sqrt(mpmath.pi) * mpmath.exp(-2 * x)
        ref = g_quad(phi, 12, t)
        assert abs(ev(t) / ref - 1) < mpmath.mpf(10) ** -18
