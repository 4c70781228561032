"""Special functions against mpmath oracles."""

import math

import mpmath as mp
import numpy as np
import pytest
from scipy import integrate

from mertens.errors import DomainError, ParameterError, PoleError, RangeError
from mertens.specfun import (
    KernelParams,
    _loose_params,
    bessel_i0,
    eit,
    eit_scaled,
    kernel_k,
    kernel_nodes,
    log_abs_logan,
    log_bessel_i0,
    logan,
    trivial_zero_integral,
)

mp.mp.dps = 40


def mp_logan(c, x):
    c, x = mp.mpf(c), mp.mpc(x)
    w = mp.sqrt(x * x - c * c)
    s = mp.mpf(1) if w == 0 else mp.sin(w) / w
    return c / mp.sinh(c) * s


@pytest.mark.parametrize("t", [0.0, 1.0, 10.0, 0.37, 55.5, 300.0, 700.0])
def test_bessel_i0_matches_mpmath(t):
    ref = mp.besseli(0, t)
    assert bessel_i0(t) == pytest.approx(float(ref), rel=1e-14)
    assert log_bessel_i0(t) == pytest.approx(float(mp.log(ref)), rel=1e-14, abs=1e-15)


def test_bessel_i0_examples():
    assert bessel_i0(0.0) == 1.0
    assert bessel_i0(1.0) == pytest.approx(1.2660658777520082, rel=1e-15)
    assert bessel_i0(10.0) == pytest.approx(2815.716628466254, rel=1e-14)


def test_bessel_i0_range_errors():
    with pytest.raises(RangeError):
        bessel_i0(800.0)
    assert math.isfinite(log_bessel_i0(5000.0))
    with pytest.raises(RangeError):
        log_bessel_i0(2e4)


def test_kernel_params_validation():
    for c, eps in [(2.9, 1e-4), (3, 0), (3, 1e-3), (float("nan"), 1e-4)]:
        with pytest.raises(ParameterError):
            KernelParams(c, eps)


@pytest.mark.parametrize("c", [3.0, 30.0, 280.0])
def test_logan_matches_mpmath(c):
    p = KernelParams(c, 1e-4)
    for x in [0.0, 0.5 * c / p.eps, c / p.eps, 1.7 * c / p.eps, 123.4, 9.9e5]:
        ref = float(mp_logan(c, p.eps * x).real)
        assert logan(p, x) == pytest.approx(ref, rel=1e-10, abs=1e-300)


def test_logan_complex_argument():
    p = KernelParams(30.0, 1e-4)
    z = complex(14.1347, -0.3)
    ref = complex(mp_logan(30, p.eps * mp.mpc(z.real, z.imag)))
    got = logan(p, z)
    assert abs(got - ref) <= 1e-12 * abs(ref)


def test_logan_examples():
    p = _loose_params(3, 1)
    assert logan(p, 0.0) == pytest.approx(1.0, abs=1e-15)
    assert logan(p, 3.0) == pytest.approx(0.299464709006468, rel=1e-13)
    assert logan(p, -5.0) == logan(p, 5.0)


def test_log_abs_logan_beyond_underflow():
    p = KernelParams(280.0, 2.8e-8)
    x = 3e10
    ref = mp.log(abs(mp_logan(280, mp.mpf(2.8e-8) * x)))
    assert log_abs_logan(p, x) == pytest.approx(float(ref), rel=1e-9)


def test_kernel_k_examples():
    p = _loose_params(3, 1)
    assert kernel_k(p, 0.0) == pytest.approx(0.7308125657234984, rel=1e-14)
    eps = 1e-4
    q = KernelParams(3, eps)
    assert kernel_k(q, eps) == 0.0
    assert kernel_k(q, 2 * eps) == 0.0
    inside = kernel_k(q, eps * (1 - 1e-12))
    assert inside == pytest.approx(3 / (2 * math.sinh(3)) / eps, rel=1e-5)


@pytest.mark.parametrize("c", [3.0, 30.0, 280.0])
def test_kernel_has_unit_mass(c):
    p = KernelParams(c, 1e-4)
    _, w = kernel_nodes(p, 400)
    assert w.sum() == pytest.approx(1.0, abs=1e-12)
    val, _ = integrate.quad(lambda y: kernel_k(p, y), -p.eps, p.eps, epsabs=0, epsrel=1e-13, limit=200)
    assert val == pytest.approx(1.0, abs=1e-10)


def test_fourier_pair_c30():
    p = KernelParams(30.0, 5e-4)
    mp.mp.dps = 30
    for x in [0.0, 1234.5, 59999.0, 90000.0]:
        ref = mp.quad(lambda y: kernel_k(p, float(y)) * mp.cos(x * y), [-p.eps, 0, p.eps])
        assert logan(p, x) == pytest.approx(float(ref), abs=1e-10)


# ---------------------------------------------------------------------------


def mp_eit(z):
    z = mp.mpc(z)
    if z.imag == 0 and z.real > 0:
        return mp.ei(z.real)
    return -mp.e1(-z)


@pytest.mark.parametrize(
    "z",
    [1.0, -1.0, 0.5, -0.01, 7.5, 39.0, 45.0, 300.0, -50.0, -700.0, 2 + 3j, -4 - 1j, 0.1j, -3 + 20j, -10 - 10j,
     5 + 0.5j, -30 + 5j, -100 - 1400j, -250 + 7000j, 15 + 15j, 60 - 2j],
)
def test_eit_matches_mpmath(z):
    ref = mp_eit(z)
    got = eit_scaled(z)
    ref_scaled = complex(ref * mp.exp(-mp.mpc(z)))
    assert abs(got - ref_scaled) <= 1e-13 * abs(ref_scaled)


def test_eit_examples():
    assert eit(1.0) == pytest.approx(1.8951178163559368, rel=1e-14)
    assert eit(-1.0) == pytest.approx(-0.21938393439552029, rel=1e-14)
    assert isinstance(eit(1.0), float)
    with pytest.raises(PoleError):
        eit(0.0)


def test_eit_at_zero_argument_size():
    rho = complex(0.5, 14.1347)
    L = math.log(100.0)
    v = eit(-rho * L)
    # numerical quadrature of the defining integral along t
    z = mp.mpc(-rho * L)
    ref = mp.quad(lambda t: mp.exp(z - t) / (z - t), [0, 1, 10, mp.inf])
    assert abs(v - complex(ref)) < 1e-12
    assert abs(v) == pytest.approx(100**-0.5 / abs(rho * L), rel=0.1)


def test_eit_conjugate_symmetry():
    z = np.array([-3 + 4j, -40 + 400j, 2 + 1j])
    assert np.allclose(eit(z.conj()), np.conj(eit(z)), rtol=1e-15)


# ---------------------------------------------------------------------------


def mp_trivial(x):
    mp.mp.dps = 30
    f = lambda t: 1 / (t**2 * mp.log(t) * (t**2 - 1))  # noqa: E731
    return mp.quad(f, [x, 2 * x, mp.inf])


@pytest.mark.parametrize("x", [1.2, 2.0, 10.0, 1e3])
def test_trivial_integral_matches_quadrature(x):
    ti = trivial_zero_integral(x)
    assert ti.value == pytest.approx(float(mp_trivial(x)), rel=1e-10)
    assert ti.value <= ti.bound


def test_trivial_integral_examples():
    assert trivial_zero_integral(2.0).value == pytest.approx(0.052817599448089765, rel=1e-12)
    t10 = trivial_zero_integral(10.0)
    assert t10.value < 1e-3 and t10.value < t10.bound
    assert t10.bound >= 1e-3
    big = trivial_zero_integral(math.exp(200))
    assert big.bound == pytest.approx(math.exp(-600), rel=1e-12)
    assert 0.0 <= big.value <= big.bound
    huge = trivial_zero_integral(1e300)
    assert huge.value == 0.0 and huge.bound > 0.0
    with pytest.raises(DomainError):
        trivial_zero_integral(1.0)
