import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sftkit.kernels import (
    GaussianParams,
    MorletParams,
    gauss,
    gauss_d,
    gauss_dd,
    morlet,
    sample_kernel,
    truncated_convolution,
)
from sftkit.signal import BoundaryPolicy, Signal, TestSignal, make_test_signal

mp.mp.dps = 40


def mp_gauss(sigma, n):
    g = 1 / (2 * mp.mpf(sigma) ** 2)
    return mp.sqrt(g / mp.pi) * mp.e ** (-g * n * n)


def mp_morlet(sigma, xi, n):
    sigma, xi = mp.mpf(sigma), mp.mpf(xi)
    C = (1 + mp.e ** (-(xi**2)) - 2 * mp.e ** (-3 * xi**2 / 4)) ** mp.mpf(-0.5)
    kappa = mp.e ** (-(xi**2) / 2)
    return C / (mp.pi ** mp.mpf(0.25) * mp.sqrt(sigma)) * mp.e ** (-(n * n) / (2 * sigma**2)) * (
        mp.expj(xi * n / sigma) - kappa
    )


def test_gamma_and_default_K():
    g = GaussianParams(2.5)
    assert g.gamma == 1 / (2 * 2.5**2)
    assert g.K == 8


@pytest.mark.parametrize("bad", [0.0, -1.0])
def test_sigma_must_be_positive(bad):
    with pytest.raises(ValueError):
        GaussianParams(bad)


def test_gauss_at_zero():
    assert gauss(GaussianParams(1.0), 0) == pytest.approx(0.3989423, abs=1e-7)


def test_gauss_matches_mpmath():
    assert gauss(GaussianParams(2.0), 3) == pytest.approx(float(mp_gauss(2, 3)), rel=1e-14)


def test_gauss_dd_at_zero():
    assert gauss_dd(GaussianParams(1.0), 0) == pytest.approx(-0.3989423, abs=1e-7)
    assert gauss_d(GaussianParams(1.0), 0) == 0.0


@pytest.mark.parametrize("fn, deriv", [(gauss_d, 1), (gauss_dd, 2)])
def test_derivatives_match_finite_differences(fn, deriv):
    g = GaussianParams(2.0)
    h = 1e-4
    n = 5.0
    if deriv == 1:
        fd = (gauss(g, n + h) - gauss(g, n - h)) / (2 * h)
    else:
        fd = (gauss(g, n + h) - 2 * gauss(g, n) + gauss(g, n - h)) / h**2
    assert fn(g, n) == pytest.approx(fd, rel=1e-6)


@given(st.floats(0.5, 200), st.integers(0, 2000))
def test_parity(sigma, n):
    g = GaussianParams(sigma)
    assert gauss(g, n) == gauss(g, -n)
    assert gauss_d(g, n) == -gauss_d(g, -n)
    assert gauss_dd(g, n) == gauss_dd(g, -n)


def test_morlet_constants():
    m = MorletParams(60.0, 10.0)
    assert m.kappa_xi == pytest.approx(math.exp(-50))
    assert m.C_xi == pytest.approx(1.0, abs=1e-15)
    small = MorletParams(60.0, 1.0)
    assert small.C_xi == pytest.approx((1 + math.exp(-1) - 2 * math.exp(-0.75)) ** -0.5)


@pytest.mark.parametrize("bad", [0.0, -3.0])
def test_morlet_rejects_nonpositive_xi(bad):
    with pytest.raises(ValueError):
        MorletParams(10.0, bad)


def test_morlet_at_zero():
    m = MorletParams(60.0, 10.0)
    v = morlet(m, 0)
    assert v.imag == 0
    assert v.real == pytest.approx(m.C_xi * (1 - m.kappa_xi) / (math.pi**0.25 * math.sqrt(60.0)))


@pytest.mark.parametrize("sigma, xi, n", [(60, 6, 30), (60, 1, -45), (7, 2.5, 11)])
def test_morlet_matches_mpmath(sigma, xi, n):
    got = morlet(MorletParams(sigma, xi), n)
    want = complex(mp_morlet(sigma, xi, n))
    assert abs(got - want) <= 1e-14 * abs(want)


@pytest.mark.parametrize("xi", [5.0, 8.0, 12.0])
def test_morlet_zero_mean(xi):
    m = MorletParams(20.0, xi)
    n = np.arange(-120, 121)
    vals = morlet(m, n)
    assert abs(vals.sum()) < 1e-6 * np.abs(vals).max()


def test_gaussian_mass_within_three_sigma():
    for sigma in (2.0, 3.7, 8.0, 20.0):
        g = GaussianParams(sigma)
        mass = sample_kernel(gauss, g).sum()
        assert 0.9973 <= mass <= 1.0001
        assert abs(sample_kernel(gauss_d, g).sum()) < 1e-14


def test_convolution_of_constant():
    g = GaussianParams(8.0)
    out = truncated_convolution(make_test_signal(TestSignal.CONSTANT, 200), sample_kernel(gauss, g))
    assert np.all((out >= 0.9973) & (out <= 1.0))
    outd = truncated_convolution(make_test_signal(TestSignal.CONSTANT, 200), sample_kernel(gauss_d, g))
    assert np.max(np.abs(outd[30:-30])) < 1e-12


def test_convolution_of_impulse_reproduces_kernel():
    kernel = np.array([0.1, -0.2, 0.7, 0.3, 0.05])
    sig = Signal(np.eye(1, 21, 10).ravel(), BoundaryPolicy.ZERO)
    out = truncated_convolution(sig, kernel)
    # out[n] = kernel[k = n - 10], i.e. kernel centred at the impulse
    np.testing.assert_allclose(out[8:13], kernel)
    assert np.count_nonzero(out) == 5


@given(st.integers(1, 40), st.integers(-6, 6), st.integers(0, 2**32 - 1))
def test_convolution_against_direct_sum(N, k_min, seed):
    r = np.random.default_rng(seed)
    x = r.normal(size=N)
    taps = r.normal(size=5)
    sig = Signal(x, BoundaryPolicy.ZERO)
    out = truncated_convolution(sig, taps, k_min=k_min)
    ref = [sum(taps[j] * (x[n - k_min - j] if 0 <= n - k_min - j < N else 0.0) for j in range(5)) for n in range(N)]
    np.testing.assert_allclose(out, ref, atol=1e-12)
