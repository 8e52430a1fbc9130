import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from frozen_spectrum.quadrature import cos_sinc, filon_sin, panel_count, poly_sine_integral, sinc_integral

complex_lams = st.complex_numbers(max_magnitude=400.0, allow_nan=False, allow_infinity=False)


@given(complex_lams, st.floats(0.0, 3.0))
def test_cos_sinc_matches_high_precision_reference(lam, x):
    c, s = cos_sinc(lam, x)
    with mp.workdps(40):
        rho = mp.sqrt(mp.mpc(lam))
        ref_c = mp.cos(rho * x)
        ref_s = mp.sin(rho * x) / rho if rho != 0 else mp.mpf(x)
    scale = np.exp(abs(complex(rho).imag) * x)
    assert abs(c - complex(ref_c)) <= 1e-12 * scale
    assert abs(s - complex(ref_s)) <= 1e-12 * scale * max(x, 1.0)


@given(complex_lams, st.floats(0.0, 3.0))
def test_cos_sinc_is_branch_free(lam, x):
    # both square roots of lam give the same pair
    rho = np.sqrt(complex(lam))
    for r in (rho, -rho):
        if abs(r) > 1e-2:
            c, s = cos_sinc(r * r, x)
            assert abs(c - np.cos(r * x)) <= 1e-9 * np.exp(abs(r.imag) * x)
            assert abs(s - np.sin(r * x) / r) <= 1e-9 * np.exp(abs(r.imag) * x)


def test_cos_sinc_at_zero_and_near_series_switch():
    c, s = cos_sinc(0.0, 2.0)
    assert c == 1.0 and s == 2.0
    lam = np.array([0.99e-4, 1.01e-4])
    c, s = cos_sinc(lam, 1.5)
    rho = np.sqrt(lam)
    np.testing.assert_allclose(c, np.cos(rho * 1.5), rtol=1e-15)
    np.testing.assert_allclose(s, np.sin(rho * 1.5) / rho, rtol=1e-14)


@pytest.mark.parametrize("omega", [0.01, 3.0, 40.0, 250.0])
def test_filon_against_adaptive_quadrature(omega):
    f = lambda t: np.exp(-t) * np.cos(2 * t) + t
    n = 2048
    got = filon_sin(f(np.linspace(0, 1.5, n + 1)), 1.5, omega)[0].real
    ref = quad(f, 0, 1.5, weight="sin", wvar=omega)[0]
    assert got == pytest.approx(ref, abs=1e-10)


def test_filon_needs_even_interval_count():
    with pytest.raises(ValueError):
        filon_sin(np.ones(4), 1.0, 2.0)


def test_panel_count_is_power_of_two_covering_the_phase():
    for rho in (0.0, 10.0, 1e3, 1e5):
        n = panel_count(rho, 2.0)
        assert n >= 1024 and n & (n - 1) == 0
        # each two-interval panel spans at most pi/4 of phase
        assert rho * 2.0 * 2 / n <= np.pi / 4


@pytest.mark.parametrize("lam", [0.0, 1e-6, 9.0, -16.0, 400.0, 1e4 + 50j])
def test_sinc_integral_against_adaptive_quadrature(lam):
    f = lambda t: np.cos(np.pi * t) + t ** 2
    got = sinc_integral(f, 1.0, np.array([lam]))[0]
    rho = np.sqrt(complex(lam))
    kern = (lambda t: np.sin(rho * t) / rho) if abs(rho) > 0 else (lambda t: t)
    re = quad(lambda t: (f(t) * kern(t)).real, 0, 1, epsabs=1e-14, limit=400)[0]
    im = quad(lambda t: (f(t) * kern(t)).imag, 0, 1, epsabs=1e-14, limit=400)[0]
    assert abs(got - complex(re, im)) <= 1e-10 * max(1.0, abs(complex(re, im)))


@settings(max_examples=40)
@given(st.lists(st.floats(-3, 3), min_size=1, max_size=6), st.floats(0.2, 60.0), st.floats(0.0, 1.0),
       st.floats(0.1, 2.0))
def test_poly_sine_integral_is_exact(coef, omega, x0, width):
    x1 = x0 + width
    P = np.polynomial.Polynomial(coef)
    got = poly_sine_integral(coef, np.array([omega]), x0, x1)[0]
    ref = quad(lambda t: P(t) * np.sin(omega * t), x0, x1, epsabs=1e-13, limit=200)[0]
    assert got == pytest.approx(ref, abs=1e-9 * (1 + np.max(np.abs(coef))))
