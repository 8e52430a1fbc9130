import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from frozen_spectrum import (DomainError, Geometry, Potential, PotentialCharFunction, Spectrum, ValidationError,
                             compute_spectrum, compute_z, eval_Delta, fd_spectrum)
from frozen_spectrum.contour import circle, winding_numbers
from frozen_spectrum.forward import eval_C, eval_c1_c2_s, eval_Delta_case_lg, eval_S

# roots of rho/2 sin 2rho - cos 2rho - sin(2rho)/rho squared, mpmath findroot at 30 digits
ZERO_POTENTIAL_EIGENVALUES = [1.021649416050020796, 4.3959153104415311356, 11.876553552167125255,
                              24.21531364052688844, 41.484734760711736196, 63.689534132239000538]
# cos(pi t) on [0, 1], t - 2 on [2, 3]: finite differences at h = 1.25e-4 and 6.25e-5, Richardson extrapolated
SMOOTH_POTENTIAL_EIGENVALUES = [0.627155755433, 4.319008822191, 11.84813217054, 23.554300962423,
                                41.484763948806, 63.963322291324]


def test_S_values():
    g = Geometry(1.0, 1.0, 1.0)
    assert eval_S(1.0, 7.3 + 2j, g) == 0
    assert abs(eval_S(0.0, np.pi ** 2, g)) < 1e-15
    assert eval_S(0.5, 4.0, g) == pytest.approx(-math.sin(1.0) / 2, rel=1e-14)
    with pytest.raises(DomainError):
        eval_S(1.5, 1.0, g)


def test_C_values():
    g = Geometry(1.0, 1.0, 1.0)
    one = Potential.from_callables(lambda t: np.ones_like(t), lambda t: np.ones_like(t), g)
    assert eval_C(1.0, 3.0 + 1j, one, g) == 1
    assert eval_C(0.3, 5.0, Potential.zero(), g) == pytest.approx(math.cos(math.sqrt(5.0) * 0.7))
    # rho -> 0 kernel is (x - t): C(0, 0) = 1 + int_1^0 (0 - t) dt
    oracle = 1.0 + quad(lambda t: -(0.0 - t), 0.0, 1.0)[0]
    assert oracle == pytest.approx(1.5)
    assert eval_C(0.0, 0.0, one, g) == pytest.approx(1.5, abs=1e-12)
    with pytest.raises(DomainError):
        eval_C(-0.1, 1.0, one, g)


def test_c1_c2_s_limits_and_special_points():
    g = Geometry(1.0, 1.0, 1.0)
    np.testing.assert_allclose(eval_c1_c2_s(0.0, g), (1.0, 2.0, 1.0))
    g2 = Geometry(0.7, 1.0, 1.0)
    c1, _, s = eval_c1_c2_s(np.pi ** 2, g2)
    assert c1 == pytest.approx(-1.0)
    assert s == pytest.approx(math.sin(np.pi * 0.7) / np.pi)


def test_c2_vanishes_at_basis_zeros():
    g = Geometry(1.0, 1.0, 1.0)
    z = compute_z(g, 50).z
    assert np.max(np.abs(eval_c1_c2_s(z ** 2, g)[1])) < 1e-10


def test_zero_potential_Delta():
    g = Geometry(1.0, 1.0, 1.0)
    q = Potential.zero()
    assert eval_Delta(0.0, q, g) == pytest.approx(-3.0)
    c1, c2, s = eval_c1_c2_s(4.0, g)
    assert eval_Delta(4.0, q, g) == pytest.approx(-c1 * s - c2 * math.cos(2.0), rel=1e-14)
    assert eval_Delta_case_lg((np.pi / 2) ** 2, q, g) == pytest.approx(1.0, abs=1e-14)
    assert eval_Delta_case_lg(0.0, q, g) == pytest.approx(-3.0)


def test_zero_potential_skips_the_integrals():
    il, ir = PotentialCharFunction(Potential.zero(), Geometry(1, 1, 1)).integrals(np.array([3.0, -2.0]))
    assert not il.any() and not ir.any()


def test_rewritten_form_agrees(geom, q_smooth):
    rng = np.random.default_rng(7)
    lam = 100 * np.sqrt(rng.uniform(0, 1, 20)) * np.exp(2j * np.pi * rng.uniform(0, 1, 20))
    a = eval_Delta(lam, q_smooth, geom)
    b = eval_Delta_case_lg(lam, q_smooth, geom)
    env = PotentialCharFunction(q_smooth, geom).envelope(lam)
    assert np.max(np.abs(a - b) / env) < 1e-9
    with pytest.raises(ValidationError):
        eval_Delta_case_lg(1.0, q_smooth, Geometry(1.0, 1.0, 2.0))


@settings(max_examples=30, deadline=None)
@given(st.complex_numbers(max_magnitude=300, allow_nan=False, allow_infinity=False))
def test_Delta_is_real_on_real_potentials(lam):
    g = Geometry(1.0, 1.0, 1.0)
    q = Potential.from_callables(np.cos, lambda t: t - 2, g)
    f = PotentialCharFunction(q, g, min_intervals=256)
    a, b = f(np.array([lam, np.conj(lam)]))
    assert abs(a - np.conj(b)) <= 1e-12 * f.envelope(lam)


def test_identity_at_sine_points(geom, q_smooth):
    n = np.arange(1, 31)
    lam = (np.pi * n / geom.gamma) ** 2
    k = eval_c1_c2_s(lam, geom)[1].real
    kappa = np.array([quad(lambda t: np.sin(np.pi * m * t) * np.cos(np.pi * t), 0, 1, epsabs=1e-14)[0] for m in n])
    expected = k * ((-1.0) ** (n + 1) - geom.gamma * kappa / (np.pi * n))
    got = eval_Delta(lam, q_smooth, geom).real
    assert np.max(np.abs(got - expected) / np.abs(expected)) < 1e-8


def test_zero_potential_spectrum_matches_root_oracle():
    S = compute_spectrum(Potential.zero(), Geometry(1.0, 1.0, 1.0), 6)
    np.testing.assert_allclose(S.values.real, ZERO_POTENTIAL_EIGENVALUES, rtol=1e-12)
    assert not S.values.imag.any()


def test_smooth_potential_spectrum_matches_extrapolated_fd(spec_smooth_200):
    np.testing.assert_allclose(spec_smooth_200.values[:6].real, SMOOTH_POTENTIAL_EIGENVALUES, rtol=1e-7)


def test_eigenvalues_are_zeros_of_Delta(geom, q_smooth, spec_smooth_200):
    f = PotentialCharFunction(q_smooth, geom)
    lam = spec_smooth_200.values
    # |Delta| is compared with |Delta'| times the distance to the next zero, i.e. the local scale
    h = 1e-6 * (1 + np.abs(lam))
    slope = np.abs(f(lam + h) - f(lam - h)) / (2 * h)
    gaps = np.abs(np.diff(np.concatenate([lam, [lam[-1] + (lam[-1] - lam[-2])]])))
    assert np.max(np.abs(f(lam)) / (slope * gaps)) < 1e-8


def test_winding_total_matches_count(geom, q_smooth, spec_smooth_200):
    f = PotentialCharFunction(q_smooth, geom)
    radius = 0.5 * (spec_smooth_200.values[29].real + spec_smooth_200.values[30].real)
    assert winding_numbers(f, [circle(0.0, radius, 512)])[0] == 30


def test_asymptotic_law_of_computed_spectrum(spec_smooth_400, geom):
    n = np.arange(1, 400)
    rho = np.sqrt(spec_smooth_400.values[1:].real)
    rem = rho - np.pi * n / 2 - 2 / (np.pi * n)
    assert np.max(np.abs(rem[-50:])) < 1e-4
    mu = n ** 2 * (rem - 4 * np.sin(np.pi * n / 2) * 1.0 / (np.pi ** 2 * n ** 2))
    # square summable: the tail is small compared with the start
    assert np.mean(mu[-100:] ** 2) < 0.5 * np.mean(mu[100:200] ** 2)


def test_spectrum_closed_under_conjugation():
    g = Geometry(1.0, 0.3, 1.0)
    q = Potential.from_callables(lambda t: -40 * np.ones_like(t), lambda t: 30 * np.sin(5 * t), g)
    S = compute_spectrum(q, g, 30)
    vals = S.values
    for v in vals[np.abs(vals.imag) > 1e-9]:
        assert np.min(np.abs(vals - np.conj(v))) < 1e-9 * (1 + abs(v))


def test_general_geometry_against_fd():
    g = Geometry(1.0, 0.5, 1.5)
    q = Potential.from_callables(np.cos, lambda t: t - 1.5, g)
    S = compute_spectrum(q, g, 8)
    F = fd_spectrum(q, g, 5e-4, 8)
    np.testing.assert_allclose(S.values, F.values, rtol=1e-3)


def test_threads_do_not_change_the_spectrum(geom, q_smooth):
    a = compute_spectrum(q_smooth, geom, 60, threads=1).values
    b = compute_spectrum(q_smooth, geom, 60, threads=4).values
    assert np.array_equal(a, b)


def test_spectrum_container():
    S = Spectrum.from_values([3.0, 0.0, 1 - 1j, 1 + 1j])
    assert list(S.values) == [0.0, 1 - 1j, 1 + 1j, 3.0]
    assert S.k0 == 1 and S.count == 4
    g = Geometry(1, 1, 1)
    assert np.array_equal(Spectrum.from_dict(S.to_dict(g)).values, S.values)
    with pytest.raises(ValidationError):
        Spectrum.from_values([])
    with pytest.raises(ValidationError):
        Spectrum.from_values([np.nan])
    with pytest.raises(ValidationError):
        compute_spectrum(Potential.zero(), g, 0)
