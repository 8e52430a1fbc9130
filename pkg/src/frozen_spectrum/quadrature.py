"""Branch-free trigonometric kernels and oscillatory quadrature.

Everything here is written in terms of ``lam = rho**2``.  The pair
``cos(rho x)`` and ``sin(rho x)/rho`` is even in ``rho`` so the choice of
square-root branch never matters; near ``rho = 0`` both are evaluated from
their Taylor series.

Integrals of the form ``int_0^L f(t) sin(rho t)/rho dt`` are computed with a
composite Filon-Simpson rule on a uniform grid (samples of ``f`` are
reused across all ``lam``) and, for ``|rho| < 5``, with adaptive
Gauss-Kronrod quadrature of the callable.
"""
from __future__ import annotations

import math

import numpy as np
from scipy.integrate import quad_vec

from .errors import NumericError

__all__ = ["cos_sinc", "sinc", "filon_sin", "sinc_integral", "panel_count", "poly_sine_integral"]

SERIES_RADIUS = 1e-2   # |rho| below which Taylor series are used
GK_RADIUS = 5.0        # |rho| below which Gauss-Kronrod replaces Filon
MIN_INTERVALS = 1024
_N_TERMS = 6

_FACT_EVEN = np.array([(-1) ** k / math.factorial(2 * k) for k in range(_N_TERMS)])
_FACT_ODD = np.array([(-1) ** k / math.factorial(2 * k + 1) for k in range(_N_TERMS)])


def _rho(lam):
    return np.sqrt(np.asarray(lam, dtype=complex))


def cos_sinc(lam, x):
    """Return ``(cos(rho x), sin(rho x)/rho)`` for ``lam = rho**2``.

    ``lam`` and ``x`` broadcast against each other.
    """
    lam = np.asarray(lam, dtype=complex)
    x = np.asarray(x, dtype=float)
    lam, x = np.broadcast_arrays(lam, x)
    rho = _rho(lam)
    small = np.abs(rho) < SERIES_RADIUS
    c = np.empty(lam.shape, dtype=complex)
    s = np.empty(lam.shape, dtype=complex)
    big = ~small
    if np.any(big):
        rb = rho[big]
        xb = x[big]
        c[big] = np.cos(rb * xb)
        s[big] = np.sin(rb * xb) / rb
    if np.any(small):
        w = lam[small] * x[small] ** 2
        powers = w[..., None] ** np.arange(_N_TERMS)
        c[small] = powers @ _FACT_EVEN
        s[small] = x[small] * (powers @ _FACT_ODD)
    return c, s


def sinc(lam, x):
    """``sin(rho x)/rho`` with the removable singularity handled."""
    return cos_sinc(lam, x)[1]


# Filon weights alpha, beta, gamma and their Taylor series for small theta.
_ALPHA_SERIES = (0.0, 0.0, 0.0, 2 / 45, 0.0, -2 / 315, 0.0, 2 / 4725, 0.0, -8 / 467775, 0.0, 4 / 8513505)
_BETA_SERIES = (2 / 3, 0.0, 2 / 15, 0.0, -4 / 105, 0.0, 2 / 567, 0.0, -4 / 22275, 0.0, 4 / 675675, 0.0,
                -8 / 58046625)
_GAMMA_SERIES = (4 / 3, 0.0, -2 / 15, 0.0, 1 / 210, 0.0, -1 / 11340, 0.0, 1 / 997920, 0.0, -1 / 129729600, 0.0,
                 1 / 23351328000)
_FILON_SERIES_RADIUS = 0.2


def _filon_weights(theta):
    theta = np.asarray(theta, dtype=complex)
    small = np.abs(theta) < _FILON_SERIES_RADIUS
    al = np.empty_like(theta)
    be = np.empty_like(theta)
    ga = np.empty_like(theta)
    t = theta[~small]
    if t.size:
        s, c = np.sin(t), np.cos(t)
        t3 = t ** 3
        al[~small] = (t ** 2 + t * s * c - 2 * s ** 2) / t3
        be[~small] = 2 * (t * (1 + c ** 2) - 2 * s * c) / t3
        ga[~small] = 4 * (s - t * c) / t3
    t = theta[small]
    if t.size:
        al[small] = np.polynomial.polynomial.polyval(t, _ALPHA_SERIES)
        be[small] = np.polynomial.polynomial.polyval(t, _BETA_SERIES)
        ga[small] = np.polynomial.polynomial.polyval(t, _GAMMA_SERIES)
    return al, be, ga


def filon_sin(samples, length, omega, chunk=256):
    """Filon-Simpson approximation of ``int_0^length f(t) sin(omega t) dt``.

    ``samples`` holds f on a uniform grid with an even number of intervals;
    ``omega`` may be complex and array valued.
    """
    f = np.asarray(samples, dtype=float)
    n = f.size - 1
    if n < 2 or n % 2:
        raise ValueError("Filon's rule needs an even number (>= 2) of intervals")
    h = length / n
    t = np.linspace(0.0, length, n + 1)
    omega = np.atleast_1d(np.asarray(omega, dtype=complex))
    out = np.empty(omega.shape, dtype=complex)
    flat_w = omega.ravel()
    flat_o = out.ravel()
    f_even = f[0::2].copy()
    f_even[0] *= 0.5
    f_even[-1] *= 0.5
    f_odd = f[1::2]
    t_even = t[0::2]
    t_odd = t[1::2]
    for start in range(0, flat_w.size, chunk):
        w = flat_w[start:start + chunk]
        al, be, ga = _filon_weights(w * h)
        s2n = np.sin(np.outer(w, t_even)) @ f_even
        s2n1 = np.sin(np.outer(w, t_odd)) @ f_odd
        ends = f[0] - f[-1] * np.cos(w * length)
        flat_o[start:start + chunk] = h * (al * ends + be * s2n + ga * s2n1)
    return out


def panel_count(rho_abs: float, length: float, min_intervals: int = MIN_INTERVALS) -> int:
    """Number of Simpson intervals for kernel phase ``rho_abs * length``.

    Each Filon panel (two intervals) spans at most pi/4 of phase; the
    result is rounded up to a power of two so that cached samples are
    reused across calls.
    """
    need = 2 * math.ceil(rho_abs * length / (math.pi / 4))
    n = max(min_intervals, need)
    return 1 << (n - 1).bit_length()


def sinc_integral(func, length, lam, samples_for=None, min_intervals=MIN_INTERVALS):
    """``int_0^length f(t) sin(rho t)/rho dt`` for every entry of ``lam``.

    ``func`` is a vectorised callable on [0, length].  ``samples_for(n)``,
    when given, returns cached samples of f on the n-interval uniform grid.
    """
    lam = np.asarray(lam, dtype=complex)
    shape = lam.shape
    lam = lam.ravel()
    rho = np.sqrt(lam)
    out = np.empty(lam.shape, dtype=complex)
    small = np.abs(rho) < GK_RADIUS
    if np.any(small):
        ls = lam[small]

        def integrand(t):
            return func(t) * sinc(ls, t)

        val, err = quad_vec(integrand, 0.0, length, epsabs=1e-14, epsrel=1e-13, limit=400)
        if not np.all(np.isfinite(val)):
            raise NumericError("Gauss-Kronrod quadrature produced non-finite values",
                               {"lam": ls, "error": err})
        out[small] = val
    if np.any(~small):
        rb = rho[~small]
        n = panel_count(float(np.max(np.abs(rb))), length, min_intervals)
        if samples_for is None:
            f = np.asarray(func(np.linspace(0.0, length, n + 1)), dtype=float)
        else:
            f = samples_for(n)
        out[~small] = filon_sin(f, length, rb) / rb
    return out.reshape(shape)


def poly_sine_integral(coef, omega, x0: float, x1: float) -> np.ndarray:
    """Exact ``int_x0^x1 P(t) sin(omega t) dt`` for a polynomial P, omega != 0.

    ``coef`` are numpy.polynomial coefficients (lowest degree first).  Uses
    the finite antiderivative sum_k P^(k)(x) T_k(omega x) / omega^(k+1) with
    T_k cycling through -cos, sin, cos, -sin.
    """
    P = np.polynomial.Polynomial(coef)
    w = np.asarray(omega, dtype=float)

    def anti(x):
        c, s = np.cos(w * x), np.sin(w * x)
        cycle = (-c, s, c, -s)
        out = np.zeros_like(w)
        f = P
        for k in range(P.degree() + 1):
            out = out + f(x) * cycle[k % 4] / w ** (k + 1)
            f = f.deriv()
        return out

    return anti(x1) - anti(x0)
