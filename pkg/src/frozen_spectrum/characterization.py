"""Admissibility of a spectrum when both segments have the same length.

For l = gamma the characteristic function has the form

    Delta = Delta~ + C0 sin(2 rho l)/rho + int_0^{2l} W(t) sin(rho t)/(2 rho) dt,
    Delta~ = d^2 rho/2 sin(2 rho l) - d cos(2 rho l) + d^2 u sin(rho l)/rho,

and a sequence is the spectrum of some q in W^1_2 on each segment exactly
when W splits into g, G1, G2 with G2(l) = 0, together with the two
families of asymptotic formulas at (pi n / l)^2 and at z_n^2.  This module
fits each of those pieces from a spectrum and reports a verdict per stage.

The relations between W and the potential used here are

    g(t)  = (W(l - t) - W(l + t)) / (2 d)                 (= q(t) on [0, l])
    G1(t) = int_t^l g
    G2(t) = -d g(t) - d g(l) - G1(t) + d^2 g'(t) - W(l + t)
          (= int_0^{l-t} q(a + s) ds, so q(b - t) = -G2'(t)).
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.integrate import cumulative_simpson, quad

from .basis import compute_z
from .errors import NumericError, ValidationError
from .forward import Spectrum
from .geometry import Geometry, Potential
from .inverse import CoeffSeq, ProductCharFunction, reconstruct_charfn, usable_terms, xi_noise
from .quadrature import poly_sine_integral

__all__ = [
    "AsymptoticsFit",
    "WFunctions",
    "WSeries",
    "CharacterizationVerdict",
    "fit_asymptotics",
    "build_W",
    "estimate_C0",
    "build_g_G1_G2",
    "check_conditions",
    "delta_tilde",
    "W_from_potential",
    "representation_sides",
    "expected_constants",
    "charfn_noise",
]

log = logging.getLogger(__name__)

MIN_ENTRIES = 20
MIN_GRID = 65
GRID_POINTS = 1025          # samples of g, G1, G2 on [0, l]
C0_SPREAD = 0.05            # allowed spread of the C0 ladder over its last 4 rungs
CROSS_TOL = 0.05            # agreement of independent estimates of c and u
TOL_C = 1e-2                # |G2(l)| relative to max(|G2|_inf, 1/l)
CON2_NOISE_CAP = 1e-5       # largest tolerated rounding noise of z^3 Delta(z^2)/sin(z l)
MIN_CON2 = 12
W_FRACTION = 0.5            # share of the usable beta_n kept for W
SMOOTH_DEGREE = 5           # global polynomial carrying the end behaviour of W
JUMP_ORDERS = 5             # jumps of W, W', ..., W at t = l
H_TOL = 0.10                # h1, h2 against the values of a known potential
ROUNDING = 8 * np.finfo(float).eps


def _require_equal_lengths(geom: Geometry):
    if not geom.is_equal_lengths:
        raise ValidationError("characterization needs l = gamma")


def _delta_signs(n):
    """delta_n = sin(pi n / 2): 1, 0, -1, 0, ..."""
    n = np.asarray(n)
    return np.where(n % 2 == 0, 0.0, np.where(n % 4 == 1, 1.0, -1.0))


def _agree(x, y, tol=CROSS_TOL, floor=1.0):
    return bool(abs(x - y) <= tol * max(abs(x), abs(y), floor))


def charfn_noise(charfn, lam) -> np.ndarray:
    """Absolute uncertainty of a spectrum-backed Delta at ``lam``.

    Rounding of the trigonometric factors, whose arguments grow like rho,
    plus the change when the product is truncated to three quarters of the
    eigenvalues (the extension then has to carry more of the tail).
    """
    lam = np.asarray(lam, dtype=complex)
    g = charfn.geometry
    rho = np.abs(np.sqrt(lam))
    out = ROUNDING * (1.0 + rho * (g.gamma + g.d + g.l)) * np.abs(charfn.envelope(lam))
    n_sub = 3 * charfn.n_prod // 4
    if getattr(charfn, "backing", "") == "product" and n_sub >= 16:
        sub = ProductCharFunction(charfn.spectrum, g, n_sub, charfn.method)
        out = out + np.abs(sub(lam) - charfn(lam))
    return out


def delta_tilde(lam, u, geom: Geometry):
    """The explicit part of Delta in the W representation."""
    rho = np.sqrt(np.asarray(lam, dtype=complex))
    d, l = geom.d, geom.l
    return d * d * rho / 2 * np.sin(2 * rho * l) - d * np.cos(2 * rho * l) + d * d * u * np.sin(rho * l) / rho


# --------------------------------------------------------------------------
# asymptotics of the spectrum


@dataclass(frozen=True)
class AsymptoticsFit:
    u: complex
    mu: CoeffSeq
    passed: bool
    diagnostics: dict = field(default_factory=dict, repr=False)

    @property
    def pass_(self) -> bool:
        return self.passed


def fit_asymptotics(spec: Spectrum, geom: Geometry) -> AsymptoticsFit:
    """Least-squares u from rho_n = pi n/(2l) + 2/(d pi n) + 4 l delta_n u/(pi^2 n^2) + mu_n/n^2.

    u is fitted over n in [N/2, N] (only odd n carry it); the verdict is the
    l2 test on the whole mu sequence.
    """
    _require_equal_lengths(geom)
    vals = np.asarray(spec.values, dtype=complex)
    N = vals.size - 1
    if N < MIN_ENTRIES:
        raise ValidationError(f"asymptotics need at least {MIN_ENTRIES} eigenvalues beyond lambda_0, got {N}")
    n = np.arange(1, N + 1)
    rho = np.sqrt(vals[1:])
    rho = np.where(rho.real < 0, -rho, rho)
    d, l = geom.d, geom.l
    scaled = n ** 2 * (rho - np.pi * n / (2 * l) - 2 / (d * np.pi * n))
    col = 4 * l * _delta_signs(n) / np.pi ** 2
    tail = slice(N // 2 - 1, N)
    u = complex(np.sum(col[tail] * scaled[tail]) / np.sum(col[tail] ** 2))
    mu = CoeffSeq.make("mu", scaled - col * u)
    # eigenvalues known to a few ulp
    floor = n ** 2 * ROUNDING * np.abs(vals[1:]) / np.abs(rho)
    return AsymptoticsFit(u, mu, mu.in_l2(floor=floor), {"fit_range": (N // 2, N), "floor": floor})


# --------------------------------------------------------------------------
# W from the characteristic function


def _singular_columns(omega, l):
    """Sine coefficients on (0, 2l) of t^k, of (t-l)^k H(t-l) and of a unit point mass at t = l."""
    cols = [poly_sine_integral(e, omega, 0.0, 2 * l) for e in np.eye(SMOOTH_DEGREE + 1)]
    for k in range(JUMP_ORDERS):
        coef = np.polynomial.Polynomial.fromroots([l] * k).coef if k else np.array([1.0])
        cols.append(poly_sine_integral(coef, omega, l, 2 * l))
    cols.append(np.sin(omega * l))
    return np.stack(cols, axis=1)


@dataclass(frozen=True, eq=False)
class WSeries:
    """W = (piecewise polynomial part) + (1/l) sum_n r_n sin(pi n t/(2l)) on [0, 2l].

    The piecewise part carries the end values and the jumps at t = l that
    the beta_n tail reveals, so the sine remainder converges quickly and
    one-sided limits at 0, l and 2l are meaningful.  ``mass`` is a point
    mass at t = l: it is what an error in u looks like in beta_n, so it is
    split off and reported rather than left to spoil the series.
    ``scale_error`` is the relative error of the normalisation of Delta,
    which shows up in beta_n as (pi n/l)(-1)^n d times a constant.
    """

    beta: CoeffSeq
    smooth: np.ndarray       # polynomial on [0, 2l], increasing powers
    jumps: np.ndarray        # coefficients of (t-l)^k H(t-l), k = 0, 1, ...
    remainder: np.ndarray
    l: float
    mass: float = 0.0
    scale_error: float = 0.0

    def __call__(self, t, side: str = "right"):
        """W(t); at t = l the left (``side="left"``) or right limit."""
        t = np.asarray(t, dtype=float)
        l = self.l
        omega = np.pi * np.arange(1, self.remainder.size + 1) / (2 * l)
        out = np.polynomial.Polynomial(self.smooth)(t)
        after = (t > l) | ((t == l) & (side == "right"))
        out = out + np.where(after, np.polynomial.Polynomial(self.jumps)(t - l), 0.0)
        return out + (np.sin(np.outer(t, omega)) @ self.remainder).reshape(t.shape) / l

    def coefficients(self) -> np.ndarray:
        """int_0^{2l} W sin(pi n t/(2l)) dt for n = 1..len(beta), i.e. beta_n less the split-off parts."""
        n = np.arange(1, self.remainder.size + 1)
        omega = np.pi * n / (2 * self.l)
        cols = _singular_columns(omega, self.l)[:, :-1]
        return cols @ np.concatenate([self.smooth, self.jumps]) + self.remainder


def build_W(charfn, u, geom: Geometry, n_terms: Optional[int] = None) -> WSeries:
    """beta_n = (pi n/l) Delta((pi n/(2l))^2) + (pi n/l)(-1)^n d - 2 d^2 u delta_n and the series for W.

    By default only the lower half of the reliable range is used: near its
    top the relative error of a product-backed Delta creeps up, and g'
    (hence G2) would amplify it.  The piecewise polynomial part is fitted
    to beta_n over n in [N_W/4, N_W] together with the point mass and a
    normalisation column; what is left decays fast and is summed as is.
    """
    _require_equal_lengths(geom)
    d, l = geom.d, geom.l
    if n_terms is None:
        n_terms = int(W_FRACTION * usable_terms(charfn, geom, 2 * l))
    if n_terms < 16:
        raise NumericError("too few terms for W", {"n_terms": n_terms})
    n = np.arange(1, n_terms + 1)
    omega = np.pi * n / (2 * l)
    D = np.asarray(charfn(omega ** 2))
    beta = (np.pi * n / l) * (D + (-1.0) ** n * d) - 2 * d * d * u * _delta_signs(n)
    beta = beta.real if np.all(np.abs(beta.imag) <= 1e-9 * (1 + np.abs(beta.real))) else beta
    seq = CoeffSeq.make("beta", beta)
    if not seq.decays_above(floor=(np.pi * n / l) * charfn_noise(charfn, omega ** 2)):
        raise NumericError("beta_n does not decay; no W in L2 represents this function",
                           {"tail_stat": seq.tail_stat})
    cols = np.column_stack([_singular_columns(omega, l), -(np.pi * n / l) * (-1.0) ** n * d])
    tail = slice(n_terms // 4 - 1, n_terms)
    scale = np.max(np.abs(cols[tail]), axis=0)
    coef = np.linalg.lstsq(cols[tail] / scale, beta[tail], rcond=None)[0] / scale
    rem = beta - cols @ coef
    k = SMOOTH_DEGREE + 1
    return WSeries(seq, coef[:k], coef[k:k + JUMP_ORDERS], rem, l, coef[-2], coef[-1])


def estimate_C0(charfn, u, geom: Geometry, n_top: Optional[int] = None) -> tuple:
    """C0 from rho (Delta - Delta~) at rho = pi (n + 1/4)/l, where sin(2 rho l) = 1.

    The W integral is O(1/rho) there, with a (-1)^n component from the jump of
    W at l, so the ladder is fitted as C0 + (A + (-1)^n B)/rho + (E + (-1)^n F)/rho^2
    over n in [n_top/4, n_top].  Returns (C0, ladder dict).
    """
    _require_equal_lengths(geom)
    l = geom.l
    if n_top is None:
        n_top = usable_terms(charfn, geom, l) - 1
    if n_top < 16:
        raise NumericError("too few rungs for the C0 ladder", {"n_top": n_top})
    n = np.arange(max(1, n_top // 4), n_top + 1)
    rho = np.pi * (n + 0.25) / l
    v = rho * (np.asarray(charfn(rho ** 2)) - delta_tilde(rho ** 2, u, geom))
    sgn = (-1.0) ** n
    A = np.stack([np.ones_like(rho), 1 / rho, sgn / rho, 1 / rho ** 2, sgn / rho ** 2], axis=1)
    C0 = complex(np.linalg.lstsq(A, v, rcond=None)[0][0])
    last = v[-4:]
    spread = float((np.max(np.abs(last - np.mean(last)))) / max(abs(np.mean(last)), 1.0))
    ladder = {"n": n, "values": v, "spread": spread}
    if spread > C0_SPREAD:
        raise NumericError("C0 ladder does not stabilise", ladder)
    if abs(C0.imag) <= 1e-9 * (1 + abs(C0.real)):
        C0 = complex(C0.real, 0.0)
    return C0, ladder


# --------------------------------------------------------------------------
# g, G1, G2


@dataclass(frozen=True, eq=False)
class WFunctions:
    t: np.ndarray            # grid on [0, l]
    W: np.ndarray            # samples on [0, 2l], same spacing (right limit at l)
    g: np.ndarray
    G1: np.ndarray
    G2: np.ndarray
    C0: complex
    c: complex

    @property
    def h(self) -> float:
        return float(self.t[1] - self.t[0])


def _derivative4(y, h):
    """Fourth-order finite differences: central inside, one-sided at the two points nearest each end."""
    y = np.asarray(y, dtype=float)
    out = np.empty_like(y)
    out[2:-2] = (y[:-4] - 8 * y[1:-3] + 8 * y[3:-1] - y[4:]) / (12 * h)
    fwd = np.array([-25.0, 48.0, -36.0, 16.0, -3.0]) / (12 * h)
    out[0] = fwd @ y[:5]
    out[1] = fwd @ y[1:6]
    out[-1] = -fwd @ y[::-1][:5]
    out[-2] = -fwd @ y[::-1][1:6]
    return out


def build_g_G1_G2(W: WSeries, geom: Geometry, C0: complex = -1.0, n_grid: int = GRID_POINTS) -> WFunctions:
    """g, G1 and G2 on a uniform grid of [0, l] with ``n_grid`` points."""
    if n_grid < MIN_GRID:
        raise ValidationError(f"the grid needs at least {MIN_GRID} points for g', got {n_grid}")
    d, l = geom.d, geom.l
    t = np.linspace(0.0, l, n_grid)
    h = t[1] - t[0]
    W_left = W(l - t, side="left")
    W_right = W(l + t, side="right")
    g = (W_left - W_right) / (2 * d)
    G1 = cumulative_simpson(g, dx=h, initial=0.0)
    G1 = G1[-1] - G1
    G1[-1] = 0.0
    dg = _derivative4(g, h)
    G2 = -d * g - d * g[-1] - G1 + d * d * dg - W_right
    W_all = np.concatenate([W_left[::-1][:-1], W_right])
    c = -2 * (C0 + 1) / d ** 2
    return WFunctions(t, W_all, g, G1, G2, complex(C0), complex(c))


def W_from_potential(q: Potential, geom: Geometry, t) -> np.ndarray:
    """W evaluated directly from q (needs ``q.dleft``); the reference for build_W."""
    _require_equal_lengths(geom)
    if q.dleft is None:
        raise ValidationError("W needs the derivative of q on the first segment")
    d, l, a = geom.d, geom.l, geom.a
    ql = lambda x: float(q.left(np.array([x]))[0])
    qr = lambda x: float(q.right(np.array([x]))[0])
    dql = lambda x: float(q.dleft(np.array([x]))[0])

    def Q1(z):
        return quad(ql, z, l, epsabs=1e-13, epsrel=1e-12, limit=200)[0]

    def Q2(z):
        return quad(lambda s: qr(a + s), 0.0, l - z, epsabs=1e-13, epsrel=1e-12, limit=200)[0]

    out = []
    for x in np.atleast_1d(np.asarray(t, dtype=float)):
        if x < l:
            y = l - x
            out.append(d * ql(y) - d * ql(l) - Q1(y) + d * d * dql(y) - Q2(y))
        else:
            y = min(x - l, l)
            out.append(-d * ql(y) - d * ql(l) - Q1(y) + d * d * dql(y) - Q2(y))
    return np.array(out)


def representation_sides(q: Potential, geom: Geometry, rho, charfn=None, n_nodes: int = 96) -> tuple:
    """Both sides of Delta - Delta~ - C0 sin(2 rho l)/rho = int_0^{2l} W sin(rho t)/(2 rho) dt.

    u = q(0) and C0 = -1 - d^2 q(l)/2 come from q, W from ``W_from_potential``
    and the integral from Gauss-Legendre rules on (0, l) and (l, 2l), where
    W is smooth.  ``charfn`` defaults to the potential-backed Delta.
    """
    from .forward import PotentialCharFunction

    _require_equal_lengths(geom)
    d, l = geom.d, geom.l
    rho = np.atleast_1d(np.asarray(rho, dtype=float))
    if charfn is None:
        charfn = PotentialCharFunction(q, geom)
    u = float(q.left(np.array([0.0]))[0])
    C0 = -1.0 - d * d * float(q.left(np.array([l]))[0]) / 2
    x, w = np.polynomial.legendre.leggauss(n_nodes)
    t = np.concatenate([l * (x + 1) / 2, l * (x + 3) / 2])
    weights = np.concatenate([w, w]) * l / 2
    Wt = W_from_potential(q, geom, t)
    rhs = np.sin(np.outer(rho, t)) @ (weights * Wt) / (2 * rho)
    lhs = np.asarray(charfn(rho ** 2)) - delta_tilde(rho ** 2, u, geom) - C0 * np.sin(2 * rho * l) / rho
    return lhs, rhs


def expected_constants(q: Potential, geom: Geometry) -> dict:
    """c, u, h1, h2 that a spectrum of ``q`` should produce.

    c = q(l), u = q(0), h2 = -q(b) and h1 = -(1/d^2 + q(a) - q(l)).
    """
    ql = lambda x: float(q.left(np.array([x]))[0])
    qr = lambda x: float(q.right(np.array([x]))[0])
    return {"c": ql(geom.l), "u": ql(0.0), "h1": -(1.0 / geom.d ** 2 + qr(geom.a) - ql(geom.l)),
            "h2": -qr(geom.b)}


# --------------------------------------------------------------------------
# verdict


@dataclass(frozen=True, eq=False)
class CharacterizationVerdict:
    asymptotics_ok: bool
    con1_ok: bool
    con2_ok: bool
    conditionC_ok: bool
    c: complex
    u: complex
    h1: complex
    h2: complex
    residuals: dict = field(repr=False)
    failures: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict, repr=False)

    @property
    def overall(self) -> bool:
        return self.asymptotics_ok and self.con1_ok and self.con2_ok and self.conditionC_ok

    def to_dict(self) -> dict:
        def num(x):
            x = complex(x)
            return [x.real, x.imag]

        def seq(v):
            v = np.asarray(v)
            return [num(x) for x in v]

        diag = self.diagnostics
        return {
            "overall": self.overall,
            "stages": {"asymptotics": self.asymptotics_ok, "con1": self.con1_ok,
                       "con2": self.con2_ok, "conditionC": self.conditionC_ok},
            "failures": dict(self.failures),
            "fitted": {"c": num(self.c), "u": num(self.u), "h1": num(self.h1), "h2": num(self.h2),
                       "C0": num(diag.get("C0", np.nan)), "c_con1": num(diag.get("c_con1", np.nan)),
                       "u_con1": num(diag.get("u_con1", np.nan)), "G2_at_l": num(diag.get("G2_at_l", np.nan)),
                       "g_at_0": num(diag.get("g_at_0", np.nan)), "g_at_l": num(diag.get("g_at_l", np.nan))},
            "conditionB_ok": diag.get("conditionB_ok"),
            "constants_match": diag.get("constants_match"),
            "residuals": {k: seq(v) for k, v in self.residuals.items()},
        }


def _con1(charfn, geom: Geometry, n_terms: int):
    """c, u and kappa_n from Delta((pi n/l)^2) = -d + d (l/(pi n))^2 [c - (-1)^n u + kappa_n].

    A relative error in the normalisation of Delta adds a multiple of
    lambda_n to the bracket; it is fitted alongside c and u and removed.
    Returns (c, u, kappa, noise floor of kappa).
    """
    d, l = geom.d, geom.l
    n = np.arange(1, n_terms + 1)
    lam = (np.pi * n / l) ** 2
    y = (np.asarray(charfn(lam)) + d) * lam / d
    A = np.stack([np.ones(n_terms), -(-1.0) ** n, -lam], axis=1)
    tail = slice(n_terms // 2 - 1, n_terms)
    scale = np.max(np.abs(A[tail]), axis=0)
    coef = np.linalg.lstsq((A[tail] / scale).astype(complex), y[tail], rcond=None)[0] / scale
    floor = charfn_noise(charfn, lam) * lam / d
    return complex(coef[0]), complex(coef[1]), CoeffSeq.make("kappa_con1", y - A @ coef), floor


def _con2(charfn, geom: Geometry):
    """h1, h2 and eta_n from Delta(z_n^2) = z_n^-3 sin(z_n l) [h2 - (-1)^n h1 + eta_n].

    Only z_n whose rounding noise (see ``xi_noise``) stays below the cap are used.
    """
    l = geom.l
    n_max = max(usable_terms(charfn, geom, l), MIN_CON2)
    z = compute_z(geom, n_max).z
    noise = z * xi_noise(geom, z) * np.abs(np.sin(z * geom.gamma) / np.sin(z * l))
    over = np.flatnonzero(noise > CON2_NOISE_CAP)
    n_use = int(over[0]) if over.size else n_max
    if n_use < MIN_CON2:
        raise NumericError("too few zeros z_n below the noise cap for (con2)", {"n": n_use})
    z = z[:n_use]
    n = np.arange(1, n_use + 1)
    X = np.asarray(charfn(z ** 2)) * z ** 3 / np.sin(z * l)
    A = np.stack([np.ones(n_use), -(-1.0) ** n], axis=1)
    tail = slice(n_use // 2 - 1, n_use)
    h2, h1 = np.linalg.lstsq(A[tail].astype(complex), X[tail], rcond=None)[0]
    return complex(h1), complex(h2), CoeffSeq.make("eta", X - A @ np.array([h2, h1])), noise[:n_use]


def check_conditions(spec: Spectrum, geom: Geometry, charfn: Optional[ProductCharFunction] = None,
                     n_grid: int = GRID_POINTS, potential: Optional[Potential] = None) -> CharacterizationVerdict:
    """Run every admissibility stage on ``spec``; a failing stage is named in ``failures``.

    When the generating ``potential`` is known the fitted c, u, h1, h2 are
    also compared with its values (``diagnostics["constants_match"]``);
    this does not enter the verdict.
    """
    _require_equal_lengths(geom)
    failures, residuals, diag = {}, {}, {}
    nan = complex(np.nan)

    try:
        fit = fit_asymptotics(spec, geom)
        u, asym_ok = fit.u, fit.passed
        residuals["mu"] = fit.mu.values
        if not asym_ok:
            failures["asymptotics"] = "mu_n fails the l2 tail test"
    except (ValidationError, NumericError) as exc:
        u, asym_ok = nan, False
        failures["asymptotics"] = str(exc)

    if charfn is None:
        charfn = reconstruct_charfn(spec, geom)

    c, con1_ok = nan, False
    try:
        C0, ladder = estimate_C0(charfn, u if np.isfinite(u) else 0.0, geom)
        c = -2 * (C0 + 1) / geom.d ** 2
        diag.update(C0=C0, C0_spread=ladder["spread"])
        c1, u1, kappa, floor = _con1(charfn, geom, usable_terms(charfn, geom, geom.l))
        residuals["kappa_con1"] = kappa.values
        diag.update(c_con1=c1, u_con1=u1)
        in_l2 = kappa.in_l2(floor=floor)
        agree = _agree(c1, c) and _agree(u1, u)
        con1_ok = in_l2 and agree
        if not con1_ok:
            failures["con1"] = ("kappa_n fails the l2 tail test" if not in_l2
                                else "c or u disagree between independent estimates")
    except (ValidationError, NumericError) as exc:
        failures["con1"] = str(exc)

    h1 = h2 = nan
    con2_ok = False
    try:
        h1, h2, eta, floor = _con2(charfn, geom)
        residuals["eta"] = eta.values
        con2_ok = eta.in_l2(floor=floor)
        if not con2_ok:
            failures["con2"] = "eta_n fails the l2 tail test"
    except (ValidationError, NumericError) as exc:
        failures["con2"] = str(exc)

    condC_ok = False
    try:
        if not np.isfinite(u):
            raise NumericError("u is unavailable")
        W = build_W(charfn, u, geom)
        residuals["beta"] = W.beta.values
        funcs = build_g_G1_G2(W, geom, diag.get("C0", -1.0), n_grid)
        G2l = funcs.G2[-1]
        scale = max(float(np.max(np.abs(funcs.G2))), 1.0 / geom.l)
        condC_ok = bool(abs(G2l) <= TOL_C * scale)
        diag.update(G2_at_l=G2l, G2_scale=scale, g_at_0=funcs.g[0], g_at_l=funcs.g[-1],
                    conditionB_ok=_agree(funcs.g[0], u) and _agree(funcs.g[-1], c), functions=funcs)
        if not condC_ok:
            failures["conditionC"] = f"|G2(l)| = {abs(G2l):.3g} exceeds {TOL_C:g} x {scale:.3g}"
    except (ValidationError, NumericError) as exc:
        failures["conditionC"] = str(exc)

    if potential is not None:
        expected = expected_constants(potential, geom)
        fitted = {"c": c, "u": u, "h1": h1, "h2": h2}
        diag["expected_constants"] = expected
        diag["constants_match"] = {k: bool(np.isfinite(fitted[k]) and _agree(fitted[k], v, H_TOL))
                                   for k, v in expected.items()}

    return CharacterizationVerdict(asym_ok, con1_ok, con2_ok, condC_ok, complex(c), complex(u),
                                   complex(h1), complex(h2), residuals, failures, diag)
