"""Recovery of the characteristic function and of the potential from a spectrum.

The characteristic function is rebuilt as a ratio against the zero-potential
function of the same geometry,

    Delta(lam) = Delta_0(lam) * prod_n (lam_n - lam) / (lam0_n - lam),

whose constant is exactly 1 because both functions share the leading
behaviour as lam -> -infinity.  The literal product with the normalisation
l d^2 (l = gamma) and the Hadamard product with a constant fitted along
lam = -R^2 are available for comparison.

The potential is then recovered from sine coefficients on [0, gamma] and
from moments against the basis {sin z_n t} on the second segment.
"""
from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

import numpy as np
from scipy.integrate import simpson
from scipy.special import loggamma

from .basis import BasisZeros, compute_z, expand_biorthogonal, gram_matrix, sine_gram, spare_zero
from .errors import CommonZeroError, NumericError, ValidationError
from .forward import PotentialCharFunction, Spectrum, compute_spectrum, eval_c1_c2_s
from .geometry import Geometry, Potential
from .quadrature import poly_sine_integral

__all__ = [
    "CoeffSeq",
    "UniquenessReport",
    "ProductCharFunction",
    "Recovery",
    "check_uniqueness",
    "reconstruct_charfn",
    "recover_kappa",
    "recover_xi",
    "recover_potential",
    "run_recovery",
    "hadamard_diagnostics",
    "usable_terms",
    "xi_noise",
    "reference_spectrum",
    "richardson_endpoint",
    "recovery_errors",
]

log = logging.getLogger(__name__)

RATIONAL_ATOL = 1e-9
EXTEND_FACTOR = 2
USABLE_FRACTION = 0.9
OUTPUT_SAMPLES = 1025
LADDER = (20.0, 40.0, 80.0, 160.0)
L2_RATIO = 0.5      # tail mean-square ratio accepted as l2 decay
XI_NOISE_CAP = 1e-5  # largest tolerated rounding-noise estimate of a moment xi_n
NOISE_FLOOR = 1e-13  # relative floor under the moment noise estimate
NEAR_RHO = 1e-2     # |rho - rho0_m| below which the m-th factor is merged with Delta_0
_GAUSS_NODES = 0.5 + 0.5 * np.array([-math.sqrt(0.6), 0.0, math.sqrt(0.6)])
_GAUSS_WEIGHTS = np.array([5.0, 8.0, 5.0]) / 18.0


# --------------------------------------------------------------------------
# coefficient sequences


def _mean_square(x):
    x = np.asarray(x)
    return float(np.mean(np.abs(x) ** 2)) if x.size else 0.0


@dataclass(frozen=True)
class CoeffSeq:
    """A coefficient sequence indexed n = 1..N."""

    kind: str
    values: np.ndarray
    tail_stat: float
    diagnostics: dict = field(default_factory=dict, compare=False, repr=False)

    @classmethod
    def make(cls, kind: str, values, diagnostics: Optional[dict] = None) -> "CoeffSeq":
        v = np.asarray(values)
        v.setflags(write=False)
        q = max(1, v.size // 4)
        return cls(kind, v, _mean_square(v[-q:]), diagnostics or {})

    @property
    def N(self) -> int:
        return int(self.values.size)

    @property
    def decays(self) -> bool:
        """Last quarter's mean square within 1.5x of the third quarter's."""
        return self.decays_above()

    def decays_above(self, floor=None) -> bool:
        """``decays`` after subtracting a noise ``floor`` (scalar or per entry) from the magnitudes.

        A sequence entirely below its floor passes.
        """
        v = np.abs(self.values)
        if floor is not None:
            v = np.maximum(v - np.broadcast_to(np.asarray(floor, dtype=float), v.shape), 0.0)
        q = self.N // 4
        if q == 0:
            return True
        tail, third = _mean_square(v[-q:]), _mean_square(v[2 * q:3 * q])
        return math.isfinite(tail) and tail <= 1.5 * third

    def in_l2(self, ratio: float = L2_RATIO, floor=None) -> bool:
        """Finite-section test for membership in l2.

        The last quarter's mean square must be at most ``ratio`` times the
        second quarter's, and no entry past the midpoint may exceed the
        largest entry before it.  ``floor`` (scalar or per entry) is a noise
        level subtracted from the magnitudes first, so a sequence lost in
        its noise counts as zero.
        """
        v = np.abs(self.values)
        q = self.N // 4
        if q == 0 or not np.all(np.isfinite(v)):
            return False
        if floor is not None:
            v = np.maximum(v - np.broadcast_to(np.asarray(floor, dtype=float), v.shape), 0.0)
        tail, second = _mean_square(v[-q:]), _mean_square(v[q:2 * q])
        half = self.N // 2
        return bool(tail <= ratio * second and np.max(v[half:]) <= np.max(v[:half]))


# --------------------------------------------------------------------------
# uniqueness


PASS, FAIL, UNDETERMINED = "pass", "fail", "undetermined"


@dataclass(frozen=True)
class UniquenessReport:
    condition1: str
    condition2: str
    condition3: str
    k: Optional[int] = None

    @property
    def overall(self) -> str:
        verdicts = (self.condition1, self.condition2, self.condition3)
        if PASS in verdicts:
            return PASS
        if UNDETERMINED in verdicts:
            return UNDETERMINED
        return FAIL

    def to_dict(self) -> dict:
        return {"condition1": self.condition1, "condition2": self.condition2,
                "condition3": self.condition3, "k": self.k, "overall": self.overall}


def check_uniqueness(geom: Geometry) -> UniquenessReport:
    """Sufficient conditions for c2 and s to have no common zeros."""
    ratio = geom.l_over_gamma
    if ratio is not None:
        k = int(ratio) if ratio.denominator == 1 and ratio > 0 else None
    else:
        r = geom.l / geom.gamma
        k = int(round(r)) if round(r) >= 1 and abs(r - round(r)) <= RATIONAL_ATOL else None
    c1 = PASS if k is not None else FAIL
    if geom.pi_l_over_gamma is not None and geom.pi_d_over_gamma is not None:
        c2 = PASS
    else:
        c2 = UNDETERMINED
    if geom.l_over_gamma is not None and geom.pi_d_over_gamma is not None:
        c3 = PASS if abs(math.cos(geom.l / geom.d)) > 1e-12 else FAIL
    else:
        c3 = UNDETERMINED
    return UniquenessReport(c1, c2, c3, k)


# --------------------------------------------------------------------------
# characteristic function from the spectrum


@lru_cache(maxsize=16)
def _reference_values(geom: Geometry, count: int) -> np.ndarray:
    return compute_spectrum(Potential.zero(), geom, count).values


def reference_spectrum(geom: Geometry, count: int) -> np.ndarray:
    """Zeros of the zero-potential characteristic function (cached)."""
    return _reference_values(geom, int(count))


def _principal_rho(lam):
    rho = np.sqrt(np.asarray(lam, dtype=complex))
    return np.where(rho.real < 0, -rho, rho)


def _growth_check(values: np.ndarray, geom: Geometry):
    n = np.arange(1, values.size)
    if n.size == 0:
        return
    model = (np.pi * n / (geom.gamma + geom.l)) ** 2
    ratio = np.abs(values[1:]) / (model + 1.0)
    if np.max(ratio[n >= 4] if n.size >= 4 else ratio) > 100.0:
        raise ValidationError("spectrum does not grow like n^2")


class ProductCharFunction:
    """Characteristic function built from its zeros.

    ``method`` is ``"ratio"`` (default, any geometry) or ``"eq19"`` (the
    literal product with normalisation l d^2, equal lengths only).
    Supplied eigenvalues are extended to ``EXTEND_FACTOR`` times their
    count by the asymptotic law fitted to the supplied tail.
    """

    backing = "product"

    def __init__(self, spectrum: Spectrum, geom: Geometry, n_prod: Optional[int] = None,
                 method: str = "ratio", extend: bool = True):
        if method not in ("ratio", "eq19"):
            raise ValidationError(f"unknown product method {method!r}")
        if method == "eq19" and not geom.is_equal_lengths:
            raise ValidationError("the l d^2 normalised product needs l = gamma")
        n_prod = spectrum.count if n_prod is None else int(n_prod)
        if not 1 <= n_prod <= spectrum.count:
            raise ValidationError(f"n_prod must be in [1, {spectrum.count}]")
        self.geometry = geom
        self.spectrum = spectrum
        self.n_prod = n_prod
        self.method = method
        vals = np.asarray(spectrum.values[:n_prod], dtype=complex)
        _growth_check(vals, geom)
        total = EXTEND_FACTOR * n_prod if extend else n_prod
        self.reference = reference_spectrum(geom, total)
        self.u_fit = None
        if extend and n_prod >= 16:
            vals = np.concatenate([vals, self._extension(vals, total)])
        self.values = vals
        self._zero = PotentialCharFunction(Potential.zero(), geom)

    def _extension(self, vals, total):
        """Eigenvalues n_prod..total-1 from the fitted asymptotic law."""
        g = self.geometry
        N = vals.size
        ref = self.reference
        n_all = np.arange(total)
        rho_ref = _principal_rho(ref)
        lo = N // 2
        n = n_all[lo:N]
        diff = _principal_rho(vals[lo:N]) - rho_ref[lo:N]
        new_n = n_all[N:total]
        if g.is_equal_lengths:
            delta = np.sin(np.pi * n / 2)
            odd = np.abs(delta) > 0.5
            # least-squares u from rho_n - rho0_n ~ 4 l delta_n u / (pi^2 n^2)
            basis = 4 * g.l * delta[odd] / (np.pi ** 2 * n[odd] ** 2)
            u = np.sum(basis * diff[odd]) / np.sum(basis ** 2)
            self.u_fit = complex(u)
            shift = 4 * g.l * np.sin(np.pi * new_n / 2) * u / (np.pi ** 2 * new_n ** 2)
        else:
            tail = n[-max(1, n.size * 2 // 5):]
            c = np.mean(diff[-tail.size:] * tail ** 2)
            shift = c / new_n ** 2
        rho = rho_ref[N:total] + shift
        return rho ** 2

    def _zero_derivative(self, lam):
        """d Delta_0 / d lam by a fourth-order central difference."""
        h = 1e-4 * (1.0 + 2.0 * np.abs(np.sqrt(lam)))
        pts = np.concatenate([lam - 2 * h, lam - h, lam + h, lam + 2 * h])
        f = self._zero(pts).reshape(4, -1)
        return (f[0] - 8 * f[1] + 8 * f[2] - f[3]) / (12 * h)

    def _quotient_near_zero(self, lam, lam0):
        """Delta_0(lam) / (lam0 - lam) for lam close to the zero lam0, without dividing by the gap."""
        out = np.zeros(lam.shape, dtype=complex)
        for node, weight in zip(_GAUSS_NODES, _GAUSS_WEIGHTS):
            out -= weight * self._zero_derivative(lam0 + node * (lam - lam0))
        return out

    def _ratio(self, lam):
        lam = np.asarray(lam, dtype=complex)
        flat = lam.ravel()
        M = self.values.size
        ref = self.reference[:M]
        rho_ref = _principal_rho(ref)
        out = np.empty(flat.shape, dtype=complex)
        for start in range(0, flat.size, 64):
            x = flat[start:start + 64]
            dist = np.abs(_principal_rho(x)[:, None] - rho_ref[None, :])
            m = np.argmin(dist, axis=1)
            near = dist[np.arange(x.size), m] < NEAR_RHO
            num = self.values[None, :] - x[:, None]
            den = ref[None, :] - x[:, None]
            rows = np.flatnonzero(near)
            den[rows, m[rows]] = 1.0
            prod = np.prod(num / den, axis=1)
            lead = np.empty(x.shape, dtype=complex)
            far = ~near
            if np.any(far):
                lead[far] = self._zero(x[far])
            if rows.size:
                lead[rows] = self._quotient_near_zero(x[rows], ref[m[rows]])
            out[start:start + 64] = lead * prod
        return out.reshape(lam.shape)

    def _eq19(self, lam):
        g = self.geometry
        lam = np.asarray(lam, dtype=complex)
        flat = lam.ravel()
        M = self.values.size
        n = np.arange(1, M)
        scale = (np.pi * n / (2 * g.l)) ** 2
        out = np.empty(flat.shape, dtype=complex)
        # tail n >= M with lam_n ~ (pi n / 2l)^2 + 2/(d l): gamma-function closed form
        shift = 2.0 / (g.d * g.l)
        x = np.sqrt((flat - shift).astype(complex)) * 2 * g.l / np.pi
        log_tail = 2 * loggamma(M) - loggamma(M - x) - loggamma(M + x)
        for start in range(0, flat.size, 64):
            xx = flat[start:start + 64, None]
            out[start:start + 64] = np.prod((self.values[None, 1:] - xx) / scale[None, :], axis=1)
        out = out * np.exp(log_tail) * g.l * g.d ** 2 * (flat - self.values[0])
        return out.reshape(lam.shape)

    def __call__(self, lam):
        if self.method == "eq19":
            return self._eq19(lam)
        return self._ratio(lam)

    def envelope(self, lam):
        return self._zero.envelope(lam)


def reconstruct_charfn(spec: Spectrum, geom: Geometry, n_prod: Optional[int] = None,
                       method: str = "ratio") -> ProductCharFunction:
    """Characteristic function determined by the spectrum."""
    return ProductCharFunction(spec, geom, n_prod, method)


# --------------------------------------------------------------------------
# Hadamard product and the constant along the negative axis


def _log_hadamard(values: np.ndarray, k0: int, lam):
    """log of lam^k0 prod_{n>=k0} (1 - lam/lam_n), with a fitted tail."""
    lam = np.asarray(lam, dtype=complex)
    v = values[k0:]
    out = k0 * np.log(lam) + np.sum(np.log1p(-lam[..., None] / v), axis=-1)
    # tail beyond the supplied values: lam_n ~ kappa^2 (n + alpha)^2 + beta
    N = values.size
    n = np.arange(N)[N // 2:]
    rho = _principal_rho(values[N // 2:]).real
    A = np.stack([n, np.ones_like(n, dtype=float), 1.0 / np.maximum(n, 1)], axis=1)
    (kap, ka, b2k), *_ = np.linalg.lstsq(A, rho, rcond=None)
    alpha, beta = ka / kap, 2 * kap * b2k
    x = np.sqrt((lam - beta) / kap ** 2)
    y = np.sqrt(complex(-beta / kap ** 2))
    m = N + alpha
    tail = loggamma(m - y) + loggamma(m + y) - loggamma(m - x) - loggamma(m + x)
    return out + tail


def hadamard_diagnostics(spec: Spectrum, geom: Geometry, ladder=LADDER) -> dict:
    """Type of the Hadamard product and its constant from the lam = -R^2 ladder.

    The product type is declared 2 gamma when G / s^2 stabilises to a
    nonzero constant within 1 % over the ladder, otherwise gamma + l.  For
    type gamma + l, ``C_R = d^2 rho sin(rho l) cos(rho gamma) / G`` at
    rho = iR is extrapolated in 1/R.
    """
    vals = np.asarray(spec.values, dtype=complex)
    R = np.asarray(ladder, dtype=float)
    lam = -R ** 2
    logG = _log_hadamard(vals, spec.k0, lam)
    # log s^2 at rho = iR: s = sinh(R gamma)/R
    log_s2 = 2 * (R * geom.gamma + np.log1p(-np.exp(-2 * R * geom.gamma)) - np.log(2 * R))
    ratio = np.exp(logG - log_s2)
    spread = np.abs(np.diff(ratio[-3:])) / np.maximum(np.abs(ratio[-3:-1]), 1e-300)
    two_gamma = bool(np.all(spread <= 0.01) and np.all(np.abs(ratio) > 1e-12))
    d, l, g = geom.d, geom.l, geom.gamma
    out = {"ladder": [float(r) for r in R], "ratio_G_over_s2": ratio, "type": "2gamma" if two_gamma else "gamma+l"}
    if two_gamma:
        out["C1"] = complex(ratio[-1])
        # the limit for C subtracts C1 s^2 from G; the difference is smaller by exp(-(gamma - l) R)
        lead = np.exp(np.log(d * d * R) + R * (l + g) - np.log(4.0))
        G = np.exp(logG)
        s2 = np.exp(log_s2)
        rel = np.abs(lead) / np.abs(G)
        ok = rel > 1e-8
        C = -lead / (G - out["C1"] * s2)
        out["C_ladder"] = C
        out["C"] = complex(C[ok][-1]) if np.any(ok) else None
        return out
    # -d^2 R sinh(R l) cosh(R gamma), in logs
    log_lead = (np.log(d * d * R) + R * (l + g) + np.log1p(-np.exp(-2 * R * l)) + np.log1p(np.exp(-2 * R * g))
                - np.log(4.0) + 1j * np.pi)
    C = np.exp(log_lead - logG)
    A = np.stack([np.ones_like(R), 1 / R, 1 / R ** 2], axis=1)
    est = np.linalg.lstsq(A, C, rcond=None)[0][0]
    est_hi = np.linalg.lstsq(A[1:], C[1:], rcond=None)[0][0] if R.size >= 4 else est
    est_lo = np.linalg.lstsq(A[:-1], C[:-1], rcond=None)[0][0] if R.size >= 4 else est
    out["C_ladder"] = C
    out["C"] = complex(est)
    out["stable"] = bool(abs(est_hi - est_lo) <= 1e-2 * abs(est))
    # the constant implied by the ratio representation, for comparison
    lam_star = np.array([-1.0])
    charfn = ProductCharFunction(spec, geom)
    out["C_exact"] = complex(charfn(lam_star)[0] / np.exp(_log_hadamard(vals, spec.k0, lam_star))[0])
    if not out["stable"]:
        raise NumericError("constant along lam = -R^2 does not stabilise",
                           {"ladder": list(R), "C": [complex(c) for c in C]})
    return out


# --------------------------------------------------------------------------
# coefficients


def usable_terms(charfn, geom: Geometry, period: float) -> int:
    """Largest n with pi n / period inside the reliable range of ``charfn``."""
    if getattr(charfn, "backing", "") != "product":
        raise ValidationError("term count is only defined for spectrum-backed functions")
    rho_max = float(_principal_rho(charfn.spectrum.values[charfn.n_prod - 1]).real)
    return max(1, int(USABLE_FRACTION * rho_max * period / np.pi))


def xi_noise(geom: Geometry, z) -> np.ndarray:
    """Rounding-noise estimate of xi_n when the eigenvalues are known to one ulp.

    Near z_n^2 the characteristic function is a product with a factor
    (lam_m - z_n^2) that is O(n^-4); its one-ulp uncertainty is amplified
    by z_n^2 / sin(z_n gamma) in the moment formula.
    """
    z = np.asarray(z, dtype=float)
    lam = z ** 2
    h = 1e-4 * (1.0 + 2.0 * z)
    zero = PotentialCharFunction(Potential.zero(), geom)
    pts = np.concatenate([lam - 2 * h, lam - h, lam + h, lam + 2 * h])
    f = zero(pts).reshape(4, -1)
    deriv = np.abs((f[0] - 8 * f[1] + 8 * f[2] - f[3]) / (12 * h))
    return lam / np.abs(np.sin(z * geom.gamma)) * deriv * 2 * np.spacing(lam)


def recover_kappa(charfn, geom: Geometry, n_terms: int) -> CoeffSeq:
    """kappa_n = int_0^gamma sin(pi n t / gamma) q(t) dt from Delta((pi n / gamma)^2)."""
    n = np.arange(1, n_terms + 1)
    lam = (np.pi * n / geom.gamma) ** 2
    _, k, _ = eval_c1_c2_s(lam, geom)
    k = k.real
    bad = np.flatnonzero(np.abs(k) < 1e-10)
    if bad.size:
        raise CommonZeroError(f"c2 vanishes at (pi n / gamma)^2 for n = {int(n[bad[0]])}")
    sign = np.where(n % 2 == 0, 1.0, -1.0)
    D = np.asarray(charfn(lam))
    kappa = -(np.pi * n / (k * geom.gamma)) * (D + sign * k)
    return CoeffSeq.make("kappa", kappa.real, {"imag_max": float(np.max(np.abs(kappa.imag)))})


def _moments_at(charfn, zn: np.ndarray, q_at_gamma: float, geom: Geometry) -> np.ndarray:
    sg = np.sin(zn * geom.gamma)
    bad = np.flatnonzero(np.abs(sg) < 1e-8)
    if bad.size:
        raise CommonZeroError(f"sin(z gamma) vanishes at z = {zn[bad[0]]:.12g}")
    lam = zn ** 2
    c1, _, _ = eval_c1_c2_s(lam, geom)
    D = np.asarray(charfn(lam))
    bracket = D + c1 * sg / zn + geom.d * q_at_gamma * sg * np.sin(zn * geom.l) / zn ** 2
    return -(zn ** 2 / sg) * bracket


def recover_xi(charfn, z: BasisZeros, q_at_gamma: float, geom: Geometry) -> CoeffSeq:
    """xi_n = int_0^l sin(z_n t) q(b - t) dt from Delta(z_n^2)."""
    xi = _moments_at(charfn, np.asarray(z.z, dtype=float), q_at_gamma, geom)
    return CoeffSeq.make("xi", xi.real, {"imag_max": float(np.max(np.abs(xi.imag)))})


# --------------------------------------------------------------------------
# synthesis


def _tail_slice(n_terms: int):
    lo = max(1, n_terms // 2)
    return slice(lo - 1, n_terms)


def _fit_kappa_tail(kappa: np.ndarray, gamma: float, B: Optional[float] = None):
    """(A, B) with kappa_n ~ (A - (-1)^n B)/w + (C - (-1)^n D)/w^3, w = pi n / gamma.

    A known ``B`` is held fixed.
    """
    N = kappa.size
    n = np.arange(1, N + 1)
    w = np.pi * n / gamma
    sgn = (-1.0) ** n
    sl = _tail_slice(N)
    cols = np.stack([1 / w, -sgn / w, 1 / w ** 3, -sgn / w ** 3], axis=1)[sl]
    if cols.shape[0] < 8:
        raise NumericError("too few coefficients to fit the endpoint values", {"n_terms": N})
    rhs = kappa[sl]
    if B is not None:
        rhs = rhs - B * cols[:, 1]
        cols = cols[:, [0, 2, 3]]
    scale = np.max(np.abs(cols), axis=0)
    coef = np.linalg.lstsq(cols / scale, rhs, rcond=None)[0] / scale
    return (float(coef[0]), float(coef[1])) if B is None else (float(coef[0]), float(B))


def _synth_left(kappa: np.ndarray, gamma: float, t: np.ndarray, A: float, B: float):
    n = np.arange(1, kappa.size + 1)
    w = np.pi * n / gamma
    lin = (A - (-1.0) ** n * B) / w
    rem = (2 / gamma) * (np.sin(np.outer(t, w)) @ (kappa - lin))
    return A + (B - A) * t / gamma + rem


def _partial_sum(kappa, gamma, t):
    n = np.arange(1, kappa.size + 1)
    return (2 / gamma) * (np.sin(np.outer(np.atleast_1d(t), np.pi * n / gamma)) @ kappa)


def richardson_endpoint(kappa: np.ndarray, gamma: float) -> float:
    """q(gamma) from the plain sine sum at gamma - h, h = gamma/64, /128, /256, extrapolated to h = 0."""
    h = gamma / np.array([64.0, 128.0, 256.0])
    vals = _partial_sum(kappa, gamma, gamma - h)
    # quadratic through the three points, evaluated at h = 0
    coef = np.polyfit(h, vals, 2)
    est = float(coef[-1])
    if not math.isfinite(est):
        raise NumericError("endpoint extrapolation did not converge")
    return est


def _joint_right_fit(moments: np.ndarray, nodes: np.ndarray, l: float, noise: np.ndarray, n_sines: int):
    """Fit p = cubic + sum_{m < n_sines} a_m sin(nodes_m t) and the point mass at t = l.

    ``moments`` are the xi formula evaluated with q(gamma) = 0, which equal
    the moments of p plus d q(gamma) sin(z l).  The point mass is therefore
    one more unknown.  Rows are weighted by their rounding noise.  Returns
    (cubic coefficients, sine coefficients, mass).
    """
    if nodes.size < n_sines + 8:
        raise NumericError("too few moments for the right-segment fit", {"n_terms": int(nodes.size)})
    sines = sine_gram(nodes, l)[:, :n_sines]
    cubic = np.stack([poly_sine_integral(e, nodes, 0.0, l) for e in np.eye(4)], axis=1)
    A = np.hstack([sines, cubic, np.sin(nodes * l)[:, None]])
    w = 1.0 / (noise + NOISE_FLOOR * max(1.0, float(np.max(np.abs(moments[:n_sines])))))
    Aw = A * w[:, None]
    scale = np.linalg.norm(Aw, axis=0)
    sol = np.linalg.lstsq(Aw / scale, w * moments, rcond=None)[0] / scale
    return sol[n_sines:n_sines + 4], sol[:n_sines], float(sol[-1])


@dataclass(frozen=True, eq=False)
class Recovery:
    potential: Potential
    kappa: CoeffSeq
    xi: CoeffSeq
    q_at_gamma: float
    uniqueness: UniquenessReport
    diagnostics: dict = field(default_factory=dict)


def _noise_capped_zeros(charfn, geom: Geometry):
    n_xi = usable_terms(charfn, geom, geom.l)
    noise = xi_noise(geom, compute_z(geom, n_xi).z)
    noisy = np.flatnonzero(noise > XI_NOISE_CAP)
    if noisy.size:
        n_xi = max(int(noisy[0]), min(n_xi, 20))
    return compute_z(geom, n_xi), noise[:n_xi]


def run_recovery(spec: Spectrum, geom: Geometry, N: Optional[int] = None, force: bool = False,
                 endpoint: str = "fit", n_samples: int = OUTPUT_SAMPLES,
                 charfn: Optional[ProductCharFunction] = None) -> Recovery:
    """Recover q from the first ``N`` eigenvalues (all of them by default).

    ``endpoint="fit"``: the second segment is fitted from its moments
    together with q(gamma), using the spare zero of c2 as an extra node;
    the first segment then has its endpoint values removed before the sine
    series is summed.  ``endpoint="richardson"``: plain sine series on the
    first segment, q(gamma) extrapolated from inside it, and the plain
    biorthogonal series on the second.
    """
    if endpoint not in ("fit", "richardson"):
        raise ValidationError(f"unknown endpoint policy {endpoint!r}")
    report = check_uniqueness(geom)
    if report.overall != PASS:
        if not force:
            raise ValidationError(f"uniqueness check is {report.overall}; use force to override")
        warnings.warn(f"uniqueness check is {report.overall}; recovering anyway", RuntimeWarning, stacklevel=2)
    N = spec.count if N is None else int(N)
    if N > spec.count:
        raise ValidationError(f"N = {N} exceeds the {spec.count} supplied eigenvalues")
    if charfn is None:
        charfn = reconstruct_charfn(spec, geom, N)
    n_kappa = usable_terms(charfn, geom, geom.gamma)
    kappa = recover_kappa(charfn, geom, n_kappa)
    z, noise = _noise_capped_zeros(charfn, geom)
    t_left = np.linspace(0.0, geom.gamma, n_samples)
    s = np.linspace(0.0, geom.l, n_samples)     # s = b - t
    diag = {"n_kappa": n_kappa, "n_xi": z.N, "u_fit": charfn.u_fit, "endpoint": endpoint}
    if endpoint == "fit":
        nodes, node_noise = z.z, noise
        try:
            spare = spare_zero(geom)
            _moments_at(charfn, np.array([spare]), 0.0, geom)
            nodes = np.concatenate([[spare], z.z])
            node_noise = np.concatenate([xi_noise(geom, [spare]), noise])
        except (CommonZeroError, NumericError) as exc:
            log.info("spare zero not used: %s", exc)
            spare = None
        bare = _moments_at(charfn, nodes, 0.0, geom).real
        n_sines = int(np.clip(nodes.size // 4, 4, 12))
        pc, coef, mass = _joint_right_fit(bare, nodes, geom.l, node_noise, n_sines)
        q_gamma = mass / geom.d
        p = np.polynomial.Polynomial(pc)(s) + np.sin(np.outer(s, nodes[:n_sines])) @ coef
        diag["q_gamma_left_tail"] = _fit_kappa_tail(kappa.values, geom.gamma)[1]
        A, B = _fit_kappa_tail(kappa.values, geom.gamma, q_gamma)
        left = _synth_left(kappa.values, geom.gamma, t_left, A, B)
        diag.update(spare_zero=spare, n_sines=n_sines)
    else:
        left = _partial_sum(kappa.values, geom.gamma, t_left)
        q_gamma = richardson_endpoint(kappa.values, geom.gamma)
        gram = gram_matrix(z)
        p = expand_biorthogonal(recover_xi(charfn, z, q_gamma, geom).values, gram, s)
        diag["gram_condition"] = gram.condition
    left[-1] = q_gamma
    xi = recover_xi(charfn, z, q_gamma, geom)
    pot = Potential.from_grids(left, p[::-1], geom, q_at_gamma=float(q_gamma))
    return Recovery(pot, kappa, xi, float(q_gamma), report, diag)


def recovery_errors(recovered: Potential, true: Potential, geom: Geometry, n_points: int = 4001) -> dict:
    """Relative L2 errors on each segment and on all of T (absolute where q vanishes)."""
    out, num, den = {}, 0.0, 0.0
    for name, side, lo, hi in (("left", "left", 0.0, geom.gamma), ("right", "right", geom.a, geom.b)):
        t = np.linspace(lo, hi, n_points)
        ref = np.asarray(getattr(true, side)(t))
        diff = simpson(np.abs(np.asarray(getattr(recovered, side)(t)) - ref) ** 2, x=t)
        norm = simpson(np.abs(ref) ** 2, x=t)
        out[name] = float(math.sqrt(diff / norm)) if norm > 0 else float(math.sqrt(diff))
        num, den = num + diff, den + norm
    out["total"] = float(math.sqrt(num / den)) if den > 0 else float(math.sqrt(num))
    return out


def recover_potential(spec: Spectrum, geom: Geometry, N: Optional[int] = None, force: bool = False,
                      endpoint: str = "fit") -> Potential:
    return run_recovery(spec, geom, N, force, endpoint).potential
