"""Forward problem: characteristic function and eigenvalues.

The Dirichlet problem on T reduces to two Sturm-Liouville equations with
frozen argument linked by jump conditions at gamma.  Its characteristic
function is

    Delta(lam) = -c1 s - c2 cos(rho gamma) - s I_R - c2 I_L - d q(gamma) s S_l

with ``s = sin(rho gamma)/rho``, ``S_l = sin(rho l)/rho``,
``I_L = int_0^gamma sin(rho t)/rho q(t) dt`` and
``I_R = int_a^b sin(rho (b - t))/rho q(t) dt``.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import brentq

from . import contour
from .errors import DomainError, IncompleteSpectrumError, ValidationError
from .geometry import Geometry, Potential
from .quadrature import cos_sinc, sinc_integral

__all__ = [
    "Spectrum",
    "PotentialCharFunction",
    "eval_S",
    "eval_C",
    "eval_c1_c2_s",
    "eval_Delta",
    "eval_Delta_case_lg",
    "compute_spectrum",
    "find_zeros",
    "sort_key",
]

FILON_INTERVALS = 2048
STRIP_HALFWIDTH = 2.0


def sort_key(values):
    """Indices ordering complex values by real part, then imaginary part."""
    values = np.asarray(values, dtype=complex)
    return np.lexsort((values.imag, values.real))


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues ordered by real part (ties by imaginary part), multiplicities repeated."""

    values: np.ndarray
    k0: int
    provenance: str = "supplied"
    diagnostics: dict = field(default_factory=dict, compare=False, repr=False)

    @classmethod
    def from_values(cls, values, k0: Optional[int] = None, provenance: str = "supplied",
                    diagnostics: Optional[dict] = None) -> "Spectrum":
        v = np.asarray(values, dtype=complex).ravel()
        if v.size == 0:
            raise ValidationError("a spectrum needs at least one eigenvalue")
        if not np.all(np.isfinite(v)):
            raise ValidationError("eigenvalues must be finite")
        v = v[sort_key(v)]
        v.setflags(write=False)
        if k0 is None:
            tol = 1e-10 * (1.0 + np.max(np.abs(v)))
            k0 = int(np.sum(np.abs(v) <= tol))
        return cls(v, int(k0), provenance, diagnostics or {})

    @property
    def count(self) -> int:
        return int(self.values.size)

    def head(self, n: int) -> "Spectrum":
        return Spectrum.from_values(self.values[:n], min(self.k0, n), self.provenance, self.diagnostics)

    def to_dict(self, geom: Geometry) -> dict:
        return {
            "geometry": geom.to_dict(),
            "k0": self.k0,
            "values": [[float(z.real), float(z.imag)] for z in self.values],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Spectrum":
        vals = [complex(re, im) for re, im in data["values"]]
        return cls.from_values(vals, k0=data.get("k0"), provenance="supplied")


def eval_c1_c2_s(lam, geom: Geometry):
    """Auxiliary functions ``(c1, c2, s)`` at ``lam`` (array friendly)."""
    lam = np.asarray(lam, dtype=complex)
    cl, sl = cos_sinc(lam, geom.l)
    _, sg = cos_sinc(lam, geom.gamma)
    c1 = cl - geom.d * lam * sl
    c2 = geom.d * cl + (1.0 - geom.d ** 2 * lam) * sl
    return c1, c2, sg


def eval_S(x, lam, geom: Geometry):
    """S(x, lam) = sin(rho (x - gamma))/rho on [0, gamma]."""
    x = np.asarray(x, dtype=float)
    if np.any((x < 0) | (x > geom.gamma)):
        raise DomainError("S is defined on [0, gamma] only")
    return -cos_sinc(lam, geom.gamma - x)[1]


def eval_C(x, lam, q: Potential, geom: Geometry):
    """C(x, lam) = cos(rho (x - gamma)) + int_gamma^x sin(rho (x - t))/rho q(t) dt."""
    x = float(x)
    if not 0.0 <= x <= geom.gamma:
        raise DomainError("C is defined on [0, gamma] only")
    lam = np.asarray(lam, dtype=complex)
    length = geom.gamma - x
    c = cos_sinc(lam, length)[0]
    if q.is_zero or length == 0.0:
        return c
    return c + sinc_integral(lambda u: q.left(x + u), length, lam)


class PotentialCharFunction:
    """Characteristic function backed by a potential (closed form + quadrature)."""

    backing = "potential"

    def __init__(self, q: Potential, geom: Geometry, min_intervals: int = FILON_INTERVALS):
        self.q = q
        self.geometry = geom
        self.min_intervals = min_intervals

    def integrals(self, lam):
        """``(I_L, I_R)`` at ``lam``."""
        g, q = self.geometry, self.q
        lam = np.asarray(lam, dtype=complex)
        if q.is_zero:
            z = np.zeros(lam.shape, dtype=complex)
            return z, z.copy()
        il = sinc_integral(q.left, g.gamma, lam, lambda n: q.left_samples(g, n), self.min_intervals)
        ir = sinc_integral(lambda s: q.right(g.b - s), g.l, lam,
                           lambda n: q.reflected_right_samples(g, n), self.min_intervals)
        return il, ir

    def __call__(self, lam):
        g = self.geometry
        lam = np.asarray(lam, dtype=complex)
        c1, c2, s = eval_c1_c2_s(lam, g)
        cg = cos_sinc(lam, g.gamma)[0]
        sl = cos_sinc(lam, g.l)[1]
        out = -c1 * s - c2 * cg
        if not self.q.is_zero:
            il, ir = self.integrals(lam)
            out = out - s * ir - c2 * il - g.d * self.q.q_at_gamma * s * sl
        return out

    def envelope(self, lam):
        """Size of the leading asymptotic term, a natural scale for |Delta|."""
        g = self.geometry
        rho = np.sqrt(np.asarray(lam, dtype=complex))
        return (1.0 + g.d ** 2 * np.abs(rho)) * np.exp((g.gamma + g.l) * np.abs(rho.imag))


def eval_Delta(lam, q: Potential, geom: Geometry, min_intervals: int = FILON_INTERVALS):
    return PotentialCharFunction(q, geom, min_intervals)(lam)


def eval_Delta_case_lg(lam, q: Potential, geom: Geometry, min_intervals: int = FILON_INTERVALS):
    """Characteristic function written for the equal-lengths case l = gamma."""
    if not geom.is_equal_lengths:
        raise ValidationError("the rewritten form requires l = gamma")
    l, d = geom.l, geom.d
    lam = np.asarray(lam, dtype=complex)
    c2l, s2l = cos_sinc(lam, 2 * l)
    cl, sl = cos_sinc(lam, l)
    out = d ** 2 * lam / 2 * s2l - d * c2l - s2l
    if q.is_zero:
        return out
    il, ir = PotentialCharFunction(q, geom, min_intervals).integrals(lam)
    out = out - d * q.q_at_gamma * sl ** 2
    out = out + ((d ** 2 * lam - 1.0) * sl - d * cl) * il
    return out - sl * ir


# --------------------------------------------------------------------------
# eigenvalue search


def _cell_boundaries_equal(geom: Geometry, k_from: int, k_to: int):
    l, d = geom.l, geom.d
    k = np.arange(k_from, k_to + 1) + 0.5
    return np.pi * k / (2 * l) + 2.0 / (d * np.pi * k)


def _seeds_equal(geom: Geometry, n):
    n = np.asarray(n, dtype=float)
    return np.pi * n / (2 * geom.l) + 2.0 / (geom.d * np.pi * n)


def _real_zeros_rho(f_rho, lo, hi, step):
    """Real zeros of a real-on-the-axis function of rho on [lo, hi] by sign changes."""
    xs = np.arange(lo, hi + step, step)
    xs = xs[xs <= hi]
    vals = f_rho(xs).real
    roots = []
    for i in np.flatnonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0):
        roots.append(brentq(lambda x: float(f_rho(np.array([x])).real[0]), xs[i], xs[i + 1],
                            xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200))
    for i in np.flatnonzero(vals == 0):
        roots.append(xs[i])
    return np.sort(np.array(roots, dtype=float)), xs, vals


class _Counter:
    def __init__(self, f):
        self.f = f
        self.calls = 0

    def __call__(self, z):
        z = np.asarray(z)
        self.calls += z.size
        return self.f(z)


def _low_region(F, radius, width):
    """Zeros with |rho| < radius, i.e. inside the disk |lam| < radius**2.

    ``width`` is the exponential type (gamma + l); contours are sampled
    at about four points per radian of the phase of Delta.
    """
    R2 = radius ** 2
    n_circ = max(128, int(4 * width * np.pi * radius))
    total = contour.winding_numbers(F, [contour.circle(0.0, R2, n_circ)])[0]
    f_pos = lambda r: F(np.asarray(r, dtype=complex) ** 2)
    f_neg = lambda t: F(-np.asarray(t, dtype=complex) ** 2)
    step = min(0.05, radius / 400)
    pos, _, _ = _real_zeros_rho(f_pos, 0.0, radius, step)
    neg, _, _ = _real_zeros_rho(f_neg, 0.0, radius, step)
    found = [r * r for r in pos if r > 0] + [-t * t for t in neg if t > 0]
    # lam = 0 is caught by both scans when it is a simple zero
    if np.any(pos == 0) or np.any(neg == 0) or abs(F(np.array([0.0]))[0]) == 0.0:
        found.append(0.0)
    if len(found) == total:
        return sorted(found), total
    # complex zeros or multiple real zeros: subdivide the bounding box
    zs = contour.zeros_in_box(F, (-R2, R2, -R2, R2), None, min_size=1e-12,
                              n_side=max(8, int(4 * width * 3 * radius)))
    zs = [z for z in zs if abs(z) < R2]
    if len(zs) != total:
        raise IncompleteSpectrumError("low-region search disagrees with its winding count",
                                      {"radius": radius, "count": total, "found": len(zs)})
    return zs, total


def _polish_real(zs):
    out = []
    for z in zs:
        out.append(complex(z.real, 0.0) if abs(z.imag) <= 1e-12 * (1.0 + abs(z)) else complex(z))
    return out


def _process_cells(F, bounds, seeds, H, threads):
    """Certify and solve each rho-cell [bounds[i], bounds[i+1]] x [-H, H]."""
    f_rho = lambda r: F(np.asarray(r, dtype=complex) ** 2)
    ncell = bounds.size - 1
    rects = [contour.rectangle(bounds[i], bounds[i + 1], -H, H, 8) for i in range(ncell)]

    def count_chunk(idx):
        return contour.winding_numbers(f_rho, [rects[i] for i in idx])

    chunks = np.array_split(np.arange(ncell), max(1, min(threads, ncell)))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            counts = [c for part in ex.map(count_chunk, chunks) for c in part]
    else:
        counts = [c for ch in chunks for c in count_chunk(ch)]
    counts = np.asarray(counts)

    found = [[] for _ in range(ncell)]
    if seeds is not None:
        lam, ok = contour.newton(F, seeds ** 2)
        rho = np.sqrt(lam)
        rho = np.where(rho.real < 0, -rho, rho)
        cell = np.searchsorted(bounds, rho.real) - 1
        for i in range(lam.size):
            c = cell[i]
            if ok[i] and 0 <= c < ncell and abs(rho[i].imag) < H:
                found[c].append(lam[i])
    else:
        for c in range(ncell):
            lo, hi = bounds[c], bounds[c + 1]
            roots, _, _ = _real_zeros_rho(f_rho, lo, hi, (hi - lo) / 16)
            found[c] = [r * r for r in roots]
    out = []
    for c in range(ncell):
        zs = found[c]
        if len(zs) != counts[c] or counts[c] > 1:
            zs = [z ** 2 for z in contour.zeros_in_box(f_rho, (bounds[c], bounds[c + 1], -H, H), int(counts[c]),
                                                       min_size=1e-12)]
        if len(zs) != counts[c]:
            raise IncompleteSpectrumError("cell search disagrees with its winding count",
                                          {"cell": (bounds[c], bounds[c + 1]), "count": int(counts[c])})
        out.extend(zs)
    return out, int(np.sum(counts))


def _low_radius(q: Potential, geom: Geometry):
    qmax = 0.0
    if not q.is_zero:
        qmax = max(float(np.max(np.abs(q.left_samples(geom, 256)))),
                   float(np.max(np.abs(q.reflected_right_samples(geom, 256)))))
    return max(6.0, 3.0 * np.pi / (geom.gamma + geom.l), 2.0 * math.sqrt(qmax * (1.0 + 1.0 / geom.d)))


def compute_spectrum(q: Potential, geom: Geometry, N: int, strip_halfwidth: float = STRIP_HALFWIDTH,
                     threads: int = 1, min_intervals: int = FILON_INTERVALS) -> Spectrum:
    """First ``N`` zeros of Delta, certified by winding numbers.

    A disk around the origin (in lam) is searched completely; beyond it the
    search runs over rectangular cells of the strip |Im rho| <= strip_halfwidth.
    Zeros outside that strip are not searched for.
    """
    F = PotentialCharFunction(q, geom, min_intervals)
    return find_zeros(F, geom, N, strip_halfwidth, threads, r_min=_low_radius(q, geom),
                      seeded=geom.is_equal_lengths)


def find_zeros(F, geom: Geometry, N: int, strip_halfwidth: float = STRIP_HALFWIDTH, threads: int = 1,
               width: Optional[float] = None, r_min: float = 6.0, seeded: bool = False) -> Spectrum:
    """First ``N`` zeros of an arbitrary entire function ``F`` of lam.

    ``width`` is the exponential type in rho (default gamma + l) and sets
    the contour sampling density.  ``seeded`` uses the equal-lengths
    asymptotic zeros as Newton seeds and cell boundaries; otherwise cells
    come from a scan of real zeros.
    """
    if N < 1:
        raise ValidationError("N must be >= 1")
    threads = max(1, int(threads))
    F = _Counter(F)
    width = geom.gamma + geom.l if width is None else float(width)
    H = strip_halfwidth
    if seeded:
        # cells are delimited by midpoints between consecutive asymptotic zeros
        k_a = max(1, int(math.ceil(r_min * 2 * geom.l / np.pi)))
        radius = float(_cell_boundaries_equal(geom, k_a, k_a)[0])
        low, _ = _low_region(F, radius, width)
        zeros = list(low)
        k = k_a
        while len(zeros) < N:
            need = N - len(zeros) + 2
            bounds = _cell_boundaries_equal(geom, k, k + need)
            seeds = _seeds_equal(geom, np.arange(k + 1, k + need + 1))
            zs, _ = _process_cells(F, bounds, seeds, H, threads)
            zeros.extend(zs)
            k += need
    else:
        zeros, radius = _general_search(F, r_min, N, H, threads, width)
    zeros = np.array(_polish_real(zeros), dtype=complex)
    zeros = zeros[sort_key(zeros)][:N]
    if zeros.size < N:
        raise IncompleteSpectrumError("fewer zeros than requested", {"found": zeros.size})
    return Spectrum.from_values(zeros, provenance="computed",
                                diagnostics={"evaluations": F.calls, "low_radius": radius,
                                             "strip_halfwidth": H})


def _general_search(F, r_target, N, H, threads, width):
    """Real-axis scan for cell boundaries, then certified cells (any geometry)."""
    f_rho = lambda r: F(np.asarray(r, dtype=complex) ** 2)
    step = min(0.02, 0.1 / width)
    hi = max(2 * r_target, 10.0)
    lo = 1e-3
    roots = np.empty(0)
    while True:
        new, _, _ = _real_zeros_rho(f_rho, lo, hi, step)
        roots = np.concatenate([roots, new])
        if np.sum(roots > r_target) >= N + 2:
            break
        if hi > 1e5:
            raise IncompleteSpectrumError("real scan found too few zeros", {"up_to": hi, "found": roots.size})
        lo, hi = hi, 2 * hi
    cand = roots[roots > r_target]
    # low radius: middle of the widest of the first few gaps above the target
    gaps = np.diff(cand[:6])
    j = int(np.argmax(gaps))
    radius = 0.5 * (cand[j] + cand[j + 1])
    low, _ = _low_region(F, radius, width)
    rest = roots[roots > radius]
    bounds = np.concatenate([[radius], 0.5 * (rest[:-1] + rest[1:])])
    zeros = list(low)
    pos = 0
    while len(zeros) < N and pos < bounds.size - 1:
        take = min(bounds.size - 1 - pos, N - len(zeros) + 2)
        zs, _ = _process_cells(F, bounds[pos:pos + take + 1], None, H, threads)
        zeros.extend(zs)
        pos += take
    return zeros, radius
