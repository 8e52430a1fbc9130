"""Zeros of c2(z^2) and expansions in the Riesz basis {sin z_n t} on (0, l).

The biorthogonal system is never formed explicitly: given the moments
``xi_n = <f, sin z_n t>`` the function ``f = sum_m c_m sin z_m t`` is found
from the Gram system ``G c = xi``.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.linalg import cho_factor, cho_solve, eigvalsh
from scipy.optimize import brentq

from .errors import NumericError, ValidationError
from .geometry import Geometry

__all__ = ["BasisZeros", "GramSystem", "compute_z", "spare_zero", "gram_matrix", "expand_biorthogonal",
           "c2_of_z", "sine_moments", "sine_gram"]

log = logging.getLogger(__name__)

MAX_CONDITION = 1e8
POLE_GAP = 1e-9


def c2_of_z(z, geom: Geometry):
    """c2(z^2) = d cos(z l) + (1 - d^2 z^2) sin(z l)/z for real z > 0."""
    z = np.asarray(z, dtype=float)
    return geom.d * np.cos(z * geom.l) + (1.0 - geom.d ** 2 * z ** 2) * np.sin(z * geom.l) / z


def _dc2_of_z(z, geom: Geometry):
    d, l = geom.d, geom.l
    sl, cl = math.sin(z * l), math.cos(z * l)
    return (-d * l * sl - 2 * d * d * z * sl / z + (1 - d * d * z * z) * (l * cl / z - sl / z ** 2))


def _g(z, geom: Geometry):
    d = geom.d
    return d * z / (d * d * z * z - 1.0) - math.tan(z * geom.l)


@dataclass(frozen=True)
class BasisZeros:
    z: np.ndarray
    geometry: Geometry
    residuals: np.ndarray = field(repr=False)
    diagnostics: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def N(self) -> int:
        return int(self.z.size)

    def to_dict(self) -> dict:
        return {"z": [float(v) for v in self.z], "residuals": [float(v) for v in self.residuals]}


def _polish(z: float, geom: Geometry) -> float:
    # Newton on c2 itself
    for _ in range(4):
        dz = float(c2_of_z(z, geom)) / _dc2_of_z(z, geom)
        if not math.isfinite(dz) or abs(dz) > 1e-6 * z:
            break
        z -= dz
        if abs(dz) <= 1e-16 * z:
            break
    return z


def _zero_in_interval(n: int, geom: Geometry):
    """All zeros of g in I_n, lowest first, plus the polished lowest one."""
    l, d = geom.l, geom.d
    lo, hi = math.pi * (n - 0.5) / l, math.pi * (n + 0.5) / l
    if n == 0:
        lo = 0.0    # g(z) ~ -(d + l) z near the origin, so no sign change is lost
    cuts = [lo, hi]
    if d > 0 and lo < 1.0 / d < hi:
        cuts.insert(1, 1.0 / d)
    found = []
    for x0, x1 in zip(cuts[:-1], cuts[1:]):
        eps = POLE_GAP * max(1.0, x1)
        a, b = x0 + eps, x1 - eps
        ga, gb = _g(a, geom), _g(b, geom)
        if ga == 0.0:
            found.append(a)
        elif ga * gb < 0:
            found.append(brentq(lambda z: _g(z, geom), a, b, xtol=1e-15, rtol=4 * np.finfo(float).eps,
                                maxiter=200))
    if not found:
        raise NumericError(f"no zero of g located in interval I_{n}", {"n": n, "interval": (lo, hi)})
    return _polish(found[0], geom), found


def spare_zero(geom: Geometry) -> float:
    """The positive zero of c2 left out of the sequence z_1, z_2, ...

    Counting with multiplicity there is exactly one: it lies in (1/d, pi/(2l))
    when 1/d < pi/(2l), and otherwise it is the second zero of the interval
    I_n holding 1/d.  Adding sin(z t) for it to a finite section of the basis
    removes the boundary layer at t = l that a plain section leaves.
    """
    l, d = geom.l, geom.d
    edge = math.pi / (2 * l)
    if 1.0 / d < edge:
        try:
            return _zero_in_interval(0, geom)[0]
        except NumericError:
            pass
    n = int(math.floor(l / (d * math.pi) + 0.5))
    if n >= 1:
        _, found = _zero_in_interval(n, geom)
        if len(found) > 1:
            return _polish(found[1], geom)
    raise NumericError("could not locate the spare zero of c2", {"d": d, "l": l})


def compute_z(geom: Geometry, N: int) -> BasisZeros:
    """The lowest zero of g in each I_n, n = 1..N."""
    if N < 1:
        raise ValidationError("N must be >= 1")
    zs = np.empty(N)
    multiple = []
    for n in range(1, N + 1):
        zs[n - 1], all_found = _zero_in_interval(n, geom)
        if len(all_found) > 1:
            multiple.append(n)
    if multiple:
        log.info("several zeros of g in intervals %s; lowest used", multiple)
    res = c2_of_z(zs, geom)
    # the target bound, relaxed to the rounding floor eps*z*|dc2/dz| ~ eps*(d z)^2 l for large z
    tol = np.maximum(1e-10 * (1.0 + geom.d + geom.l), 64 * np.finfo(float).eps * (1 + geom.d * zs) ** 2 * geom.l)
    if np.any(np.abs(res) >= tol):
        raise NumericError("c2 residual too large after polishing", {"max": float(np.max(np.abs(res)))})
    if np.any(np.diff(zs) <= 0):
        raise NumericError("basis zeros not strictly increasing")
    zs.setflags(write=False)
    return BasisZeros(zs, geom, res, {"multiple_zero_intervals": multiple})


def sine_gram(z: np.ndarray, l: float) -> np.ndarray:
    """Inner products of sin(z_m t) and sin(z_n t) on (0, l) in closed form."""
    zm, zn = z[:, None], z[None, :]
    diff = zm - zn
    summ = zm + zn
    with np.errstate(divide="ignore", invalid="ignore"):
        off = np.sin(diff * l) / (2 * diff)
    np.fill_diagonal(off, l / 2)
    return off - np.sin(summ * l) / (2 * summ)


@dataclass(frozen=True, eq=False)
class GramSystem:
    """Gram matrix of {sin z t} on (0, l) over ``nodes`` with its Cholesky factor.

    ``nodes`` is ``zeros.z``, optionally preceded by the spare zero.
    """

    zeros: BasisZeros
    nodes: np.ndarray = field(repr=False)
    G: np.ndarray = field(repr=False)
    factor: tuple = field(repr=False)
    condition: float
    frame_bounds: tuple

    @property
    def N(self) -> int:
        return self.zeros.N

    @property
    def size(self) -> int:
        return int(self.nodes.size)

    @property
    def augmented(self) -> bool:
        return self.size > self.N

    def solve(self, rhs):
        return cho_solve(self.factor, np.asarray(rhs))


def gram_matrix(zeros: BasisZeros, spare: Optional[float] = None) -> GramSystem:
    """Closed-form Gram matrix; ``spare`` prepends one more node."""
    z = np.asarray(zeros.z, dtype=float)
    if spare is not None:
        z = np.concatenate([[float(spare)], z])
    if z.size > 1 and np.min(np.diff(np.sort(z))) < 1e-8:
        raise NumericError("near-coincident basis zeros; the basis is degenerate")
    G = sine_gram(z, zeros.geometry.l)
    ev = eigvalsh(G)
    lo, hi = float(ev[0]), float(ev[-1])
    if lo <= 0:
        raise NumericError("Gram matrix is not positive definite", {"min_eigenvalue": lo})
    factor = cho_factor(G, lower=True)
    G.setflags(write=False)
    z.setflags(write=False)
    return GramSystem(zeros, z, G, factor, hi / lo, (lo, hi))


def sine_moments(f, z, length, n_intervals=4096):
    """``int_0^length f(t) sin(z_n t) dt`` by composite Simpson (reference helper)."""
    t = np.linspace(0.0, length, n_intervals + 1)
    w = np.full(t.size, 2.0)
    w[1::2] = 4.0
    w[0] = w[-1] = 1.0
    w *= length / n_intervals / 3
    return np.sin(np.outer(z, t)) @ (w * f(t))


def expand_biorthogonal(xi, gram: GramSystem, grid) -> np.ndarray:
    """Samples on ``grid`` of the function whose moments against sin z t are ``xi``.

    ``xi`` is ordered like ``gram.nodes``.
    """
    xi = np.asarray(xi)
    if xi.shape != (gram.size,):
        raise ValidationError(f"expected {gram.size} coefficients, got shape {xi.shape}")
    if gram.condition > MAX_CONDITION:
        raise NumericError("Gram matrix too ill-conditioned", {"condition": gram.condition})
    coef = gram.solve(xi)
    grid = np.asarray(grid, dtype=float)
    return np.sin(np.outer(grid, gram.nodes)) @ coef
