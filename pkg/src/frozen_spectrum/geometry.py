"""The two-segment closed set T = [0, gamma] U [a, b] and potentials on it.

A :class:`Geometry` is described by the length ``gamma`` of the first
segment, the gap ``d = a - gamma`` and the length ``l = b - a`` of the
second segment.  Besides the floats it may carry exact rational values of
``l/gamma``, ``pi*l/gamma`` and ``pi*d/gamma``; the uniqueness checker in
:mod:`frozen_spectrum.inverse` relies on them because rationality cannot be
decided from floating point numbers.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import DomainError, ValidationError

__all__ = [
    "Geometry",
    "Potential",
    "sigma",
    "sigma_minus",
    "delta_derivative",
]

_RAT_RTOL = 1e-12


def _as_fraction(value) -> Optional[Fraction]:
    if value is None:
        return None
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (tuple, list)):
        p, q = value
        return Fraction(int(p), int(q))
    return Fraction(value)


@dataclass(frozen=True)
class Geometry:
    gamma: float
    d: float
    l: float
    l_over_gamma: Optional[Fraction] = None
    pi_l_over_gamma: Optional[Fraction] = None
    pi_d_over_gamma: Optional[Fraction] = None

    def __post_init__(self):
        for name in ("gamma", "d", "l"):
            v = float(getattr(self, name))
            if not (math.isfinite(v) and v > 0):
                raise ValidationError(f"{name} must be a positive finite number, got {v!r}")
            object.__setattr__(self, name, v)
        for name in ("l_over_gamma", "pi_l_over_gamma", "pi_d_over_gamma"):
            object.__setattr__(self, name, _as_fraction(getattr(self, name)))
        checks = (
            ("l_over_gamma", self.l / self.gamma),
            ("pi_l_over_gamma", math.pi * self.l / self.gamma),
            ("pi_d_over_gamma", math.pi * self.d / self.gamma),
        )
        for name, actual in checks:
            exact = getattr(self, name)
            if exact is not None and abs(float(exact) - actual) > _RAT_RTOL * max(abs(actual), 1.0):
                raise ValidationError(
                    f"declared {name} = {exact} disagrees with the floats ({actual!r})"
                )

    @property
    def a(self) -> float:
        return self.gamma + self.d

    @property
    def b(self) -> float:
        return self.gamma + self.d + self.l

    @property
    def is_equal_lengths(self) -> bool:
        """True when l = gamma to 1e-12 relative (the case treated in full)."""
        return abs(self.l - self.gamma) <= 1e-12 * self.gamma

    def contains(self, t: float) -> bool:
        return (0.0 <= t <= self.gamma) or (self.a <= t <= self.b)

    def _check(self, t: float) -> float:
        t = float(t)
        if not self.contains(t):
            raise DomainError(f"t = {t!r} is not in T = [0, {self.gamma}] U [{self.a}, {self.b}]")
        return t

    def to_dict(self) -> dict:
        def frac(x):
            return None if x is None else [x.numerator, x.denominator]

        return {
            "gamma": self.gamma,
            "d": self.d,
            "l": self.l,
            "exact": {
                "l_over_gamma": frac(self.l_over_gamma),
                "pi_l_over_gamma": frac(self.pi_l_over_gamma),
                "pi_d_over_gamma": frac(self.pi_d_over_gamma),
            },
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Geometry":
        exact = data.get("exact") or {}
        return cls(
            gamma=data["gamma"],
            d=data["d"],
            l=data["l"],
            l_over_gamma=exact.get("l_over_gamma"),
            pi_l_over_gamma=exact.get("pi_l_over_gamma"),
            pi_d_over_gamma=exact.get("pi_d_over_gamma"),
        )


def sigma(t: float, geom: Geometry) -> float:
    """Forward jump operator of T."""
    t = geom._check(t)
    if t == geom.gamma:
        return geom.a
    return t


def sigma_minus(t: float, geom: Geometry) -> float:
    """Backward jump operator of T."""
    t = geom._check(t)
    if t == geom.a:
        return geom.gamma
    return t


def _numeric_derivative(f, t, lo, hi):
    # Fourth-order stencils; one-sided when a centred stencil would leave [lo, hi].
    h = 1e-3 * max(hi - lo, 1e-300) if hi - lo < 1.0 else 1e-3
    if t - 2 * h >= lo and t + 2 * h <= hi:
        return (f(t - 2 * h) - 8 * f(t - h) + 8 * f(t + h) - f(t + 2 * h)) / (12 * h)
    s = 1.0 if t + 4 * h <= hi else -1.0
    h = s * h
    return (-25 * f(t) + 48 * f(t + h) - 36 * f(t + 2 * h) + 16 * f(t + 3 * h) - 3 * f(t + 4 * h)) / (12 * h)


def delta_derivative(f: Callable[[float], float], t: float, geom: Geometry,
                     df: Optional[Callable[[float], float]] = None) -> float:
    """Delta-derivative of ``f`` at ``t``.

    At the right-scattered point gamma this is the divided difference
    ``(f(a) - f(gamma)) / d``; everywhere else it is the classical
    derivative, taken one-sided at segment ends.  ``df`` supplies the
    classical derivative when known; otherwise a fourth-order finite
    difference is used.
    """
    t = geom._check(t)
    if t == geom.gamma:
        return (f(geom.a) - f(geom.gamma)) / geom.d
    if df is not None:
        return df(t)
    lo, hi = (0.0, geom.gamma) if t <= geom.gamma else (geom.a, geom.b)
    return _numeric_derivative(f, t, lo, hi)


def _uniform(samples, lo, hi):
    y = np.asarray(samples, dtype=float)
    if y.ndim != 1 or y.size < 2:
        raise ValidationError("a grid-backed segment needs at least 2 samples")
    if not np.all(np.isfinite(y)):
        raise ValidationError("potential samples must be finite")
    return np.linspace(lo, hi, y.size), y


@dataclass(frozen=True, eq=False)
class Potential:
    """A potential q on T given on each segment by a callable or a uniform grid.

    ``left`` is evaluated on [0, gamma] and ``right`` on [a, b]; both accept
    numpy arrays.  ``q_at_gamma`` is stored explicitly.  ``dleft`` and
    ``dright`` are optional classical derivatives, used only by the
    characterization oracles.
    """

    left: Callable
    right: Callable
    q_at_gamma: float
    dleft: Optional[Callable] = None
    dright: Optional[Callable] = None
    is_zero: bool = False
    grids: Optional[tuple] = None
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @classmethod
    def zero(cls) -> "Potential":
        z = lambda t: np.zeros_like(np.asarray(t, dtype=float))
        return cls(z, z, 0.0, dleft=z, dright=z, is_zero=True)

    @classmethod
    def from_callables(cls, left, right, geom: Geometry, dleft=None, dright=None) -> "Potential":
        def vec(f):
            return lambda t: np.asarray(f(np.asarray(t, dtype=float)), dtype=float) + 0.0 * np.asarray(t, dtype=float)

        left_v, right_v = vec(left), vec(right)
        qg = float(left_v(geom.gamma))
        for f, (lo, hi) in ((left_v, (0.0, geom.gamma)), (right_v, (geom.a, geom.b))):
            if not np.all(np.isfinite(f(np.linspace(lo, hi, 33)))):
                raise ValidationError("potential is not finite on its segment")
        return cls(left_v, right_v, qg,
                   dleft=None if dleft is None else vec(dleft),
                   dright=None if dright is None else vec(dright))

    @classmethod
    def from_grids(cls, left_samples, right_samples, geom: Geometry,
                   q_at_gamma: Optional[float] = None) -> "Potential":
        xl, yl = _uniform(left_samples, 0.0, geom.gamma)
        xr, yr = _uniform(right_samples, geom.a, geom.b)
        if q_at_gamma is None:
            q_at_gamma = float(yl[-1])
        elif abs(q_at_gamma - yl[-1]) > 1e-12 * max(1.0, abs(yl[-1])):
            raise ValidationError("q_at_gamma must equal the last sample of the left grid")
        kind = "natural" if yl.size < 4 else "not-a-knot"
        sl = CubicSpline(xl, yl, bc_type=kind)
        kind = "natural" if yr.size < 4 else "not-a-knot"
        sr = CubicSpline(xr, yr, bc_type=kind)
        return cls(sl, sr, float(q_at_gamma), dleft=sl.derivative(), dright=sr.derivative(),
                   grids=((0.0, geom.gamma, yl), (geom.a, geom.b, yr)))

    def __call__(self, t, geom: Geometry):
        """Evaluate q at points of T (array friendly)."""
        t = np.asarray(t, dtype=float)
        out = np.empty_like(t)
        on_left = t <= geom.gamma + 1e-14
        out[on_left] = self.left(t[on_left])
        out[~on_left] = self.right(t[~on_left])
        return out

    def left_samples(self, geom: Geometry, n_intervals: int) -> np.ndarray:
        """Samples of q on the uniform grid of [0, gamma] with n_intervals steps."""
        key = ("L", n_intervals, geom.gamma)
        if key not in self._cache:
            self._cache[key] = np.asarray(self.left(np.linspace(0.0, geom.gamma, n_intervals + 1)), dtype=float)
        return self._cache[key]

    def reflected_right_samples(self, geom: Geometry, n_intervals: int) -> np.ndarray:
        """Samples of s -> q(b - s) on the uniform grid of [0, l]."""
        key = ("R", n_intervals, geom.a, geom.b)
        if key not in self._cache:
            s = np.linspace(0.0, geom.l, n_intervals + 1)
            self._cache[key] = np.asarray(self.right(geom.b - s), dtype=float)
        return self._cache[key]

    def to_dict(self, geom: Geometry, n_samples: int = 1025) -> dict:
        if self.grids is not None:
            (l0, l1, yl), (r0, r1, yr) = self.grids
        else:
            yl = self.left(np.linspace(0.0, geom.gamma, n_samples))
            yr = self.right(np.linspace(geom.a, geom.b, n_samples))
            l0, l1, r0, r1 = 0.0, geom.gamma, geom.a, geom.b
        return {
            "segments": [
                {"from": l0, "to": l1, "samples": [float(v) for v in yl]},
                {"from": r0, "to": r1, "samples": [float(v) for v in yr]},
            ],
            "q_at_gamma": float(self.q_at_gamma),
        }

    @classmethod
    def from_dict(cls, data: dict, geom: Geometry) -> "Potential":
        segs = data["segments"]
        if len(segs) != 2:
            raise ValidationError("a potential file must have exactly two segments")
        left, right = segs
        for seg, (lo, hi) in ((left, (0.0, geom.gamma)), (right, (geom.a, geom.b))):
            if abs(seg["from"] - lo) > 1e-12 * max(1.0, hi) or abs(seg["to"] - hi) > 1e-12 * max(1.0, hi):
                raise ValidationError(f"segment [{seg['from']}, {seg['to']}] does not match [{lo}, {hi}]")
        return cls.from_grids(left["samples"], right["samples"], geom, data.get("q_at_gamma"))
