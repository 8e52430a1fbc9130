"""Argument-principle zero counting, box subdivision and batched Newton.

All routines take a vectorised function ``f`` mapping a complex ndarray to
a complex ndarray of the same shape.
"""
from __future__ import annotations

import numpy as np

from .errors import NumericError

__all__ = ["ContourHitError", "winding_numbers", "rectangle", "circle", "newton", "zeros_in_box"]

_MAX_STEP = np.pi / 4


class ContourHitError(NumericError):
    """f (nearly) vanishes on the contour, so the count is ill defined."""


def rectangle(x0, x1, y0, y1, n_side=8):
    """Closed counter-clockwise polygon samples of a rectangle (last point omitted)."""
    t = np.linspace(0.0, 1.0, n_side, endpoint=False)
    bottom = x0 + (x1 - x0) * t + 1j * y0
    right = x1 + 1j * (y0 + (y1 - y0) * t)
    top = x1 + (x0 - x1) * t + 1j * y1
    left = x0 + 1j * (y1 + (y0 - y1) * t)
    return np.concatenate([bottom, right, top, left])


def circle(center, radius, n=64):
    phi = np.linspace(0.0, 2 * np.pi, n, endpoint=False)
    return center + radius * np.exp(1j * phi)


def winding_numbers(f, contours, max_rounds=14, hit_rtol=1e-13):
    """Winding number of ``f`` along each closed polygonal contour.

    Each contour is refined by inserting midpoints wherever the phase of f
    jumps by more than pi/4 between neighbours.  Polygon corners are
    preserved, so the refined path is the same polygon.  Raises
    :class:`ContourHitError` if f is numerically zero on a contour or the
    phase cannot be resolved.
    """
    paths = [np.asarray(c, dtype=complex) for c in contours]
    sizes = [p.size for p in paths]
    vals = f(np.concatenate(paths)) if paths else np.empty(0, complex)
    offs = np.cumsum([0] + sizes)
    values = [vals[offs[i]:offs[i + 1]] for i in range(len(paths))]
    done = [False] * len(paths)
    for _ in range(max_rounds):
        new_pts, where = [], []
        for i, (p, v) in enumerate(zip(paths, values)):
            if done[i]:
                continue
            av = np.abs(v)
            # compare with the neighbours: |f| may vary over many orders along a contour
            scale = np.maximum(np.roll(av, 1), np.roll(av, -1))
            if not np.all(np.isfinite(v)) or np.any(av <= hit_rtol * scale):
                raise ContourHitError("f vanishes (numerically) on a contour", {"contour": i})
            dphi = np.angle(np.roll(v, -1) / v)
            bad = np.flatnonzero(np.abs(dphi) > _MAX_STEP)
            if bad.size == 0:
                done[i] = True
                continue
            mids = 0.5 * (p[bad] + np.roll(p, -1)[bad])
            new_pts.append(mids)
            where.append((i, bad))
        if not new_pts:
            break
        fv = f(np.concatenate(new_pts))
        k = 0
        for (i, bad), mids in zip(where, new_pts):
            fm = fv[k:k + mids.size]
            k += mids.size
            pos = bad + 1
            paths[i] = np.insert(paths[i], pos, mids)
            values[i] = np.insert(values[i], pos, fm)
    counts = []
    for i, v in enumerate(values):
        total = np.sum(np.angle(np.roll(v, -1) / v)) / (2 * np.pi)
        n = int(np.rint(total))
        if not done[i] or abs(total - n) > 0.05:
            # an unresolved phase almost always means a zero sits on the contour
            raise ContourHitError("winding number did not resolve", {"contour": i, "total": total})
        counts.append(n)
    return counts


def newton(f, z0, rel_step=1e-7, max_iter=50, tol=1e-14):
    """Batched Newton iteration with a central-difference derivative.

    The difference step is ``rel_step * (1 + |z|)``.  Returns the iterates
    and a boolean mask of converged entries.
    """
    z = np.array(z0, dtype=complex, copy=True).ravel()
    conv = np.zeros(z.shape, dtype=bool)
    active = np.arange(z.size)
    for _ in range(max_iter):
        if active.size == 0:
            break
        za = z[active]
        h = rel_step * (1.0 + np.abs(za))
        vals = f(np.concatenate([za, za + h, za - h]))
        n = za.size
        f0, fp, fm = vals[:n], vals[n:2 * n], vals[2 * n:]
        deriv = (fp - fm) / (2 * h)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = np.where(deriv != 0, f0 / deriv, 0.0)
        step = np.where(np.isfinite(step), step, 0.0)
        z[active] = za - step
        fin = (np.abs(step) <= tol * (1.0 + np.abs(za))) | (f0 == 0)
        conv[active[fin]] = True
        active = active[~fin]
    return z, conv


def zeros_in_box(f, box, count=None, min_size=1e-9, depth=0, max_depth=40, n_side=8):
    """All zeros of ``f`` inside ``box = (x0, x1, y0, y1)``, with multiplicity.

    Recursively quarters the box, using winding numbers to discard empty
    pieces.  A piece holding a single zero is finished with Newton from its
    centre; a piece smaller than ``min_size`` (relative) with ``k`` zeros
    returns its Newton limit ``k`` times (multiple root).  ``n_side`` is
    the initial number of samples per side of every box.
    """
    x0, x1, y0, y1 = box
    if count is None:
        count = _safe_count(f, box, n_side)
    if count == 0:
        return []
    if count < 0:
        raise NumericError("negative winding number inside a box; f has poles?", {"box": box})
    c = 0.5 * (x0 + x1) + 0.5j * (y0 + y1)
    size = max(x1 - x0, y1 - y0)
    if count == 1 or size <= min_size * (1.0 + abs(c)) or depth >= max_depth:
        z, ok = newton(f, [c])
        z = z[0]
        inside = (x0 - 1e-9 * size <= z.real <= x1 + 1e-9 * size) and (y0 - 1e-9 * size <= z.imag <= y1 + 1e-9 * size)
        if ok[0] and inside:
            return [z] * count
        if size <= min_size * (1.0 + abs(c)) or depth >= max_depth:
            raise NumericError("could not isolate zeros in box", {"box": box, "count": count})
    out = []
    xm, ym = 0.5 * (x0 + x1), 0.5 * (y0 + y1)
    # nudge the split lines off any zero lying exactly on them
    for attempt in range(5):
        boxes = [(x0, xm, y0, ym), (xm, x1, y0, ym), (x0, xm, ym, y1), (xm, x1, ym, y1)]
        try:
            counts = [_safe_count(f, b, n_side) for b in boxes]
            break
        except ContourHitError:
            xm += (x1 - x0) * 0.0137 * (attempt + 1)
            ym += (y1 - y0) * 0.0211 * (attempt + 1)
    else:
        raise NumericError("could not split box away from zeros", {"box": box})
    if sum(counts) != count:
        raise NumericError("winding counts of sub-boxes do not add up", {"box": box, "counts": counts,
                                                                           "count": count})
    for b, k in zip(boxes, counts):
        out.extend(zeros_in_box(f, b, k, min_size, depth + 1, max_depth, n_side))
    return out


def _safe_count(f, box, n_side=8):
    x0, x1, y0, y1 = box
    return winding_numbers(f, [rectangle(x0, x1, y0, y1, n_side)])[0]
