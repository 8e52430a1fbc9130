"""Finite-difference eigenvalues for cross-checking the forward solver.

Unknowns are y at the nodes h, 2h, ..., gamma of the first segment and
a, a + h, ..., b - h of the second (Dirichlet values are eliminated).
Interior rows discretize -y'' + q(x) y(gamma) = lam y by central
differences; the frozen term is a column coupling every row to the gamma
node.  The rows at gamma and at a carry the two jump conditions, with
second-order one-sided derivatives.  The second jump condition is affine
in lam, so everything fits in a linear pencil A y = lam B y.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import eigs

from .errors import NumericError, ValidationError
from .forward import Spectrum
from .geometry import Geometry, Potential

__all__ = ["FDMesh", "build_mesh", "assemble_pencil", "fd_spectrum"]

# shift used for shift-invert; away from 0 so that a zero eigenvalue does not make A - shift*B singular
_SHIFT = -0.3183098861837907


@dataclass(frozen=True)
class FDMesh:
    h: float
    n_left: int    # intervals on [0, gamma]
    n_right: int   # intervals on [a, b]
    left_nodes: np.ndarray
    right_nodes: np.ndarray

    @property
    def gamma_index(self) -> int:
        return self.n_left - 1

    @property
    def a_index(self) -> int:
        return self.n_left

    @property
    def size(self) -> int:
        return self.n_left + self.n_right


def build_mesh(geom: Geometry, h: float) -> FDMesh:
    n_left = geom.gamma / h
    n_right = geom.l / h
    for n, name in ((n_left, "gamma"), (n_right, "l")):
        if abs(n - round(n)) > 1e-9 * max(1.0, n):
            raise ValidationError(f"h = {h} does not divide {name}")
    n_left, n_right = int(round(n_left)), int(round(n_right))
    if n_left < 3 or n_right < 3:
        raise ValidationError("mesh needs at least 3 intervals per segment")
    left = h * np.arange(1, n_left + 1)
    right = geom.a + h * np.arange(0, n_right)
    left[-1] = geom.gamma
    return FDMesh(h, n_left, n_right, left, right)


def assemble_pencil(q: Potential, geom: Geometry, mesh: FDMesh):
    """Sparse matrices ``(A, B)`` of the pencil."""
    h, M = mesh.h, mesh.size
    ig, ia = mesh.gamma_index, mesh.a_index
    d, qg = geom.d, q.q_at_gamma
    A = sp.lil_matrix((M, M))
    B = sp.lil_matrix((M, M))
    inv_h2 = 1.0 / h ** 2
    ql = q.left(mesh.left_nodes)
    qr = q.right(mesh.right_nodes)

    def interior(row, left_col, right_col, qv):
        if left_col is not None:
            A[row, left_col] += -inv_h2
        A[row, row] += 2 * inv_h2
        if right_col is not None:
            A[row, right_col] += -inv_h2
        A[row, ig] += qv
        B[row, row] = 1.0

    for i in range(ig):                     # nodes h .. gamma - h
        interior(i, i - 1 if i > 0 else None, i + 1, ql[i])
    for j in range(1, mesh.n_right):        # nodes a + h .. b - h
        row = ia + j
        interior(row, row - 1, row + 1 if j < mesh.n_right - 1 else None, qr[j])

    # backward derivative at gamma and forward derivative at a, both second order
    dg = {ig: 1.5 / h, ig - 1: -2.0 / h, ig - 2: 0.5 / h}
    da = {ia: -1.5 / h, ia + 1: 2.0 / h, ia + 2: -0.5 / h}
    # y(a) = y(gamma) + d y'(gamma)
    A[ig, ia] += 1.0
    A[ig, ig] += -1.0
    for c, w in dg.items():
        A[ig, c] += -d * w
    # y'(a) - d q(gamma) y(gamma) - y'(gamma) = -lam (d y(gamma) + d^2 y'(gamma))
    for c, w in da.items():
        A[ia, c] += w
    A[ia, ig] += -d * qg
    for c, w in dg.items():
        A[ia, c] += -w
    B[ia, ig] += -d
    for c, w in dg.items():
        B[ia, c] += -d * d * w
    return A.tocsc(), B.tocsc()


def fd_spectrum(q: Potential, geom: Geometry, h: float, N: int) -> Spectrum:
    """The ``N`` eigenvalues of the discrete pencil nearest the origin."""
    if N < 1:
        raise ValidationError("N must be >= 1")
    mesh = build_mesh(geom, h)
    if N > mesh.size - 2:
        raise ValidationError("N exceeds what the mesh can resolve")
    A, B = assemble_pencil(q, geom, mesh)
    k = min(mesh.size - 2, max(N + 4, 2 * N))
    try:
        vals = eigs(A, k=k, M=B, sigma=_SHIFT, which="LM", v0=np.ones(mesh.size),
                    return_eigenvectors=False, tol=1e-13)
    except (RuntimeError, ValueError) as exc:
        raise NumericError("finite-difference eigenproblem failed", {"error": str(exc)}) from exc
    vals = vals[np.isfinite(vals)]
    vals = vals[np.argsort(np.abs(vals), kind="stable")][:N]
    vals = np.where(np.abs(vals.imag) <= 1e-9 * (1.0 + np.abs(vals)), vals.real + 0j, vals)
    return Spectrum.from_values(vals, provenance="finite-difference",
                                diagnostics={"h": h, "size": mesh.size})
