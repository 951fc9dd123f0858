"""Orthogonal surfaces of twist-free congruences.

A real function ``r(nu)`` selects one point on each line; the resulting
surface is orthogonal to the lines exactly when

    dbar r = (2 F dbar(conj xi) + 2 conj(F) dbar xi) / (1 + |xi|^2)^2.

Since ``r`` is real, ``d r = conj(dbar r)``, so ``r_u = 2 Re g`` and
``r_v = 2 Im g`` with ``g = dbar r``.  The 1-form ``r_u du + r_v dv`` is
closed precisely when the congruence has no twist.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

import numpy as np

from .congruence import CHARTS, GlobalSection, direction, phi_point_chart
from .errors import NotIntegrable, PathInconsistent
from .spin import (ParamJet, coordinate_vectors, frame_denominator, invariant_derivatives,
                   param_jet, spin)

TWIST_TOL = 1e-10
PATH_TOL = 1e-8
GL_ORDER = 8


@dataclass(frozen=True)
class ScalarField:
    """Samples of ``r`` on an ``n x n`` grid of a chart rectangle.

    ``nu[i, j] = u[i] + i v[j]``; ``residual`` is the largest difference
    between the row-first and column-first path integrals.
    """

    chart: str
    nu: Any
    r: Any
    base: complex
    r0: float
    residual: float
    max_twist: float

    @property
    def n(self) -> int:
        return self.nu.shape[0]


@dataclass(frozen=True)
class Mesh:
    vertices: Any   # (n*n, 3)
    faces: Any      # (2 (n-1)^2, 3), zero-based

    @property
    def face_normals(self):
        a, b, c = (self.vertices[self.faces[:, k]] for k in range(3))
        return np.cross(b - a, c - a)


def surface_gradient(pj: ParamJet):
    """``dbar r`` for an orthogonal surface, from the jets of xi and F."""
    xi, F = pj.xi, pj.F
    ops = 1 + np.abs(xi.value) ** 2
    return (2 * F.value * np.conj(xi.d) + 2 * np.conj(F.value) * xi.dbar) / ops ** 2


def _gradient(sec, chart, nu):
    g = surface_gradient(param_jet(sec, chart, nu))
    return 2 * g.real, 2 * g.imag


def _axes(rect, n):
    u0, u1, v0, v1 = rect
    if not (u1 > u0 and v1 > v0):
        raise ValueError("rectangle must have u1 > u0 and v1 > v0")
    if n < 2:
        raise ValueError("n must be >= 2")
    return np.linspace(u0, u1, n), np.linspace(v0, v1, n)


def _segment_integrals(sec, chart, start, step, along_u: bool):
    """Gauss-Legendre integrals of r_u (or r_v) over segments ``start + t step``."""
    x, w = np.polynomial.legendre.leggauss(GL_ORDER)
    t = 0.5 * (x + 1)
    step = np.broadcast_to(step, np.shape(start))
    offset = step if along_u else 1j * step
    pts = start[..., None] + t * offset[..., None]
    ru, rv = _gradient(sec, chart, pts)
    dens = ru if along_u else rv
    return 0.5 * step * np.sum(dens * w, axis=-1)


def _integrate(sec, chart, u, v, r0, row_major: bool):
    n = len(u)
    du, dv = np.diff(u), np.diff(v)
    r = np.empty((n, n))
    if row_major:
        # first column (u = u0) along v, then every row along u
        col = _segment_integrals(sec, chart, u[0] + 1j * v[:-1], dv, False)
        r[0, :] = r0 + np.concatenate([[0.0], np.cumsum(col)])
        starts = u[:-1, None] + 1j * v[None, :]
        inc = _segment_integrals(sec, chart, starts, du[:, None], True)
        r[1:, :] = r[0, :] + np.cumsum(inc, axis=0)
    else:
        row = _segment_integrals(sec, chart, u[:-1] + 1j * v[0], du, True)
        r[:, 0] = r0 + np.concatenate([[0.0], np.cumsum(row)])
        starts = u[:, None] + 1j * v[None, :-1]
        inc = _segment_integrals(sec, chart, starts, dv[None, :], False)
        r[:, 1:] = r[:, :1] + np.cumsum(inc, axis=1)
    return r


def _twist_slice(sec, chart, nu, r0, margin=1e-3):
    """A value of r, near r0, at which no node of ``nu`` is focal."""
    pj = param_jet(sec, chart, nu)
    for shift in [0.0] + [2.0 ** k for k in range(12)]:
        r = r0 + shift
        P, M = invariant_derivatives(pj.at(r))
        D = frame_denominator(P, M)
        if np.all(np.abs(D) > margin * (np.abs(P) ** 2 + np.abs(M) ** 2)):
            return r
    return r0 + 2.0 ** 11


def max_twist(sec: GlobalSection, chart: str, nu, r0: float = 0.0) -> float:
    """``max |Im rho|`` over ``nu`` at a non-focal slice near ``r0``."""
    r = _twist_slice(sec, chart, nu, r0)
    sd = spin(param_jet(sec, chart, nu, r), check=False)
    return float(np.nanmax(np.abs(sd.rho.imag)))


def path_residual(sec: GlobalSection, rect=(-1.0, 1.0, -1.0, 1.0), n: int = 33,
                  chart: str = "N") -> float:
    """Largest difference between row-first and column-first integration of r.

    Zero up to quadrature error for twist-free congruences; no twist check
    is made, so this measures how far a twisting congruence is from closed.
    """
    u, v = _axes(rect, n)
    a = _integrate(sec, chart, u, v, 0.0, True)
    b = _integrate(sec, chart, u, v, 0.0, False)
    return float(np.max(np.abs(a - b)))


def reconstruct(sec: GlobalSection, rect=(-1.0, 1.0, -1.0, 1.0), n: int = 33, r0: float = 0.0,
                chart: str = "N", twist_tol: float = TWIST_TOL,
                path_tol: float = PATH_TOL) -> ScalarField:
    """Orthogonal surface through the point at distance ``r0`` on the base line.

    The base line is the corner ``u0 + i v0`` of ``rect = (u0, u1, v0, v1)``.

    Raises
    ------
    NotIntegrable
        If ``max |Im rho| > twist_tol`` on the grid.
    PathInconsistent
        If row-first and column-first integration differ by more than
        ``path_tol``.
    """
    if chart not in CHARTS:
        raise ValueError(f"unknown chart {chart!r}")
    u, v = _axes(rect, n)
    nu = u[:, None] + 1j * v[None, :]
    twist = max_twist(sec, chart, nu, r0)
    if twist > twist_tol:
        raise NotIntegrable(twist, twist_tol)
    r = _integrate(sec, chart, u, v, r0, True)
    check = _integrate(sec, chart, u, v, r0, False)
    residual = float(np.max(np.abs(r - check)))
    if residual > path_tol:
        raise PathInconsistent(residual, path_tol)
    return ScalarField(chart, nu, r, complex(nu[0, 0]), float(r0), residual, twist)


def _surface_tangents(sec, field: ScalarField):
    pj = param_jet(sec, field.chart, field.nu, field.r)
    d_nu, d_nubar, d_r = coordinate_vectors(pj)
    ru, rv = _gradient(sec, field.chart, field.nu)
    x_u = (d_nu + d_nubar).real + ru[..., None] * d_r.real
    x_v = (1j * (d_nu - d_nubar)).real + rv[..., None] * d_r.real
    if field.chart == "S":
        x_u, x_v = x_u * [1, -1, -1], x_v * [1, -1, -1]
    return x_u, x_v


def surface_normals(sec: GlobalSection, field: ScalarField):
    """Exact unit normals ``x_u x x_v / |x_u x x_v|``, shape ``(n, n, 3)``."""
    x_u, x_v = _surface_tangents(sec, field)
    nrm = np.cross(x_u, x_v)
    return nrm / np.linalg.norm(nrm, axis=-1, keepdims=True)


def mesh(sec: GlobalSection, field: ScalarField) -> Mesh:
    """Triangulate the surface: ``n^2`` vertices and ``2 (n-1)^2`` faces.

    Faces are wound so their normals point along ``x_u x x_v``, which for an
    orthogonal surface is the direction of the lines (the outward normal of
    a sphere centred on a point the lines leave).
    """
    n = field.n
    F = sec.value(field.chart, field.nu)
    verts = phi_point_chart(field.chart, field.nu, F, field.r).reshape(-1, 3)
    idx = np.arange(n * n).reshape(n, n)
    a, b = idx[:-1, :-1].ravel(), idx[1:, :-1].ravel()
    c, d = idx[1:, 1:].ravel(), idx[:-1, 1:].ravel()
    faces = np.concatenate([np.stack([a, b, c], 1), np.stack([a, c, d], 1)])
    m = Mesh(verts, faces)
    # the chart S map reverses orientation of (u, v) relative to the sphere
    x_u, x_v = _surface_tangents(sec, field)
    ref = np.cross(x_u, x_v).reshape(-1, 3)
    fn = m.face_normals
    if np.sum(fn * ref[faces[:, 0]]) < 0:
        m = Mesh(verts, faces[:, ::-1].copy())
    return m


def vertex_normals(m: Mesh, n: int):
    """Unit normals from central differences on the ``n x n`` vertex grid."""
    x = m.vertices.reshape(n, n, 3)
    x_u = np.gradient(x, axis=0)
    x_v = np.gradient(x, axis=1)
    nrm = np.cross(x_u, x_v)
    # follow the winding chosen for the faces
    if np.sum(m.face_normals[0] * nrm[0, 0]) < 0:
        nrm = -nrm
    return nrm / np.linalg.norm(nrm, axis=-1, keepdims=True)


def line_directions(field: ScalarField):
    """Unit line directions W at the grid nodes, in R^3 coordinates."""
    W = direction(field.nu)
    if field.chart == "S":
        W = W * [1, -1, -1]
    return W
