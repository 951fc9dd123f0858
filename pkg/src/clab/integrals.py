"""Area measure of a congruence and the total-curvature integral."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any

import numpy as np

from ._parallel import map_rows
from .congruence import GlobalSection, check_global
from .errors import DegenerateCurvature, DegenerateFrame
from .spin import ParamJet, param_jet, spin

EPS_K = 1e-10


@dataclass(frozen=True)
class AreaDensity:
    """Densities against ``du dv`` where ``nu = u + i v``."""

    kdmu: Any
    dmu: Any


def area_density(pj: ParamJet, eps: float = EPS_K, check: bool = True) -> AreaDensity:
    """Density of ``dmu = i theta+ ^ theta-`` and of ``K dmu``.

    ``theta+ = sqrt2 / (K (1 + |xi|^2)) (rho dxi - conj(sigma) dconj(xi))``.
    Writing ``rho dxi - conj(sigma) dconj(xi) = A dnu + B dnubar`` gives
    ``dmu = 4 (|A|^2 - |B|^2) / (K^2 (1 + |xi|^2)^2) du dv``.
    """
    sd = spin(pj, check=check)
    rho, sigma, K = sd.rho, sd.sigma, sd.K
    xi = pj.xi
    if check:
        small = np.abs(K) <= eps * (np.abs(rho) ** 2 + np.abs(sigma) ** 2)
        if np.any(small):
            idx = np.argwhere(np.atleast_1d(small))[0]
            raise DegenerateCurvature(f"|K| vanishes at node {tuple(int(i) for i in idx)}",
                                      node=tuple(int(i) for i in idx))
    sb = np.conj(sigma)
    A = rho * xi.d - sb * np.conj(xi.dbar)
    B = rho * xi.dbar - sb * np.conj(xi.d)
    ops = 1 + np.abs(xi.value) ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        dmu = 4 * (np.abs(A) ** 2 - np.abs(B) ** 2) / (K ** 2 * ops ** 2)
    return AreaDensity(K * dmu, dmu)


def sphere_nodes(n_theta: int, n_phi: int):
    """Gauss-Legendre nodes and weights in ``theta in [0, pi]``, ``phi in [0, 2 pi]``."""
    xt, wt = np.polynomial.legendre.leggauss(n_theta)
    xp, wp = np.polynomial.legendre.leggauss(n_phi)
    theta = 0.5 * np.pi * (xt + 1)
    phi = np.pi * (xp + 1)
    return theta, 0.5 * np.pi * wt, phi, np.pi * wp


def chart_coords(theta, phi):
    """Chart and coordinate for spherical angles; chart N on the upper hemisphere.

    Returns ``(north_mask, coord, jac)`` where ``jac`` converts ``du dv`` in
    the chosen chart to ``dtheta dphi``.
    """
    north = theta <= 0.5 * np.pi
    half = 0.5 * theta
    rad = np.where(north, np.tan(half), 1 / np.tan(half))
    coord = rad * np.exp(np.where(north, 1j, -1j) * phi)
    # |d rad / d theta| * rad
    jac = np.where(north, 0.5 / np.cos(half) ** 2, 0.5 / np.sin(half) ** 2) * rad
    return north, coord, jac


def kdmu_grid(sec: GlobalSection, theta, phi, r=0.0, eps: float = EPS_K):
    """``K dmu`` density in ``dtheta dphi`` at the nodes ``theta x phi``."""
    T, Ph = np.meshgrid(theta, phi, indexing="ij")
    north, coord, jac = chart_coords(T, Ph)
    out = np.empty(T.shape)
    for chart, mask in (("N", north), ("S", ~north)):
        if not np.any(mask):
            continue
        try:
            dens = area_density(param_jet(sec, chart, coord[mask], r), eps=eps)
        except DegenerateFrame as exc:
            raise DegenerateCurvature(f"focal node in chart {chart}: {exc}") from None
        except DegenerateCurvature as exc:
            idx = np.argwhere(mask)[exc.node[0]]
            raise DegenerateCurvature(
                f"|K| vanishes at theta={T[tuple(idx)]:.6g}, phi={Ph[tuple(idx)]:.6g}",
                node=(float(T[tuple(idx)]), float(Ph[tuple(idx)]))) from None
        out[mask] = dens.kdmu * jac[mask]
    return out


def gauss_bonnet(sec: GlobalSection, n_theta: int = 128, n_phi: int = 256, r: float = 0.0,
                 threads: int = 1, check_transition: bool = True) -> float:
    """Integral of ``K dmu`` over the sphere of directions.

    Integrates the density assembled from rho, sigma and K (not the closed
    form) with product Gauss-Legendre quadrature in spherical angles.
    Summation is compensated and in a fixed order, so the result does not
    depend on ``threads``.
    """
    if n_theta < 8 or n_phi < 8:
        raise ValueError("grid sizes must be >= 8")
    if check_transition:
        check_global(sec)
    theta, wt, phi, wp = sphere_nodes(n_theta, n_phi)
    dens = map_rows(lambda t: kdmu_grid(sec, t, phi, r), theta, threads=threads)
    return math.fsum((dens * wt[:, None] * wp[None, :]).ravel())


def convergence_ladder(sec: GlobalSection, sizes=((16, 32), (32, 64), (64, 128), (128, 256)),
                       r: float = 0.0, threads: int = 1):
    """``[(n_theta, n_phi, value, |value - 4 pi|), ...]``."""
    check_global(sec)
    rows = []
    for nt, nph in sizes:
        val = gauss_bonnet(sec, nt, nph, r=r, threads=threads, check_transition=False)
        rows.append((nt, nph, val, abs(val - 4 * math.pi)))
    return rows
