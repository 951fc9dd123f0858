"""First-order geometry of a congruence at a point: invariant derivatives,
Jacobian, spin coefficients, curvature and the adapted null frame.

All functions accept a :class:`ParamJet` whose fields may be numpy arrays, in
which case every output is an array of the same shape.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

import numpy as np

from .congruence import GlobalSection
from .errors import DegenerateFrame
from .jets import Jet1

SQRT2 = np.sqrt(2.0)
EPS_D = 1e-12
EPS_K = 1e-12


@dataclass(frozen=True)
class ParamJet:
    """Line coordinate ``xi`` and twistor function ``F`` as jets in ``nu``."""

    xi: Jet1
    F: Jet1
    r: Any = 0.0

    def at(self, r) -> "ParamJet":
        return ParamJet(self.xi, self.F, r)


def param_jet(sec: GlobalSection, chart: str, coord, r=0.0) -> ParamJet:
    """Jets of ``sec`` in ``chart`` parametrised by the chart coordinate itself."""
    return ParamJet(Jet1.variable(coord), sec.jet(chart, coord), r)


@dataclass(frozen=True)
class SpinData:
    dplusF: Any
    dminusF: Any
    delta: Any
    rho: Any
    sigma: Any
    K: Any


@dataclass(frozen=True)
class NullFrame:
    alpha: Any
    beta: Any
    omega: Any
    phase: Any


def _one_plus_s(pj):
    xi = pj.xi.value
    return 1 + (xi * np.conj(xi)).real


def invariant_derivatives(pj: ParamJet):
    """Translation-invariant derivatives ``(d+F, d-F)``."""
    xi, F, r = pj.xi, pj.F, pj.r
    k = 2 * F.value * np.conj(xi.value) / _one_plus_s(pj)
    return F.d + r * xi.d - k * xi.d, F.dbar + r * xi.dbar - k * xi.dbar


def frame_denominator(P, M):
    """``|d-F|^2 - |d+F|^2``, the common denominator of rho, sigma and the frame."""
    return (M * np.conj(M)).real - (P * np.conj(P)).real


def _check_denominator(D, P, M, eps):
    bad = np.abs(D) < eps * (1 + np.abs(P) ** 2 + np.abs(M) ** 2)
    if np.any(bad):
        raise DegenerateFrame(
            f"|d-F|^2 - |d+F|^2 vanishes at {int(np.count_nonzero(bad))} point(s)")


def spin(pj: ParamJet, eps: float = EPS_D, check: bool = True) -> SpinData:
    """Spin coefficients, curvature and Jacobian.

    ``rho = (d+F dbar(conj xi) - d-F d(conj xi)) / D`` and
    ``sigma = (conj(d+F) d(conj xi) - conj(d-F) dbar(conj xi)) / D`` with
    ``D = |d-F|^2 - |d+F|^2``; ``K = |rho|^2 - |sigma|^2``.

    Raises :class:`DegenerateFrame` where ``|D|`` falls below
    ``eps * (1 + |d+F|^2 + |d-F|^2)`` unless ``check`` is false, in which case
    those entries come out non-finite.
    """
    P, M = invariant_derivatives(pj)
    D = frame_denominator(P, M)
    if check:
        _check_denominator(D, P, M, eps)
    dxib = np.conj(pj.xi.dbar)      # d(conj xi)
    dbxib = np.conj(pj.xi.d)        # dbar(conj xi)
    with np.errstate(divide="ignore", invalid="ignore"):
        rho = (P * dbxib - M * dxib) / D
        sigma = (np.conj(P) * dxib - np.conj(M) * dbxib) / D
    K = (rho * np.conj(rho)).real - (sigma * np.conj(sigma)).real
    delta = 4 / _one_plus_s(pj) ** 2 * ((P * np.conj(P)).real - (M * np.conj(M)).real)
    return SpinData(P, M, delta, rho, sigma, K)


def graph_jacobian(pj: ParamJet):
    """``d xi dbar(conj xi) - d(conj xi) dbar xi = |d xi|^2 - |dbar xi|^2``."""
    return (np.abs(pj.xi.d) ** 2 - np.abs(pj.xi.dbar) ** 2)


def curvature_cross_formula(pj: ParamJet):
    """Curvature from the graph Jacobian: ``-(|d xi|^2 - |dbar xi|^2) / D``.

    Agrees with ``|rho|^2 - |sigma|^2``; the opposite overall sign appears in
    some derivations of the same quantity.
    """
    P, M = invariant_derivatives(pj)
    return -graph_jacobian(pj) / frame_denominator(P, M)


def curvature_graph_test(pj: ParamJet, eps: float = EPS_K) -> str:
    """``"vertical"`` where the tangent plane of the surface in T has a
    vertical component (``K = 0``), ``"graph"`` otherwise."""
    J = graph_jacobian(pj)
    scale = 1 + np.abs(pj.xi.d) ** 2 + np.abs(pj.xi.dbar) ** 2
    return "vertical" if abs(float(J)) < eps * float(scale) else "graph"


def classify_twist(sd: SpinData, tol: float = 1e-10) -> str:
    return "integrable" if abs(float(np.imag(sd.rho))) <= tol else "twisting"


def null_frame(pj: ParamJet, eps: float = EPS_D) -> NullFrame:
    """Coefficients of ``e+ = (alpha d_nu + beta d_nubar + Omega d_r) e^{i phi}``.

    The phase is ``arg(-conj(d-F))``, and zero where ``d-F`` vanishes.
    """
    P, M = invariant_derivatives(pj)
    D = frame_denominator(P, M)
    _check_denominator(D, P, M, eps)
    xi, F = pj.xi, pj.F
    ops = _one_plus_s(pj)
    Fv, Fb = F.value, np.conj(F.value)
    dxib, dbxib = np.conj(xi.dbar), np.conj(xi.d)
    alpha = np.conj(P) * ops / (SQRT2 * D)
    beta = -np.conj(M) * ops / (SQRT2 * D)
    # sign fixed by <e0, e+> = 0
    omega = SQRT2 * (np.conj(P) * (Fv * dxib + Fb * xi.d)
                     - np.conj(M) * (Fv * dbxib + Fb * xi.dbar)) / (ops * D)
    phase = np.where(M == 0, 0.0, np.angle(-np.conj(M)))
    if np.ndim(phase) == 0:
        phase = float(phase)
    return NullFrame(alpha, beta, omega, phase)


def z_inner_products(pj: ParamJet):
    """``(<Z+, Z+>, <Z+, Z->)`` in closed form.

    The denominator is ``(1 + |xi|^2)^2``; this is the normalisation for which
    the frame coefficients give ``<e+, e-> = 1``.
    """
    P, M = invariant_derivatives(pj)
    ops2 = _one_plus_s(pj) ** 2
    return 4 * P * np.conj(M) / ops2, 2 * (np.abs(M) ** 2 + np.abs(P) ** 2) / ops2


def frame_quadratic_residual(pj: ParamJet) -> float:
    """Relative residual of ``<Z+,Z+> a^2 + 2<Z+,Z-> a b + <Z-,Z-> b^2 = 0``."""
    fr = null_frame(pj)
    zpp, zpm = z_inner_products(pj)
    a, b = fr.alpha, fr.beta
    terms = (zpp * a * a, 2 * zpm * a * b, np.conj(zpp) * b * b)
    scale = sum(np.abs(t) for t in terms)
    return float(np.max(np.abs(sum(terms)) / np.where(scale > 0, scale, 1.0)))


# ---------------------------------------------------------------------------
# independent reconstruction in Euclidean coordinates

def _phi_jets(pj: ParamJet):
    xi, F, r = pj.xi, pj.F, pj.r
    xib, Fb = xi.conj(), F.conj()
    ops = 1 + xi * xib
    z = (2 * (F - Fb * xi * xi) + 2 * r * xi * ops) / (ops * ops)
    t = (-2 * (F * xib + Fb * xi) + r * (1 - xi * xi * xib * xib)) / (ops * ops)
    s = (xi.value * np.conj(xi.value)).real
    dz_dr = 2 * xi.value / (1 + s)
    dt_dr = (1 - s) / (1 + s)
    return z, t, dz_dr, dt_dr


def coordinate_vectors(pj: ParamJet):
    """Cartesian components of ``d_nu``, ``d_nubar`` and ``d_r``.

    Returns a complex array of shape ``(3, ..., 3)``: first index selects the
    coordinate vector, last index the x1, x2, x3 component.
    """
    z, t, dz_dr, dt_dr = _phi_jets(pj)

    def cart(zc, zbc, tc):
        # vector with (z, zbar, t) components -> (x1, x2, x3)
        return np.stack(np.broadcast_arrays((zc + zbc) / 2, (zc - zbc) / 2j, tc), axis=-1)

    d_nu = cart(z.d, np.conj(z.dbar), t.d)
    d_nubar = cart(z.dbar, np.conj(z.d), t.dbar)
    d_r = cart(dz_dr, np.conj(dz_dr), dt_dr + 0j)
    return np.stack([d_nu, d_nubar, d_r])


def bilinear(X, Y):
    """Complex-bilinear extension of the Euclidean inner product."""
    return np.sum(X * Y, axis=-1)


def frame_vectors(pj: ParamJet):
    """``(e0, e+, e-)`` as complex Cartesian vectors."""
    fr = null_frame(pj)
    d_nu, d_nubar, d_r = coordinate_vectors(pj)
    a, b, c = (np.asarray(v)[..., None] for v in (fr.alpha, fr.beta, fr.omega))
    ph = np.exp(1j * np.asarray(fr.phase))[..., None]
    e_plus = (a * d_nu + b * d_nubar + c * d_r) * ph
    return d_r, e_plus, np.conj(e_plus)


def frame_relations(pj: ParamJet):
    """Deviations of ``<e0,e0>-1, <e0,e+>, <e+,e+>, <e+,e->-1``."""
    e0, ep, em = frame_vectors(pj)
    return (np.abs(bilinear(e0, e0) - 1), np.abs(bilinear(e0, ep)),
            np.abs(bilinear(ep, ep)), np.abs(bilinear(ep, em) - 1))


def frame_orientation(pj: ParamJet):
    """``det(e0, e1, e2)`` with ``e1 = (e+ + e-)/sqrt2``, ``e2 = i(e+ - e-)/sqrt2``."""
    e0, ep, em = frame_vectors(pj)
    e1 = ((ep + em) / SQRT2).real
    e2 = (1j * (ep - em) / SQRT2).real
    return np.sum(e0.real * np.cross(e1, e2), axis=-1)


def z_inner_products_direct(pj: ParamJet):
    """Oracle for :func:`z_inner_products` from the coordinate vectors."""
    d_nu, d_nubar, d_r = coordinate_vectors(pj)
    zp = d_nu - bilinear(d_r, d_nu)[..., None] * d_r
    zm = d_nubar - bilinear(d_r, d_nubar)[..., None] * d_r
    return bilinear(zp, zp), bilinear(zp, zm)
