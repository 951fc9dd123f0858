"""Evolution of (rho, sigma) along a line.

Three independent routes are provided: the rational closed form, direct
re-evaluation of :func:`clab.spin.spin` at a shifted ``r``, and a fixed-step
RK4 integration of the ODE system

    d rho / dr   = rho^2 + |sigma|^2
    d sigma / dr = (rho + conj(rho)) sigma
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import FocalPoint
from .jets import Jet1
from .spin import ParamJet, frame_denominator, invariant_derivatives, spin

BLOWUP = 1e12


@dataclass(frozen=True)
class SachsInitialData:
    rho0: complex
    sigma0: complex

    @classmethod
    def from_param_jet(cls, pj: ParamJet) -> "SachsInitialData":
        sd = spin(pj.at(0.0))
        return cls(complex(sd.rho), complex(sd.sigma))


def realize_line(init: SachsInitialData) -> ParamJet:
    """A line (the one at ``xi = 0``) whose spin coefficients at r = 0 are ``init``.

    Uses ``F = d+F xi + d-F conj(xi)`` with ``D = -1/K0``,
    ``d+F = rho0 D`` and ``d-F = -conj(sigma0 D)``.  Requires ``K0 != 0``.
    """
    k0 = abs(init.rho0) ** 2 - abs(init.sigma0) ** 2
    if k0 == 0:
        raise ValueError("K0 = 0: no line with these coefficients is a graph over directions")
    D = -1.0 / k0
    P, M = init.rho0 * D, -np.conj(init.sigma0 * D)
    return ParamJet(Jet1.variable(0j), Jet1(0j, complex(P), complex(M)), 0.0)


def denominator(init: SachsInitialData, r):
    """``Q(r) = 1 - 2 Re(rho0) r + (|rho0|^2 - |sigma0|^2) r^2`` (always real)."""
    k0 = abs(init.rho0) ** 2 - abs(init.sigma0) ** 2
    return 1 - 2 * init.rho0.real * r + k0 * r * r


def focal_points(init: SachsInitialData):
    """Real roots of Q, sorted; these are the caustic values of ``r``."""
    k0 = abs(init.rho0) ** 2 - abs(init.sigma0) ** 2
    coeffs = [k0, -2 * init.rho0.real, 1.0]
    if k0 == 0:
        coeffs = coeffs[1:]
        if coeffs[0] == 0:
            return []
    roots = np.roots(coeffs)
    real = roots[np.abs(roots.imag) <= 1e-12 * (1 + np.abs(roots.real))].real
    return sorted(float(x) for x in real)


def evolve_closed_form(init: SachsInitialData, r: float):
    """``(rho(r), sigma(r))`` from the values at ``r = 0``."""
    Q = denominator(init, r)
    if abs(Q) < 1e-12 * (1 + abs(init.rho0) ** 2 * r * r):
        raise FocalPoint(r)
    k0 = abs(init.rho0) ** 2 - abs(init.sigma0) ** 2
    return (init.rho0 - k0 * r) / Q, init.sigma0 / Q


def evolve_direct(pj: ParamJet, r: float):
    sd = spin(pj.at(r))
    return complex(sd.rho), complex(sd.sigma)


def _rational_derivatives(pj: ParamJet, r):
    # d+F and d-F are affine in r with slopes d xi and dbar xi
    P, M = invariant_derivatives(pj.at(r))
    dP, dM = pj.xi.d, pj.xi.dbar
    dxib, dbxib = np.conj(pj.xi.dbar), np.conj(pj.xi.d)
    D = frame_denominator(P, M)
    dD = 2 * (np.conj(M) * dM).real - 2 * (np.conj(P) * dP).real
    n_rho = P * dbxib - M * dxib
    dn_rho = dP * dbxib - dM * dxib
    n_sig = np.conj(P) * dxib - np.conj(M) * dbxib
    dn_sig = np.conj(dP) * dxib - np.conj(dM) * dbxib
    rho, sigma = n_rho / D, n_sig / D
    drho = (dn_rho * D - n_rho * dD) / D ** 2
    dsig = (dn_sig * D - n_sig * dD) / D ** 2
    return rho, sigma, drho, dsig


def sachs_residual(pj: ParamJet, r=None, h: float = 0.0):
    """Residuals of both Sachs equations, with exact r-derivatives.

    ``r`` defaults to ``pj.r``.  With ``h > 0`` a :class:`FocalPoint` is
    raised if a root of Q lies in ``[r - h, r + h]``.
    """
    r = pj.r if r is None else r
    sd = spin(pj.at(r))  # raises DegenerateFrame at a focal point
    if h > 0:
        # focal points relative to r, from the (non-focal) data at r
        here = SachsInitialData(complex(sd.rho), complex(sd.sigma))
        for root in focal_points(here):
            if abs(root) <= h:
                raise FocalPoint(r + root)
    rho, sigma, drho, dsig = _rational_derivatives(pj, r)
    res_rho = np.abs(drho - (rho * rho + np.abs(sigma) ** 2))
    res_sig = np.abs(dsig - (rho + np.conj(rho)) * sigma)
    return float(np.max(res_rho)), float(np.max(res_sig))


def _rhs(state):
    rho, sigma = state
    return np.array([rho * rho + abs(sigma) ** 2, 2 * rho.real * sigma])


def integrate_rk4(init: SachsInitialData, r_end: float, steps: int):
    """Classical fourth-order Runge-Kutta from ``r = 0`` to ``r_end``."""
    if steps < 1:
        raise ValueError("steps must be >= 1")
    h = r_end / steps
    y = np.array([init.rho0, init.sigma0], dtype=complex)
    for n in range(steps):
        k1 = _rhs(y)
        k2 = _rhs(y + 0.5 * h * k1)
        k3 = _rhs(y + 0.5 * h * k2)
        k4 = _rhs(y + h * k3)
        y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(y)) or abs(y[0]) > BLOWUP:
            raise FocalPoint((n + 1) * h)
    return complex(y[0]), complex(y[1])


def rk4_steps(r_end: float, per_unit: int = 2000) -> int:
    return max(1, int(np.ceil(abs(r_end) * per_unit)))
