"""Shear-free (complex) lines, their indices, and lines through a point.

Zeros are hunted in both charts over the square ``|Re|, |Im| <= 2``: cells of
a coarse grid whose corner values wind around the origin (or change sign in
both components) seed a damped Newton iteration on the real 2x2 system.
Converged points from both charts are merged on the sphere and reported in
the chart where their coordinate has modulus <= 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple

import numpy as np

from .congruence import CHARTS, ChartPoint, GlobalSection, Translation, translate
from .errors import DegenerateShear, NonConvergent, ZeroOnContour
from .spin import frame_denominator, invariant_derivatives, param_jet, spin

HALF_WIDTH = 2.0
DEGENERATE_FRACTION = 0.05


@dataclass(frozen=True)
class ComplexPoint:
    point: ChartPoint
    index: int
    residual: float


@dataclass
class ComplexPointReport:
    zeros: List[ComplexPoint] = field(default_factory=list)
    total_index: Optional[int] = None
    degenerate: bool = False
    r: float = 0.0

    def __post_init__(self):
        if not self.degenerate and self.total_index is None:
            self.total_index = sum(z.index for z in self.zeros)


@dataclass
class ZeroSet:
    """Zeros of a chart function; ``degenerate`` flags a non-isolated zero set."""

    points: List[ChartPoint]
    degenerate: bool = False

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)


# ---------------------------------------------------------------------------
# chart functions

def shear(sec: GlobalSection, chart: str, coord, r: float):
    """sigma in ``chart``; non-finite at focal points."""
    return spin(param_jet(sec, chart, coord, r), check=False).sigma


def choose_r(sec: GlobalSection, grid: int = 32, margin: float = 0.1) -> float:
    """Smallest r in 0, 1, 2, 4, ... with no focal point on the sphere.

    Requires ``|d+F|^2 - |d-F|^2 > margin (|d+F|^2 + |d-F|^2)`` on a grid
    covering both charts; for large r this always holds.
    """
    z = _grid_nodes(grid).ravel()
    z = z[np.abs(z) <= 1.05]
    jets = [param_jet(sec, c, z, 0.0) for c in CHARTS]
    for r in [0.0] + [2.0 ** k for k in range(0, 12)]:
        ok = True
        for pj in jets:
            P, M = invariant_derivatives(pj.at(r))
            D = frame_denominator(P, M)
            if np.any(-D <= margin * (np.abs(P) ** 2 + np.abs(M) ** 2)):
                ok = False
                break
        if ok:
            return r
    raise DegenerateShear(1.0)


def complex_point_density(pj):
    """Coefficient of the (2,0)x(0,2) wedge, ``d xi dbar F - dbar xi d F``.

    Vanishes exactly where the shear does; its winding equals that of
    conj(sigma).
    """
    return pj.xi.d * pj.F.dbar - pj.xi.dbar * pj.F.d


# ---------------------------------------------------------------------------
# zero finding

def _grid_nodes(grid: int, half: float = HALF_WIDTH):
    # a small irrational offset keeps symmetric zeros off the nodes
    g = np.linspace(-half, half, grid + 1) + half * 0.0123456789 / grid
    return g[:, None] + 1j * g[None, :]


def _cell_candidates(Z, V, tol):
    """Centres of cells that may contain a zero."""
    c = [V[:-1, :-1], V[1:, :-1], V[1:, 1:], V[:-1, 1:]]
    with np.errstate(divide="ignore", invalid="ignore"):
        turn = sum(np.angle(c[(k + 1) % 4] / c[k]) for k in range(4))
    wind = np.rint(np.nan_to_num(turn / (2 * np.pi))).astype(int) != 0

    def changes(part):
        s = [np.sign(part(x)) for x in c]
        return (np.minimum.reduce(s) <= 0) & (np.maximum.reduce(s) >= 0)

    both = changes(np.real) & changes(np.imag)
    small = np.minimum.reduce([np.abs(x) for x in c]) < tol
    mask = wind | both | small
    centres = 0.25 * (Z[:-1, :-1] + Z[1:, :-1] + Z[1:, 1:] + Z[:-1, 1:])
    return centres[mask]


def _fd_jacobian(f, z, h):
    fu = (f(z + h) - f(z - h)) / (2 * h)
    fv = (f(z + 1j * h) - f(z - 1j * h)) / (2 * h)
    return fu, fv


def newton(f: Callable, z0, jac: Optional[Callable] = None, target: float = 1e-14,
           maxit: int = 60):
    """Damped Newton for ``f(z) = 0`` on many starting points at once.

    ``jac(z)`` returns ``(f_u, f_v)``, the derivatives along the real and
    imaginary directions; without it they are taken by central differences.
    Returns ``(z, |f(z)|)``.
    """
    z = np.array(z0, dtype=complex)
    fz = f(z)
    for _ in range(maxit):
        active = np.abs(fz) > target
        if not np.any(active):
            break
        za = z[active]
        if jac is None:
            fu, fv = _fd_jacobian(f, za, 1e-7 * (1 + np.abs(za)))
        else:
            fu, fv = jac(za)
        a, b, c, d = fu.real, fv.real, fu.imag, fv.imag
        det = a * d - b * c
        fa = fz[active]
        with np.errstate(divide="ignore", invalid="ignore"):
            du = -(d * fa.real - b * fa.imag) / det
            dv = -(-c * fa.real + a * fa.imag) / det
        step = np.where(np.isfinite(du) & np.isfinite(dv), du + 1j * dv, 0)
        # cap steps at one cell-ish so a bad Jacobian cannot throw us far away
        big = np.abs(step) > 0.25
        step[big] *= 0.25 / np.abs(step[big])
        lam = np.ones(len(za))
        cur = np.abs(fa)
        new_z, new_f = za.copy(), fa.copy()
        pending = np.ones(len(za), bool)
        for _ in range(12):
            trial = za[pending] + lam[pending] * step[pending]
            ft = f(trial)
            good = np.isfinite(ft) & (np.abs(ft) < cur[pending])
            idx = np.flatnonzero(pending)
            new_z[idx[good]] = trial[good]
            new_f[idx[good]] = ft[good]
            pending[idx[good]] = False
            lam[pending] *= 0.5
            if not np.any(pending):
                break
        stalled = pending
        if np.all(stalled):
            break
        z[active] = new_z
        fz[active] = new_f
    return z, np.abs(fz)


def find_zeros(fun: Callable, grid: int = 64, tol: float = 1e-10,
               jac: Optional[Callable] = None,
               degenerate_fraction: float = DEGENERATE_FRACTION,
               dedup: Optional[float] = None) -> ZeroSet:
    """Isolated zeros on S^2 of a function given per chart.

    ``fun(chart, coord)`` is vectorised; ``jac(chart, coord)`` optionally
    returns ``(f_u, f_v)``.  If more than ``degenerate_fraction`` of grid
    nodes have ``|f| < tol`` the zero set is not isolated and a degenerate
    :class:`ZeroSet` with no points is returned.
    """
    dedup = 2.0 / grid if dedup is None else dedup
    Z = _grid_nodes(grid)
    found: List[Tuple[np.ndarray, ChartPoint]] = []
    for chart in CHARTS:
        V = fun(chart, Z)
        frac = float(np.mean(np.abs(np.nan_to_num(V, nan=np.inf)) < tol))
        if frac > degenerate_fraction:
            return ZeroSet([], degenerate=True)
        starts = _cell_candidates(Z, V, tol)
        if len(starts) == 0:
            continue
        f = lambda z, chart=chart: fun(chart, z)
        j = None if jac is None else (lambda z, chart=chart: jac(chart, z))
        z, res = newton(f, starts, j, target=min(1e-15, tol * 1e-4))
        for zi, ri in zip(z, res):
            if ri < tol and abs(zi.real) <= 1.5 * HALF_WIDTH and abs(zi.imag) <= 1.5 * HALF_WIDTH:
                cp = ChartPoint(chart, zi)
                found.append((cp.direction(), cp))
    merged: List[Tuple[np.ndarray, ChartPoint]] = []
    for w, cp in found:
        if all(np.linalg.norm(w - m[0]) >= dedup for m in merged):
            merged.append((w, cp))
    pts = []
    for _, cp in merged:
        can = cp.canonical()
        if can.chart != cp.chart:
            # polish in the reporting chart
            f = lambda z, chart=can.chart: fun(chart, z)
            j = None if jac is None else (lambda z, chart=can.chart: jac(chart, z))
            z, _ = newton(f, np.array([can.xi]), j, target=min(1e-15, tol * 1e-4), maxit=10)
            can = ChartPoint(can.chart, z[0])
        pts.append(can)
    pts.sort(key=lambda p: (p.chart, p.xi.real, p.xi.imag))
    return ZeroSet(pts)


def shear_zeros(sec: GlobalSection, grid: int = 64, tol: float = 1e-10,
                r: Optional[float] = None,
                degenerate_fraction: float = DEGENERATE_FRACTION) -> List[ChartPoint]:
    """Isolated zeros of the shear.

    Raises
    ------
    DegenerateShear
        If ``|sigma| < tol`` on more than ``degenerate_fraction`` of the grid
        (for example a holomorphic section, where sigma vanishes identically).
    """
    if grid < 32:
        raise ValueError("grid must be >= 32")
    if r is None:
        r = choose_r(sec)
    zs = find_zeros(lambda c, z: shear(sec, c, z, r), grid, tol,
                    degenerate_fraction=degenerate_fraction)
    if zs.degenerate:
        raise DegenerateShear(_degenerate_fraction(sec, grid, tol, r))
    return zs.points


def _degenerate_fraction(sec, grid, tol, r):
    Z = _grid_nodes(grid)
    return max(float(np.mean(np.abs(shear(sec, c, Z, r)) < tol)) for c in CHARTS)


# ---------------------------------------------------------------------------
# winding numbers

def winding_number(f: Callable, center: complex, radius: float, samples: int = 64,
                   max_samples: int = 4096, tol: float = 1e-14) -> int:
    """Winding of ``f`` around 0 along the positively oriented circle.

    The sample count doubles until every argument increment is below pi/2.
    """
    if samples < 4:
        raise ValueError("samples must be >= 4")
    n = samples
    while True:
        t = 2 * np.pi * np.arange(n + 1) / n
        vals = f(center + radius * np.exp(1j * t))
        if np.any(~np.isfinite(vals)) or np.any(np.abs(vals) < tol):
            raise ZeroOnContour(f"|f| < {tol:g} on the contour of radius {radius:g}")
        inc = np.angle(vals[1:] / vals[:-1])
        if np.max(np.abs(inc)) < 0.5 * np.pi:
            return int(np.rint(np.sum(inc) / (2 * np.pi)))
        n *= 2
        if n > max_samples:
            raise NonConvergent(f"argument increments exceed pi/2 with {max_samples} samples")


def winding_index(sec: GlobalSection, center: ChartPoint, radius: float, samples: int = 64,
                  r: Optional[float] = None, tol: float = 1e-14) -> int:
    """Index of a complex point: winding of conj(sigma) around it."""
    if samples < 64:
        raise ValueError("samples must be >= 64")
    if r is None:
        r = choose_r(sec)
    return winding_number(lambda z: np.conj(shear(sec, center.chart, z, r)),
                          center.xi, radius, samples, tol=tol)


def contour_radius(points: List[ChartPoint], k: int, cap: float = 0.05) -> float:
    """A radius isolating ``points[k]`` from its neighbours in its own chart."""
    me = points[k]
    dists = []
    for j, other in enumerate(points):
        if j == k:
            continue
        try:
            dists.append(abs(other.in_chart(me.chart).xi - me.xi))
        except ValueError:
            continue
    return min([cap] + [0.3 * d for d in dists])


def index_sum(sec: GlobalSection, grid: int = 64, tol: float = 1e-10,
              r: Optional[float] = None, samples: int = 64) -> ComplexPointReport:
    """Locate complex points and sum their indices (4 for a global section).

    Propagates :class:`DegenerateShear` when the zeros are not isolated.
    """
    if r is None:
        r = choose_r(sec)
    pts = shear_zeros(sec, grid, tol, r)
    zeros = []
    for k, cp in enumerate(pts):
        rad = contour_radius(pts, k)
        idx = winding_index(sec, cp, rad, samples, r)
        res = float(np.abs(shear(sec, cp.chart, cp.xi, r)))
        zeros.append(ComplexPoint(cp, idx, res))
    return ComplexPointReport(zeros, r=r)


def index_stability(sec: GlobalSection, report: ComplexPointReport):
    """For each zero: indices at radius rad, rad/2 and with 64/256 samples."""
    pts = [z.point for z in report.zeros]
    out = []
    for k, cp in enumerate(pts):
        rad = contour_radius(pts, k)
        out.append((winding_index(sec, cp, rad, 64, report.r),
                    winding_index(sec, cp, rad / 2, 64, report.r),
                    winding_index(sec, cp, rad, 256, report.r)))
    return out


# ---------------------------------------------------------------------------
# spacefilling

def lines_through_point(sec: GlobalSection, p, grid: int = 32, tol: float = 1e-10) -> ZeroSet:
    """Directions of the lines of ``sec`` that pass through ``p``.

    After moving ``p`` to the origin these are the zeros of F, viewed as a
    tangent field on S^2.  ``degenerate`` is set when every line through
    ``p`` belongs to the congruence.
    """
    moved = translate(sec, -Translation.from_vector(p))

    def fun(chart, z):
        return moved.value(chart, z)

    def jac(chart, z):
        j = moved.jet(chart, z)
        return j.du, j.dv

    return find_zeros(fun, grid, tol, jac=jac)
