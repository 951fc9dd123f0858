"""Oriented lines, charts on S^2 and sections of TP^1.

Chart conventions
-----------------
Chart ``N`` uses ``xi``, stereographic projection from the south pole, so the
line direction is::

    W(xi) = (2 Re xi, 2 Im xi, 1 - |xi|^2) / (1 + |xi|^2).

Chart ``S`` uses ``w = 1/xi``, with the tangent-bundle transition
``F_S(w) = -w^2 F_N(1/w)``.  Both charts are handled by the same formulas:
the pair ``(w, F_S)`` read as chart-N data describes the congruence rotated by
pi about the x1-axis (``diag(1, -1, -1)``).  Every rotation-invariant quantity
(rho, |sigma|, K, the Jacobian, twist) is therefore computed in chart S with
the chart-N code, and positions are mapped back with :data:`CHART_S_ROTATION`.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Dict, Tuple

import numpy as np

from . import expr as ex
from .errors import DegenerateField, NonGlobalSection
from .jets import Jet1

CHARTS = ("N", "S")
CHART_S_ROTATION = np.diag([1.0, -1.0, -1.0])
OVERLAP = (0.5, 2.0)


# ---------------------------------------------------------------------------
# points and lines

@dataclass(frozen=True)
class ChartPoint:
    chart: str
    xi: complex

    def __post_init__(self):
        if self.chart not in CHARTS:
            raise ValueError(f"chart must be 'N' or 'S', got {self.chart!r}")
        object.__setattr__(self, "xi", complex(self.xi))

    def direction(self) -> np.ndarray:
        w = direction(self.xi)
        return w if self.chart == "N" else CHART_S_ROTATION @ w

    def in_chart(self, chart: str) -> "ChartPoint":
        if chart == self.chart:
            return self
        if self.xi == 0:
            raise ValueError("chart origin is not covered by the other chart")
        return ChartPoint(chart, 1 / self.xi)

    def canonical(self) -> "ChartPoint":
        """Same point, in the chart where its coordinate has modulus <= 1."""
        return self if abs(self.xi) <= 1 else self.in_chart("S" if self.chart == "N" else "N")

    def same_point(self, other: "ChartPoint", tol: float = 1e-12) -> bool:
        return float(np.linalg.norm(self.direction() - other.direction())) <= tol


@dataclass(frozen=True)
class LineR3:
    U: np.ndarray
    W: np.ndarray

    def point(self, r):
        return self.U + np.multiply.outer(r, self.W) if np.ndim(r) else self.U + r * self.W

    def distance_to(self, p) -> float:
        d = np.asarray(p, float) - self.U
        return float(np.linalg.norm(d - np.dot(d, self.W) * self.W))


@dataclass(frozen=True)
class Translation:
    alpha0: complex
    t0: float

    @classmethod
    def from_vector(cls, v) -> "Translation":
        v = np.asarray(v, float)
        return cls(complex(v[0], v[1]), float(v[2]))

    def vector(self) -> np.ndarray:
        return np.array([self.alpha0.real, self.alpha0.imag, self.t0])

    def __neg__(self):
        return Translation(-self.alpha0, -self.t0)


@dataclass(frozen=True)
class CanonicalCoord:
    nu: complex
    r: float


def direction(xi) -> np.ndarray:
    """Unit direction W for chart-N coordinate(s) ``xi``; shape ``(..., 3)``."""
    xi = np.asarray(xi, dtype=complex)
    s = (xi * np.conj(xi)).real
    return np.stack([2 * xi.real, 2 * xi.imag, 1 - s], axis=-1) / (1 + s)[..., None]


def stereo(w) -> np.ndarray:
    """Inverse of :func:`direction`: chart-N coordinate of unit vector(s) ``w``."""
    w = np.asarray(w, float)
    return (w[..., 0] + 1j * w[..., 1]) / (1 + w[..., 2])


def phi_point(xi, F, r) -> np.ndarray:
    """Point at arclength ``r`` on the line ``(xi, F)``; chart-N data."""
    xi = np.asarray(xi, dtype=complex)
    F = np.asarray(F, dtype=complex)
    r = np.asarray(r, dtype=float)
    s = (xi * np.conj(xi)).real
    den = (1 + s) ** 2
    z = (2 * (F - np.conj(F) * xi ** 2) + 2 * xi * (1 + s) * r) / den
    t = (-2 * (F * np.conj(xi) + np.conj(F) * xi).real + (1 - s ** 2) * r) / den
    return np.stack(np.broadcast_arrays(z.real, z.imag, t), axis=-1)


def line_from(xi, F) -> LineR3:
    return LineR3(phi_point(xi, F, 0.0), direction(xi))


def phi_point_chart(chart: str, coord, F, r) -> np.ndarray:
    x = phi_point(coord, F, r)
    return x if chart == "N" else x @ CHART_S_ROTATION.T


def r_shift(xi, tr: Translation):
    """Change of the arclength parameter under a translation, <T, W(xi)>."""
    xi = np.asarray(xi, dtype=complex)
    s = (xi * np.conj(xi)).real
    a = tr.alpha0
    return ((np.conj(a) * xi + a * np.conj(xi)).real + tr.t0 * (1 - s)) / (1 + s)


def antipode(cp: ChartPoint) -> ChartPoint:
    """Orientation reversal of the line direction, xi -> -1/conj(xi)."""
    if cp.xi == 0:
        return ChartPoint("S" if cp.chart == "N" else "N", 0j)
    return ChartPoint(cp.chart, -1 / np.conj(cp.xi))


# ---------------------------------------------------------------------------
# sections

@dataclass(frozen=True)
class LocalSection:
    F: ex.Node
    chart: str = "N"

    def jet(self, coord) -> Jet1:
        return ex.eval_jet(self.F, coord)

    def __call__(self, coord):
        return ex.evaluate(self.F, coord)


@dataclass(frozen=True)
class GlobalSection:
    north: LocalSection
    south: LocalSection
    name: str = field(default="custom", compare=False)

    def chart(self, chart: str) -> LocalSection:
        return self.north if chart == "N" else self.south

    def jet(self, chart: str, coord) -> Jet1:
        return self.chart(chart).jet(coord)

    def value(self, chart: str, coord):
        return self.chart(chart)(coord)

    @property
    def holomorphic(self) -> bool:
        return not (ex.has_conj(self.north.F) or ex.has_conj(self.south.F))


def south_from_north(F_north: ex.Node) -> ex.Node:
    """Derive the chart-S expression by the transition rule."""
    w = ex.XI
    return -(w ** 2) * ex.substitute(F_north, 1 / w)


def section_from_exprs(north, south="auto", name="custom") -> GlobalSection:
    if isinstance(north, str):
        north = ex.parse_expr(north)
    if isinstance(south, str):
        south = south_from_north(north) if south == "auto" else ex.parse_expr(south)
    return GlobalSection(LocalSection(north, "N"), LocalSection(south, "S"), name)


def overlap_samples(n_radial: int = 7, n_angle: int = 24) -> np.ndarray:
    rad = np.geomspace(*OVERLAP, n_radial)
    ang = 2 * np.pi * (np.arange(n_angle) + 0.37) / n_angle
    return (rad[:, None] * np.exp(1j * ang)[None, :]).ravel()


def transition_residual(sec: GlobalSection) -> float:
    """Relative mismatch of ``F_S(w)`` and ``-w^2 F_N(1/w)`` on the overlap."""
    xi = overlap_samples()
    w = 1 / xi
    fs = sec.value("S", w)
    fn = -(w ** 2) * sec.value("N", xi)
    scale = 1 + np.max(np.abs(fn))
    return float(np.max(np.abs(fs - fn)) / scale)


def check_global(sec: GlobalSection, tol: float = 1e-10) -> float:
    res = transition_residual(sec)
    if not res <= tol:
        raise NonGlobalSection(res, tol)
    return res


def _quadratic(a, b, c) -> ex.Node:
    xi = ex.XI
    return ex.Const(complex(a)) + ex.Const(complex(b)) * xi + ex.Const(complex(c)) * xi ** 2


def family_mobius(a, b, c, name="mobius") -> GlobalSection:
    """Holomorphic section ``F = a + b xi + c xi^2`` (infinitesimal PSL(2,C) action)."""
    return GlobalSection(LocalSection(_quadratic(a, b, c), "N"),
                         LocalSection(_quadratic(-c, -b, -a), "S"), name)


def point_sphere_coeffs(p) -> Tuple[complex, complex, complex]:
    x1, x2, x3 = (float(v) for v in p)
    alpha = complex(x1, x2)
    return 0.5 * alpha, -x3 + 0j, -0.5 * alpha.conjugate()


def point_sphere(p) -> GlobalSection:
    """All oriented lines through ``p``."""
    return family_mobius(*point_sphere_coeffs(p), name="point_sphere")


def translate(sec: GlobalSection, tr: Translation) -> GlobalSection:
    """Move every line of ``sec`` by the vector of ``tr``."""
    shift = point_sphere(tr.vector())
    return GlobalSection(LocalSection(sec.north.F + shift.north.F, "N"),
                         LocalSection(sec.south.F + shift.south.F, "S"), sec.name)


# ---------------------------------------------------------------------------
# tangent fields on S^2

Monomial = Tuple[int, int, int]
PolyMap = Tuple[Dict[Monomial, float], Dict[Monomial, float], Dict[Monomial, float]]

_MONO = re.compile(r"^\s*([xyz])\s*(?:\^\s*(\d+))?\s*$")


def parse_monomial(text: str) -> Monomial:
    """``"x*z^2"`` -> ``(1, 0, 2)``; ``"1"`` -> ``(0, 0, 0)``."""
    exps = [0, 0, 0]
    if text.strip() == "1":
        return (0, 0, 0)
    for part in text.split("*"):
        m = _MONO.match(part)
        if m is None:
            raise ValueError(f"bad monomial {text!r}")
        exps["xyz".index(m.group(1))] += int(m.group(2) or 1)
    return tuple(exps)


def poly_from_json(components) -> PolyMap:
    if len(components) != 3:
        raise ValueError("a polynomial field needs exactly three components")
    out = []
    for comp in components:
        terms: Dict[Monomial, float] = {}
        for key, c in comp.items():
            mono = parse_monomial(key) if isinstance(key, str) else tuple(key)
            terms[mono] = terms.get(mono, 0.0) + float(c)
        out.append(terms)
    return tuple(out)


def poly_degree(poly: PolyMap) -> int:
    return max((sum(m) for comp in poly for m, c in comp.items() if c != 0), default=0)


def rotation_field() -> PolyMap:
    """Infinitesimal rotation about e3, ``p -> (-p2, p1, 0)``."""
    return ({(0, 1, 0): -1.0}, {(1, 0, 0): 1.0}, {})


def add_poly(a: PolyMap, b: PolyMap, scale: float = 1.0) -> PolyMap:
    out = []
    for ca, cb in zip(a, b):
        terms = dict(ca)
        for m, c in cb.items():
            terms[m] = terms.get(m, 0.0) + scale * c
        out.append(terms)
    return tuple(out)


def _rotate_poly(poly: PolyMap) -> PolyMap:
    # q -> R poly(R q) with R = diag(1, -1, -1)
    sign = (1, -1, -1)
    return tuple({m: sign[k] * (-1) ** (m[1] + m[2]) * c for m, c in comp.items()}
                 for k, comp in enumerate(poly))


def _sphere_coords():
    xi = ex.XI
    xib = ex.conj(xi)
    den = 1 + xi * xib
    return (xi + xib) / den, ex.Const(-1j) * (xi - xib) / den, (1 - xi * xib) / den


def _poly_ast(comp, p) -> ex.Node:
    node = ex.Const(0j)
    for (i, j, k), c in sorted(comp.items()):
        if c == 0:
            continue
        term: ex.Node = ex.Const(complex(c))
        for base, n in zip(p, (i, j, k)):
            if n:
                term = term * (base if n == 1 else base ** n)
        node = node + term
    return node


def tangent_field_ast(poly: PolyMap) -> ex.Node:
    """Chart-N pushforward of ``V(p) = P(p) - <P(p), p> p``."""
    p = _sphere_coords()
    P = [_poly_ast(comp, p) for comp in poly]
    radial = P[0] * p[0] + P[1] * p[1] + P[2] * p[2]
    V = [P[k] - radial * p[k] for k in range(3)]
    xi = ex.XI
    half = (1 + xi * ex.conj(xi)) / 2
    return half * (V[0] + ex.Const(1j) * V[1] - xi * V[2])


def family_tangent_field(poly: PolyMap, name: str = "tangent_field",
                         check: bool = True) -> GlobalSection:
    if poly_degree(poly) > 3:
        raise ValueError("tangent-field polynomials are limited to degree 3")
    sec = GlobalSection(LocalSection(tangent_field_ast(poly), "N"),
                        LocalSection(tangent_field_ast(_rotate_poly(poly)), "S"), name)
    if check:
        _check_nondegenerate(sec)
    return sec


def _check_nondegenerate(sec: GlobalSection, n_circles: int = 9, n_angle: int = 64):
    ang = np.exp(2j * np.pi * (np.arange(n_angle) + 0.5) / n_angle)
    for chart in CHARTS:
        for rad in np.linspace(0.05, 1.0, n_circles):
            vals = np.abs(sec.value(chart, rad * ang))
            if np.max(vals) < 1e-12:
                raise DegenerateField(
                    f"field vanishes on the circle |coord|={rad:.3g} of chart {chart}")


def perturbed_rotation(eps: float) -> GlobalSection:
    """Rotation about e3 plus ``eps`` times a quadratic tangent field.

    The perturbation ``p -> (p1 p3 + p2^2 / 2, -p2 p3, p1 p2 / 2 + 0.3 p3^2)``
    (projected to the sphere) is not conformal, so the section is
    non-holomorphic.  Its shear has eight non-degenerate zeros (six of index
    +1, two of index -1) for ``eps`` in at least ``[0.1, 0.6]``.
    """
    quad = ({(1, 0, 1): 1.0, (0, 2, 0): 0.5}, {(0, 1, 1): -1.0},
            {(1, 1, 0): 0.5, (0, 0, 2): 0.3})
    return family_tangent_field(add_poly(rotation_field(), quad, eps),
                                name=f"perturbed_rotation(eps={eps:g})")
