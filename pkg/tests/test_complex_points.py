import numpy as np
import pytest

from clab import congruence as cg
from clab.complex_points import (ComplexPointReport, choose_r, complex_point_density,
                                 find_zeros, index_stability, index_sum, lines_through_point,
                                 newton, shear, shear_zeros, winding_index, winding_number)
from clab.errors import DegenerateShear, NonConvergent, ZeroOnContour
from clab.spin import param_jet


@pytest.fixture(scope="module")
def perturbed():
    sec = cg.perturbed_rotation(0.3)
    return sec, index_sum(sec)


# ---------------------------------------------------------------------------
# winding numbers on synthetic models

NU0 = 0.2 - 0.1j


def brute_force_winding(f, center, radius, n=20000):
    t = np.linspace(0, 2 * np.pi, n + 1)
    vals = f(center + radius * np.exp(1j * t))
    return np.sum(np.angle(vals[1:] / vals[:-1])) / (2 * np.pi)


@pytest.mark.parametrize("sigma, expected", [
    (lambda z: np.conj(z - NU0), 1),
    (lambda z: (z - NU0) ** 2, -2),
    (lambda z: z - NU0, -1),
    (lambda z: np.conj(z - NU0) ** 3 * (2 + z), 3),
])
def test_synthetic_indices(sigma, expected):
    conj_sigma = lambda z: np.conj(sigma(z))
    for radius in (0.1, 0.05):
        assert winding_number(conj_sigma, NU0, radius) == expected
    assert brute_force_winding(conj_sigma, NU0, 0.1) == pytest.approx(expected, abs=1e-9)


def test_winding_refines_sample_count():
    # 40 turns need more than the initial 64 samples
    assert winding_number(lambda z: z ** 40, 0, 1.0) == 40


def test_winding_errors():
    with pytest.raises(ZeroOnContour):
        winding_number(lambda z: z - 0.5, 0, 0.5)
    # k / n has fractional part 1/3 or 2/3 for n = 64 ... 4096, so every
    # sampled increment is +-2 pi / 3 and refinement never settles
    with pytest.raises(NonConvergent):
        winding_number(lambda z: z ** 1365, 0, 1.0)
    with pytest.raises(ValueError):
        winding_index(cg.perturbed_rotation(0.3), cg.ChartPoint("N", 0), 0.1, samples=16)


# ---------------------------------------------------------------------------
# Newton and generic zero finding

def test_newton_with_and_without_jacobian():
    f = lambda z: z ** 3 - 1
    jac = lambda z: (3 * z ** 2, 3j * z ** 2)
    for j in (None, jac):
        z, res = newton(f, np.array([0.9 + 0.1j, -0.4 + 0.8j]), j)
        assert np.all(res < 1e-14)
        assert np.allclose(z ** 3, 1)


def test_zero_near_chart_seam_reported_once():
    # one zero, at xi = 1.5 (w = 2/3), visible in both charts' search squares
    fun = lambda chart, z: (z - 1.5) if chart == "N" else (1 / z - 1.5) * z
    zs = find_zeros(fun, grid=32)
    assert len(zs) == 1
    pt = zs.points[0]
    assert pt.chart == "S" and pt.xi == pytest.approx(2 / 3)


def test_find_zeros_flags_vanishing_function():
    zs = find_zeros(lambda chart, z: 0 * z, grid=32)
    assert zs.degenerate and len(zs) == 0


def test_zeros_are_sorted_by_chart_then_coordinates(perturbed):
    _, rep = perturbed
    keys = [(z.point.chart, z.point.xi.real, z.point.xi.imag) for z in rep.zeros]
    assert keys == sorted(keys)


# ---------------------------------------------------------------------------
# shear zeros and the index sum

def test_holomorphic_sections_are_degenerate():
    with pytest.raises(DegenerateShear):
        shear_zeros(cg.family_mobius(0.3, 1j, -1), grid=32)
    with pytest.raises(DegenerateShear):
        index_sum(cg.point_sphere([0.5, 0, 1]))


def test_shear_zeros_grid_minimum():
    with pytest.raises(ValueError):
        shear_zeros(cg.perturbed_rotation(0.3), grid=16)


def test_perturbed_rotation_zeros(perturbed):
    sec, rep = perturbed
    assert len(rep.zeros) == 8
    assert all(z.residual < 1e-10 for z in rep.zeros)
    assert all(abs(z.point.xi) <= 1 for z in rep.zeros)
    assert sorted(z.index for z in rep.zeros) == [-1, -1, 1, 1, 1, 1, 1, 1]
    assert rep.total_index == 4 and not rep.degenerate


def test_shear_zeros_small_eps():
    pts = shear_zeros(cg.perturbed_rotation(0.2), grid=64, tol=1e-10)
    assert len(pts) > 0
    sec = cg.perturbed_rotation(0.2)
    r = choose_r(sec)
    assert all(abs(shear(sec, p.chart, p.xi, r)) < 1e-10 for p in pts)


def test_zeros_do_not_depend_on_slice(perturbed):
    sec, rep = perturbed
    other = index_sum(sec, r=rep.r + 2.5)
    assert [z.point.chart for z in other.zeros] == [z.point.chart for z in rep.zeros]
    for a, b in zip(other.zeros, rep.zeros):
        assert a.point.xi == pytest.approx(b.point.xi, abs=1e-9)
        assert a.index == b.index


def test_index_stability(perturbed):
    sec, rep = perturbed
    for a, b, c in index_stability(sec, rep):
        assert a == b == c


def test_density_vanishes_at_complex_points(perturbed):
    sec, rep = perturbed
    for z in rep.zeros:
        pj = param_jet(sec, z.point.chart, z.point.xi, rep.r)
        assert abs(complex_point_density(pj)) < 1e-10


def test_density_winding_matches_conj_sigma(perturbed):
    sec, rep = perturbed
    for z in rep.zeros[:3]:
        dens = lambda w, c=z.point.chart: complex_point_density(param_jet(sec, c, w, rep.r))
        assert winding_number(dens, z.point.xi, 0.02) == z.index


@pytest.mark.parametrize("eps", [0.1, 0.6])
def test_index_sum_is_four(eps):
    assert index_sum(cg.perturbed_rotation(eps)).total_index == 4


def test_report_totals():
    rep = ComplexPointReport([], degenerate=True)
    assert rep.total_index is None
    assert ComplexPointReport([]).total_index == 0


def test_choose_r_avoids_focal_points():
    sec = cg.point_sphere([0, 0, 0])
    assert choose_r(sec) > 0


# ---------------------------------------------------------------------------
# lines through a point

def test_point_sphere_lines_through_its_centre():
    zs = lines_through_point(cg.point_sphere([1, 2, 3]), [1, 2, 3])
    assert zs.degenerate


def test_point_sphere_lines_through_another_point():
    q, p = np.array([1.0, 2, 3]), np.array([-0.5, 0.3, 2])
    zs = lines_through_point(cg.point_sphere(q), p)
    assert len(zs) == 2
    u = (p - q) / np.linalg.norm(p - q)
    dirs = sorted((pt.direction() for pt in zs), key=lambda w: np.dot(w, u))
    assert dirs[0] == pytest.approx(-u, abs=1e-10)
    assert dirs[1] == pytest.approx(u, abs=1e-10)


def test_rotation_axis_lines():
    zs = lines_through_point(cg.family_tangent_field(cg.rotation_field()), [0, 0, 0])
    assert len(zs) == 2
    assert {pt.chart for pt in zs} == {"N", "S"}
    assert all(abs(pt.xi) < 1e-12 for pt in zs)


def test_lines_through_point_pass_through_it(rng):
    sec = cg.perturbed_rotation(0.3)
    for _ in range(5):
        p = rng.normal(size=3) * 2
        zs = lines_through_point(sec, p)
        assert len(zs) >= 1
        for pt in zs:
            line = cg.LineR3(cg.phi_point_chart(pt.chart, pt.xi, sec.value(pt.chart, pt.xi), 0.0),
                             pt.direction())
            assert line.distance_to(p) < 1e-9
