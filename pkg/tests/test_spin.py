import numpy as np
import pytest

from clab import congruence as cg
from clab.errors import DegenerateFrame
from clab.jets import Jet1
from clab.spin import (ParamJet, classify_twist, coordinate_vectors, curvature_cross_formula,
                       curvature_graph_test, frame_orientation, frame_quadratic_residual,
                       frame_relations, invariant_derivatives, null_frame, param_jet, spin,
                       z_inner_products, z_inner_products_direct)

from conftest import random_config, random_section, reparam_jet

ZERO = cg.section_from_exprs("0")
ROTATION = cg.family_tangent_field(cg.rotation_field())


def fd_jacobian_det(sec, chart, xi, r, h=1e-6):
    """det of (u, v, r) -> x by central differences."""
    def x(z, rr):
        return cg.phi_point_chart(chart, z, sec.value(chart, z), rr)
    cols = [(x(xi + h, r) - x(xi - h, r)) / (2 * h),
            (x(xi + 1j * h, r) - x(xi - 1j * h, r)) / (2 * h),
            (x(xi, r + h) - x(xi, r - h)) / (2 * h)]
    return np.linalg.det(np.array(cols).T)


# ---------------------------------------------------------------------------
# worked examples

def test_pencil_invariant_derivatives():
    P, M = invariant_derivatives(param_jet(ZERO, "N", 0.3 + 0.1j, 2.0))
    assert (P, M) == (pytest.approx(2), pytest.approx(0))


def test_holomorphic_minus_derivative_vanishes(rng):
    sec = cg.family_mobius(1 + 1j, -0.5, 2j)
    z = np.array([0.1, 0.3 - 0.2j, -0.8j])
    P, M = invariant_derivatives(param_jet(sec, "N", z, 0.7))
    assert np.all(M == 0)


def test_pencil_spin_coefficients():
    sd = spin(param_jet(ZERO, "N", 0.4j, 2.0))
    assert sd.rho == pytest.approx(-0.5)
    assert sd.sigma == 0
    assert sd.K == pytest.approx(0.25)


def test_rotation_spin_example():
    sd = spin(param_jet(ROTATION, "N", 0, 1.0))
    assert sd.rho == pytest.approx(-1 / (1 - 1j))
    assert classify_twist(sd) == "twisting"


def test_rotation_equator_is_twist_free():
    z = np.exp(1j * np.linspace(0, 2 * np.pi, 17))
    sd = spin(param_jet(ROTATION, "N", z, 1.0))
    assert np.max(np.abs(sd.rho.imag)) < 1e-14


def test_point_sphere_is_integrable_and_shear_free(rng):
    sec = cg.point_sphere([1, -2, 0.5])
    z = rng.normal(size=20) + 1j * rng.normal(size=20)
    sd = spin(param_jet(sec, "N", z, 5.0))
    assert np.max(np.abs(sd.rho.imag)) < 1e-12
    assert np.max(np.abs(sd.sigma)) == 0


def test_holomorphic_sections_are_shear_free(rng):
    for _ in range(5):
        sec = random_section(rng, "mobius")
        g = np.linspace(-1, 1, 64)
        z = g[:, None] + 1j * g[None, :]
        sd = spin(param_jet(sec, "N", z, 3.0), check=False)
        assert np.nanmax(np.abs(sd.sigma)) <= 1e-13


def test_focal_point_raises():
    with pytest.raises(DegenerateFrame):
        spin(param_jet(ZERO, "N", 0.2, 0.0))
    with pytest.raises(DegenerateFrame):
        null_frame(param_jet(ZERO, "N", 0.2, 0.0))


def test_unchecked_focal_point_is_non_finite():
    sd = spin(param_jet(ZERO, "N", np.array([0.2, 0.3]), 0.0), check=False)
    assert not np.any(np.isfinite(sd.rho))


def test_pencil_null_frame():
    xi, r = 0.3 - 0.6j, 1.5
    fr = null_frame(param_jet(ZERO, "N", xi, r))
    assert fr.beta == 0 and fr.omega == 0
    assert fr.alpha == pytest.approx(-(1 + abs(xi) ** 2) / (np.sqrt(2) * r))
    assert fr.phase == 0.0


def test_pencil_z_inner_products():
    xi, r = 0.5j, 2.0
    zpp, zpm = z_inner_products(param_jet(ZERO, "N", xi, r))
    assert zpp == 0
    assert zpm == pytest.approx(2 * r * r / (1 + abs(xi) ** 2) ** 2)


def test_graph_test_examples():
    assert curvature_graph_test(param_jet(ROTATION, "N", 0.3, 1.0)) == "graph"
    # xi = nu conj(nu) on the real axis: d xi = dbar xi = nu
    nu = 0.7
    pj = ParamJet(Jet1(nu * nu, nu, nu), Jet1(0j, 0j, 0j), 1.0)
    assert curvature_graph_test(pj) == "vertical"


def test_vertical_tangent_has_zero_curvature():
    # a surface in line space whose tangent plane contains a fibre direction:
    # xi = nu conj(nu) along the real axis while F varies independently
    nu = 0.6
    pj = ParamJet(Jet1(nu * nu, nu, nu), Jet1(0.2 + 0.1j, 1.5 - 0.5j, 0.3j), 1.0)
    assert curvature_graph_test(pj) == "vertical"
    assert spin(pj).K == pytest.approx(0, abs=1e-12)


def test_reparametrised_section_is_never_vertical_with_finite_frame():
    # composing a section with a folding map also kills the frame denominator
    sec = cg.perturbed_rotation(0.3)
    nu = 0.6
    pj = reparam_jet(sec, "N", nu * nu, nu, nu, 1.0)
    with pytest.raises(DegenerateFrame):
        spin(pj)


# ---------------------------------------------------------------------------
# invariants over random configurations

def test_K_is_real_and_matches_delta_sign(rng):
    for _ in range(50):
        _, _, pj = random_config(rng)
        sd = spin(pj)
        assert np.isrealobj(sd.K)
        # K = -J/D with J = 1 and Delta = -4 D / (1+|xi|^2)^2 when nu = xi
        assert np.sign(sd.K) == np.sign(sd.delta)


def test_chart_invariance(rng):
    for _ in range(40):
        sec = random_section(rng)
        xi = (0.5 + 1.5 * rng.uniform()) * np.exp(2j * np.pi * rng.uniform())
        r = rng.uniform(-2, 2)
        pn, ps = param_jet(sec, "N", xi, r), param_jet(sec, "S", 1 / xi, r)
        try:
            a, b = spin(pn), spin(ps)
        except DegenerateFrame:
            continue
        scale = 1 + abs(a.rho) + abs(a.sigma)
        assert abs(a.rho - b.rho) <= 1e-9 * scale
        assert abs(abs(a.sigma) - abs(b.sigma)) <= 1e-9 * scale
        assert abs(a.K - b.K) <= 1e-9 * scale ** 2


def test_reparametrisation_invariance(rng):
    for _ in range(40):
        sec, chart, pj = random_config(rng)
        a, b = rng.normal(size=2) + 1j * rng.normal(size=2)
        if abs(abs(a) - abs(b)) < 0.2:
            continue
        pj2 = reparam_jet(sec, chart, pj.xi.value, a, b, pj.r)
        s1, s2 = spin(pj), spin(pj2)
        scale = 1 + abs(s1.rho) + abs(s1.sigma)
        assert abs(s1.rho - s2.rho) <= 1e-10 * scale
        assert abs(abs(s1.sigma) - abs(s2.sigma)) <= 1e-10 * scale


def test_translation_invariance(rng):
    for _ in range(40):
        sec, chart, pj = random_config(rng)
        t = rng.normal(size=3)
        moved = cg.translate(sec, cg.Translation.from_vector(t))
        xi = pj.xi.value
        # chart S sees the congruence rotated by diag(1, -1, -1)
        t_chart = t if chart == "N" else t * [1, -1, -1]
        shift = cg.r_shift(xi, cg.Translation.from_vector(t_chart))
        s1 = spin(pj)
        s2 = spin(param_jet(moved, chart, xi, pj.r + shift))
        for name in ("dplusF", "dminusF", "rho", "sigma", "K"):
            a, b = getattr(s1, name), getattr(s2, name)
            assert abs(a - b) <= 1e-10 * (1 + abs(a))


def test_frame_relations_and_orientation(rng):
    for _ in range(40):
        _, _, pj = random_config(rng, reparam=bool(rng.integers(2)))
        assert max(float(np.max(x)) for x in frame_relations(pj)) <= 1e-12
        assert frame_orientation(pj) == pytest.approx(1, abs=1e-12)
        assert frame_quadratic_residual(pj) <= 1e-12


def test_z_inner_products_against_coordinate_vectors(rng):
    for _ in range(30):
        _, _, pj = random_config(rng)
        zpp, zpm = z_inner_products(pj)
        dpp, dpm = z_inner_products_direct(pj)
        assert abs(zpp - dpp) <= 1e-10 * (1 + abs(zpp))
        assert abs(zpm - dpm) <= 1e-10 * (1 + abs(zpm))
        assert zpm.imag == 0 and zpm >= 0


def test_coordinate_vectors_shape():
    pj = param_jet(ROTATION, "N", np.array([0.1, 0.2]), 1.0)
    assert coordinate_vectors(pj).shape == (3, 2, 3)


def test_jacobian_oracle(rng):
    for _ in range(30):
        sec, chart, pj = random_config(rng)
        det = fd_jacobian_det(sec, chart, pj.xi.value, pj.r)
        delta = spin(pj).delta
        assert abs(delta - det) <= 1e-6 * abs(delta)


def test_cross_formula(rng):
    for _ in range(100):
        _, _, pj = random_config(rng, reparam=True)
        K = spin(pj).K
        assert abs(K - curvature_cross_formula(pj)) <= 1e-12 * abs(K)
