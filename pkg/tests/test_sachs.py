import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from clab import congruence as cg
from clab.errors import DegenerateFrame, FocalPoint
from clab.sachs import (SachsInitialData, denominator, evolve_closed_form, evolve_direct,
                        focal_points, integrate_rk4, realize_line, rk4_steps, sachs_residual)
from clab.spin import param_jet

from conftest import random_config

small = st.complex_numbers(max_magnitude=1, allow_nan=False, allow_infinity=False)


def test_closed_form_examples():
    assert evolve_closed_form(SachsInitialData(1, 0), 0.5) == (pytest.approx(2), 0)
    assert evolve_closed_form(SachsInitialData(0, 0), 3.7) == (0, 0)
    init = SachsInitialData(1j, 0)
    assert denominator(init, 1.0) == pytest.approx(2)
    rho, sigma = evolve_closed_form(init, 1.0)
    assert rho == pytest.approx((1j - 1) / 2)
    assert sigma == 0


def test_focal_point_raised_and_located():
    init = SachsInitialData(1, 0)
    with pytest.raises(FocalPoint) as info:
        evolve_closed_form(init, 1.0)
    assert info.value.r == 1.0
    assert focal_points(init) == pytest.approx([1.0, 1.0])


def test_focal_points_of_linear_denominator():
    # K0 = 0: Q is linear in r
    assert focal_points(SachsInitialData(0.5, 0.5)) == pytest.approx([1.0])
    assert focal_points(SachsInitialData(0.5j, 0.5)) == []


def test_pencil_residual():
    pj = param_jet(cg.section_from_exprs("0"), "N", 0.2 + 0.3j, 1.7)
    assert max(sachs_residual(pj)) <= 1e-12


def test_shear_free_family_has_zero_sigma_residual():
    pj = param_jet(cg.family_mobius(0.3, 1 + 1j, -2), "N", 0.4, 0.9)
    assert sachs_residual(pj)[1] == 0


def test_residual_rejects_nearby_focal_point():
    pj = param_jet(cg.section_from_exprs("0"), "N", 0.1, 0.5)
    # the pencil's focal point sits at r = 0
    with pytest.raises(FocalPoint):
        sachs_residual(pj, 0.5, h=0.6)
    with pytest.raises(DegenerateFrame):
        sachs_residual(pj, 0.0)


def test_rk4_examples():
    rho, sigma = integrate_rk4(SachsInitialData(1, 0), 0.5, 500)
    assert rho == pytest.approx(2, abs=1e-10)
    init = SachsInitialData(0.3 + 0.2j, 0.1j)
    rho, sigma = integrate_rk4(init, 1.0, 2000)
    exact = evolve_closed_form(init, 1.0)
    assert abs(rho - exact[0]) <= 1e-8 and abs(sigma - exact[1]) <= 1e-8


def test_rk4_is_fourth_order():
    init = SachsInitialData(0.4 - 0.3j, 0.25 + 0.1j)
    exact = np.array(evolve_closed_form(init, 1.0))
    errs = [np.max(np.abs(np.array(integrate_rk4(init, 1.0, n)) - exact)) for n in (20, 40, 80)]
    ratios = [errs[0] / errs[1], errs[1] / errs[2]]
    assert all(12 < q < 20 for q in ratios)


def test_rk4_blows_up_at_focal_point():
    with pytest.raises(FocalPoint):
        integrate_rk4(SachsInitialData(1, 0), 2.0, 4000)
    with pytest.raises(ValueError):
        integrate_rk4(SachsInitialData(1, 0), 1.0, 0)


def test_rk4_steps():
    assert rk4_steps(0.5) == 1000
    assert rk4_steps(0.0) == 1


@given(small, small, st.floats(-2, 2))
def test_persistence(rho0, sigma0, r):
    init = SachsInitialData(rho0.real + 0j, 0j)
    try:
        rho, sigma = evolve_closed_form(init, r)
    except FocalPoint:
        return
    assert sigma == 0 and np.imag(rho) == 0
    init = SachsInitialData(complex(rho0.real), sigma0)
    try:
        rho, _ = evolve_closed_form(init, r)
    except FocalPoint:
        return
    assert np.imag(rho) == 0


@given(small, small)
def test_realize_line_reproduces_initial_data(rho0, sigma0):
    init = SachsInitialData(rho0, sigma0)
    if abs(abs(rho0) ** 2 - abs(sigma0) ** 2) < 1e-3:
        return
    got = SachsInitialData.from_param_jet(realize_line(init))
    assert got.rho0 == pytest.approx(rho0, abs=1e-12)
    assert got.sigma0 == pytest.approx(sigma0, abs=1e-12)


def test_consistency_triangle(rng):
    done = 0
    while done < 30:
        _, _, pj = random_config(rng, reparam=bool(rng.integers(2)), r_scale=0.0)
        init = SachsInitialData.from_param_jet(pj)
        r = float(rng.uniform(-1.5, 1.5))
        grid = np.linspace(0, r, 101)
        if np.min(np.abs(denominator(init, grid))) < 0.1:
            continue
        closed = np.array(evolve_closed_form(init, r))
        direct = np.array(evolve_direct(pj, r))
        rk4 = np.array(integrate_rk4(init, r, rk4_steps(r)))
        assert np.max(np.abs(closed - direct)) <= 1e-9
        assert np.max(np.abs(rk4 - closed)) <= 1e-8
        assert max(sachs_residual(pj, r)) <= 1e-10
        done += 1
