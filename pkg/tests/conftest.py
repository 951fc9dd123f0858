import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from clab import congruence as cg
from clab import expr as ex
from clab.jets import Jet1
from clab.spin import ParamJet, frame_denominator, invariant_derivatives

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

SECTION_KINDS = ("mobius", "point_sphere", "tangent_field")


def random_poly(rng, scale=0.4, degree=3):
    """Rotation about e3 plus random terms of degree <= ``degree``."""
    monos = [(a, b, c) for a in range(4) for b in range(4) for c in range(4)
             if 1 <= a + b + c <= degree]
    pert = tuple({m: scale * float(rng.normal()) for m in
                  [monos[k] for k in rng.choice(len(monos), 4, replace=False)]}
                 for _ in range(3))
    return cg.add_poly(cg.rotation_field(), pert)


def random_section(rng, kind=None):
    kind = kind or SECTION_KINDS[rng.integers(len(SECTION_KINDS))]
    if kind == "mobius":
        a, b, c = rng.normal(size=3) + 1j * rng.normal(size=3)
        return cg.family_mobius(a, b, c)
    if kind == "point_sphere":
        return cg.point_sphere(rng.normal(size=3))
    return cg.family_tangent_field(random_poly(rng))


def random_coord(rng, max_modulus=1.0):
    rad = max_modulus * np.sqrt(rng.uniform())
    return rad * np.exp(2j * np.pi * rng.uniform())


def reparam_jet(sec, chart, xi0, a, b, r=0.0):
    """ParamJet of ``sec`` for a reparametrisation with d xi = a, dbar xi = b."""
    seed = Jet1(*(np.asarray(x, dtype=complex) for x in (xi0, a, b)))
    return ParamJet(seed, ex.eval_jet(sec.chart(chart).F, None, seed=seed), r)


def nonfocal(pj, margin=1e-2):
    P, M = invariant_derivatives(pj)
    D = frame_denominator(P, M)
    return bool(np.all(np.abs(D) > margin * (1 + np.abs(P) ** 2 + np.abs(M) ** 2)))


def random_config(rng, kinds=SECTION_KINDS, reparam=False, margin=1e-2, r_scale=2.0):
    """A random (section, chart, ParamJet) with a non-focal line point."""
    while True:
        sec = random_section(rng, kinds[rng.integers(len(kinds))])
        chart = "NS"[rng.integers(2)]
        xi0 = random_coord(rng)
        r = float(rng.uniform(-r_scale, r_scale))
        if reparam:
            a, b = rng.normal(size=2) + 1j * rng.normal(size=2)
            if abs(abs(a) - abs(b)) < 0.2:
                continue
            pj = reparam_jet(sec, chart, xi0, a, b, r)
        else:
            pj = ParamJet(Jet1.variable(xi0), sec.jet(chart, xi0), r)
        if nonfocal(pj, margin):
            return sec, chart, pj


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# ---------------------------------------------------------------------------
# hypothesis strategies

def _leaf():
    consts = st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False)
    return st.one_of(st.just(ex.XI), consts.map(ex.Const))


def _extend(children):
    return st.one_of(
        children.map(ex.Conj),
        children.map(ex.Neg),
        st.tuples(children, st.integers(0, 3)).map(lambda t: ex.IntPow(*t)),
        st.tuples(children, children).map(lambda t: ex.Add(*t)),
        st.tuples(children, children).map(lambda t: ex.Sub(*t)),
        st.tuples(children, children).map(lambda t: ex.Mul(*t)),
        # denominators bounded away from zero
        children.map(lambda c: ex.Div(c, ex.Const(2) + ex.XI * ex.Conj(ex.XI))),
        children.map(lambda c: ex.Exp(ex.Const(0.1) * c)),
    )


expressions = st.recursive(_leaf(), _extend, max_leaves=8)
points = st.complex_numbers(max_magnitude=1.5, allow_nan=False, allow_infinity=False)
