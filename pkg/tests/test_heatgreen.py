import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rkl import heatgreen
from rkl.errors import DomainError
from rkl.surface import EuclideanPlane, HyperbolicDisc, Region


def ball(model, R):
    return Region(model, "ball", center=(0.0, 0.0), radius=R)


@pytest.fixture(scope="module")
def square_field():
    # side-6 Euclidean square, used by several checks
    return heatgreen.heat_field(("rect", -3.0, 3.0, -3.0, 3.0), cells=48)


# --- heat kernel basics -----------------------------------------------------


def test_semigroup_symmetry_mass(square_field):
    hf = square_field
    x, y = (0.0, 0.0), (0.7, -0.4)
    assert hf.semigroup_residual(0.3, 0.2, x, x) <= 1e-8
    assert hf.evaluate(0.4, x, y) == pytest.approx(hf.evaluate(0.4, y, x),
                                                   abs=1e-14)
    masses = [hf.mass(t, x) for t in (0.05, 0.2, 0.8, 2.0)]
    assert all(m <= 1.0 + 1e-8 for m in masses)
    assert all(b <= a + 1e-10 for a, b in zip(masses, masses[1:]))


def test_short_time_euclidean_profile():
    hf = heatgreen.heat_field(("rect", -0.8, 0.8, -0.8, 0.8), cells=48)
    p = hf.evaluate(0.01, (0.0, 0.0), (0.0, 0.0))
    assert 4 * math.pi * 0.01 * p == pytest.approx(1.0, rel=0.03)


def test_ondiag_fit_euclidean(square_field):
    fit = heatgreen.ondiag_fit(square_field, (0.0, 0.0), t_window=(0.05, 0.5))
    assert fit.nu_hat == pytest.approx(2.0, abs=0.05)
    assert fit.c == pytest.approx(1.0 / (4 * math.pi), rel=0.03)
    assert fit.regular_defect() == pytest.approx(1.0, abs=1e-9)


def test_regularity_power_law_defect():
    fit = heatgreen.RegularityFit(c=0.5, nu_hat=3.0)
    assert fit.regular_defect() == pytest.approx(1.0, abs=1e-12)
    assert fit.kappa(4.0) == pytest.approx(4.0**1.5 / 0.5)


def test_gaussian_offdiag_transfer():
    hf = heatgreen.heat_field(("rect", -1.5, 1.5, -1.5, 1.5), cells=48)
    x, y = (0.0, 0.0), (1.0, 0.0)
    f1 = heatgreen.ondiag_fit(hf, x, t_window=(0.03, 0.3))
    f2 = heatgreen.ondiag_fit(hf, y, t_window=(0.03, 0.3))
    rep = heatgreen.gaussian_offdiag_check(hf, x, y, alpha=0.5, fit1=f1,
                                           fit2=f2, t_window=(0.03, 1.0))
    assert rep["exists"]
    assert rep["delta"] >= 0.5
    assert rep["sup_ratio_at_delta"] <= 1.0


def test_offdiag_bound_monotone_in_alpha():
    hf = heatgreen.heat_field(("rect", -1.5, 1.5, -1.5, 1.5), cells=32)
    x, y = (0.0, 0.0), (1.0, 0.0)
    f = heatgreen.ondiag_fit(hf, x, t_window=(0.05, 0.3))
    sups = []
    for alpha in (0.3, 0.6, 0.9):
        rep = heatgreen.gaussian_offdiag_check(hf, x, y, alpha, f, f,
                                               t_window=(0.05, 1.0))
        sups.append(rep["sup_ratio_at_one"])
    assert sups[0] < sups[1] < sups[2]


# --- capacities and Green functions ------------------------------------------


def test_concentric_capacity_closed_forms():
    m = EuclideanPlane()
    cap = heatgreen.capacity(ball(m, 1.0), ball(m, 2.0))
    assert cap == pytest.approx(2 * math.pi / math.log(2.0), rel=1e-2)
    cap_e = heatgreen.capacity(ball(m, 1.0), ball(m, math.e))
    assert cap_e == pytest.approx(2 * math.pi, rel=1e-2)


def test_capacity_order_guard():
    m = EuclideanPlane()
    with pytest.raises(DomainError):
        heatgreen.capacity(ball(m, 2.0), ball(m, 1.0))


def test_green_field_euclidean_log():
    m = EuclideanPlane()
    gf = heatgreen.green_field(ball(m, 1.0), pole=(0.0, 0.0))
    got = gf.evaluate((0.5, 0.0))
    assert got == pytest.approx(math.log(2.0) / (2 * math.pi), rel=0.02)
    assert gf.harmonic_residual() <= 1e-9
    assert float(np.min(gf.values)) >= -1e-10


def test_green_equals_heat_time_integral():
    hf = heatgreen.heat_field(ball(EuclideanPlane(), 1.0), cells=32)
    gf = heatgreen.green_field(hf.disc, pole=(0.4, 0.2))
    x = (0.1, -0.3)
    assert hf.time_integral(400.0, x, (0.4, 0.2)) == pytest.approx(
        gf.evaluate(x), rel=1e-6)


def test_capacity_green_sandwich_concentric_and_offcenter():
    m = HyperbolicDisc()
    rep = heatgreen.capacity_green_sandwich(ball(m, 1.0), ball(m, 2.5),
                                            pole=(0.0, 0.0))
    assert rep["ok"]
    # off-center masked variant on the Euclidean plane
    e = EuclideanPlane()
    U = Region(e, "ball", center=(0.3, 0.1), radius=0.5)
    Om = Region(e, "ball", center=(0.0, 0.0), radius=2.0)
    rep2 = heatgreen.capacity_green_sandwich(U, Om, pole=(0.3, 0.1), cells=128)
    assert rep2["ok"]


def test_capacity_lower_step_both_models():
    for model in (EuclideanPlane(), HyperbolicDisc()):
        for R in (2.0, 3.0, 4.0):
            rep = heatgreen.capacity_lower_step(model, R)
            assert rep["ok"], (model.kind, R, rep)


@settings(max_examples=10, deadline=None)
@given(r1=st.floats(0.5, 1.5), dr=st.floats(0.5, 1.5))
def test_sandwich_random_concentric(r1, dr):
    m = EuclideanPlane()
    rep = heatgreen.capacity_green_sandwich(ball(m, r1), ball(m, r1 + dr),
                                            pole=(0.0, 0.0), cells=128)
    assert rep["ok"]


# --- Harnack / sub-mean ------------------------------------------------------


def test_harnack_constant_and_affine():
    rep = heatgreen.harnack_submean_measure(lambda x, y: 1.0, (0.0, 0.0), 1.0,
                                            model=EuclideanPlane())
    assert rep["harnack_ratio"] == pytest.approx(1.0, abs=1e-12)
    rep2 = heatgreen.harnack_submean_measure(lambda x, y: x + 2.0,
                                             (0.0, 0.0), 1.0,
                                             model=EuclideanPlane())
    assert rep2["harnack_ratio"] == pytest.approx(5.0 / 3.0, rel=1e-9)


def test_green_upper_bound_audit_finite():
    rep = heatgreen.green_upper_bound_audit(HyperbolicDisc(), nu=3.0,
                                            I_nu=1.0, R=6.0, cells=96)
    assert rep["finite"]
    with pytest.raises(DomainError):
        heatgreen.green_upper_bound_audit(EuclideanPlane(), nu=2.0, I_nu=1.0)
