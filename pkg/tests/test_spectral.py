import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rkl import spectral
from rkl.errors import DomainError
from rkl.surface import (
    EuclideanPlane,
    FlatTorus,
    HyperbolicDisc,
    Region,
    Sphere,
)

J01 = 2.404825557695773  # first zero of the Bessel function J0


def ball(model, R):
    return Region(model, "ball", center=(0.0, 0.0), radius=R)


# --- Dirichlet eigenvalues --------------------------------------------------


def test_euclidean_disc_lambda1():
    rep = spectral.lambda1_dirichlet(ball(EuclideanPlane(), 1.0))
    assert rep.lambda1 == pytest.approx(J01**2, rel=1e-2)
    assert rep.mode == "Dirichlet"


def test_square_lambda1():
    rep = spectral.lambda1_dirichlet(("rect", 0.0, math.pi, 0.0, math.pi))
    assert rep.lambda1 == pytest.approx(2.0, rel=1e-2)


def test_hyperbolic_ball_lambda1_values():
    # radial-shooting oracle values; decreasing toward the 1/4 spectral bottom
    rep8 = spectral.lambda1_dirichlet(ball(HyperbolicDisc(), 8.0))
    assert rep8.lambda1 == pytest.approx(0.367417, rel=1e-2)
    rep4 = spectral.lambda1_dirichlet(ball(HyperbolicDisc(), 4.0))
    assert rep4.lambda1 == pytest.approx(0.66332, rel=1e-2)
    assert rep8.lambda1 < rep4.lambda1
    assert rep8.lambda1 > 0.25


def test_domain_inclusion_monotonicity():
    inner = spectral.lambda1_dirichlet(ball(EuclideanPlane(), 1.0), cells=32)
    outer = spectral.lambda1_dirichlet(ball(EuclideanPlane(), 1.5), cells=32)
    assert outer.lambda1 < inner.lambda1


def test_metric_scaling_covariance():
    c2 = 2.5

    def scaled(x, y):
        return (c2, 0.0, c2)

    base = spectral.lambda1_dirichlet(("rect", 0.0, math.pi, 0.0, math.pi),
                                      cells=48)
    scal = spectral.lambda1_dirichlet(("rect", 0.0, math.pi, 0.0, math.pi),
                                      metric=scaled, cells=48)
    assert scal.lambda1 == pytest.approx(base.lambda1 / c2, rel=1e-2)


def test_report_extrapolation_bracket():
    rep = spectral.lambda1_dirichlet(ball(EuclideanPlane(), 1.0), cells=32)
    ests = [e for _, e in rep.resolutions]
    spread = abs(ests[-1] - ests[-2])
    assert abs(rep.extrapolated - ests[-1]) <= spread + 1e-14


# --- closed surfaces --------------------------------------------------------


def test_sphere_lambda1():
    rep = spectral.lambda1_closed_meanzero(Sphere())
    assert rep.lambda1 == pytest.approx(2.0, rel=1e-2)
    assert rep.mode == "MeanZeroClosed"


def test_sphere_radius_scaling():
    rep = spectral.lambda1_closed_meanzero(Sphere(radius=2.0))
    assert rep.lambda1 == pytest.approx(0.5, rel=1e-2)


def test_flat_torus_lambda1():
    rep = spectral.lambda1_closed_meanzero(FlatTorus())
    assert rep.lambda1 == pytest.approx(1.0, rel=1e-2)


# --- dbar identity -----------------------------------------------------------


def test_dbar_identity_square():
    ratio, lam1, gap = spectral.lambda1_dbar_identity_check_rect(
        (0.0, math.pi, 0.0, math.pi))
    assert lam1 == pytest.approx(2.0, rel=1e-2)
    assert gap <= 0.02


def test_dbar_identity_disc():
    ratio, lam1, gap = spectral.lambda1_dbar_identity_check(
        ball(EuclideanPlane(), 1.0))
    assert lam1 == pytest.approx(J01**2, rel=1e-2)
    assert gap <= 0.02


def test_dbar_identity_scaling_covariance():
    rect = (0.0, math.pi, 0.0, math.pi)
    r1 = spectral.lambda1_dbar_identity_check_rect(rect, cells=64)
    c2 = 4.0
    r2 = spectral.lambda1_dbar_identity_check_rect(
        rect, metric=lambda x, y: (c2, 0.0, c2), cells=64)
    assert r2[0] == pytest.approx(r1[0] / c2, rel=1e-6)
    assert r2[2] == pytest.approx(r1[2], abs=1e-6)


# --- isoperimetric sweeps ----------------------------------------------------


def test_euclidean_sweep_constant():
    sw = spectral.isoperimetric_sweep(EuclideanPlane(), 2.0, 5.0)
    target = 2 * math.sqrt(math.pi)
    assert np.max(np.abs(np.array(sw.ratios) - target)) < 1e-10
    assert sw.inf_value == pytest.approx(target, abs=1e-10)


def test_hyperbolic_cheeger_constant():
    sw = spectral.isoperimetric_sweep(HyperbolicDisc(), math.inf, 10.0)
    assert sw.inf_value == pytest.approx(1.0, rel=1e-3)
    # ratio at radius r is cosh(r/2)/sinh(r/2)
    r = sw.radii[-1]
    assert sw.ratios[-1] == pytest.approx(1.0 / math.tanh(r / 2), rel=1e-6)


def test_sphere_compact_sweep_equator():
    sw = spectral.isoperimetric_sweep(Sphere(), 2.0, math.pi / 2,
                                      compact_mode=True)
    assert sw.inf_value == pytest.approx(math.sqrt(2 * math.pi), rel=1e-3)


def test_sweep_radius_guard_on_compact():
    with pytest.raises(DomainError):
        spectral.isoperimetric_sweep(Sphere(), 2.0, 10.0)


@settings(max_examples=20, deadline=None)
@given(nu=st.floats(2.1, 12.0), r=st.floats(0.5, 6.0))
def test_sweep_ratios_positive(nu, r):
    sw = spectral.isoperimetric_sweep(EuclideanPlane(), nu, r, samples=10)
    assert all(x > 0 for x in sw.ratios)
    assert sw.inf_value == min(sw.ratios)


# --- inequality audit --------------------------------------------------------


def test_hyperbolic_audit_cheeger_sharp():
    rep = spectral.inequality_audit(HyperbolicDisc(), nu=4.0)
    assert rep["all_ok"]
    assert rep["cheeger"]["ratio"] == pytest.approx(1.0, rel=2e-2)
    assert rep["I_inf"] == pytest.approx(1.0, rel=1e-3)


def test_sphere_audit_li_measured():
    rep = spectral.inequality_audit(Sphere(), lambda1=2.0, nu=None,
                                    r_max=math.pi / 2)
    assert rep["li"]["measured"] == pytest.approx(4.0, rel=2e-2)
    assert rep["li"]["ok"]


def test_euclidean_sobolev_nash_bumps():
    rep = spectral.inequality_audit(EuclideanPlane(), lambda1=None, nu=4.0)
    assert all(row["ok"] for row in rep["sobolev_l2"])
    assert all(row["ok"] for row in rep["nash"])
