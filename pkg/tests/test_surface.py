import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rkl.errors import DomainError, MetricError
from rkl.surface import (
    EuclideanPlane,
    FlatTorus,
    GridChart,
    HyperbolicDisc,
    Region,
    Revolution,
    Sphere,
    chart_from_callable,
    chart_from_model,
    curvature_field,
    geodesic_ball,
    load_chart,
    measure,
    save_chart,
)


def flat_chart(n=33, rect=(0.0, 1.0, 0.0, 1.0)):
    return chart_from_callable(lambda x, y: (1.0, 0.0, 1.0), rect, (n, n))


# --- chart validity -------------------------------------------------------


def test_chart_rejects_nonpositive_metric():
    E = np.ones((9, 9))
    F = np.zeros((9, 9))
    G = np.ones((9, 9))
    E[4, 4] = -1.0
    with pytest.raises(MetricError):
        GridChart(0.0, 1.0, 0.0, 1.0, E, F, G)


def test_chart_rejects_indefinite_tensor():
    E = np.ones((9, 9))
    G = np.ones((9, 9))
    F = np.full((9, 9), 1.5)  # EG - F^2 < 0
    with pytest.raises(MetricError):
        GridChart(0.0, 1.0, 0.0, 1.0, E, F, G)


@settings(max_examples=30, deadline=None)
@given(
    e=st.floats(0.2, 5.0),
    g=st.floats(0.2, 5.0),
    t=st.floats(-0.9, 0.9),
    amp=st.floats(0.0, 0.05),
)
def test_chart_accepts_random_positive_tensors(e, g, t, amp):
    f = t * math.sqrt(e * g)
    n = 9
    xs = np.linspace(0, 1, n)
    bump = amp * np.sin(3 * xs)[None, :] * np.cos(2 * xs)[:, None]
    chart = GridChart(0.0, 1.0, 0.0, 1.0,
                      e * np.ones((n, n)) + bump,
                      f * np.ones((n, n)),
                      g * np.ones((n, n)) + bump)
    assert chart.contains((0.5, 0.5))


def test_chart_save_load_roundtrip(tmp_path):
    chart = chart_from_model(Sphere(), (0.5, 2.5, 0.0, 1.0), (17, 17))
    path = tmp_path / "m.grid"
    save_chart(chart, path)
    back = load_chart(path)
    assert np.allclose(back.E, chart.E)
    assert np.allclose(back.G, chart.G)
    assert back.x0 == chart.x0 and back.y1 == chart.y1


# --- curvature ------------------------------------------------------------


def test_sphere_chart_curvature_second_order():
    errs = []
    for n in (33, 65):
        chart = chart_from_model(Sphere(), (0.8, math.pi - 0.8, 0.0, 1.2),
                                 (n, n))
        K = curvature_field(chart)
        errs.append(float(np.max(np.abs(K[4:-4, 4:-4] - 1.0))))
    assert errs[0] / errs[1] >= 3.0


def test_hyperbolic_chart_curvature_minus_one():
    chart = chart_from_model(HyperbolicDisc(), (-0.4, 0.4, -0.4, 0.4),
                             (65, 65))
    K = curvature_field(chart)
    assert np.max(np.abs(K[4:-4, 4:-4] + 1.0)) < 5e-3


# --- distances ------------------------------------------------------------


def test_hyperbolic_distance_closed_form():
    m = HyperbolicDisc()
    for R in (0.5, 1.0, 2.0):
        s = math.tanh(R / 2.0)
        assert m.distance((0, 0), (s, 0)) == pytest.approx(R, rel=1e-12)


@settings(max_examples=40, deadline=None)
@given(
    ax=st.floats(-0.7, 0.7), ay=st.floats(-0.7, 0.7),
    bx=st.floats(-0.7, 0.7), by=st.floats(-0.7, 0.7),
)
def test_hyperbolic_distance_symmetry(ax, ay, bx, by):
    m = HyperbolicDisc()
    assert m.distance((ax, ay), (bx, by)) == pytest.approx(
        m.distance((bx, by), (ax, ay)), abs=1e-12)


def test_chart_distance_triangle_inequality():
    chart = flat_chart(n=49)
    from rkl.surface import fast_marching_distance

    d_a, _ = fast_marching_distance(chart, (0.2, 0.2))
    d_m, _ = fast_marching_distance(chart, (0.6, 0.5))
    # d(a, q) <= d(a, m) + d(m, q) + tol at a sampled q
    iq, jq = 40, 44
    im, jm = 24, 28  # nearest grid node to m
    tol = 3 * chart.hx
    assert d_a[jq, iq] <= d_a[jm, im] + d_m[jq, iq] + tol


def test_injectivity_radii():
    assert HyperbolicDisc().injectivity_radius((0, 0)) == math.inf
    assert Sphere().injectivity_radius((1.0, 0.0)) == pytest.approx(math.pi)
    cyl = Revolution(profile=lambda s: 1.5, length=4.0)
    assert cyl.injectivity_radius((2.0, 0.0)) == pytest.approx(
        math.pi * 1.5, rel=1e-6)


def test_flat_torus_basics():
    t = FlatTorus()
    assert t.compact
    assert t.distance((0.1, 0.0), (2 * math.pi - 0.1, 0.0)) == pytest.approx(0.2)
    assert t.exact_lambda1 == pytest.approx(1.0)
    assert t.area == pytest.approx(4 * math.pi**2)


# --- balls and measure ----------------------------------------------------


def test_hyperbolic_ball_measure():
    m = HyperbolicDisc()
    for r in (1.0, 3.0, 5.0):
        ball = Region(m, "ball", center=(0.0, 0.0), radius=r)
        area, per = measure(ball)
        assert area == pytest.approx(2 * math.pi * (math.cosh(r) - 1), rel=5e-3)
        assert per == pytest.approx(2 * math.pi * math.sinh(r), rel=5e-3)


def test_geodesic_ball_on_chart_mask():
    chart = flat_chart(n=129)
    ball = geodesic_ball(chart, (0.5, 0.5), 0.3)
    assert ball.kind == "mask"
    area, per = measure(ball)
    assert area == pytest.approx(math.pi * 0.09, rel=0.05)


def test_ball_rejects_nonpositive_radius():
    with pytest.raises(DomainError):
        geodesic_ball(EuclideanPlane(), (0, 0), -1.0)
