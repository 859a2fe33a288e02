import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rkl import isothermal
from rkl.surface import chart_from_callable


def constant_chart(E, F, G, n=65):
    return chart_from_callable(lambda x, y: (E, F, G), (0.0, 1.0, 0.0, 1.0),
                               (n, n))


def affine_fit_residual(patch, target):
    """Max residual of the best affine fit of patch.w against target(X, Y)."""
    Z = target(patch.X, patch.Y)[patch.mask]
    W = patch.w[patch.mask]
    A = np.column_stack([Z, np.ones_like(Z)])
    coef, *_ = np.linalg.lstsq(A, W, rcond=None)
    return float(np.max(np.abs(A @ coef - W)))


def test_anisotropic_constant_metric_exact():
    # metric 4 dx^2 + dy^2: dilatation 1/3, coordinate ~ 2x + iy
    chart = constant_chart(4.0, 0.0, 1.0, n=129)
    patch = isothermal.solve_isothermal(chart, (0.5, 0.5))
    mu = patch.wzbar[patch.mask] / patch.wz[patch.mask]
    assert np.max(np.abs(mu - 1.0 / 3.0)) < 1e-10
    assert patch.cr_residual < 1e-8
    assert affine_fit_residual(patch, lambda X, Y: 2 * X + 1j * Y) < 1e-8


def test_already_isothermal_chart_gives_affine_map():
    chart = constant_chart(2.5, 0.0, 2.5)
    patch = isothermal.solve_isothermal(chart, (0.5, 0.5))
    assert np.max(np.abs(patch.wzbar[patch.mask])) < 1e-10
    assert affine_fit_residual(patch, lambda X, Y: X + 1j * Y) < 1e-8


def test_gauge_normalization_at_center():
    chart = constant_chart(4.0, 0.0, 1.0)
    patch = isothermal.solve_isothermal(chart, (0.5, 0.5))
    # conformal factor is 1 at the center and the coordinate vanishes there
    assert patch.lambda_at((0.5, 0.5)) == pytest.approx(1.0, abs=1e-10)
    assert abs(patch.map_point((0.5, 0.5))) < 1e-12
    assert patch.jacobian_min > 0


def test_lax_milgram_flag_recorded():
    chart = chart_from_callable(
        lambda x, y: (1.0 + 0.3 * math.sin(2 * x) * math.cos(y), 0.1, 1.2),
        (0.0, 1.0, 0.0, 1.0), (65, 65))
    patch = isothermal.solve_isothermal(chart, (0.5, 0.5))
    assert patch.diagnostics["lax_milgram_ok"]
    assert patch.cr_residual < 1e-4


def test_pullback_recovers_input_metric():
    chart = chart_from_callable(
        lambda x, y: (1.0 + 0.2 * x, 0.05, 1.0 + 0.1 * y),
        (0.0, 1.0, 0.0, 1.0), (129, 129))
    patch = isothermal.solve_isothermal(chart, (0.5, 0.5))
    E, F, G = patch.pullback_metric()
    ax = patch.axis
    X, Y = np.meshgrid(ax, ax)
    inner = X**2 + Y**2 <= (0.7 * patch.patch_radius) ** 2
    Ec, Fc, Gc = (np.empty_like(E) for _ in range(3))
    for (j, i) in zip(*np.nonzero(inner)):
        p = (patch.X[j, i], patch.Y[j, i])
        Ec[j, i] = chart.interp("E", p)
        Fc[j, i] = chart.interp("F", p)
        Gc[j, i] = chart.interp("G", p)
    assert np.max(np.abs((E - Ec)[inner])) < 1e-3
    assert np.max(np.abs((F - Fc)[inner])) < 1e-3
    assert np.max(np.abs((G - Gc)[inner])) < 1e-3


def test_curvature_invariance_second_order():
    rect = (0.9, math.pi - 0.9, 0.0, 1.4)
    center = (0.5 * (rect[0] + rect[1]), 0.7)

    def max_err(npatch):
        chart = chart_from_callable(
            lambda t, ph: (1.0, 0.0, math.sin(t) ** 2), rect, (257, 257))
        patch = isothermal.solve_isothermal(chart, center,
                                            nodes_per_axis=npatch)
        K = patch.recovered_curvature()
        ax = patch.axis
        X, Y = np.meshgrid(ax, ax)
        inner = X**2 + Y**2 <= (0.7 * patch.patch_radius) ** 2
        return float(np.nanmax(np.abs(K - 1.0)[inner]))

    e1, e2 = max_err(64), max_err(128)
    assert e1 / e2 >= 3.0


@settings(max_examples=15, deadline=None)
@given(
    e=st.floats(0.5, 4.0),
    g=st.floats(0.5, 4.0),
    t=st.floats(-0.8, 0.8),
)
def test_dilatation_bounded_by_one(e, g, t):
    f = t * math.sqrt(e * g)
    chart = constant_chart(e, f, g, n=33)
    patch = isothermal.solve_isothermal(chart, (0.5, 0.5))
    mu = np.abs(patch.wzbar[patch.mask] / patch.wz[patch.mask])
    assert np.max(mu) < 1.0


def test_sequence_convergence_uniform_gauge():
    limit = constant_chart(1.0, 0.0, 1.0)
    charts = [constant_chart(1.0 + 0.5 / j, 0.0, 1.0) for j in (2, 4, 8, 16)]
    rep = isothermal.patch_sequence_convergence(charts, limit, (0.5, 0.5))
    assert rep.monotone_w and rep.monotone_lam
    assert rep.dw[-1] < rep.dw[0]
