import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rkl import convergence as cv
from rkl.errors import DomainError
from rkl.surface import EuclideanPlane, HyperbolicDisc, chart_from_callable


def hyperbolic_center_diff(R):
    t = math.tanh(R / 2.0)
    return (t**-2 - 1.0) / (4.0 * math.pi)


# --- cutoff profile -----------------------------------------------------------


def test_cutoff_profile_shape():
    prof = cv.CutoffProfile()
    assert prof(0.0) == 1.0 and prof(0.5) == 1.0
    assert prof(1.0) == 0.0 and prof(2.0) == 0.0
    rep = prof.check_profile()
    assert rep["monotone"]
    assert rep["sup_derivative"] == pytest.approx(prof.sup_derivative, rel=1e-3)
    assert prof.sup_derivative == pytest.approx(15.0 / 4.0)


# --- verdict policy -----------------------------------------------------------


def test_verdict_policy():
    assert cv._verdict([0.02, 0.01, 0.005, 0.002]) == "converged"
    assert cv._verdict([0.0, 0.0, 0.0, 0.0]) == "converged"
    assert cv._verdict([0.02, 0.01, 0.02, 0.01, 0.02, 0.01]) == "not_converged"
    assert cv._verdict([0.08, 0.08, 0.08, 0.08]) == "not_converged"
    assert cv._verdict([0.7, 0.5, 0.4, 0.3]) == "inconclusive"
    assert cv._verdict([0.1, 0.05]) == "inconclusive"


def test_report_rejects_negative_differences():
    with pytest.raises(DomainError):
        cv.ConvergenceReport("x", [1.0], [-0.1])


# --- exhaustion ----------------------------------------------------------------


def test_exhaustion_hyperbolic_matches_closed_form():
    rep = cv.exhaustion_experiment(HyperbolicDisc(), E_radius=0.0,
                                   R_list=[3, 4, 5, 6])
    for R, d in zip(rep.R_values, rep.differences):
        assert d == pytest.approx(hyperbolic_center_diff(R), rel=0.05)
        assert d <= 2.0 / R + 4.0 / R**2
    assert rep.verdict == "converged"
    slope = np.polyfit(rep.R_values, np.log(rep.differences), 1)[0]
    assert slope <= -0.9


def test_exhaustion_stencil_variant():
    rep = cv.exhaustion_experiment(HyperbolicDisc(), E_radius=1.0,
                                   R_list=[6.5, 8, 10, 12])
    assert rep.verdict == "converged"
    assert all(r["dominated"] for r in rep.rows)


def test_exhaustion_euclidean_bound_diverges():
    rep = cv.exhaustion_experiment(EuclideanPlane(), E_radius=0.0,
                                   R_list=[3, 4, 5, 6])
    assert all(math.isinf(r["bound_eigenvalue"]) for r in rep.rows)
    for R, d in zip(rep.R_values, rep.differences):
        assert d == pytest.approx(1.0 / (math.pi * R * R), rel=1e-6)
    assert rep.verdict == "converged"


def test_exhaustion_radius_precondition():
    with pytest.raises(DomainError):
        cv.exhaustion_experiment(HyperbolicDisc(), E_radius=1.0,
                                 R_list=[3, 4, 5, 6])


# --- log-rate -------------------------------------------------------------------


def test_log_rate_synthetic_fit_recovery():
    Rs = [6.5, 8, 10, 12, 16, 20, 25, 30]
    c = 0.7
    rep = cv.log_rate_experiment(R_list=Rs,
                                 differences=[c / math.log(R) for R in Rs])
    assert rep.params["C1"] == pytest.approx(c, rel=1e-2)
    assert rep.params["validated"]


def test_log_rate_hyperbolic_validated():
    rep = cv.log_rate_experiment(HyperbolicDisc(), nu=3.0, E_radius=0.0,
                                 R_list=[3, 4, 5, 6, 8, 10])
    assert rep.params["validated"]
    assert rep.verdict == "converged"


def test_log_rate_short_list_inconclusive():
    rep = cv.log_rate_experiment(R_list=[7, 9, 11],
                                 differences=[0.1, 0.05, 0.02])
    assert rep.verdict == "inconclusive"


# --- perturbation ----------------------------------------------------------------


RECT = (0.0, 1.0, 0.0, 1.0)


def flat_chart():
    return chart_from_callable(lambda x, y: (1.0, 0.0, 1.0), RECT, (65, 65))


def test_perturbation_anisotropic_sequence():
    perts = [chart_from_callable(
        lambda x, y, j=j: (1.0 + 2.0 / j, 0.0, 1.0), RECT, (65, 65))
        for j in (8, 16, 32, 64)]
    out = cv.perturbation_experiment(flat_chart(), perts)
    gaps = out["gaps"]
    assert all(b < a for a, b in zip(gaps, gaps[1:]))
    assert gaps[-1] <= 1e-2
    assert all(d <= 1e-9 for d in out["inequality_defects"])
    assert out["verdict"] == "converged"


def test_perturbation_conformal_invariance():
    perts = [chart_from_callable(
        lambda x, y, j=j: (1.0 + 1.0 / j, 0.0, 1.0 + 1.0 / j), RECT, (65, 65))
        for j in (8, 16, 32, 64)]
    out = cv.perturbation_experiment(flat_chart(), perts)
    assert all(g <= 1e-6 for g in out["gaps"])
    assert out["verdict"] == "converged"


def test_perturbation_alternating_not_converged():
    perts = [chart_from_callable(
        lambda x, y, j=j: (1.25 if j % 2 == 0 else 1.125, 0.0, 1.0),
        RECT, (65, 65)) for j in range(6)]
    out = cv.perturbation_experiment(flat_chart(), perts)
    assert out["verdict"] == "not_converged"


# --- blended-metric sequence ------------------------------------------------------


def test_blended_metric_converges_to_hyperbolic_kernel():
    rep = cv.blended_metric_experiment(R_list=(3.0, 4.0, 5.0, 6.0),
                                       n_rho=600, n_t=128, lambda1_cells=48)
    target = 1.0 / (4.0 * math.pi)
    ks = [r["kernel"] for r in rep.rows]
    assert ks[-1] == pytest.approx(target, rel=1e-3)
    diffs = rep.differences
    assert all(b < a for a, b in zip(diffs, diffs[1:]))
    assert rep.verdict == "converged"
    # guard: never exceeds the pure ball kernel
    for r in rep.rows:
        assert r["kernel"] <= r["kernel_ball"] * (1 + 1e-9)
    assert rep.params["condition_ok"]
    assert rep.params["lambda1_R2_min"] > 0
    # gap stays a small multiple of the sqrt tail mass
    assert all(c <= 0.05 for c in rep.params["sqrt_tail_constants"])


def test_blended_metric_conformal_variant_exact():
    rep = cv.blended_metric_experiment(R_list=(3.0, 4.0), n_rho=600, n_t=128,
                                       conformal_outside=True,
                                       lambda1_cells=48)
    # conformal outside keeps the complex structure: the kernel equals the
    # ball kernel of the enlarged radius up to quadrature error
    for r in rep.rows:
        exact = math.tanh((r["R"] + 4.0) / 2.0) ** -2 / (4 * math.pi)
        assert r["kernel"] == pytest.approx(exact, rel=1e-4)


def test_radial_transform_modes_consistency():
    # constant dilatation on the full disc: W = z + mu zbar exactly
    s = np.linspace(0.0, 0.999, 2000)
    g = np.full_like(s, 0.2)
    cau = cv._cauchy_mode(g, s, 0)
    assert np.max(np.abs(cau - 0.2 * s)) < 1e-12
    beu = cv._beurling_mode(g, s, 0)
    assert np.max(np.abs(beu[1:])) < 1e-10


@settings(max_examples=10, deadline=None)
@given(amp=st.floats(0.01, 0.45))
def test_radial_beltrami_orientation(amp):
    s = np.linspace(0.0, 0.99, 400)
    modes, info = cv.solve_radial_beltrami(
        lambda v: amp * v * v, s, n_iter=16)
    assert info["sup_mu"] < 1.0
    assert info["last_delta"] < 1e-6


# --- counterexample -----------------------------------------------------------------


def test_counterexample_persistent_gap():
    out = cv.counterexample_experiment()
    assert out["kernel_hemisphere"] == pytest.approx(1.0 / (4 * math.pi),
                                                     rel=1e-6)
    assert all(k == 0.0 for k in out["kernel_exhausting"])
    assert out["verdict"] == "not_converged"
