"""End-to-end acceptance checks, one test per numbered criterion.

Each test prints a single CRITERION n: PASS/FAIL line (visible with -s or on
failure) before asserting, so a full run yields a scoreboard.
"""
import json
import math
import time

import numpy as np
import pytest

from rkl import bergman, cli, convergence, heatgreen, isothermal, spectral
from rkl.surface import (
    EuclideanPlane,
    HyperbolicDisc,
    Region,
    Sphere,
    chart_from_callable,
)

J01 = 2.404825557695773


def report(n, ok, detail=""):
    tag = "PASS" if ok else "FAIL"
    suffix = f" ({detail})" if detail else ""
    print(f"CRITERION {n}: {tag}{suffix}")
    assert ok, f"criterion {n} failed{suffix}"


def ball(model, R):
    return Region(model, "ball", center=(0.0, 0.0), radius=R)


def test_criterion_1_bergman_oracles():
    t0 = time.perf_counter()
    sp = bergman.build_bergman_space(("disc", 0j, 1.0), 40)
    ok = True
    for z in (0.0, 0.3, 0.5):
        got = bergman.kernel_diag(sp, complex(z)).raw.real
        exact = 1.0 / (math.pi * (1 - z * z) ** 2)
        ok &= abs(got - exact) <= 1e-3 * exact
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 1.0

    an = bergman.build_bergman_space(("annulus", 0j, 0.5, 1.0), 40)
    got = bergman.kernel_diag(an, 0.7 + 0j).raw.real
    exact = 0.0
    for n in range(-80, 80):
        if n == -1:
            nrm = 2 * math.pi * math.log(2.0)
        else:
            nrm = 2 * math.pi * (1.0 - 0.5 ** (2 * n + 2)) / (2 * n + 2)
        exact += 0.7 ** (2 * n) / nrm
    ok &= abs(got - exact) <= 1e-3 * exact
    report(1, ok, f"disc+annulus oracles, {elapsed:.2f}s")


def test_criterion_2_isothermal_solver():
    t0 = time.perf_counter()
    chart = chart_from_callable(lambda x, y: (4.0, 0.0, 1.0),
                                (0.0, 1.0, 0.0, 1.0), (129, 129))
    patch = isothermal.solve_isothermal(chart, (0.5, 0.5))
    mu = patch.wzbar[patch.mask] / patch.wz[patch.mask]
    ok = float(np.max(np.abs(mu - 1.0 / 3.0))) < 1e-10
    ok &= patch.cr_residual < 1e-8
    Z = (2 * patch.X + 1j * patch.Y)[patch.mask]
    W = patch.w[patch.mask]
    A = np.column_stack([Z, np.ones_like(Z)])
    coef, *_ = np.linalg.lstsq(A, W, rcond=None)
    ok &= float(np.max(np.abs(A @ coef - W))) < 1e-8

    rect = (0.9, math.pi - 0.9, 0.0, 1.4)
    center = (0.5 * (rect[0] + rect[1]), 0.7)

    def max_err(npatch):
        ch = chart_from_callable(
            lambda t, ph: (1.0, 0.0, math.sin(t) ** 2), rect, (257, 257))
        p = isothermal.solve_isothermal(ch, center, nodes_per_axis=npatch)
        K = p.recovered_curvature()
        ax = p.axis
        X, Y = np.meshgrid(ax, ax)
        inner = X**2 + Y**2 <= (0.7 * p.patch_radius) ** 2
        return float(np.nanmax(np.abs(K - 1.0)[inner]))

    ratio = max_err(64) / max_err(128)
    ok &= ratio >= 3.0
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 10.0
    report(2, ok, f"mu exact, error drop x{ratio:.1f}, {elapsed:.1f}s")


def test_criterion_3_spectral_oracles():
    disc = ball(EuclideanPlane(), 1.0)
    lam_disc = spectral.lambda1_dirichlet(disc).lambda1
    ok_disc = abs(lam_disc - J01**2) <= 0.01 * J01**2

    lam_sphere = spectral.lambda1_closed_meanzero(Sphere()).lambda1
    ok_sphere = abs(lam_sphere - 2.0) <= 0.02

    b8 = ball(HyperbolicDisc(), 8.0)
    lam_b8 = spectral.lambda1_dirichlet(b8).lambda1
    ok_window = 0.25 <= lam_b8 <= 0.30

    cap = Region(Sphere(), "ball", center=(math.pi / 2, 1.0), radius=2.0)
    gaps = [spectral.lambda1_dbar_identity_check(reg, cells=128)[2]
            for reg in (disc, b8, cap)]
    ok_gap = all(g <= 0.02 for g in gaps)

    ok = ok_disc and ok_sphere and ok_window and ok_gap
    report(3, ok,
           f"disc {lam_disc:.4f}, sphere {lam_sphere:.4f}, "
           f"B_8 {lam_b8:.4f} in [0.25,0.30]={ok_window}, "
           f"max identity gap {max(gaps):.2%}")


def test_criterion_4_isoperimetric_sweeps():
    sw = spectral.isoperimetric_sweep(EuclideanPlane(), 2.0, 5.0)
    target = 2 * math.sqrt(math.pi)
    ok = float(np.max(np.abs(np.array(sw.ratios) - target))) < 1e-10

    swh = spectral.isoperimetric_sweep(HyperbolicDisc(), math.inf, 10.0)
    ok &= abs(swh.inf_value - 1.0) <= 1e-3

    audit = spectral.inequality_audit(HyperbolicDisc(), nu=4.0)
    ratio = audit["cheeger"]["ratio"]
    ok &= audit["cheeger"]["ok"] and abs(ratio - 1.0) <= 0.02
    report(4, ok, f"I_inf {swh.inf_value:.5f}, Cheeger ratio {ratio:.4f}")


def test_criterion_5_heat_green_chain():
    hf = heatgreen.heat_field(("rect", -0.8, 0.8, -0.8, 0.8), cells=48)
    x = (0.0, 0.0)
    ok = hf.semigroup_residual(0.1, 0.05, x, x) <= 1e-8
    ok &= hf.mass(0.1, x) <= 1.0 + 1e-8
    ok &= abs(4 * math.pi * 0.01 * hf.evaluate(0.01, x, x) - 1.0) <= 0.03

    m = EuclideanPlane()
    cap = heatgreen.capacity(ball(m, 1.0), ball(m, 2.0))
    ok &= abs(cap - 2 * math.pi / math.log(2.0)) <= 0.01 * cap

    rng = np.random.default_rng(0)
    for _ in range(10):
        r1 = float(rng.uniform(0.5, 1.5))
        r2 = r1 + float(rng.uniform(0.5, 1.5))
        rep = heatgreen.capacity_green_sandwich(
            ball(m, r1), ball(m, r2), pole=(0.0, 0.0), cells=128, slack=0.01)
        ok &= rep["ok"]

    for model in (EuclideanPlane(), HyperbolicDisc()):
        for R in (2.0, 3.0, 4.0):
            ok &= heatgreen.capacity_lower_step(model, R)["ok"]
    report(5, ok)


def test_criterion_6_exhaustion_convergence():
    rep = convergence.exhaustion_experiment(HyperbolicDisc(), E_radius=0.0,
                                            R_list=[3, 4, 5, 6])
    ok = True
    for R, d in zip(rep.R_values, rep.differences):
        exact = (math.tanh(R / 2.0) ** -2 - 1.0) / (4 * math.pi)
        ok &= abs(d - exact) <= 0.05 * exact
        ok &= d <= 2.0 / R + 4.0 / R**2
    slope = float(np.polyfit(rep.R_values, np.log(rep.differences), 1)[0])
    ok &= slope <= -0.9
    report(6, ok, f"slope {slope:.2f}, verdict {rep.verdict}")


def test_criterion_7_blended_metric_limit():
    rep = convergence.blended_metric_experiment(R_list=(4.0, 6.0, 8.0))
    target = 1.0 / (4 * math.pi)
    ks = [r["kernel"] for r in rep.rows]
    diffs = rep.differences
    ok = all(b < a for a, b in zip(diffs, diffs[1:]))
    ok &= abs(ks[-1] - target) <= 1e-3 * target
    ok &= all(r["kernel"] <= r["kernel_ball"] * (1 + 1e-9) for r in rep.rows)
    ok &= rep.params["condition_ok"] and rep.params["lambda1_R2_min"] > 0
    report(7, ok, f"kernel {ks[-1]:.6f} -> {target:.6f}, "
                  f"min lambda1 R^2 {rep.params['lambda1_R2_min']:.2f}")


def test_criterion_8_counterexample():
    out = convergence.counterexample_experiment()
    ok = all(k == 0.0 for k in out["kernel_exhausting"])
    ok &= out["kernel_hemisphere"] > 0
    ok &= out["verdict"] == "not_converged"
    report(8, ok, f"hemisphere kernel {out['kernel_hemisphere']:.6f}")


def test_criterion_9_determinism(tmp_path, monkeypatch):
    blobs = {}
    for threads in ("1", "4"):
        monkeypatch.setenv("RKL_THREADS", threads)
        jout = tmp_path / "run.json"
        cout = tmp_path / "run.csv"
        rc = cli.main(["experiment", "--set", "experiment=exhaustion",
                       "--set", "R=3,4,5,6", "--set", "basis_size=32",
                       "--json", str(jout), "--csv", str(cout)])
        assert rc == 0
        blobs[threads] = (jout.read_bytes(), cout.read_bytes())
    ok = blobs["1"] == blobs["4"]
    json.loads(blobs["1"][0].decode("utf-8"))
    report(9, ok)
