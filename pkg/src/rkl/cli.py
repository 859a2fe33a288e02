"""Config-driven command line front end.

Line-oriented ``key = value`` configs ('#' comments) select a command and a
surface, run the computation, and write JSON/CSV reports with fixed float
formatting so identical configs produce byte-identical outputs.

Exit codes: 0 success, 1 invalid config, 2 numerical failure, 3 audit
violation (audit_mode only).
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass, field, fields, replace

import numpy as np

from . import bergman, convergence, heatgreen, isothermal, spectral
from .errors import ConfigError, RklError
from .surface import (
    EuclideanPlane,
    FlatTorus,
    HyperbolicDisc,
    Region,
    Sphere,
    chart_from_callable,
    load_chart,
)

COMMANDS = ("kernel", "isothermal", "spectral", "heat", "green", "capacity",
            "experiment")
SURFACES = ("hyperbolic_disc", "euclidean_plane", "sphere", "flat_torus",
            "chart")
EXPERIMENTS = ("exhaustion", "log_rate", "perturbation", "blended_metric",
               "counterexample")


@dataclass
class RunConfig:
    command: str = None
    surface: str = "hyperbolic_disc"
    chart_file: str = None
    experiment: str = None
    R: list = field(default_factory=lambda: [3.0])
    r_inner: float = 1.0
    r_outer: float = 2.0
    center_x: float = 0.0
    center_y: float = 0.0
    pole_x: float = None
    pole_y: float = None
    E_radius: float = 0.0
    basis_size: int = 64
    cells: int = 64
    h: float = None
    nu: float = 3.0
    alpha: float = 0.5
    t0: float = 0.05
    t1: float = 0.5
    tolerance: float = None
    output_json: str = None
    output_csv: str = None
    audit_mode: bool = False


def _parse_bool(s):
    low = s.strip().lower()
    if low in ("true", "1", "yes", "on"):
        return True
    if low in ("false", "0", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _parse_float_list(s):
    return [float(p) for p in s.replace(",", " ").split()]


def _positive(v):
    return v > 0


def _nonneg(v):
    return v >= 0


# key -> (converter, validator or None, description of the valid range)
_KEYS = {
    "command": (str, lambda v: v in COMMANDS, f"one of {COMMANDS}"),
    "surface": (str, lambda v: v in SURFACES, f"one of {SURFACES}"),
    "chart_file": (str, None, "path"),
    "experiment": (str, lambda v: v in EXPERIMENTS, f"one of {EXPERIMENTS}"),
    "R": (_parse_float_list,
          lambda v: len(v) > 0 and all(x > 0 for x in v),
          "positive number or comma-separated list"),
    "r_inner": (float, _positive, "> 0"),
    "r_outer": (float, _positive, "> 0"),
    "center_x": (float, None, "number"),
    "center_y": (float, None, "number"),
    "pole_x": (float, None, "number"),
    "pole_y": (float, None, "number"),
    "E_radius": (float, _nonneg, ">= 0"),
    "basis_size": (int, lambda v: 4 <= v <= 256, "integer in [4, 256]"),
    "cells": (int, lambda v: 8 <= v <= 1024, "integer in [8, 1024]"),
    "h": (float, lambda v: 0 < v <= 0.25, "in (0, 0.25]"),
    "nu": (float, lambda v: v > 2, "> 2"),
    "alpha": (float, lambda v: 0 < v < 1, "in (0, 1)"),
    "t0": (float, _positive, "> 0"),
    "t1": (float, _positive, "> 0"),
    "tolerance": (float, _positive, "> 0"),
    "output_json": (str, None, "path"),
    "output_csv": (str, None, "path"),
    "audit_mode": (_parse_bool, None, "boolean"),
}


def _apply_key(cfg_dict, key, raw, where):
    if key not in _KEYS:
        raise ConfigError(f"{where}: unknown key {key!r}")
    conv, check, desc = _KEYS[key]
    try:
        val = conv(raw)
    except ValueError as exc:
        raise ConfigError(f"{where}: malformed value for {key}: {raw!r}") from exc
    if check is not None and not check(val):
        raise ConfigError(f"{where}: {key} out of range (expected {desc}, "
                          f"got {raw!r})")
    cfg_dict[key] = val


def parse_config(text):
    """Parse the key = value grammar into a validated RunConfig."""
    out = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"line {lineno}: expected 'key = value', "
                              f"got {line.rstrip()!r}")
        key, _, raw = body.partition("=")
        _apply_key(out, key.strip(), raw.strip(), f"line {lineno}")
    cfg = RunConfig(**out)
    if cfg.command is None:
        raise ConfigError("missing required key 'command'")
    _cross_validate(cfg)
    return cfg


def _cross_validate(cfg):
    if cfg.surface == "chart" and cfg.chart_file is None:
        raise ConfigError("surface = chart requires chart_file")
    if cfg.command == "experiment" and cfg.experiment is None:
        raise ConfigError("command = experiment requires an experiment key")
    if cfg.command == "capacity" and cfg.r_inner >= cfg.r_outer:
        raise ConfigError("capacity requires r_inner < r_outer")
    if cfg.t0 >= cfg.t1:
        raise ConfigError("heat fit window requires t0 < t1")


def _model(cfg):
    if cfg.surface == "hyperbolic_disc":
        return HyperbolicDisc()
    if cfg.surface == "euclidean_plane":
        return EuclideanPlane()
    if cfg.surface == "sphere":
        return Sphere()
    if cfg.surface == "flat_torus":
        return FlatTorus()
    return load_chart(cfg.chart_file)


def _tol(cfg, default):
    return cfg.tolerance if cfg.tolerance is not None else default


# ---------------------------------------------------------------------------
# deterministic serialization


def _json_fragment(obj):
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isnan(v) or math.isinf(v):
            return "null"
        return format(v, ".17g")
    if isinstance(obj, complex):
        return _json_fragment([obj.real, obj.imag])
    if isinstance(obj, str):
        out = obj.replace("\\", "\\\\").replace('"', '\\"')
        return f'"{out}"'
    if isinstance(obj, dict):
        items = sorted(obj.items(), key=lambda kv: str(kv[0]))
        inner = ",".join(f"{_json_fragment(str(k))}:{_json_fragment(v)}"
                         for k, v in items)
        return "{" + inner + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ",".join(_json_fragment(v) for v in obj) + "]"
    return _json_fragment(str(obj))


def emit_json(report, path):
    data = _json_fragment(report) + "\n"
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(data)


def emit_csv(rows, path, columns=None):
    if columns is None:
        columns = list(rows[0].keys()) if rows else []
    lines = [",".join(columns)]
    for row in rows:
        cells = []
        for c in columns:
            v = row.get(c)
            if v is None or (isinstance(v, float)
                             and (math.isnan(v) or math.isinf(v))):
                cells.append("")
            elif isinstance(v, (float, np.floating)):
                cells.append(format(float(v), ".17g"))
            elif isinstance(v, bool):
                cells.append("true" if v else "false")
            else:
                cells.append(str(v))
        lines.append(",".join(cells))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _config_dict(cfg):
    return {f.name: getattr(cfg, f.name) for f in fields(cfg)}


# ---------------------------------------------------------------------------
# command implementations: each returns (report_dict, rows, audits)
# audits: list of (name, measured, limit); violation when measured > limit


def _run_kernel(cfg):
    model = _model(cfg)
    lam = convergence._model_lambda(model)
    center = (cfg.center_x, cfg.center_y)
    rows = []
    for R in sorted(cfg.R):
        c, r = convergence._ball_disc(model, center, R)
        space = convergence._disc_space(c, r, cfg.basis_size)
        val = bergman.normalized_magnitude(space, lam, c).normalized
        rows.append({"R": R, "kernel": val})
    audits = []
    for a, b in zip(rows, rows[1:]):
        audits.append(("kernel_monotone_R_%g" % b["R"],
                       b["kernel"] - a["kernel"], _tol(cfg, 1e-9)))
    return {"command": "kernel", "rows": rows}, rows, audits


def _chart_of(cfg, model):
    if cfg.surface == "chart":
        return model
    if cfg.surface == "hyperbolic_disc":
        rect = (-0.6, 0.6, -0.6, 0.6)
    elif cfg.surface == "sphere":
        rect = (0.6, math.pi - 0.6, 0.0, 2.0)
    else:
        rect = (0.0, 1.0, 0.0, 1.0)
    n = max(33, int(round((rect[1] - rect[0]) / cfg.h)) + 1) if cfg.h else 65
    return chart_from_callable(lambda x, y: model.metric_at((x, y)), rect,
                               (n, n))


def _run_isothermal(cfg):
    model = _model(cfg)
    chart = _chart_of(cfg, model)
    center = (cfg.center_x, cfg.center_y)
    if not (chart.x0 < center[0] < chart.x1 and chart.y0 < center[1] < chart.y1):
        center = (0.5 * (chart.x0 + chart.x1), 0.5 * (chart.y0 + chart.y1))
    patch = isothermal.solve_isothermal(chart, center)
    rows = [{
        "cr_residual": patch.cr_residual,
        "jacobian_min": patch.jacobian_min,
        "lambda_center": patch.lambda_at(center),
        "patch_radius": patch.patch_radius,
    }]
    report = {"command": "isothermal", "center": list(center), "rows": rows}
    audits = [("cr_residual", patch.cr_residual, _tol(cfg, 1e-6)),
              ("jacobian_positive", -patch.jacobian_min, 0.0)]
    return report, rows, audits


def _run_spectral(cfg):
    model = _model(cfg)
    if cfg.surface in ("sphere", "flat_torus"):
        rep = spectral.lambda1_closed_meanzero(model, cells=cfg.cells)
    else:
        region = Region(model, "ball", center=(cfg.center_x, cfg.center_y),
                        radius=cfg.R[0])
        rep = spectral.lambda1_dirichlet(region, cells=cfg.cells)
    rows = [{"R": cfg.R[0], "lambda1": rep.lambda1,
             "extrapolated": rep.extrapolated,
             "resolutions": str(rep.resolutions)}]
    spread = abs(rep.extrapolated - rep.lambda1) / rep.lambda1
    report = {"command": "spectral", "lambda1": rep.lambda1,
              "mode": rep.mode, "rows": rows}
    audits = [("extrapolation_spread", spread, _tol(cfg, 1e-2))]
    return report, rows, audits


def _run_heat(cfg):
    model = _model(cfg)
    region = Region(model, "ball", center=(cfg.center_x, cfg.center_y),
                    radius=cfg.R[0])
    hf = heatgreen.heat_field(region, cells=min(cfg.cells, 64))
    x = (cfg.center_x, cfg.center_y)
    fit = heatgreen.ondiag_fit(hf, x, t_window=(cfg.t0, cfg.t1))
    tmid = 0.5 * (cfg.t0 + cfg.t1)
    resid = hf.semigroup_residual(tmid, tmid, x, x)
    mass = hf.mass(tmid, x)
    rows = [{"c": fit.c, "nu_hat": fit.nu_hat,
             "regular_defect": fit.regular_defect(),
             "semigroup_residual": resid, "mass": mass}]
    report = {"command": "heat", "rows": rows}
    audits = [("semigroup_residual", resid, _tol(cfg, 1e-8)),
              ("mass_excess", mass - 1.0, _tol(cfg, 1e-8))]
    return report, rows, audits


def _run_green(cfg):
    model = _model(cfg)
    center = (cfg.center_x, cfg.center_y)
    region = Region(model, "ball", center=center, radius=cfg.R[0])
    pole = (cfg.pole_x if cfg.pole_x is not None else cfg.center_x,
            cfg.pole_y if cfg.pole_y is not None else cfg.center_y)
    gf = heatgreen.green_field(region, pole=pole, cells=min(cfg.cells, 256))
    resid = gf.harmonic_residual()
    rows = [{"g_max": float(np.max(gf.values)),
             "g_min": float(np.min(gf.values)),
             "harmonic_residual": resid}]
    report = {"command": "green", "pole": list(pole), "rows": rows}
    audits = [("harmonic_residual", resid, _tol(cfg, 1e-8)),
              ("positivity", -float(np.min(gf.values)), _tol(cfg, 1e-10))]
    return report, rows, audits


def _run_capacity(cfg):
    model = _model(cfg)
    center = (cfg.center_x, cfg.center_y)
    U = Region(model, "ball", center=center, radius=cfg.r_inner)
    Om = Region(model, "ball", center=center, radius=cfg.r_outer)
    sandwich = heatgreen.capacity_green_sandwich(
        U, Om, pole=center, cells=cfg.cells, slack=_tol(cfg, 0.01))
    rows = [dict(sandwich)]
    report = {"command": "capacity", "rows": rows}
    audits = [("sandwich", 0.0 if sandwich["ok"] else 1.0, 0.5)]
    return report, rows, audits


def _schema_rows(rep):
    """Rows in the fixed report schema; missing envelopes stay empty."""
    cheeger = rep.bounds.get("cheeger")
    li = rep.bounds.get("li")
    logb = rep.bounds.get("log")
    out = []
    for i, (R, d) in enumerate(zip(rep.R_values, rep.differences)):
        out.append({
            "R": R,
            "difference": d,
            "bound_cheeger": cheeger[i] if cheeger else None,
            "bound_li": li[i] if li else None,
            "bound_log": logb[i] if logb else None,
        })
    return out


def _run_experiment(cfg):
    name = cfg.experiment
    center = (cfg.center_x, cfg.center_y)
    audits = []
    if name == "exhaustion":
        model = _model(cfg)
        rep = convergence.exhaustion_experiment(
            model, center, cfg.E_radius, cfg.R, basis_size=cfg.basis_size)
        rows = _schema_rows(rep)
        for row, full in zip(rows, rep.rows):
            env = full["bound_eigenvalue"]
            if math.isfinite(env):
                audits.append(("bound_R_%g" % row["R"],
                               row["difference"] - env, _tol(cfg, 0.0)))
    elif name == "log_rate":
        model = _model(cfg)
        rep = convergence.log_rate_experiment(
            model, cfg.nu, center, cfg.E_radius, cfg.R,
            basis_size=cfg.basis_size)
        rows = _schema_rows(rep)
        if not rep.params.get("validated", True):
            audits.append(("log_envelope", 1.0, 0.5))
    elif name == "blended_metric":
        rep = convergence.blended_metric_experiment(
            cfg.R, basis_size=min(cfg.basis_size, 48),
            lambda1_cells=min(cfg.cells, 96))
        rows = _schema_rows(rep)
        for row, full in zip(rows, rep.rows):
            audits.append(("guard_R_%g" % row["R"],
                           full["kernel"] - full["kernel_ball"],
                           _tol(cfg, 1e-9)))
        audits.append(("lambda1_R2_positive",
                       0.0 if rep.params["condition_ok"] else 1.0, 0.5))
    elif name == "perturbation":
        rect = (0.0, 1.0, 0.0, 1.0)
        limit = chart_from_callable(lambda x, y: (1.0, 0.0, 1.0), rect,
                                    (65, 65))
        js = [int(round(R)) for R in cfg.R] if len(cfg.R) > 1 else [8, 16, 32, 64]
        perts = [chart_from_callable(
            lambda x, y, j=j: (1.0 + 2.0 / j, 0.0, 1.0), rect, (65, 65))
            for j in js]
        out = convergence.perturbation_experiment(limit, perts)
        rows = [{"R": j, "difference": g, "bound_cheeger": None,
                 "bound_li": None, "bound_log": None}
                for j, g in zip(js, out["gaps"])]
        for j, d in zip(js, out["inequality_defects"]):
            audits.append(("inequality_defect_j_%d" % j, d, _tol(cfg, 1e-9)))
        rep = convergence.ConvergenceReport(
            experiment="perturbation", R_values=[float(j) for j in js],
            differences=out["gaps"], verdict=out["verdict"],
            params={"metric_gaps": out["metric_gaps"],
                    "inequality_defects": out["inequality_defects"]})
    elif name == "counterexample":
        out = convergence.counterexample_experiment()
        rows = [{"R": float(r["j"]), "difference": r["gap"],
                 "bound_cheeger": None, "bound_li": None, "bound_log": None}
                for r in out["rows"]]
        rep = convergence.ConvergenceReport(
            experiment="counterexample",
            R_values=[float(r["j"]) for r in out["rows"]],
            differences=out["gaps"], verdict=out["verdict"],
            params={"kernel_hemisphere": out["kernel_hemisphere"]})
    else:  # pragma: no cover - guarded by parse_config
        raise ConfigError(f"unknown experiment {name!r}")
    report = {
        "experiment": rep.experiment,
        "params": rep.params,
        "rows": rows,
        "fitted_rate": rep.fitted_rate,
        "verdict": rep.verdict,
    }
    return report, rows, audits


_DISPATCH = {
    "kernel": _run_kernel,
    "isothermal": _run_isothermal,
    "spectral": _run_spectral,
    "heat": _run_heat,
    "green": _run_green,
    "capacity": _run_capacity,
    "experiment": _run_experiment,
}


def run(cfg):
    """Execute a validated config; returns the process exit code."""
    try:
        _cross_validate(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    try:
        report, rows, audits = _DISPATCH[cfg.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except (RklError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    audit_rows = [{"check": n, "measured": v, "limit": lim,
                   "ok": v <= lim} for n, v, lim in audits]
    report["audit"] = audit_rows
    report["config"] = _config_dict(cfg)
    if cfg.output_json:
        emit_json(report, cfg.output_json)
    if cfg.output_csv:
        emit_csv(rows, cfg.output_csv)
    if cfg.audit_mode and any(not a["ok"] for a in audit_rows):
        for a in audit_rows:
            if not a["ok"]:
                print(f"audit violation: {a['check']} measured "
                      f"{a['measured']:.6g} > limit {a['limit']:.6g}",
                      file=sys.stderr)
        return 3
    return 0


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="rkl",
        description="Riemannian-metric-to-kernel experiment runner")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("config", nargs="?", help="config file path")
    parser.add_argument("--set", action="append", default=[],
                        metavar="KEY=VALUE", dest="overrides",
                        help="override a config key (flag wins)")
    parser.add_argument("--json", help="override output_json")
    parser.add_argument("--csv", help="override output_csv")
    args = parser.parse_args(argv)
    try:
        if args.config:
            with open(args.config, encoding="utf-8") as fh:
                text = fh.read()
            cfg = parse_config(f"command = {args.command}\n" + text)
        else:
            cfg = RunConfig()
        cfg = replace(cfg, command=args.command)
        overrides = {}
        for item in args.overrides:
            if "=" not in item:
                raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
            key, _, raw = item.partition("=")
            _apply_key(overrides, key.strip(), raw.strip(), "--set")
        if args.json:
            overrides["output_json"] = args.json
        if args.csv:
            overrides["output_csv"] = args.csv
        cfg = replace(cfg, **overrides)
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
