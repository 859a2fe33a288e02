"""Heat kernels, Green functions, and capacities on discretized regions.

The heat kernel is built from a full dense eigendecomposition (no time
stepping), so symmetry and the semigroup identity are exact and only spatial
discretization error remains.  Green fields solve the discrete Poisson
problem with a unit point mass; capacities are energies of discrete
equilibrium potentials.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss

from . import discrete
from .errors import DomainError, FitError, SolverError
from .surface import (
    EuclideanPlane,
    HyperbolicDisc,
    Region,
    geodesic_ball,
    measure,
)

DENSE_BUDGET = 10_000
DEFAULT_CELLS = 48


# ---------------------------------------------------------------------------
# construction helpers


def _disc_of(region, metric=None, cells=DEFAULT_CELLS):
    """Single discretization of a region (or ('rect', ...) tuple)."""
    if isinstance(region, discrete.Discretization):
        return region
    if isinstance(region, tuple) and region[0] == "rect":
        _, x0, x1, y0, y1 = region
        ny = max(8, int(round(cells * (y1 - y0) / (x1 - x0))))
        return discrete.discretize(
            metric or (lambda x, y: (1.0, 0.0, 1.0)), (x0, x1, y0, y1), (cells, ny)
        )
    if region.kind == "ball":
        return discrete.polar_ball(
            region.surface, region.radius, cells, max(32, cells // 2)
        )
    chart = region.chart
    fn = metric or (lambda x, y: (
        float(chart.interp("E", (x, y))),
        float(chart.interp("F", (x, y))),
        float(chart.interp("G", (x, y))),
    ))
    rect = (chart.x0, chart.x1, chart.y0, chart.y1)
    nx = cells
    ny = max(8, int(round(cells * (chart.y1 - chart.y0) / (chart.x1 - chart.x0))))
    cx = chart.x0 + (np.arange(nx) + 0.5) * (chart.x1 - chart.x0) / nx
    cy = chart.y0 + (np.arange(ny) + 0.5) * (chart.y1 - chart.y0) / ny
    ii = np.clip(np.round((cx - chart.x0) / chart.hx).astype(int), 0, chart.nx - 1)
    jj = np.clip(np.round((cy - chart.y0) / chart.hy).astype(int), 0, chart.ny - 1)
    cmask = region.mask[np.ix_(jj, ii)]
    return discrete.discretize(fn, rect, (nx, ny), mask=cmask,
                               periodic_y=chart.periodic_y)


# ---------------------------------------------------------------------------
# heat kernel


@dataclass
class HeatField:
    """Dirichlet heat kernel from the full eigendecomposition."""

    disc: discrete.Discretization
    eigenvalues: np.ndarray
    modes: np.ndarray  # (n, k), mass-orthonormal

    def _dof(self, x):
        return x if isinstance(x, (int, np.integer)) else self.disc.nearest_dof(x)

    def evaluate(self, t, x, y):
        i, j = self._dof(x), self._dof(y)
        w = np.exp(-self.eigenvalues * t)
        return float(np.dot(w * self.modes[i], self.modes[j]))

    def row(self, t, x):
        i = self._dof(x)
        w = np.exp(-self.eigenvalues * t)
        return self.modes @ (w * self.modes[i])

    def mass(self, t, x):
        return float(np.dot(self.row(t, x), self.disc.M))

    def semigroup_residual(self, t, s, x, y):
        lhs = float(np.dot(self.row(t, x) * self.disc.M, self.row(s, y)))
        return abs(lhs - self.evaluate(t + s, x, y))

    def time_integral(self, T, x, y):
        """integral_0^T p(t,x,y) dt via the expansion."""
        i, j = self._dof(x), self._dof(y)
        lam = self.eigenvalues
        w = np.where(lam > 0, (1.0 - np.exp(-lam * T)) / np.where(lam > 0, lam, 1.0), T)
        return float(np.dot(w * self.modes[i], self.modes[j]))


def heat_field(region, metric=None, cells=DEFAULT_CELLS):
    disc = _disc_of(region, metric, cells)
    if disc.n > DENSE_BUDGET:
        raise SolverError(
            f"{disc.n} nodes exceed the dense eigendecomposition budget"
        )
    vals, modes = discrete.dense_eigendecomposition(disc)
    return HeatField(disc, vals, modes)


# ---------------------------------------------------------------------------
# on-diagonal fit and the Gaussian off-diagonal transfer


@dataclass
class RegularityFit:
    c: float
    nu_hat: float
    A: float = 1.0
    beta: float = 2.0

    def kappa(self, t):
        return t ** (self.nu_hat / 2.0) / self.c

    def regular_defect(self, s_grid=None, t_grid=None):
        """max over s<t of [kappa(beta*s)/kappa(s)] / [A*kappa(beta*t)/kappa(t)].

        <= 1 certifies regularity; exactly 1 for pure power laws with A=1.
        """
        if s_grid is None:
            s_grid = np.geomspace(1e-3, 1.0, 12)
        if t_grid is None:
            t_grid = np.geomspace(1e-3, 1.0, 12)
        worst = 0.0
        for s in s_grid:
            for t in t_grid:
                if s < t:
                    lhs = self.kappa(self.beta * s) / self.kappa(s)
                    rhs = self.A * self.kappa(self.beta * t) / self.kappa(t)
                    worst = max(worst, lhs / rhs)
        return worst


def ondiag_fit(values_or_field, x=None, t_window=(0.01, 0.1), samples=12):
    """Power-law fit p(t,x,x) ~ c * t^{-nu/2} on a log-spaced window.

    Accepts a HeatField with a point x, or a precomputed (t, value) table.
    """
    if isinstance(values_or_field, HeatField):
        ts = np.geomspace(t_window[0], t_window[1], samples)
        ps = np.array([values_or_field.evaluate(t, x, x) for t in ts])
    else:
        ts, ps = (np.asarray(a, dtype=float) for a in values_or_field)
    if ts.size < 5:
        raise FitError("on-diagonal fit needs at least 5 samples")
    if np.any(ps <= 0):
        raise FitError("on-diagonal values must be positive")
    slope, intercept = np.polyfit(np.log(ts), np.log(ps), 1)
    nu_hat = -2.0 * slope
    c = math.exp(intercept)
    return RegularityFit(c=c, nu_hat=nu_hat)


def gaussian_offdiag_check(field, x, y, alpha, fit1, fit2, d=None,
                           t_window=(0.01, 1.0), samples=24, deltas=None):
    """Certify p(t,x,y) <= 4A/sqrt(kappa1(dt)kappa2(dt)) * exp(-alpha d^2/4t).

    Scans delta over (0, 1] and reports the largest certifying value together
    with the smallest one on the grid (the valid set is an interval reaching
    down to 0 since the kappas are increasing).
    """
    if alpha >= 1.0:
        raise DomainError("the transfer requires alpha < 1")
    if d is None:
        i, j = field._dof(x), field._dof(y)
        d = math.hypot(field.disc.cx[i] - field.disc.cx[j],
                       field.disc.cy[i] - field.disc.cy[j])
    ts = np.geomspace(t_window[0], t_window[1], samples)
    ps = np.array([field.evaluate(t, x, y) for t in ts])
    A = max(fit1.A, fit2.A)
    if deltas is None:
        deltas = np.linspace(0.05, 1.0, 20)

    def sup_ratio(delta):
        bound = (4.0 * A / np.sqrt(fit1.kappa(delta * ts) * fit2.kappa(delta * ts))
                 * np.exp(-alpha * d * d / (4.0 * ts)))
        return float(np.max(ps / bound))

    valid = [dl for dl in deltas if sup_ratio(dl) <= 1.0]
    report = {
        "alpha": alpha,
        "distance": d,
        "exists": bool(valid),
        "delta": max(valid) if valid else None,
        "delta_min": min(valid) if valid else None,
        "sup_ratio_at_delta": sup_ratio(max(valid)) if valid else None,
        "sup_ratio_at_one": sup_ratio(1.0),
    }
    return report


# ---------------------------------------------------------------------------
# capacity and Green functions


def _concentric_setup(U, Omega):
    """Recognize concentric geodesic balls on a radially symmetric model."""
    if not (isinstance(U, Region) and isinstance(Omega, Region)):
        return None
    if U.kind != "ball" or Omega.kind != "ball":
        return None
    if U.surface is not Omega.surface or U.center != Omega.center:
        return None
    try:
        U.surface.polar_jacobian(1.0)
    except Exception:
        return None
    return U.surface, U.radius, Omega.radius


def capacity(U, Omega, metric=None, cells=256):
    """Energy of the discrete equilibrium potential (1 on U, 0 outside Omega)."""
    conc = _concentric_setup(U, Omega)
    if conc is not None:
        model, r1, r2 = conc
        if r1 >= r2:
            raise DomainError("U must be compactly contained in Omega")

        def fn(r, theta):
            J = model.polar_jacobian(r)
            return (1.0, 0.0, J * J)

        d = discrete.discretize(fn, (r1, r2, 0.0, 2 * math.pi), (cells, 8),
                                periodic_y=True)
        return _inner_boundary_energy(d, model, r1)
    return _capacity_masked(U, Omega, metric, cells)


def _inner_boundary_energy(d, model, r1):
    """Solve with boundary value 1 on the inner edge and return the energy."""
    b = np.zeros(d.n)
    c0 = 0.0
    for j in range(d.ny):
        a = d.index[j, 0]
        w = (model.polar_jacobian(r1)) * d.hy / d.hx  # G/sqrt(det) = J
        b[a] += 2.0 * w
        c0 += 2.0 * w
    phi = d.solve(b)
    return float(c0 - np.dot(b, phi))


def _ball_mask(surface, center, radius, xs, ys):
    if isinstance(surface, HyperbolicDisc):
        c, r = surface.ball_euclidean(center, radius)
        X, Y = np.meshgrid(xs, ys)
        return (X - c.real) ** 2 + (Y - c.imag) ** 2 < r * r
    if isinstance(surface, EuclideanPlane):
        X, Y = np.meshgrid(xs, ys)
        return (X - center[0]) ** 2 + (Y - center[1]) ** 2 < radius * radius
    raise DomainError("masked capacity supports conformal-plane models only")


def _masked_fields(U, Omega, cells):
    """Cartesian grid, metric, active mask (Omega) and constrained mask (U)."""
    surf = Omega.surface
    if Omega.kind == "ball":
        if isinstance(surf, HyperbolicDisc):
            c, r = surf.ball_euclidean(Omega.center, Omega.radius)
            x0, x1 = c.real - 1.05 * r, c.real + 1.05 * r
            y0, y1 = c.imag - 1.05 * r, c.imag + 1.05 * r
            def fn(x, y):
                lam = 4.0 / max(1.0 - x * x - y * y, 1e-12) ** 2
                return (lam, 0.0, lam)
        else:
            cxc, cyc = Omega.center
            r = Omega.radius
            x0, x1 = cxc - 1.05 * r, cxc + 1.05 * r
            y0, y1 = cyc - 1.05 * r, cyc + 1.05 * r
            fn = lambda x, y: (1.0, 0.0, 1.0)
        nx = cells
        ny = max(8, int(round(cells * (y1 - y0) / (x1 - x0))))
        xs = x0 + (np.arange(nx) + 0.5) * (x1 - x0) / nx
        ys = y0 + (np.arange(ny) + 0.5) * (y1 - y0) / ny
        omask = _ball_mask(surf, Omega.center, Omega.radius, xs, ys)
        umask = _ball_mask(surf, U.center, U.radius, xs, ys)
        return fn, (x0, x1, y0, y1), (nx, ny), omask, umask, xs, ys
    raise DomainError("capacity needs ball regions or a concentric pair")


def _capacity_masked(U, Omega, metric, cells):
    fn, rect, shape, omask, umask, xs, ys = _masked_fields(U, Omega, cells)
    if not np.all(~umask | omask):
        raise DomainError("U must lie inside Omega")
    d = discrete.discretize(metric or fn, rect, shape, mask=omask)
    # constrained dofs: cell centers inside U
    con = np.zeros(d.n, dtype=bool)
    for j in range(d.ny):
        for i in range(d.nx):
            a = d.index[j, i]
            if a >= 0 and umask[j, i]:
                con[a] = True
    if not con.any():
        raise DomainError("U contains no grid cells at this resolution")
    if con.all():
        raise DomainError("U must be compactly contained in Omega")
    K = d.K
    x = np.zeros(d.n)
    x[con] = 1.0
    free = ~con
    Kff = K[free][:, free].tocsc()
    rhs = -(K[free][:, con] @ x[con])
    from scipy.sparse.linalg import spsolve
    x[free] = spsolve(Kff, rhs)
    return float(x @ (K @ x))


@dataclass
class GreenField:
    disc: discrete.Discretization
    pole: object
    values: np.ndarray
    pole_dofs: np.ndarray

    def evaluate(self, p):
        return float(self.values[self.disc.nearest_dof(p)])

    def harmonic_residual(self):
        """max |K g| on dofs not adjacent to the pole support."""
        r = self.disc.K @ self.values
        skip = set()
        K = self.disc.K.tocsr()
        for p in self.pole_dofs:
            skip.add(int(p))
            skip.update(int(c) for c in K[int(p)].indices)
        keep = np.ones(self.disc.n, dtype=bool)
        keep[list(skip)] = False
        return float(np.max(np.abs(r[keep]))) if keep.any() else 0.0


def green_field(region, metric=None, pole=None, cells=192):
    """Discrete Green function: K g = unit mass at the pole."""
    disc = _disc_of(region, metric, cells)
    b = np.zeros(disc.n)
    if (
        isinstance(region, Region)
        and region.kind == "ball"
        and pole is not None
        and _is_center(region, pole)
    ):
        # polar grid: the pole is the r=0 coordinate singularity; spread the
        # unit mass over the innermost ring (the set of nearest dofs), which
        # matches the point source exactly outside that ring by symmetry
        pole_dofs = disc.index[:, 0]
        b[pole_dofs] = 1.0 / pole_dofs.size
    else:
        if pole is None:
            raise DomainError("green_field needs a pole")
        a = disc.nearest_dof(pole)
        pole_dofs = np.array([a])
        b[a] = 1.0
    g = disc.solve(b)
    if np.min(g) < -1e-10:
        raise SolverError("Green field lost positivity")
    return GreenField(disc, pole, g, np.asarray(pole_dofs))


def _is_center(region, pole):
    px, py = (pole.real, pole.imag) if isinstance(pole, complex) else pole
    cx, cy = region.center
    return math.hypot(px - cx, py - cy) < 1e-12


def capacity_green_sandwich(U, Omega, pole, metric=None, cells=256, slack=0.01):
    """Check inf_{boundary of U} g <= 1/cap <= sup_{boundary of U} g."""
    cap = capacity(U, Omega, metric, cells)
    conc = _concentric_setup(U, Omega)
    if conc is not None and _is_center(Omega, pole):
        model, r1, r2 = conc
        ball = Region(model, "ball", center=U.center, radius=r2)
        gf = green_field(ball, pole=pole, cells=cells)
        # radial: interpolate the ring straddling r1
        rs = gf.disc.cx[gf.disc.index[0]]
        gv = gf.values[gf.disc.index[0]]
        ginf = gsup = float(np.interp(r1, rs, gv))
    else:
        fn, rect, shape, omask, umask, xs, ys = _masked_fields(U, Omega, cells)
        d = discrete.discretize(metric or fn, rect, shape, mask=omask)
        gf = green_field(d, pole=pole)
        # boundary band: active cells just outside U with a neighbour in U
        vals = []
        for j in range(d.ny):
            for i in range(d.nx):
                a = d.index[j, i]
                if a < 0 or umask[j, i]:
                    continue
                near = False
                for dj, di in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                    jj, ii = j + dj, i + di
                    if 0 <= jj < d.ny and 0 <= ii < d.nx and umask[jj, ii]:
                        near = True
                if near:
                    vals.append(gf.values[a])
        if not vals:
            raise DomainError("no boundary band cells found")
        ginf, gsup = float(np.min(vals)), float(np.max(vals))
    inv = 1.0 / cap
    report = {
        "capacity": cap,
        "inv_capacity": inv,
        "g_inf": ginf,
        "g_sup": gsup,
        "lower_ok": ginf <= inv * (1.0 + slack),
        "upper_ok": inv <= gsup * (1.0 + slack),
    }
    report["ok"] = report["lower_ok"] and report["upper_ok"]
    return report


def capacity_lower_step(model, R, cells=256):
    """The ball-pair capacity step: cap(B_R, B_{R+1})^{-1} >= |B_{R+1}|^{-1}/8."""
    U = Region(model, "ball", center=(0.0, 0.0), radius=R)
    Om = Region(model, "ball", center=(0.0, 0.0), radius=R + 1.0)
    cap = capacity(U, Om, cells=cells)
    area, _ = measure(Om)
    lhs = 1.0 / cap
    rhs = 1.0 / (8.0 * area)
    return {"inv_capacity": lhs, "area_bound": rhs, "ok": lhs >= rhs,
            "ratio": lhs / rhs}


# ---------------------------------------------------------------------------
# Harnack / sub-mean measurements and the Green upper-bound audit


def harnack_submean_measure(u, center, r, model=None, n_r=96, n_t=192):
    """Measured Harnack ratio and sub-mean statistic of u on the ball B_r.

    u: callable of (x, y); reports sup/inf over the half ball and
    sup_{B_{r/2}} u^2 * |B_r| / integral_{B_r} u^2.
    """
    model = model or EuclideanPlane()
    ss, ww = leggauss(n_r)
    rr = 0.5 * r * (ss + 1.0)
    wq = 0.5 * r * ww
    th = 2 * math.pi * (np.arange(n_t) + 0.5) / n_t
    cx, cy = center
    J = np.array([model.polar_jacobian(v) for v in rr])
    U = np.empty((n_r, n_t))
    for a, rv in enumerate(rr):
        for b, tv in enumerate(th):
            U[a, b] = u(cx + rv * math.cos(tv), cy + rv * math.sin(tv))
    if np.min(U) <= 0:
        raise DomainError("field must be positive on the ball")
    # extrema over the closed half ball, sampled on a grid that contains the
    # bounding circle and theta = 0
    rh = np.linspace(0.0, r / 2.0, n_r // 2 + 1)
    te = 2 * math.pi * np.arange(n_t) / n_t
    Uh = np.array([[u(cx + rv * math.cos(tv), cy + rv * math.sin(tv))
                    for tv in te] for rv in rh])
    if np.min(Uh) <= 0:
        raise DomainError("field must be positive on the ball")
    sup_h, inf_h = float(np.max(Uh)), float(np.min(Uh))
    integral = float(np.dot(wq * J, U.sum(axis=1)) * (2 * math.pi / n_t) / 1.0)
    # integral of u^2 over B_r
    integral2 = float(np.dot(wq * J, (U ** 2).sum(axis=1)) * (2 * math.pi / n_t))
    area = 2 * math.pi * float(np.dot(wq, J))
    return {
        "harnack_ratio": sup_h / inf_h,
        "submean_statistic": sup_h**2 * area / integral2,
        "area": area,
        "mean": integral / area,
    }


def green_upper_bound_audit(model, nu, I_nu, R=10.0, cells=192,
                            distances=None, t_window=(0.02, 0.5)):
    """Envelope check g(x,y)*d^{nu-2} and p(t,x,x)*t^{nu/2} finite.

    Reports the fitted envelope constant against both I_nu sign conventions.
    """
    if nu <= 2:
        raise DomainError("the envelope requires nu > 2")
    ball = Region(model, "ball", center=(0.0, 0.0), radius=R)
    gf = green_field(ball, pole=(0.0, 0.0), cells=cells)
    rs = gf.disc.cx[gf.disc.index[0]]
    gv = gf.values[gf.disc.index[0]]
    if distances is None:
        distances = np.linspace(0.2, 0.8 * R, 24)
    env = [float(np.interp(d, rs, gv)) * d ** (nu - 2.0) for d in distances]
    sup_green = max(env)
    hf = heat_field(ball, cells=DEFAULT_CELLS)
    ts = np.geomspace(t_window[0], t_window[1], 12)
    sup_heat = max(hf.evaluate(t, (0.0, 0.0), (0.0, 0.0)) * t ** (nu / 2.0)
                   for t in ts)
    return {
        "nu": nu,
        "green_envelope": sup_green,
        "heat_envelope": sup_heat,
        "green_const_times_I_pos": sup_green * I_nu**nu,
        "green_const_times_I_neg": sup_green * I_nu ** (-nu),
        "finite": math.isfinite(sup_green) and math.isfinite(sup_heat),
    }
