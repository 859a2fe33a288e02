"""Isothermal coordinates from a gridded metric.

Pipeline: Beltrami coefficients of the chart, affine normalization at the
center, degree-4 jet whose elliptic image vanishes to second order, a single
coercive Dirichlet solve for the correction, least-squares recovery of the
harmonic conjugate, and a patch carrying w = v + iu with its conformal factor
lambda and residual diagnostics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.interpolate import RectBivariateSpline
from scipy.sparse.linalg import splu

from .errors import CoercivityError, DomainError, MetricError, SolverError
from .surface import GridChart, _xy

SOLVE_TOL = 1e-10
MAX_SHRINK = 4


# ---------------------------------------------------------------------------
# Beltrami data and elliptic coefficients


@dataclass(frozen=True)
class BeltramiData:
    """Conformal density sigma and dilatation mu on the chart grid."""

    sigma: np.ndarray
    mu: np.ndarray
    chart: GridChart

    def __post_init__(self):
        if not np.all(self.sigma > 0):
            raise MetricError("sigma must be positive")
        if not np.all(np.abs(self.mu) < 1):
            raise MetricError("|mu| must be < 1 (ellipticity)")


def _beltrami_fields(E, F, G):
    det = E * G - F * F
    if np.any(det <= 0) or np.any(E <= 0):
        bad = np.unravel_index(int(np.argmin(det)), det.shape)
        raise MetricError(f"metric not positive definite at node {bad}")
    sigma = (E + G) / 4.0 + 0.5 * np.sqrt(det)
    mu = (E - G) / (4.0 * sigma) + 1j * F / (2.0 * sigma)
    return sigma, mu


def beltrami_data(chart):
    """sigma = (E+G)/4 + sqrt(EG-F^2)/2 and mu = ((E-G)/4 + iF/2)/sigma."""
    sigma, mu = _beltrami_fields(chart.E, chart.F, chart.G)
    return BeltramiData(sigma, mu, chart)


@dataclass(frozen=True)
class EllipticCoefficients:
    """Divergence-normalized coefficients of the second-order operator.

    L u = a11 u_xx - 2 a12 u_xy + a22 u_yy + b1 u_x + b2 u_y with
    a11 = G/W, a12 = F/W, a22 = E/W, W = sqrt(EG - F^2), so det(a) = 1.
    """

    a11: np.ndarray
    a12: np.ndarray
    a22: np.ndarray
    b1: np.ndarray
    b2: np.ndarray
    chart: GridChart


def _coefficient_fields(E, F, G, hx, hy):
    W = np.sqrt(E * G - F * F)
    a11, a12, a22 = G / W, F / W, E / W
    b1 = np.gradient(a11, hx, axis=1, edge_order=2) - np.gradient(
        a12, hy, axis=0, edge_order=2
    )
    b2 = np.gradient(a22, hy, axis=0, edge_order=2) - np.gradient(
        a12, hx, axis=1, edge_order=2
    )
    return a11, a12, a22, b1, b2


def elliptic_coefficients(chart):
    a11, a12, a22, b1, b2 = _coefficient_fields(
        chart.E, chart.F, chart.G, chart.hx, chart.hy
    )
    return EllipticCoefficients(a11, a12, a22, b1, b2, chart)


# ---------------------------------------------------------------------------
# Jet polynomial


@dataclass(frozen=True)
class JetPolynomial:
    """Real bivariate polynomial of degree <= 4 anchored at the origin.

    coeffs maps (p, q) -> coefficient of x^p y^q.
    """

    coeffs: dict

    def _apply(self, x, y, shift_p, shift_q):
        out = np.zeros_like(np.asarray(x, dtype=float))
        for (p, q), c in self.coeffs.items():
            pp, qq = p - shift_p, q - shift_q
            if pp < 0 or qq < 0:
                continue
            fac = c
            for k in range(shift_p):
                fac *= p - k
            for k in range(shift_q):
                fac *= q - k
            out = out + fac * np.asarray(x, dtype=float) ** pp * np.asarray(y) ** qq
        return out

    def __call__(self, x, y):
        return self._apply(x, y, 0, 0)

    def dx(self, x, y):
        return self._apply(x, y, 1, 0)

    def dy(self, x, y):
        return self._apply(x, y, 0, 1)

    def dxx(self, x, y):
        return self._apply(x, y, 2, 0)

    def dxy(self, x, y):
        return self._apply(x, y, 1, 1)

    def dyy(self, x, y):
        return self._apply(x, y, 0, 2)


def _apply_L(poly, fields, X, Y):
    a11, a12, a22, b1, b2 = fields
    return (
        a11 * poly.dxx(X, Y)
        - 2.0 * a12 * poly.dxy(X, Y)
        + a22 * poly.dyy(X, Y)
        + b1 * poly.dx(X, Y)
        + b2 * poly.dy(X, Y)
    )


def _jet_from_fields(fields, X, Y, h, ci, cj):
    """Degree-4 jet with L-image vanishing to second order at the center node.

    fields are coefficient arrays on a uniform grid (spacing h) whose node
    (cj, ci) sits at the origin of the normalized coordinates.
    """
    b1c = fields[3][cj, ci]
    b2c = fields[4][cj, ci]
    xi = JetPolynomial(
        {(1, 0): 1.0, (0, 1): 1.0, (2, 0): -0.5 * b1c, (0, 2): -0.5 * b2c}
    )
    Lxi = _apply_L(xi, fields, X, Y)
    dxLxi = (Lxi[cj, ci + 1] - Lxi[cj, ci - 1]) / (2 * h)
    dyLxi = (Lxi[cj + 1, ci] - Lxi[cj - 1, ci]) / (2 * h)
    eta = JetPolynomial(
        {**xi.coeffs, (3, 0): -dxLxi / 6.0, (0, 3): -dyLxi / 6.0}
    )
    Leta = _apply_L(eta, fields, X, Y)
    dxxLeta = (Leta[cj, ci + 1] - 2 * Leta[cj, ci] + Leta[cj, ci - 1]) / h**2
    dyyLeta = (Leta[cj + 1, ci] - 2 * Leta[cj, ci] + Leta[cj - 1, ci]) / h**2
    dxyLeta = (
        Leta[cj + 1, ci + 1]
        - Leta[cj + 1, ci - 1]
        - Leta[cj - 1, ci + 1]
        + Leta[cj - 1, ci - 1]
    ) / (4 * h**2)
    zeta = JetPolynomial(
        {
            **eta.coeffs,
            (4, 0): -dxxLeta / 24.0,
            (0, 4): -dyyLeta / 24.0,
            (3, 1): -dxyLeta / 12.0,
            (1, 3): -dxyLeta / 12.0,
        }
    )
    return zeta


# ---------------------------------------------------------------------------
# Local normalized sampling


class _LocalFrame:
    """Chart metric resampled in affine-normalized coordinates X' = L^T (X-c).

    L is the Cholesky factor of the metric at the center, so the normalized
    tensor equals the identity there.
    """

    def __init__(self, chart, center):
        cx, cy = _xy(center)
        if not chart.contains(center):
            raise DomainError("center outside chart")
        self.chart = chart
        self.center = (cx, cy)
        self.sE = RectBivariateSpline(chart.ys, chart.xs, chart.E)
        self.sF = RectBivariateSpline(chart.ys, chart.xs, chart.F)
        self.sG = RectBivariateSpline(chart.ys, chart.xs, chart.G)
        E0 = float(self.sE.ev(cy, cx))
        F0 = float(self.sF.ev(cy, cx))
        G0 = float(self.sG.ev(cy, cx))
        S0 = np.array([[E0, F0], [F0, G0]])
        try:
            self.L = np.linalg.cholesky(S0)
        except np.linalg.LinAlgError as exc:
            raise MetricError("metric at center is not positive definite") from exc
        self.Linv_T = np.linalg.inv(self.L.T)

    def chart_points(self, Xp, Yp):
        """Map normalized coordinates to chart coordinates."""
        cx, cy = self.center
        X = cx + self.Linv_T[0, 0] * Xp + self.Linv_T[0, 1] * Yp
        Y = cy + self.Linv_T[1, 0] * Xp + self.Linv_T[1, 1] * Yp
        return X, Y

    def metric_chart(self, X, Y):
        return self.sE.ev(Y, X), self.sF.ev(Y, X), self.sG.ev(Y, X)

    def metric_normalized(self, Xp, Yp):
        X, Y = self.chart_points(Xp, Yp)
        E, F, G = self.metric_chart(X, Y)
        A = self.Linv_T  # S' = A^T S A with A = L^{-T}
        Ep = A[0, 0] * (E * A[0, 0] + F * A[1, 0]) + A[1, 0] * (
            F * A[0, 0] + G * A[1, 0]
        )
        Fp = A[0, 0] * (E * A[0, 1] + F * A[1, 1]) + A[1, 0] * (
            F * A[0, 1] + G * A[1, 1]
        )
        Gp = A[0, 1] * (E * A[0, 1] + F * A[1, 1]) + A[1, 1] * (
            F * A[0, 1] + G * A[1, 1]
        )
        return Ep, Fp, Gp

    def max_square_halfwidth(self):
        """Largest a with the X'-square of half-width a inside the chart."""
        cx, cy = self.center
        d = min(
            cx - self.chart.x0,
            self.chart.x1 - cx,
            cy - self.chart.y0,
            self.chart.y1 - cy,
        )
        reach = max(np.sum(np.abs(self.Linv_T), axis=1))
        return d / reach


def jet_correction(coeffs, center):
    """Jet polynomial in affine-normalized coordinates at a chart point.

    Returns (JetPolynomial, L) with L the Cholesky normalization matrix.
    """
    frame = _LocalFrame(coeffs.chart, center)
    a = 0.5 * frame.max_square_halfwidth()
    m = 24
    h = a / m
    ax = np.linspace(-a, a, 2 * m + 1)
    Xp, Yp = np.meshgrid(ax, ax)
    Ep, Fp, Gp = frame.metric_normalized(Xp, Yp)
    fields = _coefficient_fields(Ep, Fp, Gp, h, h)
    zeta = _jet_from_fields(fields, Xp, Yp, h, m, m)
    return zeta, frame.L


# ---------------------------------------------------------------------------
# Isothermal patch


@dataclass
class IsothermalPatch:
    """Isothermal coordinate w = v + iu and conformal factor on a patch disc.

    Fields live on a uniform square grid in the normalized coordinates,
    restricted to the disc |X'| <= r/4 by ``mask``.  ``X``/``Y`` are the
    chart coordinates of the patch nodes.
    """

    center: tuple
    r: float
    L: np.ndarray
    axis: np.ndarray  # 1-D normalized coordinates of the patch grid
    X: np.ndarray
    Y: np.ndarray
    mask: np.ndarray
    w: np.ndarray
    lam: np.ndarray
    wz: np.ndarray
    wzbar: np.ndarray
    cr_residual: float
    jacobian_min: float
    diagnostics: dict = field(default_factory=dict)

    @property
    def patch_radius(self):
        return self.r / 4.0

    @property
    def jacobian(self):
        return np.abs(self.wz) ** 2 - np.abs(self.wzbar) ** 2

    def _to_local(self, p):
        x, y = _xy(p)
        cx, cy = self.center
        Xp = self.L[0, 0] * (x - cx) + self.L[1, 0] * (y - cy)
        Yp = self.L[0, 1] * (x - cx) + self.L[1, 1] * (y - cy)
        return Xp, Yp

    def _interp(self, arr, p):
        Xp, Yp = self._to_local(p)
        a0, a1 = self.axis[0], self.axis[-1]
        h = self.axis[1] - self.axis[0]
        if not (a0 <= Xp <= a1 and a0 <= Yp <= a1):
            raise DomainError("point outside the patch square")
        fx = (Xp - a0) / h
        fy = (Yp - a0) / h
        i = min(int(fx), len(self.axis) - 2)
        j = min(int(fy), len(self.axis) - 2)
        tx, ty = fx - i, fy - j
        return (
            arr[j, i] * (1 - tx) * (1 - ty)
            + arr[j, i + 1] * tx * (1 - ty)
            + arr[j + 1, i] * (1 - tx) * ty
            + arr[j + 1, i + 1] * tx * ty
        )

    def map_point(self, p):
        """Isothermal coordinate w at a chart point inside the patch."""
        return complex(self._interp(self.w, p))

    def lambda_at(self, p):
        return float(np.real(self._interp(self.lam, p)))

    def jacobian_at(self, p):
        return float(np.real(self._interp(self.jacobian, p)))

    def recovered_curvature(self):
        """Gaussian curvature of the recovered metric lambda |dw|^2.

        Equals -(1/2 lambda) Delta_w log lambda; evaluated by the Brioschi
        formula on the patch grid, where the metric components in the local
        coordinates are lambda |w_x'|^2 etc.
        """
        from .surface import GridChart as _GC, curvature_field as _cf

        wx_c = self.wz + self.wzbar
        wy_c = 1j * (self.wz - self.wzbar)
        Linv = np.linalg.inv(self.L)
        wx = Linv[0, 0] * wx_c + Linv[0, 1] * wy_c
        wy = Linv[1, 0] * wx_c + Linv[1, 1] * wy_c
        E = np.real(self.lam * np.abs(wx) ** 2)
        F = np.real(self.lam * np.real(wx * np.conj(wy)))
        G = np.real(self.lam * np.abs(wy) ** 2)
        tmp = _GC(self.axis[0], self.axis[-1], self.axis[0], self.axis[-1], E, F, G)
        return _cf(tmp)

    def pullback_metric(self):
        """(E, F, G) reproduced from lambda |dw|^2 at the patch nodes."""
        # chart-coordinate partials from wz, wzbar: w_x = wz + wzbar,
        # w_y = i (wz - wzbar)
        wx = self.wz + self.wzbar
        wy = 1j * (self.wz - self.wzbar)
        E = self.lam * np.abs(wx) ** 2
        F = self.lam * np.real(wx * np.conj(wy))
        G = self.lam * np.abs(wy) ** 2
        return E, F, G


def _coercive_enough(fields, h):
    a11, a12, a22, b1, b2 = fields
    amin = np.minimum(a11, a22)
    cross_ok = np.all(np.abs(a12) <= 0.45 * (a11 + a22))
    # drift terms must stay subordinate to the elliptic diagonal at this h
    drift_ok = np.max(h * (np.abs(b1) + np.abs(b2))) <= 0.5 * float(amin.min())
    return bool(cross_ok and drift_ok)


def _assemble_strong(fields, h, n):
    """Non-symmetric FD matrix of -L on the interior of an n x n node square."""
    a11, a12, a22, b1, b2 = fields
    idx = -np.ones((n, n), dtype=int)
    inner = np.zeros((n, n), dtype=bool)
    inner[1:-1, 1:-1] = True
    idx[inner] = np.arange(inner.sum())
    rows, cols, vals = [], [], []

    def put(a, j, i, v):
        b = idx[j, i]
        if b >= 0:
            rows.append(a)
            cols.append(b)
            vals.append(v)
        # boundary nodes carry the Dirichlet value 0 and drop out

    h2 = h * h
    for j in range(1, n - 1):
        for i in range(1, n - 1):
            a = idx[j, i]
            A, B, C = a11[j, i], a12[j, i], a22[j, i]
            p, q = b1[j, i], b2[j, i]
            put(a, j, i, (2 * A + 2 * C) / h2)
            put(a, j, i + 1, -(A / h2 + p / (2 * h)))
            put(a, j, i - 1, -(A / h2 - p / (2 * h)))
            put(a, j + 1, i, -(C / h2 + q / (2 * h)))
            put(a, j - 1, i, -(C / h2 - q / (2 * h)))
            cross = 2 * B / (4 * h2)
            put(a, j + 1, i + 1, cross)
            put(a, j - 1, i - 1, cross)
            put(a, j + 1, i - 1, -cross)
            put(a, j - 1, i + 1, -cross)
    nunk = int(inner.sum())
    Amat = sparse.csr_matrix((vals, (rows, cols)), shape=(nunk, nunk))
    return Amat, idx, inner


def _refined_solve(Amat, rhs):
    lu = splu(Amat.tocsc())
    x = lu.solve(rhs)
    scale = float(np.linalg.norm(rhs)) or 1.0
    for _ in range(5):
        res = rhs - Amat @ x
        if np.linalg.norm(res) <= SOLVE_TOL * scale:
            return x
        x = x + lu.solve(res)
    res = np.linalg.norm(rhs - Amat @ x)
    if res > 100 * SOLVE_TOL * scale:
        raise SolverError(f"iterative refinement stalled at residual {res:.3e}")
    return x


def _least_squares_potential(gx, gy, h):
    """Scalar field whose forward-difference gradient best matches (gx, gy)."""
    n = gx.shape[0]
    N = n * n

    def dof(j, i):
        return j * n + i

    rows, cols, vals, rhs = [], [], [], []
    eq = 0
    for j in range(n):
        for i in range(n - 1):
            rows += [eq, eq]
            cols += [dof(j, i + 1), dof(j, i)]
            vals += [1.0 / h, -1.0 / h]
            rhs.append(0.5 * (gx[j, i] + gx[j, i + 1]))
            eq += 1
    for j in range(n - 1):
        for i in range(n):
            rows += [eq, eq]
            cols += [dof(j + 1, i), dof(j, i)]
            vals += [1.0 / h, -1.0 / h]
            rhs.append(0.5 * (gy[j, i] + gy[j + 1, i]))
            eq += 1
    D = sparse.csr_matrix((vals, (rows, cols)), shape=(eq, N))
    t = np.array(rhs)
    pin = sparse.csr_matrix(
        ([1.0], ([0], [dof(n // 2, n // 2)])), shape=(1, N)
    )
    N2 = (D.T @ D + pin.T @ pin).tocsc()
    sol = splu(N2).solve(D.T @ t)
    return sol.reshape(n, n)


def solve_isothermal(chart, center, r=None, *, frame=None, gauge_scale=None,
                     nodes_per_axis=None):
    """Compute an isothermal patch around a chart point.

    The correction is solved on the normalized square inscribed in the disc
    of radius r; the returned patch covers the disc of radius r/4.  ``frame``
    and ``gauge_scale`` allow a uniform normalization across a sequence of
    charts (pass the limit chart's values).
    """
    frame = frame or _LocalFrame(chart, center)
    a_max = frame.max_square_halfwidth()
    r_max = a_max * math.sqrt(2.0)
    if r is None:
        r = 0.5 * r_max
    if r > r_max * (1 + 1e-12):
        raise DomainError(f"disc of radius {r} does not fit inside the chart")

    sing_min = float(min(np.linalg.svd(frame.L.T, compute_uv=False)))
    h_chart = min(chart.hx, chart.hy)
    last_error = None
    for attempt in range(MAX_SHRINK + 1):
        a = r / math.sqrt(2.0)
        if nodes_per_axis is None:
            m = int(round(a / (0.75 * sing_min * h_chart)))
            m = max(16, min(160, m))
        else:
            m = max(16, nodes_per_axis // 2)
        try:
            return _solve_on_square(chart, frame, r, a, m, gauge_scale)
        except CoercivityError as exc:
            last_error = exc
            r *= 0.5
        except _JacobianFlip as exc:
            last_error = exc
            r *= 0.5
    if isinstance(last_error, _JacobianFlip):
        raise SolverError(
            f"patch Jacobian kept changing sign down to r={2 * r}"
        ) from last_error
    raise CoercivityError(
        f"discrete form stayed non-coercive down to r={2 * r}"
    ) from last_error


class _JacobianFlip(RuntimeError):
    pass


def _solve_on_square(chart, frame, r, a, m, gauge_scale):
    n = 2 * m + 1
    h = a / m
    axis = np.linspace(-a, a, n)
    Xp, Yp = np.meshgrid(axis, axis)
    Ep, Fp, Gp = frame.metric_normalized(Xp, Yp)
    if np.any(Ep <= 0) or np.any(Ep * Gp - Fp * Fp <= 0):
        raise CoercivityError("normalized metric loses definiteness on the square")
    fields = _coefficient_fields(Ep, Fp, Gp, h, h)
    if not _coercive_enough(fields, h):
        raise CoercivityError("diagonal-dominance margin violated")

    zeta = _jet_from_fields(fields, Xp, Yp, h, m, m)
    Lzeta = _apply_L(zeta, fields, Xp, Yp)

    Amat, idx, inner = _assemble_strong(fields, h, n)
    rhs = Lzeta[inner]
    uhat_in = _refined_solve(Amat, rhs)
    uhat = np.zeros((n, n))
    uhat[inner] = uhat_in

    # Lax-Milgram check: ||uhat||_{1,2} <= sqrt(2) ||L zeta||_2
    gx = np.gradient(uhat, h, axis=1, edge_order=2)
    gy = np.gradient(uhat, h, axis=0, edge_order=2)
    norm_12 = math.sqrt(float(np.sum(uhat**2 + gx**2 + gy**2)) * h * h)
    norm_rhs = math.sqrt(float(np.sum(Lzeta**2)) * h * h)

    u = zeta(Xp, Yp) + uhat

    # harmonic conjugate on the half-width square
    q = m // 2
    sl = slice(m - q, m + q + 1)
    ux = np.gradient(u, h, axis=1)[sl, sl]
    uy = np.gradient(u, h, axis=0)[sl, sl]
    Ev, Fv, Gv = Ep[sl, sl], Fp[sl, sl], Gp[sl, sl]
    Wv = np.sqrt(Ev * Gv - Fv * Fv)
    gxv = -(Fv / Wv) * ux + (Ev / Wv) * uy
    gyv = -(Gv / Wv) * ux + (Fv / Wv) * uy
    v = _least_squares_potential(gxv, gyv, h)

    wfull = v + 1j * u[sl, sl]
    ax_v = axis[sl]

    # restrict to the patch square of half-width r/4 (interior of the v grid)
    pm = int(math.floor((r / 4.0) / h))
    qn = v.shape[0] // 2
    if pm + 1 >= qn:
        pm = qn - 2
    psl = slice(qn - pm, qn + pm + 1)
    wx = np.gradient(wfull, h, axis=1)[psl, psl]
    wy = np.gradient(wfull, h, axis=0)[psl, psl]
    w = wfull[psl, psl]
    axis_p = ax_v[psl]
    Xpp, Ypp = np.meshgrid(axis_p, axis_p)

    # chart-coordinate partials: X' = L^T (X - c)
    L = frame.L
    wx_c = L[0, 0] * wx + L[0, 1] * wy
    wy_c = L[1, 0] * wx + L[1, 1] * wy
    wz = 0.5 * (wx_c - 1j * wy_c)
    wzbar = 0.5 * (wx_c + 1j * wy_c)

    Xc, Yc = frame.chart_points(Xpp, Ypp)
    Ech, Fch, Gch = frame.metric_chart(Xc, Yc)
    sig, mu = _beltrami_fields(Ech, Fch, Gch)

    ci = pm  # center index in the patch grid
    if gauge_scale is None:
        wz0 = wz[ci, ci]
        if wz0 == 0:
            raise _JacobianFlip("vanishing derivative at the center")
        gauge_scale = math.sqrt(float(sig[ci, ci])) / wz0
    w = (w - w[ci, ci]) * gauge_scale
    wz = wz * gauge_scale
    wzbar = wzbar * gauge_scale

    jac = np.abs(wz) ** 2 - np.abs(wzbar) ** 2
    mask = Xpp**2 + Ypp**2 <= (r / 4.0) ** 2 + 1e-12
    jac_min = float(jac[mask].min())
    if jac_min <= 0:
        raise _JacobianFlip("orientation lost on the patch")

    lam = sig / np.abs(wz) ** 2
    residual = float(np.max(np.abs(wzbar - mu * wz)[mask]))

    patch = IsothermalPatch(
        center=frame.center,
        r=r,
        L=L,
        axis=axis_p,
        X=Xc,
        Y=Yc,
        mask=mask,
        w=w,
        lam=lam,
        wz=wz,
        wzbar=wzbar,
        cr_residual=residual,
        jacobian_min=jac_min,
        diagnostics={
            "r_used": r,
            "h_local": h,
            "uhat_norm_12": norm_12,
            "lzeta_norm_2": norm_rhs,
            "lax_milgram_ok": norm_12 <= math.sqrt(2.0) * norm_rhs * 1.05 + 1e-14,
            "gauge_scale": complex(gauge_scale),
        },
    )
    return patch


@dataclass
class SequenceReport:
    """Uniform-gauge comparison of a chart sequence against its limit."""

    dw: list
    dlam: list
    monotone_w: bool
    monotone_lam: bool


def patch_sequence_convergence(charts, limit, center, r=None):
    """sup|w_j - w| and sup|lambda_j - lambda| under a uniform normalization."""
    frame = _LocalFrame(limit, center)
    ref = solve_isothermal(limit, center, r, frame=frame)
    gauge = ref.diagnostics["gauge_scale"]
    dw, dlam = [], []
    for k, chart in enumerate(charts):
        try:
            pj = solve_isothermal(
                chart,
                center,
                ref.diagnostics["r_used"],
                frame=_SharedGeometryFrame(chart, frame),
                gauge_scale=gauge,
            )
        except Exception as exc:
            raise SolverError(f"sequence solve failed at index {k}: {exc}") from exc
        dw.append(float(np.max(np.abs(pj.w - ref.w)[ref.mask])))
        dlam.append(float(np.max(np.abs(pj.lam - ref.lam)[ref.mask])))

    def monotone(seq):
        return all(b <= a + 1e-12 for a, b in zip(seq, seq[1:]))

    return SequenceReport(dw, dlam, monotone(dw), monotone(dlam))


class _SharedGeometryFrame(_LocalFrame):
    """Frame that resamples a chart but reuses the limit's normalization."""

    def __init__(self, chart, ref_frame):
        cx, cy = ref_frame.center
        self.chart = chart
        self.center = (cx, cy)
        self.sE = RectBivariateSpline(chart.ys, chart.xs, chart.E)
        self.sF = RectBivariateSpline(chart.ys, chart.xs, chart.F)
        self.sG = RectBivariateSpline(chart.ys, chart.xs, chart.G)
        self.L = ref_frame.L
        self.Linv_T = ref_frame.Linv_T
