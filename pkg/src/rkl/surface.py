"""Surfaces: gridded metric charts and analytic model geometries.

A surface is either a :class:`GridChart` (metric tensor components E, F, G
sampled on a uniform rectangular grid) or a :class:`ModelSurface` (analytic
geometry with closed-form reference quantities).  This module computes
curvature, geodesic distance, geodesic balls, areas and boundary lengths.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import ndimage

from .errors import (
    DomainError,
    MetricError,
    StencilError,
    TruncationError,
    UnreachableError,
    UnsupportedOperationError,
)

_GAUSS_N = 96


def _xy(p):
    if isinstance(p, complex):
        return float(p.real), float(p.imag)
    x, y = p
    return float(x), float(y)


# ---------------------------------------------------------------------------
# GridChart


@dataclass(frozen=True)
class GridChart:
    """Metric tensor sampled at the nodes of a uniform rectangular grid.

    Arrays have shape (ny, nx); entry [j, i] sits at
    (x0 + i*hx, y0 + j*hy).  ``periodic_y`` marks charts whose y axis is an
    angle that wraps (polar charts); the flag is constructor-only and not
    serialized.
    """

    x0: float
    x1: float
    y0: float
    y1: float
    E: np.ndarray
    F: np.ndarray
    G: np.ndarray
    periodic_y: bool = False

    def __post_init__(self):
        E, F, G = (np.asarray(a, dtype=float) for a in (self.E, self.F, self.G))
        if E.shape != F.shape or E.shape != G.shape or E.ndim != 2:
            raise MetricError("E, F, G must be 2-D arrays of equal shape")
        ny, nx = E.shape
        if nx < 8 or ny < 8:
            raise MetricError("grid needs at least 8 nodes per axis")
        if not (self.x1 > self.x0 and self.y1 > self.y0):
            raise MetricError("degenerate parameter rectangle")
        det = E * G - F * F
        if not (np.all(E > 0) and np.all(det > 0)):
            j, i = np.unravel_index(int(np.argmin(np.minimum(E, det))), E.shape)
            raise MetricError(f"metric not positive definite at node (i={i}, j={j})")
        object.__setattr__(self, "E", E)
        object.__setattr__(self, "F", F)
        object.__setattr__(self, "G", G)

    @property
    def nx(self):
        return self.E.shape[1]

    @property
    def ny(self):
        return self.E.shape[0]

    @property
    def hx(self):
        return (self.x1 - self.x0) / (self.nx - 1)

    @property
    def hy(self):
        return (self.y1 - self.y0) / (self.ny - 1)

    @property
    def xs(self):
        return np.linspace(self.x0, self.x1, self.nx)

    @property
    def ys(self):
        return np.linspace(self.y0, self.y1, self.ny)

    def contains(self, p):
        x, y = _xy(p)
        eps = 1e-12 * max(self.x1 - self.x0, self.y1 - self.y0)
        return (self.x0 - eps <= x <= self.x1 + eps) and (
            self.y0 - eps <= y <= self.y1 + eps
        )

    def interp(self, name, p):
        """Bilinear interpolation of field E, F or G at a point."""
        return self.interp_array(getattr(self, name), p)

    def interp_array(self, arr, p):
        """Bilinear interpolation of an arbitrary node field at a point."""
        if not self.contains(p):
            raise DomainError(f"point {p} outside chart rectangle")
        x, y = _xy(p)
        fx = np.clip((x - self.x0) / self.hx, 0.0, self.nx - 1.0)
        fy = np.clip((y - self.y0) / self.hy, 0.0, self.ny - 1.0)
        i = min(int(fx), self.nx - 2)
        j = min(int(fy), self.ny - 2)
        tx, ty = fx - i, fy - j
        return (
            arr[j, i] * (1 - tx) * (1 - ty)
            + arr[j, i + 1] * tx * (1 - ty)
            + arr[j + 1, i] * (1 - tx) * ty
            + arr[j + 1, i + 1] * tx * ty
        )

    def save(self, path):
        save_chart(self, path)


def save_chart(chart, path):
    """Write a chart in the line-oriented text format."""
    lines = [
        f"nx={chart.nx}",
        f"ny={chart.ny}",
        f"x0={chart.x0!r}",
        f"x1={chart.x1!r}",
        f"y0={chart.y0!r}",
        f"y1={chart.y1!r}",
    ]
    for j in range(chart.ny):
        for i in range(chart.nx):
            lines.append(
                "%.17g %.17g %.17g" % (chart.E[j, i], chart.F[j, i], chart.G[j, i])
            )
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def load_chart(path):
    """Read a chart from the line-oriented text format."""
    with open(path, encoding="utf-8") as fh:
        raw = [ln.strip() for ln in fh if ln.strip()]
    header = {}
    k = 0
    while k < len(raw) and "=" in raw[k]:
        key, _, val = raw[k].partition("=")
        header[key.strip()] = val.strip()
        k += 1
    try:
        nx, ny = int(header["nx"]), int(header["ny"])
        x0, x1 = float(header["x0"]), float(header["x1"])
        y0, y1 = float(header["y0"]), float(header["y1"])
    except KeyError as exc:
        raise MetricError(f"missing chart header field {exc}") from exc
    data = raw[k:]
    if len(data) != nx * ny:
        raise MetricError(f"expected {nx * ny} data lines, got {len(data)}")
    vals = np.array([[float(tok) for tok in ln.split()] for ln in data])
    if vals.shape[1] != 3:
        raise MetricError("each data line must hold 'E F G'")
    E = vals[:, 0].reshape(ny, nx)
    F = vals[:, 1].reshape(ny, nx)
    G = vals[:, 2].reshape(ny, nx)
    return GridChart(x0, x1, y0, y1, E, F, G)


# ---------------------------------------------------------------------------
# Model surfaces


class ModelSurface:
    """Analytic model geometry with exact reference quantities."""

    kind = "model"
    compact = False

    def metric_at(self, p):
        raise NotImplementedError

    def gaussian_curvature(self, p):
        raise NotImplementedError

    def distance(self, p, q):
        raise NotImplementedError

    def injectivity_radius(self, p):
        raise NotImplementedError

    def polar_jacobian(self, r):
        """sqrt(det) in geodesic polar coordinates about a center point.

        Defined for the radially symmetric models; perimeter of the geodesic
        ball of radius r is 2*pi*polar_jacobian(r).
        """
        raise UnsupportedOperationError(f"{self.kind} has no radial ball profile")


@dataclass(frozen=True)
class EuclideanPlane(ModelSurface):
    kind = "euclidean_plane"

    def metric_at(self, p):
        return (1.0, 0.0, 1.0)

    def gaussian_curvature(self, p):
        return 0.0

    def distance(self, p, q):
        px, py = _xy(p)
        qx, qy = _xy(q)
        return math.hypot(px - qx, py - qy)

    def injectivity_radius(self, p):
        return math.inf

    def polar_jacobian(self, r):
        return r

    exact_lambda1 = 0.0
    exact_I_inf = 0.0


@dataclass(frozen=True)
class HyperbolicDisc(ModelSurface):
    """Curvature -1 plane in the unit-disc model, lambda = 4/(1-|w|^2)^2."""

    kind = "hyperbolic_disc"

    def conformal_factor(self, p):
        x, y = _xy(p)
        s = x * x + y * y
        if s >= 1.0:
            raise DomainError("point outside the unit disc")
        return 4.0 / (1.0 - s) ** 2

    def metric_at(self, p):
        lam = self.conformal_factor(p)
        return (lam, 0.0, lam)

    def gaussian_curvature(self, p):
        return -1.0

    def distance(self, p, q):
        px, py = _xy(p)
        qx, qy = _xy(q)
        w1, w2 = complex(px, py), complex(qx, qy)
        if abs(w1) >= 1 or abs(w2) >= 1:
            raise DomainError("points must lie inside the unit disc")
        t = abs((w1 - w2) / (1 - w1.conjugate() * w2))
        return 2.0 * math.atanh(t)

    def injectivity_radius(self, p):
        return math.inf

    def polar_jacobian(self, r):
        return math.sinh(r)

    def ball_euclidean(self, o, R):
        """Euclidean center and radius of the geodesic ball B_R(o)."""
        ox, oy = _xy(o)
        w = complex(ox, oy)
        t = math.tanh(R / 2.0)
        d = 1.0 - t * t * abs(w) ** 2
        return w * (1.0 - t * t) / d, t * (1.0 - abs(w) ** 2) / d

    exact_lambda1 = 0.25
    exact_I_inf = 1.0


@dataclass(frozen=True)
class Sphere(ModelSurface):
    """Round sphere in the colatitude/longitude chart (theta, phi)."""

    radius: float = 1.0
    kind = "sphere"
    compact = True

    def __post_init__(self):
        if self.radius <= 0:
            raise MetricError("sphere radius must be positive")

    def metric_at(self, p):
        theta, _ = _xy(p)
        if not (0.0 <= theta <= math.pi):
            raise DomainError("colatitude outside [0, pi]")
        r = self.radius
        return (r * r, 0.0, r * r * math.sin(theta) ** 2)

    def gaussian_curvature(self, p):
        return 1.0 / self.radius**2

    def _unit(self, p):
        theta, phi = _xy(p)
        return np.array(
            [
                math.sin(theta) * math.cos(phi),
                math.sin(theta) * math.sin(phi),
                math.cos(theta),
            ]
        )

    def distance(self, p, q):
        c = float(np.clip(np.dot(self._unit(p), self._unit(q)), -1.0, 1.0))
        return self.radius * math.acos(c)

    def injectivity_radius(self, p):
        return math.pi * self.radius

    def polar_jacobian(self, r):
        return self.radius * math.sin(r / self.radius)

    @property
    def area(self):
        return 4.0 * math.pi * self.radius**2

    @property
    def exact_lambda1(self):
        # first nonzero closed eigenvalue, l(l+1)/radius^2 with l=1
        return 2.0 / self.radius**2


@dataclass(frozen=True)
class FlatTorus(ModelSurface):
    """Flat rectangular torus, side lengths width x height."""

    width: float = 2.0 * math.pi
    height: float = 2.0 * math.pi
    kind = "flat_torus"
    compact = True

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise MetricError("torus side lengths must be positive")

    def metric_at(self, p):
        return (1.0, 0.0, 1.0)

    def gaussian_curvature(self, p):
        return 0.0

    def distance(self, p, q):
        px, py = _xy(p)
        qx, qy = _xy(q)
        dx = abs(px - qx) % self.width
        dy = abs(py - qy) % self.height
        return math.hypot(min(dx, self.width - dx), min(dy, self.height - dy))

    def injectivity_radius(self, p):
        return 0.5 * min(self.width, self.height)

    def polar_jacobian(self, r):
        # valid for r below the injectivity radius
        return r

    @property
    def area(self):
        return self.width * self.height

    @property
    def exact_lambda1(self):
        return (2.0 * math.pi / max(self.width, self.height)) ** 2


@dataclass(frozen=True)
class Revolution(ModelSurface):
    """Surface of revolution, profile given as radius vs arclength.

    The chart is (s, phi) with E=1, F=0, G=profile(s)^2; phi wraps.
    """

    profile: object
    length: float
    caps: tuple = (False, False)
    kind = "revolution"
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        ss = np.linspace(0.0, self.length, 512)
        vals = np.array([self.profile(s) for s in ss])
        interior = vals[1:-1]
        if np.any(interior <= 0):
            raise MetricError("revolution profile must be positive on the interior")
        lo = vals[0] <= 0 and not self.caps[0]
        hi = vals[-1] <= 0 and not self.caps[1]
        if lo or hi:
            raise MetricError("profile vanishes at an uncapped end")

    @property
    def compact(self):
        return bool(self.caps[0] and self.caps[1])

    def metric_at(self, p):
        s, _ = _xy(p)
        if not (0.0 <= s <= self.length):
            raise DomainError("arclength outside profile interval")
        f = self.profile(s)
        return (1.0, 0.0, f * f)

    def gaussian_curvature(self, p):
        s, _ = _xy(p)
        h = 1e-5 * max(1.0, self.length)
        s = min(max(s, h), self.length - h)
        f0, fp, fm = self.profile(s), self.profile(s + h), self.profile(s - h)
        return -(fp - 2 * f0 + fm) / (h * h) / f0

    def distance(self, p, q):
        chart = self._cache.get("chart")
        if chart is None:
            chart = chart_from_callable(
                lambda x, y: (1.0, 0.0, max(self.profile(x), 1e-12) ** 2),
                (0.0, self.length, 0.0, 2 * math.pi),
                (257, 257),
                periodic_y=True,
            )
            self._cache["chart"] = chart
        d, _ = fast_marching_distance(chart, p)
        return _sample_field(chart, d, q)

    def injectivity_radius(self, p):
        ss = np.linspace(0.0, self.length, 1024)
        fmin = min(self.profile(s) for s in ss)
        return math.pi * fmin  # half the shortest closed parallel


@dataclass(frozen=True)
class ConformalDisc(ModelSurface):
    """Disc 0 <= |w| < rho_max with a radial conformal metric lam(|w|)|dw|^2."""

    lam: object
    rho_max: float = 1.0
    kind = "conformal_disc"
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        ss = np.linspace(0.0, self.rho_max, 512, endpoint=False)
        if any(self.lam(s) <= 0 for s in ss):
            raise MetricError("conformal factor must be positive")

    def conformal_factor(self, p):
        x, y = _xy(p)
        s = math.hypot(x, y)
        if s >= self.rho_max:
            raise DomainError("point outside the conformal disc")
        return float(self.lam(s))

    def metric_at(self, p):
        lam = self.conformal_factor(p)
        return (lam, 0.0, lam)

    def gaussian_curvature(self, p):
        x, y = _xy(p)
        s = max(math.hypot(x, y), 1e-6 * self.rho_max)
        h = 1e-4 * self.rho_max
        s = min(max(s, h), self.rho_max * (1 - 1e-9) - h)
        logl = lambda t: math.log(self.lam(t))
        d1 = (logl(s + h) - logl(s - h)) / (2 * h)
        d2 = (logl(s + h) - 2 * logl(s) + logl(s - h)) / (h * h)
        return -(d2 + d1 / s) / (2.0 * self.lam(s))

    def _radial_table(self):
        tab = self._cache.get("radial")
        if tab is None:
            ss = np.linspace(0.0, self.rho_max * (1 - 1e-9), 4097)
            sq = np.sqrt([self.lam(s) for s in ss])
            from scipy.integrate import cumulative_trapezoid

            geo = np.concatenate([[0.0], cumulative_trapezoid(sq, ss)])
            tab = (ss, geo, sq)
            self._cache["radial"] = tab
        return tab

    def geodesic_radius(self, s):
        """Geodesic distance from the center to coordinate radius s."""
        ss, geo, _ = self._radial_table()
        return float(np.interp(s, ss, geo))

    def coordinate_radius(self, r):
        """Inverse of geodesic_radius."""
        ss, geo, _ = self._radial_table()
        if r > geo[-1]:
            raise DomainError("geodesic radius beyond the disc")
        return float(np.interp(r, geo, ss))

    def distance(self, p, q):
        px, py = _xy(p)
        if px == 0.0 and py == 0.0:
            qx, qy = _xy(q)
            return self.geodesic_radius(math.hypot(qx, qy))
        raise UnsupportedOperationError(
            "conformal-disc distance is only available from the center"
        )

    def injectivity_radius(self, p):
        px, py = _xy(p)
        if px == 0.0 and py == 0.0:
            return self.geodesic_radius(self.rho_max * (1 - 1e-9))
        raise UnsupportedOperationError("injectivity radius known at the center only")

    def polar_jacobian(self, r):
        s = self.coordinate_radius(r)
        return s * math.sqrt(self.lam(s))


# ---------------------------------------------------------------------------
# Regions


@dataclass
class Region:
    """Subdomain of a surface: geodesic ball or a grid node mask."""

    surface: object
    kind: str  # "ball" or "mask"
    center: tuple = None
    radius: float = None
    chart: GridChart = None
    mask: np.ndarray = None
    truncated: bool = False
    _area: float = field(default=None, repr=False)
    _perimeter: float = field(default=None, repr=False)

    def __post_init__(self):
        if self.kind == "mask":
            if self.mask is None or self.chart is None:
                raise DomainError("mask regions need a chart and a mask")
            if not self.mask.any():
                raise DomainError("empty region")
            labels, n = ndimage.label(self.mask)
            if n != 1:
                raise DomainError(f"mask region is disconnected ({n} components)")
        elif self.kind == "ball":
            if self.radius is None or self.radius <= 0:
                raise DomainError("ball region needs a positive radius")
        else:
            raise DomainError(f"unknown region kind {self.kind!r}")

    @property
    def area(self):
        if self._area is None:
            self._area, self._perimeter = measure(self)
        return self._area

    @property
    def perimeter(self):
        if self._perimeter is None:
            self._area, self._perimeter = measure(self)
        return self._perimeter


# ---------------------------------------------------------------------------
# Operations


def metric_at(surface, p):
    """Metric tensor components (E, F, G) at a point."""
    if isinstance(surface, GridChart):
        return (
            float(surface.interp("E", p)),
            float(surface.interp("F", p)),
            float(surface.interp("G", p)),
        )
    return surface.metric_at(p)


def curvature_field(chart):
    """Brioschi Gaussian curvature at every node of a chart."""
    if chart.nx < 8 or chart.ny < 8:
        raise StencilError("chart too small for curvature stencils")
    hx, hy = chart.hx, chart.hy
    E, F, G = chart.E, chart.F, chart.G

    def dx(a):
        return np.gradient(a, hx, axis=1, edge_order=2)

    def dy(a):
        if chart.periodic_y:
            # wrap-aware derivative: append the first row for periodic charts
            ext = np.vstack([a[-2:-1], a, a[1:2]])
            return np.gradient(ext, hy, axis=0, edge_order=2)[1:-1]
        return np.gradient(a, hy, axis=0, edge_order=2)

    Ex, Ey = dx(E), dy(E)
    Gx, Gy = dx(G), dy(G)
    Fx, Fy = dx(F), dy(F)
    Eyy = dy(Ey)
    Gxx = dx(Gx)
    Fxy = dy(Fx)
    det = E * G - F * F
    m1 = (
        (-0.5 * Eyy + Fxy - 0.5 * Gxx) * (E * G - F * F)
        - 0.5 * Ex * ((Fy - 0.5 * Gx) * G - F * 0.5 * Gy)
        + (Fx - 0.5 * Ey) * ((Fy - 0.5 * Gx) * F - E * 0.5 * Gy)
    )
    # expand det of the Brioschi matrices along the first row
    a, b, c = 0.0, 0.5 * Ey, 0.5 * Gx
    m2 = a * (E * G - F * F) - b * (b * G - c * F) + c * (b * F - c * E)
    return (m1 - m2) / det**2


def gaussian_curvature(surface, p):
    """Gaussian curvature at a point."""
    if isinstance(surface, GridChart):
        K = curvature_field(surface)
        return _sample_field(surface, K, p)
    return surface.gaussian_curvature(p)


def _sample_field(chart, arr, p):
    return float(chart.interp_array(arr, p))


def fast_marching_distance(chart, source, mask=None):
    """First-order geodesic distance field from a source point.

    Diagonal metrics (F == 0) use the axis-aligned eikonal update; charts with
    F != 0 fall back to Dijkstra on a 16-neighbour metric graph.  Returns
    (distance field, error bound estimate).
    """
    nx, ny = chart.nx, chart.ny
    hx, hy = chart.hx, chart.hy
    sx, sy = _xy(source)
    i0 = int(round((sx - chart.x0) / hx))
    j0 = int(round((sy - chart.y0) / hy))
    if not (0 <= i0 < nx and 0 <= j0 < ny):
        raise DomainError("source outside chart")
    if mask is not None and not mask[j0, i0]:
        raise UnreachableError("source outside the region mask")
    diagonal = bool(np.all(chart.F == 0.0))
    dist = np.full((ny, nx), np.inf)
    dist[j0, i0] = 0.0
    done = np.zeros((ny, nx), dtype=bool)
    heap = [(0.0, j0, i0)]

    def neighbors_y(j):
        out = []
        if j > 0:
            out.append(j - 1)
        elif chart.periodic_y:
            out.append(ny - 2)
        if j < ny - 1:
            out.append(j + 1)
        elif chart.periodic_y:
            out.append(1)
        return out

    if diagonal:
        while heap:
            d, j, i = heapq.heappop(heap)
            if done[j, i]:
                continue
            done[j, i] = True
            for jj, ii in [(j, i - 1), (j, i + 1)] + [(jn, i) for jn in neighbors_y(j)]:
                if not (0 <= ii < nx and 0 <= jj < ny):
                    continue
                if done[jj, ii] or (mask is not None and not mask[jj, ii]):
                    continue
                ax = min(
                    dist[jj, ii - 1] if ii > 0 else np.inf,
                    dist[jj, ii + 1] if ii < nx - 1 else np.inf,
                )
                cands = [dist[jn, ii] for jn in neighbors_y(jj)]
                ay = min(cands) if cands else np.inf
                # eikonal: (u-ax)^2/(E hx^2) + (u-ay)^2/(G hy^2) = 1
                ce = hx * math.sqrt(chart.E[jj, ii])
                cg = hy * math.sqrt(chart.G[jj, ii])
                u = _eikonal_update(ax, ay, ce, cg)
                if u < dist[jj, ii]:
                    dist[jj, ii] = u
                    heapq.heappush(heap, (u, jj, ii))
        err = max(hx * float(np.sqrt(chart.E).max()), hy * float(np.sqrt(chart.G).max()))
    else:
        steps = [
            (di, dj)
            for di in (-2, -1, 0, 1, 2)
            for dj in (-2, -1, 0, 1, 2)
            if (di, dj) != (0, 0) and math.gcd(abs(di), abs(dj)) == 1
        ]
        while heap:
            d, j, i = heapq.heappop(heap)
            if done[j, i]:
                continue
            done[j, i] = True
            for di, dj in steps:
                ii, jj = i + di, j + dj
                if chart.periodic_y:
                    jj %= ny - 1
                if not (0 <= ii < nx and 0 <= jj < ny):
                    continue
                if done[jj, ii] or (mask is not None and not mask[jj, ii]):
                    continue
                dxv, dyv = di * hx, dj * hy
                Em = 0.5 * (chart.E[j, i] + chart.E[jj, ii])
                Fm = 0.5 * (chart.F[j, i] + chart.F[jj, ii])
                Gm = 0.5 * (chart.G[j, i] + chart.G[jj, ii])
                step = math.sqrt(Em * dxv * dxv + 2 * Fm * dxv * dyv + Gm * dyv * dyv)
                u = d + step
                if u < dist[jj, ii]:
                    dist[jj, ii] = u
                    heapq.heappush(heap, (u, jj, ii))
        # graph distances keep an O(1) angular overestimate on top of O(h)
        err = 0.03 * float(np.nanmax(np.where(np.isfinite(dist), dist, np.nan))) + max(
            hx, hy
        )
    return dist, err


def _eikonal_update(ax, ay, ce, cg):
    if not math.isfinite(ax) and not math.isfinite(ay):
        return math.inf
    if not math.isfinite(ay) or ax + ce <= ay:
        return ax + ce
    if not math.isfinite(ax) or ay + cg <= ax:
        return ay + cg
    # joint quadratic update
    A = 1.0 / ce**2 + 1.0 / cg**2
    B = -2.0 * (ax / ce**2 + ay / cg**2)
    C = ax**2 / ce**2 + ay**2 / cg**2 - 1.0
    disc = B * B - 4 * A * C
    if disc <= 0:
        return min(ax + ce, ay + cg)
    return (-B + math.sqrt(disc)) / (2 * A)


def geodesic_distance(surface, p, q):
    """Geodesic distance between two points."""
    if isinstance(surface, GridChart):
        d, _ = fast_marching_distance(surface, p)
        val = _sample_field(surface, d, q)
        if not math.isfinite(val):
            raise UnreachableError("target not reached by the distance front")
        return val
    return surface.distance(p, q)


def geodesic_ball(surface, o, R):
    """Region of points at geodesic distance < R from o."""
    if R <= 0:
        raise DomainError("ball radius must be positive")
    if isinstance(surface, GridChart):
        d, _ = fast_marching_distance(surface, o)
        mask = d < R
        edge = (
            mask[0, :].any()
            or mask[-1, :].any()
            or mask[:, 0].any()
            or mask[:, -1].any()
        )
        region = Region(
            surface, "mask", center=_xy(o), radius=R, chart=surface, mask=mask,
            truncated=bool(edge),
        )
        if edge and not surface.periodic_y:
            raise TruncationError(
                f"geodesic ball of radius {R} truncated by the chart boundary",
                region=region,
            )
        return region
    if isinstance(surface, Sphere) and R >= math.pi * surface.radius:
        raise DomainError("ball radius reaches the antipode")
    if isinstance(surface, ConformalDisc):
        # force an early reach check
        surface.coordinate_radius(R)
    return Region(surface, "ball", center=_xy(o), radius=R)


def measure(region):
    """(area, perimeter) of a region."""
    if region.kind == "ball":
        surf, R = region.surface, region.radius
        nodes, weights = leggauss(_GAUSS_N)
        rr = 0.5 * R * (nodes + 1.0)
        ww = 0.5 * R * weights
        J = np.array([surf.polar_jacobian(r) for r in rr])
        area = 2.0 * math.pi * float(np.dot(ww, J))
        perimeter = 2.0 * math.pi * surf.polar_jacobian(R)
        return area, perimeter
    chart, mask = region.chart, region.mask
    det = np.sqrt(chart.E * chart.G - chart.F**2)
    area = float(np.sum(det[mask])) * chart.hx * chart.hy
    perimeter = _mask_perimeter(chart, mask)
    return area, perimeter


def _mask_perimeter(chart, mask):
    """Marching-squares boundary length with metric edge weights."""
    hx, hy = chart.hx, chart.hy
    total = 0.0
    m = mask.astype(np.int8)
    ny, nx = m.shape
    # midpoints of cell edges, cells indexed by lower-left node (i, j)
    for j in range(ny - 1):
        for i in range(nx - 1):
            c = (m[j, i], m[j, i + 1], m[j + 1, i + 1], m[j + 1, i])
            s = sum(c)
            if s == 0 or s == 4:
                continue
            pts = []
            if c[0] != c[1]:
                pts.append((i + 0.5, j))
            if c[1] != c[2]:
                pts.append((i + 1, j + 0.5))
            if c[3] != c[2]:
                pts.append((i + 0.5, j + 1))
            if c[0] != c[3]:
                pts.append((i, j + 0.5))
            if len(pts) == 4:  # saddle: pair arbitrarily but consistently
                segs = [(pts[0], pts[3]), (pts[1], pts[2])]
            elif len(pts) == 2:
                segs = [(pts[0], pts[1])]
            else:
                continue
            for (ia, ja), (ib, jb) in segs:
                dxv, dyv = (ib - ia) * hx, (jb - ja) * hy
                pm = (
                    chart.x0 + 0.5 * (ia + ib) * hx,
                    chart.y0 + 0.5 * (ja + jb) * hy,
                )
                E, F, G = metric_at(chart, pm)
                total += math.sqrt(E * dxv * dxv + 2 * F * dxv * dyv + G * dyv * dyv)
    return total


def injectivity_radius(surface, p):
    """Injectivity radius at a point (models only)."""
    if isinstance(surface, GridChart):
        raise UnsupportedOperationError(
            "injectivity radius is not computed on gridded charts"
        )
    return surface.injectivity_radius(p)


# ---------------------------------------------------------------------------
# Chart builders


def chart_from_callable(metric, rect, shape, periodic_y=False):
    """Sample a metric callable (x, y) -> (E, F, G) onto a GridChart."""
    x0, x1, y0, y1 = rect
    nx, ny = shape
    xs = np.linspace(x0, x1, nx)
    ys = np.linspace(y0, y1, ny)
    E = np.empty((ny, nx))
    F = np.empty((ny, nx))
    G = np.empty((ny, nx))
    for j, y in enumerate(ys):
        for i, x in enumerate(xs):
            E[j, i], F[j, i], G[j, i] = metric(x, y)
    return GridChart(x0, x1, y0, y1, E, F, G, periodic_y=periodic_y)


def chart_from_model(model, rect, shape, periodic_y=False):
    """Sample a model surface's metric onto a GridChart."""
    return chart_from_callable(
        lambda x, y: model.metric_at((x, y)), rect, shape, periodic_y=periodic_y
    )
