"""Square-integrable holomorphic differentials and their reproducing kernels.

The Hilbert space is spanned by monomials ((w-c)/s)^k on a planar coordinate
domain; the Gram matrix of L2 inner products is assembled by quadrature and
Cholesky-factored.  Kernels are evaluated by back-substitution.  The L2 norm
of a differential is metric-free, so kernels depend only on the coordinate
domain; metric normalization divides by the conformal factors at the two
evaluation points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import sparse
from scipy.linalg import solve_triangular
from scipy.sparse.linalg import splu

from .errors import DomainError, QuadratureError, SolverError
from .surface import EuclideanPlane, Region

COND_LIMIT = 1e12


# ---------------------------------------------------------------------------
# Quadrature rules


def disc_quadrature(center, radius, n_r=48, n_t=96, r_inner=0.0):
    """Tensor Gauss-Legendre (radius) x uniform (angle) rule on a disc/annulus.

    Exact for monomial Gram entries up to high order.
    """
    gl_x, gl_w = leggauss(n_r)
    rr = r_inner + 0.5 * (radius - r_inner) * (gl_x + 1.0)
    wr = 0.5 * (radius - r_inner) * gl_w * rr
    tt = 2.0 * math.pi * np.arange(n_t) / n_t
    wt = 2.0 * math.pi / n_t
    nodes = (center + np.outer(rr, np.exp(1j * tt))).ravel()
    weights = np.outer(wr * wt, np.ones(n_t)).ravel()
    return nodes, weights


def mask_quadrature(region):
    """Midpoint rule over the nodes of a mask region (coordinate area)."""
    chart, mask = region.chart, region.mask
    X, Y = np.meshgrid(chart.xs, chart.ys)
    nodes = (X + 1j * Y)[mask]
    weights = np.full(nodes.shape, chart.hx * chart.hy)
    return nodes, weights


# ---------------------------------------------------------------------------
# Bergman space


@dataclass
class BergmanSpace:
    """Quadrature + monomial basis + Gram Cholesky factor on a planar domain."""

    nodes: np.ndarray
    weights: np.ndarray
    center: complex
    scale: float
    ks: np.ndarray
    gram: np.ndarray
    chol: np.ndarray
    domain: object = None
    interior: object = None  # predicate z -> bool, optional

    @property
    def basis_size(self):
        return len(self.ks)

    def basis_at(self, z):
        t = (np.asarray(z) - self.center) / self.scale
        return np.power.outer(t, self.ks).T if np.ndim(z) else t ** self.ks

    def _check_interior(self, z):
        if self.interior is not None and not self.interior(z):
            raise DomainError(f"point {z} outside the domain interior")


@dataclass
class KernelValue:
    """Kernel coefficient in coordinates, plus its metric normalization."""

    raw: complex
    normalized: float = None


def space_from_quadrature(nodes, weights, basis_size, center=None, scale=None,
                          laurent=False, interior=None, domain=None):
    """Assemble a BergmanSpace from an explicit quadrature rule."""
    nodes = np.asarray(nodes, dtype=complex)
    weights = np.asarray(weights, dtype=float)
    if center is None:
        center = complex(np.sum(nodes * weights) / np.sum(weights))
    if scale is None:
        scale = float(np.sqrt(np.sum(np.abs(nodes - center) ** 2 * weights)
                              / np.sum(weights))) * math.sqrt(2.0)
    if laurent:
        ks = np.arange(-basis_size, basis_size + 1)
    else:
        ks = np.arange(basis_size)
    while True:
        t = (nodes - center) / scale
        V = np.power.outer(t, ks)  # (n_nodes, n_basis)
        gram = (V.conj() * weights[:, None]).T @ V
        gram = 0.5 * (gram + gram.conj().T)
        cond = np.linalg.cond(gram)
        if cond <= COND_LIMIT:
            break
        if laurent:
            if len(ks) <= 3:
                raise QuadratureError("Gram stayed ill-conditioned after truncation")
            ks = ks[1:-1]
        else:
            if len(ks) <= 1:
                raise QuadratureError("Gram stayed ill-conditioned after truncation")
            ks = ks[:-1]
    try:
        chol = np.linalg.cholesky(gram)
    except np.linalg.LinAlgError as exc:
        raise QuadratureError("Gram matrix not positive definite at this "
                              "quadrature resolution") from exc
    return BergmanSpace(nodes, weights, complex(center), float(scale), ks,
                        gram, chol, domain=domain, interior=interior)


def build_bergman_space(domain, basis_size):
    """Bergman space on a disc, annulus, or mask region.

    domain: Region (ball on the Euclidean plane or a mask region), or a tuple
    ("disc", center, radius) / ("annulus", center, r_inner, r_outer).
    """
    if isinstance(domain, Region):
        if domain.kind == "ball":
            if not isinstance(domain.surface, EuclideanPlane):
                raise DomainError("ball domains must live in the coordinate plane")
            c = complex(*domain.center)
            r = domain.radius
            nodes, weights = disc_quadrature(c, r)
            return space_from_quadrature(
                nodes, weights, basis_size, center=c, scale=r,
                interior=lambda z, c=c, r=r: abs(z - c) < r, domain=domain)
        nodes, weights = mask_quadrature(domain)
        return space_from_quadrature(nodes, weights, basis_size, domain=domain)
    kind = domain[0]
    if kind == "disc":
        _, c, r = domain
        nodes, weights = disc_quadrature(complex(c), float(r))
        return space_from_quadrature(
            nodes, weights, basis_size, center=complex(c), scale=float(r),
            interior=lambda z: abs(z - complex(c)) < float(r), domain=domain)
    if kind == "annulus":
        _, c, r0, r1 = domain
        nodes, weights = disc_quadrature(complex(c), float(r1), r_inner=float(r0))
        return space_from_quadrature(
            nodes, weights, basis_size, center=complex(c), scale=float(r1),
            laurent=True,
            interior=lambda z: float(r0) < abs(z - complex(c)) < float(r1),
            domain=domain)
    raise DomainError(f"unknown domain kind {kind!r}")


def kernel_offdiag(space, z, w):
    """Raw kernel coefficient K*(z, w) = sum_k phi_k(z) conj(phi_k(w))."""
    space._check_interior(z)
    space._check_interior(w)
    yz = solve_triangular(space.chol, space.basis_at(z), lower=True)
    yw = solve_triangular(space.chol, space.basis_at(w), lower=True)
    raw = complex(np.vdot(yw, yz))  # conjugates the w argument
    return KernelValue(raw=raw)


def kernel_diag(space, z):
    """Diagonal kernel K*(z, z) >= 0."""
    val = kernel_offdiag(space, z, z)
    return KernelValue(raw=complex(max(val.raw.real, 0.0)))


def normalized_magnitude(space, lam, z, w=None):
    """|K(z, w)| after dividing by the conformal factors at both points.

    lam: callable taking a complex point to the conformal factor.  For z == w
    this is raw / lam(z), the pointwise comparison quantity.
    """
    if w is None:
        w = z
    lz, lw = float(lam(z)), float(lam(w))
    if lz <= 0 or lw <= 0:
        raise DomainError("conformal factor must be positive")
    raw = kernel_offdiag(space, z, w).raw
    mag = abs(raw) / math.sqrt(lz * lw)
    return KernelValue(raw=raw, normalized=mag)


def reproducing_residual(space, coefficients, sample_points=None):
    """Relative reproducing defect of f = sum_k c_k basis_k under quadrature."""
    c = np.zeros(space.basis_size, dtype=complex)
    c[: len(coefficients)] = coefficients
    f_nodes = space.basis_at(space.nodes).T @ c
    fnorm = math.sqrt(float(np.sum(np.abs(f_nodes) ** 2 * space.weights)))
    if fnorm == 0:
        return 0.0
    if sample_points is None:
        sample_points = space.center + space.scale * 0.3 * np.exp(
            2j * math.pi * np.arange(8) / 8.0
        )
    worst = 0.0
    Y = solve_triangular(space.chol, space.basis_at(space.nodes), lower=True)
    for z in sample_points:
        yz = solve_triangular(space.chol, space.basis_at(z), lower=True)
        kz = Y.conj().T @ yz  # K*(z, node) conjugated in the node argument
        integral = complex(np.sum(kz * f_nodes * space.weights))
        fz = complex(space.basis_at(z) @ c)
        worst = max(worst, abs(integral - fz))
    return worst / fnorm


# ---------------------------------------------------------------------------
# Minimal-norm dbar solve


def dbar_min_norm_solve(region, lam, v, lambda1=None, n_grid=64):
    """Least-norm solution of the discretized dbar equation.

    region: ("disc", center, radius) or a mask Region; lam: conformal factor
    callable (enters only the norm of the (1,1)-datum v); v: callable of a
    complex point.  Returns (u_field, info) where u_field holds the node
    values of the coefficient of u and info reports norms, the residual and
    the minimality certificate.  When lambda1 is given the ratio is audited
    against 2/sqrt(lambda1).
    """
    if isinstance(region, Region):
        chart, mask = region.chart, region.mask
        X, Y = np.meshgrid(chart.xs, chart.ys)
        h = chart.hx
        inside = mask
    else:
        _, c, r = region
        c = complex(c)
        r = float(r)
        xs = np.linspace(c.real - r, c.real + r, n_grid)
        h = xs[1] - xs[0]
        ys = c.imag + (xs - c.real)
        X, Y = np.meshgrid(xs, ys)
        inside = (X - c.real) ** 2 + (Y - c.imag) ** 2 < r * r
    Z = X + 1j * Y
    idx = -np.ones(inside.shape, dtype=int)
    idx[inside] = np.arange(int(inside.sum()))
    n = int(inside.sum())

    # interior nodes: all four neighbours inside
    interior = inside.copy()
    interior[:, :] = False
    interior[1:-1, 1:-1] = (
        inside[1:-1, 1:-1]
        & inside[1:-1, :-2]
        & inside[1:-1, 2:]
        & inside[:-2, 1:-1]
        & inside[2:, 1:-1]
    )
    rows, cols, vals = [], [], []
    eq = 0
    jj, ii = np.nonzero(interior)
    for j, i in zip(jj, ii):
        # dbar = (d/dx + i d/dy)/2, central
        for (js, is_), coef in (
            ((j, i + 1), 0.25 / h),
            ((j, i - 1), -0.25 / h),
            ((j + 1, i), 0.25j / h),
            ((j - 1, i), -0.25j / h),
        ):
            rows.append(eq)
            cols.append(idx[js, is_])
            vals.append(coef)
        eq += 1
    D = sparse.csr_matrix((vals, (rows, cols)), shape=(eq, n), dtype=complex)
    vvec = np.array([v(Z[j, i]) for j, i in zip(jj, ii)], dtype=complex)

    area = h * h
    Minv = sparse.identity(n, format="csr") * (1.0 / area)
    A = (D @ Minv @ D.conj().T).tocsc()
    ridge = 1e-14 * (abs(A.diagonal()).max() or 1.0)
    try:
        lu = splu(A + ridge * sparse.identity(eq, format="csc", dtype=complex))
        y = lu.solve(vvec)
    except Exception as exc:
        raise SolverError(f"normal-equation factorization failed: {exc}") from exc
    psi = Minv @ (D.conj().T @ y)
    resid = float(np.linalg.norm(D @ psi - vvec))
    vscale = float(np.linalg.norm(vvec)) or 1.0
    if resid > 1e-6 * vscale:
        raise SolverError(
            f"discrete dbar operator rank-deficient: residual {resid:.3e}")

    u_norm = math.sqrt(float(np.sum(np.abs(psi) ** 2)) * area)
    lam_vals = np.array([lam(Z[j, i]) for j, i in zip(jj, ii)], dtype=float)
    v_norm = math.sqrt(float(np.sum(np.abs(vvec) ** 2 / lam_vals)) * area)
    ratio = u_norm / v_norm if v_norm > 0 else 0.0

    # minimality: u is M-orthogonal to the discrete holomorphic subspace
    cert = 0.0
    zc = complex(np.mean(Z[inside]))
    zs = float(np.max(np.abs(Z[inside] - zc))) or 1.0
    for k in range(4):
        hpol = ((Z[inside] - zc) / zs) ** k
        Dh = D @ hpol
        hproj = hpol - Minv @ (D.conj().T @ lu.solve(Dh))
        hn = math.sqrt(float(np.sum(np.abs(hproj) ** 2)) * area) or 1.0
        un = u_norm or 1.0
        cert = max(cert, abs(np.sum(np.conj(hproj) * psi)) * area / (hn * un))

    u_field = np.full(inside.shape, np.nan, dtype=complex)
    u_field[inside] = psi
    info = {
        "norm_ratio": ratio,
        "u_norm": u_norm,
        "v_norm": v_norm,
        "residual": resid,
        "minimality_certificate": cert,
    }
    if lambda1 is not None:
        info["bound"] = 2.0 / math.sqrt(lambda1)
        info["bound_ok"] = ratio <= info["bound"] * (1 + 1e-9)
    return u_field, info
