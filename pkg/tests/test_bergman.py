import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rkl import bergman
from rkl.errors import DomainError
from rkl.surface import EuclideanPlane, HyperbolicDisc, Region, geodesic_ball


def unit_disc_space(basis=40):
    return bergman.build_bergman_space(("disc", 0j, 1.0), basis)


def disc_oracle(z, r=1.0):
    s = abs(z) / r
    return 1.0 / (math.pi * r * r * (1 - s * s) ** 2)


def annulus_oracle(z, r0, r1, terms=80):
    tot = 0.0
    for n in range(-terms, terms):
        if n == -1:
            nrm = 2 * math.pi * math.log(r1 / r0)
        else:
            nrm = 2 * math.pi * (r1 ** (2 * n + 2) - r0 ** (2 * n + 2)) / (2 * n + 2)
        tot += abs(z) ** (2 * n) / nrm
    return tot


def test_unit_disc_kernel_diag():
    sp = unit_disc_space()
    for z in (0.0, 0.3, 0.5):
        K = bergman.kernel_diag(sp, complex(z)).raw.real
        assert K == pytest.approx(disc_oracle(z), rel=1e-3)


def test_disc_kernel_offdiag_closed_form():
    sp = unit_disc_space()
    z, w = 0.3 + 0.1j, -0.2 + 0.4j
    exact = 1.0 / (math.pi * (1 - z * np.conj(w)) ** 2)
    got = bergman.kernel_offdiag(sp, z, w).raw
    assert abs(got - exact) < 1e-6 * abs(exact)


def test_annulus_kernel_matches_laurent_series():
    sp = bergman.build_bergman_space(("annulus", 0j, 0.5, 1.0), 40)
    z = 0.7
    K = bergman.kernel_diag(sp, complex(z)).raw.real
    assert K == pytest.approx(annulus_oracle(z, 0.5, 1.0), rel=1e-3)


def test_domain_monotonicity_of_diagonal():
    small = bergman.build_bergman_space(("disc", 0j, 1.0), 32)
    big = bergman.build_bergman_space(("disc", 0j, 1.3), 32)
    for z in (0.0, 0.2 + 0.3j):
        ks = bergman.kernel_diag(small, z).raw.real
        kb = bergman.kernel_diag(big, z).raw.real
        assert kb <= ks * (1 + 1e-12)


def test_normalized_hyperbolic_ball_closed_form():
    m = HyperbolicDisc()
    lam = lambda z: m.conformal_factor((z.real, z.imag))
    for R in (4.0, 8.0):
        c, r = m.ball_euclidean((0.0, 0.0), R)
        sp = bergman.build_bergman_space(("disc", c, r), 48)
        val = bergman.normalized_magnitude(sp, lam, 0j).normalized
        exact = math.tanh(R / 2.0) ** -2 / (4 * math.pi)
        assert val == pytest.approx(exact, rel=1e-6)


def test_mask_region_kernel_close_to_disc():
    from rkl.surface import chart_from_callable

    chart = chart_from_callable(lambda x, y: (1.0, 0.0, 1.0),
                                (-1.0, 1.0, -1.0, 1.0), (257, 257))
    ball = geodesic_ball(chart, (0.0, 0.0), 0.8)
    sp = bergman.build_bergman_space(ball, 24)
    got = bergman.kernel_diag(sp, 0j).raw.real
    assert got == pytest.approx(disc_oracle(0.0, 0.8), rel=0.02)


def test_evaluation_outside_domain_rejected():
    sp = unit_disc_space()
    with pytest.raises(DomainError):
        bergman.kernel_diag(sp, 1.5 + 0j)


@settings(max_examples=25, deadline=None)
@given(
    zr=st.floats(-0.6, 0.6), zi=st.floats(-0.6, 0.6),
    wr=st.floats(-0.6, 0.6), wi=st.floats(-0.6, 0.6),
)
def test_kernel_hermitian_and_positive(zr, zi, wr, wi):
    sp = unit_disc_space(basis=24)
    z, w = complex(zr, zi), complex(wr, wi)
    kzw = bergman.kernel_offdiag(sp, z, w).raw
    kwz = bergman.kernel_offdiag(sp, w, z).raw
    assert kzw == pytest.approx(np.conj(kwz), abs=1e-10)
    assert bergman.kernel_diag(sp, z).raw.real >= 0.0
    # Cauchy-Schwarz of the reproducing property
    kzz = bergman.kernel_diag(sp, z).raw.real
    kww = bergman.kernel_diag(sp, w).raw.real
    assert abs(kzw) ** 2 <= kzz * kww * (1 + 1e-9)


def test_quadrature_weights_integrate_area():
    nodes, weights = bergman.disc_quadrature(0j, 1.0)
    assert float(np.sum(weights)) == pytest.approx(math.pi, rel=1e-12)
