from __future__ import annotations

import numpy as np
import pytest

from conictori.errors import BoundaryZero, NonTransverse, QuadratureDivergence
from conictori.quadrature import (
    PolarGrid,
    QuadSpec,
    circle_points,
    gauss_legendre,
    integrate_with_refinement,
    pairwise_sum,
    smooth_cutoff,
)
from conictori.winding import boundary_winding, sort_points, winding_number, zeros_in_disc


def test_polar_grid_integrates_polynomials():
    g = PolarGrid.build(16, 32)
    assert pairwise_sum(g.weights) == pytest.approx(np.pi, abs=1e-13)
    # int |zeta|^2 over the disc = pi / 2
    assert pairwise_sum(g.weights * np.abs(g.zeta) ** 2) == pytest.approx(np.pi / 2, abs=1e-13)
    assert abs(np.sum(g.weights * g.zeta**3)) < 1e-13


def test_gauss_legendre_interval():
    x, w = gauss_legendre(5, 1.0, 3.0)
    assert np.sum(w) == pytest.approx(2.0)
    assert np.sum(w * x**9) == pytest.approx((3**10 - 1) / 10)


def test_pairwise_sum_independent_of_padding():
    vals = np.arange(1, 8, dtype=float)
    assert pairwise_sum(vals) == 28.0
    assert pairwise_sum([]) == 0.0


def test_smooth_cutoff_limits():
    r = np.array([0.0, 0.1, 0.5, 0.9, 1.0])
    c = smooth_cutoff(r, 0.1, 0.9)
    assert c[0] == 1 and c[1] == 1 and c[-2] == 0 and c[-1] == 0
    assert c[2] == pytest.approx(0.5)


def test_refinement_raises_on_divergence():
    counter = iter(range(100))
    with pytest.raises(QuadratureDivergence):
        integrate_with_refinement(lambda q: float(next(counter)), QuadSpec(4, 8, 1e-8, 2), QuadratureDivergence)


@pytest.mark.parametrize("k", [-3, 0, 1, 5])
def test_winding_of_powers(k):
    assert winding_number(circle_points(256) ** k) == k


def test_winding_detects_zero_on_loop():
    with pytest.raises(BoundaryZero):
        boundary_winding(lambda z: z - 1, 64)


def test_zeros_in_disc_against_companion_roots():
    roots = np.array([0.3 + 0.1j, -0.5j, 0.6, -0.2 - 0.2j])
    outside = 2.5 + 1j

    coeffs = np.poly(np.append(roots, outside))
    dcoeffs = np.polyder(coeffs)

    def f(z):
        return np.polyval(coeffs, z)

    def df(z):
        return np.polyval(dcoeffs, z)

    found = zeros_in_disc(f, df)
    assert np.allclose(found, sort_points(roots), atol=1e-12)


def test_zeros_in_disc_rejects_double_zero():
    with pytest.raises(NonTransverse):
        zeros_in_disc(lambda z: (z - 0.2) ** 2, lambda z: 2 * (z - 0.2))
