from __future__ import annotations

from math import comb

import numpy as np
from hypothesis import given
from hypothesis import strategies as st

from conictori import ConicParams, kahler
from conictori.census import binomial_is_odd, hull_lattice_count, lattice_points_in_hull, segment_lattice_points
from conictori.conic import circle_action, derived_w, eval_h, moment_map, project
from conictori.lifts import blaschke, holomorphic_sqrt
from conictori.quadrature import circle_points
from conictori.winding import winding_number

finite = st.floats(-3, 3, allow_nan=False)
cplx = st.builds(complex, finite, finite)
angle = st.floats(0, 2 * np.pi, allow_nan=False)
degree = st.integers(0, 8)
interior = st.builds(lambda r, a: r * np.exp(1j * a), st.floats(0, 0.9), angle)


@given(cplx, cplx, cplx, degree)
def test_xy_is_h_of_projection(x, y, z, n):
    p = ConicParams(n)
    w = derived_w(x, y, z, p)
    assert abs(eval_h(z, w, p) - x * y) <= 1e-12 * max(1.0, abs(w), abs(x * y))


@given(cplx, cplx, cplx, angle, degree)
def test_circle_action_preserves_moment_map_and_projection(x, y, z, theta, n):
    p = ConicParams(n, kappa=0.1)
    pt = np.array([x, y, z])
    turned = circle_action(theta, pt)
    assert abs(moment_map(*turned[:2], p) - moment_map(x, y, p)) <= 1e-12 * max(1, abs(x) ** 2 + abs(y) ** 2)
    assert np.allclose(project(turned, p), project(pt, p), rtol=1e-12, atol=1e-10)


@given(st.lists(cplx, min_size=6, max_size=6), st.integers(0, 4))
def test_omega_antisymmetric_and_tamed(vals, n):
    p = ConicParams(n, kappa=0.1)
    spec = kahler.ambient(p)
    pt = np.array(vals[:3]) / 3
    v = np.array(vals[3:])
    assert abs(kahler.eval_omega(spec, pt, v, v)) < 1e-9 * max(1, np.sum(np.abs(v) ** 2))
    if np.sum(np.abs(v) ** 2) > 1e-6:
        assert kahler.eval_omega(spec, pt, v, 1j * v) > 0


@given(st.lists(interior, max_size=5), st.data())
def test_blaschke_boundary_modulus(points, data):
    eps = data.draw(st.lists(st.sampled_from([-1, 1]), min_size=len(points), max_size=len(points)))
    vals = blaschke(points, eps)(circle_points(512))
    assert np.max(np.abs(np.abs(vals) - 1)) < 1e-12


@given(st.lists(interior, min_size=1, max_size=4))
def test_blaschke_winding_counts_zeros(points):
    # distinct points only; a nearly repeated zero is still counted twice
    assert winding_number(blaschke(points)(circle_points(4096))) == len(points)


@given(st.lists(cplx, min_size=1, max_size=3))
def test_sqrt_squares_back(coeffs):
    # exp of a polynomial never vanishes
    poly = np.array(coeffs) / 4

    def f(z):
        return np.exp(np.polyval(poly, z))

    g = holomorphic_sqrt(f)
    z = np.linspace(0, 1, 8)[:, None] * circle_points(32)[None, :]
    assert np.max(np.abs(g(z) ** 2 - f(z)) / np.abs(f(z))) < 1e-10


@given(st.integers(0, 60), st.integers(0, 60))
def test_lucas_parity(n, k):
    assert binomial_is_odd(n, k) == (k <= n and comb(n, k) % 2 == 1)


@given(st.integers(0, 25))
def test_hull_invariant(n):
    assert hull_lattice_count(n) == n + 2


@given(st.tuples(*[st.integers(-4, 4)] * 3), st.tuples(*[st.integers(-4, 4)] * 3))
def test_segment_lattice_points(a, b):
    if a != b:
        assert len(lattice_points_in_hull([a, b])) == segment_lattice_points(a, b)
