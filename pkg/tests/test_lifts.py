from __future__ import annotations

import json
from math import comb

import numpy as np
import pytest

from conictori import AmbientPoint, ConicParams, kahler
from conictori.conic import circle_action
from conictori.discs import HomotopyClass, disc_u_alpha, disc_v_alpha, maslov_index
from conictori.errors import PointOnBoundary, UnexpectedZero
from conictori.lifts import (
    blaschke,
    default_base_point,
    ell_histogram,
    enumerate_lifts,
    holomorphic_sqrt,
    lift_class_histogram,
    lifts_to_json,
    sign_assignments,
)
from conictori.quadrature import circle_points


def test_empty_blaschke_is_one():
    z = 0.3 * circle_points(8)
    assert np.all(blaschke([])(z) == 1)


def test_single_factor_at_origin_is_identity():
    z = 0.7 * circle_points(16)
    assert np.allclose(blaschke([0.0])(z), z, atol=1e-15)


def test_blaschke_unimodular_on_circle(rng):
    t = 0.9 * np.sqrt(rng.random(6)) * np.exp(2j * np.pi * rng.random(6))
    eps = rng.choice([-1, 1], 6)
    vals = blaschke(t, eps)(circle_points(1024))
    assert np.max(np.abs(np.abs(vals) - 1)) < 1e-12


def test_blaschke_rejects_boundary_point():
    with pytest.raises(PointOnBoundary):
        blaschke([1.0])


def test_blaschke_derivative_matches_difference_quotient():
    B = blaschke([0.2, -0.3j, 0.5 + 0.1j])
    z, d = np.array(0.1 + 0.2j), 1e-6
    assert abs(B.derivative(z) - (B(z + d) - B(z - d)) / (2 * d)) < 1e-8


def test_sqrt_of_one_and_of_z_squared():
    z = 0.8 * circle_points(32)
    assert np.allclose(holomorphic_sqrt(lambda s: np.ones_like(s))(z), 1)
    g = holomorphic_sqrt(lambda s: s**2, zeros=[0.0], df=lambda s: 2 * s)
    assert np.allclose(g(z), z, atol=1e-14)


def test_sqrt_of_nonvanishing_function():
    def f(s):
        return np.exp(3j * s) * (2 + s**2)

    g = holomorphic_sqrt(f)
    r = np.linspace(0, 1, 16)[:, None] * circle_points(64)[None, :]
    assert np.max(np.abs(g(r) ** 2 - f(r))) < 1e-10


def test_sqrt_with_undeclared_zero_raises():
    with pytest.raises(UnexpectedZero):
        holomorphic_sqrt(lambda s: s - 0.3)


def test_sign_assignments_lexicographic():
    assert sign_assignments(2) == [(-1, -1), (-1, 1), (1, -1), (1, 1)]
    assert sign_assignments(0) == [()]


def test_v_alpha_has_one_lift():
    lifts = enumerate_lifts(disc_v_alpha(0.3), None, ConicParams(2))
    assert len(lifts) == 1 and lifts[0].eps == ()


def test_n2_histogram():
    lifts = enumerate_lifts(disc_u_alpha(0.0), None, ConicParams(2))
    assert len(lifts) == 4
    assert ell_histogram(lifts) == [1, 2, 1]


def test_n0_single_class():
    hist = lift_class_histogram(enumerate_lifts(disc_u_alpha(0.0), None, ConicParams(0)))
    assert hist == {HomotopyClass(0, 1, 0): 1}


def test_n3_binomial_counts():
    assert ell_histogram(enumerate_lifts(disc_u_alpha(0.0), None, ConicParams(3))) == [1, 3, 3, 1]


@pytest.mark.parametrize("n", range(7))
def test_lift_totals_power_of_two(n):
    lifts = enumerate_lifts(disc_u_alpha(0.0), None, ConicParams(n))
    assert len(lifts) == 2**n
    assert sum(lift_class_histogram(lifts).values()) == 2**n
    assert ell_histogram(lifts) == [comb(n, k) for k in range(n + 1)]


def test_lift_passes_through_base_point_and_ell_counts_zeros_of_x():
    p = ConicParams(3)
    u = disc_u_alpha(0.5)
    p0 = default_base_point(u, p)
    for lf in enumerate_lifts(u, p0, p):
        assert np.allclose(lf.disc.marked, p0.coords, atol=1e-12)
        assert lf.homotopy_class.a == lf.ell


@pytest.mark.parametrize("n", [1, 2])
def test_lift_maslov_and_area(n):
    p = ConicParams(n, kappa=0.1)
    u = disc_u_alpha(0.0)
    base = kahler.disc_area(kahler.reduced(p), u)
    for lf in enumerate_lifts(u, None, p):
        assert maslov_index(lf.disc) == 2
        assert maslov_index(lf.disc, "direct") == 2
        assert abs(kahler.disc_area(kahler.ambient(p), lf.disc) - base) < 1e-6


def test_rotated_base_point_rotates_lifts():
    p = ConicParams(2)
    u = disc_u_alpha(0.0)
    p0 = default_base_point(u, p)
    theta = 1.1
    a = enumerate_lifts(u, p0, p)
    b = enumerate_lifts(u, circle_action(theta, p0), p)
    z = 0.6 * circle_points(32)
    for la, lb in zip(a, b):
        assert np.allclose(circle_action(theta, la.disc(z)), lb.disc(z), atol=1e-12)


def test_base_point_off_fibre_rejected():
    from conictori.errors import CheckFailed

    p = ConicParams(1)
    bad = AmbientPoint(1.0, 2.0, 1.0, p)
    with pytest.raises(CheckFailed):
        enumerate_lifts(disc_u_alpha(0.0), bad, p)


def test_lifts_json_roundtrip():
    lifts = enumerate_lifts(disc_u_alpha(0.0), None, ConicParams(1))
    rows = json.loads(lifts_to_json(lifts))
    assert [r["eps"] for r in rows] == [[-1], [1]]
    assert [r["class"] for r in rows] == [[0, 1, 0], [1, 1, 0]]
