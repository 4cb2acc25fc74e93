from __future__ import annotations

import numpy as np
import pytest

from conictori import ConicParams, kahler
from conictori.discs import (
    HomotopyClass,
    StandardTorus,
    build_torus_T,
    check_disc,
    class_coordinates,
    disc_power,
    disc_u_alpha,
    disc_v_alpha,
    intersections_with_C,
    maslov_index,
    radical_roots,
)
from conictori.errors import TooCloseToC
from conictori.lifts import enumerate_lifts
from conictori.quadrature import circle_points


def test_u0_marked_point_on_standard_torus():
    u = disc_u_alpha(0.0)
    assert np.allclose(u.marked, [1, 1])
    assert StandardTorus().distance(u.marked) == 0


@pytest.mark.parametrize("alpha", [0.0, np.pi / 3, np.pi])
def test_standard_action_of_boundaries(alpha):
    assert kahler.boundary_liouville(kahler.standard_c2(), disc_u_alpha(alpha)) == pytest.approx(np.pi, abs=1e-12)


def test_v_alpha_boundary_on_torus():
    pts = disc_v_alpha(1.1)(circle_points(256))
    assert np.max(StandardTorus().distance(pts)) < 1e-12


def test_discs_are_holomorphic():
    for u in (disc_u_alpha(0.2), disc_v_alpha(2.0), disc_power(0.0, 3)):
        res = check_disc(u)
        assert res["boundary_distance"] < 1e-12 and res["cauchy_riemann"] < 1e-8


def test_v_alpha_misses_C():
    for n in range(5):
        assert intersections_with_C(disc_v_alpha(0.7), ConicParams(n)).size == 0


def test_u0_meets_C_at_bisection_root_n1():
    pts = intersections_with_C(disc_u_alpha(0.0), ConicParams(1))
    assert pts.size == 1 and abs(pts[0] - 0.09) < 1e-14


def test_u0_meets_C_at_cube_roots_n3():
    pts = intersections_with_C(disc_u_alpha(0.0), ConicParams(3))
    assert pts.size == 3
    assert np.allclose(np.abs(pts), 0.09 ** (1 / 3), atol=1e-13)
    assert 0.09 ** (1 / 3) == pytest.approx(0.4481, abs=5e-5)
    principal = pts[np.argmin(np.abs(np.angle(pts)))]
    ratios = np.sort(np.mod(np.angle(pts / principal), 2 * np.pi))
    assert np.allclose(ratios, [0, 2 * np.pi / 3, 4 * np.pi / 3], atol=1e-12)


@pytest.mark.parametrize("n", [1, 2, 4, 6])
def test_u_alpha_meets_C_n_times(n):
    p = ConicParams(n)
    for a in 2 * np.pi * np.arange(16) / 16:
        assert intersections_with_C(disc_u_alpha(a), p).size == n


def test_radical_roots_solve_h():
    p = ConicParams(5)
    z = radical_roots(0.9, p)
    assert np.max(np.abs(p.c * z**5 + np.exp(0.9j) / p.c - 1)) < 1e-13


@pytest.mark.parametrize("alpha", [0.0, np.pi / 3, np.pi])
def test_maslov_of_standard_discs(alpha):
    assert maslov_index(disc_u_alpha(alpha)) == 2
    assert maslov_index(disc_v_alpha(alpha)) == 2


def test_maslov_of_double_cover_is_four():
    assert maslov_index(disc_power(0.0, 2)) == 4
    assert maslov_index(disc_power(0.5, 3)) == 6


def test_reduced_classes():
    assert class_coordinates(disc_u_alpha(0.0)) == HomotopyClass(None, 1, 0)
    assert class_coordinates(disc_v_alpha(0.0)) == HomotopyClass(None, 0, 1)


def test_lift_of_v_alpha_class():
    p = ConicParams(3)
    (lift,) = enumerate_lifts(disc_v_alpha(0.4), None, p)
    assert lift.homotopy_class == HomotopyClass(0, 0, 1)
    x = lift.disc.coordinate("x")(0.7 * circle_points(64))
    assert np.min(np.abs(x)) > 0.1


def test_torus_over_standard_torus_n1():
    p = ConicParams(1, kappa=0.1)
    T = build_torus_T(p, StandardTorus())
    assert T.checks["moment_map"] <= 1e-12
    pt = T.point(0.0, 0.0, 0.0)
    assert abs(pt[0]) == pytest.approx(np.sqrt(9.1))


def test_torus_too_close_to_C_raises():
    class Near(StandardTorus):
        def point(self, theta1, theta2):
            base = super().point(theta1, theta2)
            return base * np.array([0.09 ** 1.0, 1.0])

    with pytest.raises(TooCloseToC):
        build_torus_T(ConicParams(1), Near())
