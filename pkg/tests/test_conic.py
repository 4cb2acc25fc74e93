from __future__ import annotations

import numpy as np
import pytest
from scipy.optimize import bisect

from conictori import AmbientPoint, ConicParams
from conictori.conic import (
    circle_action,
    derived_w,
    eval_h,
    fiber_point,
    grad_h,
    grad_w,
    moment_map,
    project,
)


@pytest.mark.parametrize("n", [0, 1, 2, 5])
def test_h_vanishes_at_origin_with_w_equal_c(n):
    p = ConicParams(n)
    # z^0 = 1 for n = 0, so the constant term changes
    expected = p.c if n == 0 else 0.0
    assert eval_h(0.0, p.c, p) == pytest.approx(expected, abs=1e-15)


@pytest.mark.parametrize("n", [1, 2, 5])
def test_h_constant_term(n):
    assert eval_h(0.0, 0.0, ConicParams(n)) == -1


def test_h_root_n1_matches_bisection():
    p = ConicParams(1, 10.0)
    root = bisect(lambda z: p.c * z + 1 / p.c - 1, 0.0, 1.0, xtol=1e-15)
    assert root == pytest.approx(0.09, abs=1e-14)
    assert abs(eval_h(root, 1.0, p)) < 1e-13


def test_derived_w_trivial_values():
    p = ConicParams(3)
    assert derived_w(0, 0, 0, p) == p.c
    assert derived_w(1, 1, 0, p) == 2 * p.c


def test_xy_equals_h_on_X(rng):
    for n in range(6):
        p = ConicParams(n)
        x, y, z = (rng.standard_normal(50) + 1j * rng.standard_normal(50) for _ in range(3))
        w = derived_w(x, y, z, p)
        assert np.max(np.abs(eval_h(z, w, p) - x * y)) < 1e-12 * max(1, np.max(np.abs(x * y)))


def test_moment_map_values():
    assert moment_map(1, 1, ConicParams(2)) == 0
    assert moment_map(2, 0, ConicParams(2, kappa=0.1)) == pytest.approx(0.2)


def test_circle_action_identity_and_period(rng):
    p = ConicParams(2)
    pt = AmbientPoint(1 + 2j, -0.5j, 0.3, p)
    assert circle_action(0.0, pt) == pt
    back = circle_action(2 * np.pi, pt)
    assert np.max(np.abs(back.coords - pt.coords)) < 1e-15 * 4
    assert abs(back.w - pt.w) < 1e-12


def test_circle_action_on_arrays_keeps_w(rng):
    p = ConicParams(3)
    pts = rng.standard_normal((20, 3)) + 1j * rng.standard_normal((20, 3))
    turned = circle_action(1.3, pts)
    assert np.allclose(project(turned, p), project(pts, p), atol=1e-12)


def test_gradients_against_difference_quotients(rng):
    p = ConicParams(4)
    z, w = 0.3 + 0.2j, 1.1 - 0.4j
    d = 1e-6
    g = grad_h(z, w, p)
    assert abs(g[0] - (eval_h(z + d, w, p) - eval_h(z - d, w, p)) / (2 * d)) < 1e-6
    assert abs(g[1] - 1 / p.c) < 1e-15
    x, y = 0.7j, 1.2
    gw = grad_w(x, y, z, p)
    assert abs(gw[2] - (derived_w(x, y, z + d, p) - derived_w(x, y, z - d, p)) / (2 * d)) < 1e-5


def test_fiber_point_lies_on_zero_level():
    p = ConicParams(1)
    pt = fiber_point(np.array([1.0, 1.0]), p)
    # |h(1, 1)| = |10 + 0.1 - 1| = 9.1
    assert abs(pt[0]) == pytest.approx(np.sqrt(9.1))
    assert abs(moment_map(pt[0], pt[1], p)) < 1e-14
    assert np.allclose(project(pt, p), [1.0, 1.0])


def test_params_validation_and_roundtrip():
    with pytest.raises(ValueError):
        ConicParams(-1)
    with pytest.raises(ValueError):
        ConicParams(1, c=1.0)
    with pytest.raises(ValueError):
        ConicParams(1, kappa=0)
    with pytest.raises(ValueError):
        ConicParams.from_dict({"n": 1, "q": 2})
    p = ConicParams(4, 12.0, 0.05)
    assert ConicParams.from_json(p.to_json()) == p
