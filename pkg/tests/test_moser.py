from __future__ import annotations

import numpy as np
import pytest

from conictori import ConicParams, kahler, moser
from conictori.discs import StandardTorus, disc_u_alpha
from conictori.errors import LeftDomain
from conictori.quadrature import circle_points


def _flat_spec():
    # phi = Phi_1 - Phi_0 = |p|^2 / 4
    return moser.FlowSpec(kahler.standard_c2(), kahler.PotentialSpec("standard_C2", scale=2.0), radius=10.0)


def _torus_points(count=20, seed=0):
    ang = np.random.default_rng(seed).uniform(0, 2 * np.pi, (2, count))
    return StandardTorus().point(ang[0], ang[1])


def test_zero_potential_difference_gives_zero_field():
    spec = moser.FlowSpec(kahler.standard_c2(), kahler.standard_c2())
    xi = moser.moser_vector_field(spec, 0.3, _torus_points())
    assert np.max(np.abs(xi)) == 0


def test_flat_field_against_fd_gradient(rng):
    spec = _flat_spec()
    t = 0.4
    pts = rng.standard_normal((5, 2)) + 1j * rng.standard_normal((5, 2))
    xi = moser.moser_vector_field(spec, t, pts)
    # g_t is (1 + t) times the Euclidean metric; gradient of phi by central differences
    E = kahler.unit_vectors(2)
    d = 1e-6
    grad = sum(
        ((spec.phi(pts + d * e) - spec.phi(pts - d * e)) / (2 * d))[:, None] * e for e in E
    )
    assert np.max(np.abs(xi + grad / (1 + t))) < 1e-8
    assert np.allclose(xi, -pts / (2 * (1 + t)), atol=1e-12)


def test_field_residual_reduced():
    spec = moser.reduced_flow_spec(ConicParams(2, kappa=0.1))
    rng = np.random.default_rng(1)
    vecs = rng.standard_normal((6, 2)) + 1j * rng.standard_normal((6, 2))
    assert moser.field_residual(spec, 0.6, _torus_points(), vecs) < 1e-9


def test_zero_time_is_identity():
    spec = moser.reduced_flow_spec(ConicParams(2))
    pts = _torus_points()
    assert np.array_equal(moser.flow_map(spec, pts, 0.0), pts)
    rep = moser.verify_pullback(spec, pts, t_end=0.0)
    assert rep.residual <= 1e-12


def test_flat_flow_is_exact_scaling():
    # dp/dt = -p / (2 (1 + t)), so p(1) = p(0) / sqrt(2)
    pts = _torus_points(4)
    assert np.allclose(moser.flow_map(_flat_spec(), pts), pts / np.sqrt(2), atol=1e-9)


def test_step_halving_at_reduced_flow_kappa_002():
    spec = moser.reduced_flow_spec(ConicParams(2, kappa=0.02))
    pts = _torus_points()
    diff = np.max(np.abs(moser.flow_map(spec, pts, 1, 64) - moser.flow_map(spec, pts, 1, 128)))
    assert diff < 1e-8


def test_pullback_reduced_flow_kappa_002():
    spec = moser.reduced_flow_spec(ConicParams(2, kappa=0.02))
    assert moser.verify_pullback(spec, _torus_points()).residual < 1e-5


def test_exactness_of_flowed_loop():
    spec = moser.reduced_flow_spec(ConicParams(2, kappa=0.02))
    loop = disc_u_alpha(0.0)(circle_points(256))
    assert moser.exactness_defect(spec, loop) < 1e-6


def test_rk4_order():
    spec = moser.reduced_flow_spec(ConicParams(3, kappa=0.1))
    errs, orders = moser.convergence_order(spec, _torus_points(6))
    assert abs(orders[-1] - 4) < 0.5


def test_leaving_domain_raises():
    spec = moser.FlowSpec(kahler.standard_c2(), kahler.PotentialSpec("standard_C2", scale=0.1), radius=1.5)
    with pytest.raises(LeftDomain):
        moser.flow_map(spec, _torus_points(3))


def test_log_time_roundtrip():
    spec = moser.straightening_flow_spec(ConicParams(1), 1e6, 1.0)
    s = np.linspace(0, 1, 11)
    assert np.allclose(spec.s_of(spec.time_of(s)), s)
    assert spec.time_of(1.0) == pytest.approx(1.0)


def test_barrier_n0_certified_and_origin_below_M():
    b = moser.barrier_constants(ConicParams(0, kappa=0.1), 5.0, 20_000)
    assert b.C == 2 * b.K + 1
    assert b.certified["upper_max"] <= 0 and b.certified["lower_max"] <= 0
    # phi(0) = -|w(0)|^2 / 4 with w(0) = c - c^2 when n = 0
    assert b.certified["origin_phi"] == pytest.approx(-(10 - 100) ** 2 / 4)
    assert b.certified["origin_phi"] <= b.M


def test_barrier_origin_value_n1():
    b = moser.barrier_constants(ConicParams(1, kappa=0.1), 5.0, 20_000)
    assert b.certified["origin_phi"] == pytest.approx(-25.0)


def test_barrier_K_grows_with_R():
    p = ConicParams(2, kappa=0.1)
    small = moser.barrier_constants(p, 2.0, 20_000)
    large = moser.barrier_constants(p, 4.0, 20_000)
    assert large.K >= small.K


def test_straightening_phi_nonincreasing():
    p = ConicParams(1, kappa=0.1)
    _, _, path = moser.straightening_trace(p, 1.0, 64, samples=20_000)
    assert np.max(np.diff(path.phi, axis=0)) <= 1e-9
    text = moser.flow_trace_csv(path)
    rows = text.strip().splitlines()
    assert rows[0].endswith(",phi") and len(rows) == 65 + 1


def test_calibrated_kappa_used_by_default():
    assert moser.default_kappa(2) == moser.CALIBRATED_KAPPA_C10[2]


@pytest.mark.parametrize("n", sorted(moser.CALIBRATED_KAPPA_C10))
def test_calibration_table_reproduces(n):
    assert moser.calibrate_kappa(n).kappa == moser.CALIBRATED_KAPPA_C10[n]
