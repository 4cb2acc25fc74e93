"""Invariant suites: each check reports a value against a tolerance."""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb

import numpy as np

from . import kahler, moser
from .conic import ConicParams, circle_action, eval_h, grad_w, moment_map
from .discs import (
    HomotopyClass,
    check_disc,
    class_coordinates,
    disc_power,
    disc_u_alpha,
    disc_v_alpha,
    intersections_with_C,
    maslov_index,
)
from .lifts import default_base_point, ell_histogram, enumerate_lifts
from .quadrature import QuadSpec

SUITES = ("areas", "maslov", "moser", "lifts", "barrier", "stokes")
ALPHAS = (0.0, np.pi / 3, np.pi)


@dataclass
class Check:
    name: str
    value: float
    tol: float
    passed: bool
    relation: str = "<="

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        if self.relation == "==":
            return f"{status}  {self.name:<52} value={self.value!s:<12} expected={self.tol!s}"
        return f"{status}  {self.name:<52} value={self.value:.3e} tol{self.relation}{self.tol:.1e}"

    def to_dict(self) -> dict:
        return {"name": self.name, "value": self.value, "tol": self.tol, "passed": self.passed,
                "relation": self.relation}


@dataclass
class Context:
    params: ConicParams
    quad: QuadSpec = field(default_factory=QuadSpec)
    steps: int = moser.DEFAULT_STEPS
    seed: int = 0
    barrier_radius: float = 5.0
    flow_radius: float = 1.0
    barrier_samples: int = 100_000


def le(name, value, tol) -> Check:
    value = float(value)
    return Check(name, value, float(tol), bool(value <= tol))


def ge(name, value, bound) -> Check:
    value = float(value)
    return Check(name, value, float(bound), bool(value >= bound), ">=")


def eq(name, value, expected) -> Check:
    return Check(name, value, expected, value == expected, "==")


def _lifts(ctx):
    p = ctx.params
    u, v = disc_u_alpha(0.0), disc_v_alpha(0.0)
    return u, v, enumerate_lifts(u, None, p, grid=ctx.quad), enumerate_lifts(v, None, p, grid=ctx.quad)


# -- suites ---------------------------------------------------------------------------


def suite_areas(ctx: Context) -> list:
    p, q = ctx.params, ctx.quad
    out = []
    std = kahler.standard_c2()
    for a in ALPHAS:
        out.append(le(f"area std u_{a:.4f} - pi", abs(kahler.disc_area(std, disc_u_alpha(a), q) - np.pi), 1e-8))
        out.append(le(f"area std v_{a:.4f} - pi", abs(kahler.disc_area(std, disc_v_alpha(a), q) - np.pi), 1e-8))
    u, v, lu, lv = _lifts(ctx)
    red = kahler.disc_area(kahler.reduced(p), u, q)
    for eps in (0.1, 0.05, 0.025):
        sm = kahler.disc_area(kahler.reduced(p, True, eps), u, q)
        out.append(le(f"smoothed area u_0 (eps={eps}) - unsmoothed", abs(sm - red), 1e-6))
    amb = kahler.ambient(p)
    for disc, lifts in ((u, lu), (v, lv)):
        base = kahler.disc_area(kahler.reduced(p), disc, q)
        worst = max(abs(kahler.disc_area(amb, lf.disc, q) - base) for lf in lifts)
        out.append(le(f"lift area - projection area over {disc.label} ({len(lifts)} lifts)", worst, 1e-6))
    spec = moser.reduced_flow_spec(p, steps=ctx.steps)
    mono = moser.monotonicity_on_T(p, {"u_0": (u, lu), "v_0": (v, lv)}, spec)
    out.append(le("area/Maslov spread on T (relative)", mono["relative_spread"], 1e-5))
    out.append(le("area of classes on T - pi", max(abs(r["area"] - np.pi) for r in mono["rows"]), 1e-5))
    return out


def suite_stokes(ctx: Context) -> list:
    p, q = ctx.params, ctx.quad
    out = []
    specs = [kahler.standard_c2(), kahler.reduced(p), kahler.reduced(p, True)]
    discs = [disc_u_alpha(0.0), disc_v_alpha(np.pi / 3), disc_power(0.0, 2)]
    for spec in specs:
        for u in discs:
            if spec.variant != "standard_C2" and u.meta["kind"] == "power":
                continue
            diff = abs(kahler.disc_area(spec, u, q) - kahler.boundary_liouville(spec, u))
            out.append(le(f"Stokes {spec.variant} {u.label}", diff, 1e-6))
    _, _, lu, lv = _lifts(ctx)
    amb = kahler.ambient(p)
    worst = max(abs(kahler.disc_area(amb, lf.disc, q) - kahler.boundary_liouville(amb, lf.disc)) for lf in lu + lv)
    out.append(le("Stokes ambient_X on all lifts", worst, 1e-6))
    worst = max(
        abs(kahler.boundary_liouville(amb, lf.disc) - kahler.boundary_liouville(kahler.reduced(p), lf.disc.projection()))
        for lf in lu + lv
    )
    out.append(le("oint theta_X over lift - oint theta_red over projection", worst, 1e-6))

    rng = np.random.default_rng(ctx.seed)
    out.append(le("theta_X - pi^* theta_red on mu^{-1}(0)", reduction_identity_residual(p, rng), 1e-8))
    out.append(le("closed-form reduced omega - FD ddc (|h| > 0.1)", reduced_fd_residual(p, rng), 1e-6))
    out.append(le("reduced vs smoothed omega (|h| > eps)", smoothed_agreement(p, rng), 1e-10))
    out.append(le("d theta - omega (FD exterior derivative)", dtheta_residual(p, rng), 1e-6))
    out.append(ge("min omega(v, Jv) / |v|^2", positivity_margin(p, rng), 1e-12))
    return out


def suite_maslov(ctx: Context) -> list:
    p = ctx.params
    out = []
    for a in ALPHAS:
        out.append(eq(f"maslov u_{a:.4f}", maslov_index(disc_u_alpha(a)), 2))
        out.append(eq(f"maslov v_{a:.4f}", maslov_index(disc_v_alpha(a)), 2))
    out.append(eq("maslov of z -> (z^2, 1)", maslov_index(disc_power(0.0, 2)), 4))
    _, _, lu, lv = _lifts(ctx)
    out.append(eq("maslov of lifts (projection)", sorted({maslov_index(lf.disc) for lf in lu + lv}), [2]))
    out.append(eq("maslov of lifts (frame of T)", sorted({maslov_index(lf.disc, "direct") for lf in lu + lv}), [2]))
    u_cls = class_coordinates(disc_u_alpha(0.0))
    v_cls = class_coordinates(disc_v_alpha(0.0))
    out.append(eq("class of u_0 (b, d)", [u_cls.b, u_cls.d], [1, 0]))
    out.append(eq("class of v_0 (b, d)", [v_cls.b, v_cls.d], [0, 1]))
    sums = sorted({lf.homotopy_class.b + lf.homotopy_class.d for lf in lu + lv})
    out.append(eq("b + d over lift classes", sums, [1]))
    return out


def suite_lifts(ctx: Context) -> list:
    p = ctx.params
    n = p.n
    out = []
    u, v, lu, lv = _lifts(ctx)
    out.append(eq("number of lifts of u_0", len(lu), 2**n))
    out.append(eq("lifts by ell", ell_histogram(lu), [comb(n, k) for k in range(n + 1)]))
    out.append(eq("lifts of v_0", [lf.homotopy_class for lf in lv], [HomotopyClass(0, 0, 1)]))
    for key, tol in (("xy_minus_h", 1e-10), ("boundary_modulus", 1e-10), ("quotient", 1e-9), ("boundary_on_T", 1e-9)):
        out.append(le(f"lift residual {key}", max(lf.residuals[key] for lf in lu + lv), tol))
    checks = [check_disc(lf.disc) for lf in lu + lv]
    out.append(le("lift boundary distance to T", max(c["boundary_distance"] for c in checks), 1e-8))
    out.append(le("lift Cauchy-Riemann residual", max(c["cauchy_riemann"] for c in checks), 1e-8))
    out.append(le("S^1-equivariance of lifts", equivariance_residual(u, p, lu), 1e-10))
    counts = {intersections_with_C(disc_u_alpha(a), p).size for a in 2 * np.pi * np.arange(16) / 16}
    out.append(eq("intersections of u_alpha with C (16 alphas)", sorted(counts), [n]))
    if n:
        t = intersections_with_C(u, p)
        radius = ((1 - 1 / p.c) / p.c) ** (1 / n)
        out.append(le("|t_k| - ((1 - 1/c) / c)^{1/n}", float(np.max(np.abs(np.abs(t) - radius))), 1e-12))
    return out


def suite_moser(ctx: Context) -> list:
    p = ctx.params
    out = []
    spec = moser.reduced_flow_spec(p, steps=ctx.steps)
    rng = np.random.default_rng(ctx.seed)
    ang = rng.uniform(0, 2 * np.pi, size=(2, 20))
    from .discs import StandardTorus

    pts = StandardTorus().point(ang[0], ang[1])
    out.append(le("Moser field residual", moser.field_residual(spec, 0.5, pts, kahler.unit_vectors(2)), 1e-9))
    out.append(le("pullback residual at 20 points of T_std", moser.verify_pullback(spec, pts, seed=ctx.seed).residual, 1e-5))
    half = np.max(np.abs(moser.flow_map(spec, pts, 1.0, ctx.steps) - moser.flow_map(spec, pts, 1.0, 2 * ctx.steps)))
    out.append(le(f"step halving ({ctx.steps} vs {2 * ctx.steps} steps)", half, 1e-8))
    errs, orders = moser.convergence_order(spec, pts)
    if orders:
        out.append(le("RK4 observed order - 4 (finest pair)", abs(orders[-1] - 4), 0.5))
    else:
        out.append(le("RK4 errors at roundoff (order not observable)", max(errs), 1e-13))
    loop = disc_u_alpha(0.0)(np.exp(2j * np.pi * np.arange(256) / 256))
    out.append(le("exactness: oint theta before/after flow", moser.exactness_defect(spec, loop), 1e-6))
    out.append(le("flowed v_0 area - original area", abs(moser.flowed_disc_area(spec, disc_v_alpha(0.0)) - np.pi), 1e-5))
    barrier, sspec, path = moser.straightening_trace(p, ctx.flow_radius, ctx.steps, samples=ctx.barrier_samples)
    rise = float(np.max(np.diff(path.phi, axis=0)))
    out.append(le("straightening flow: largest increase of phi", rise, 1e-9))
    rep = moser.verify_pullback(sspec, path.points[0][:6], samples=2, seed=ctx.seed)
    out.append(le("straightening pullback residual (relative, FD floor)", rep.relative, 1e-3))
    return out


def suite_barrier(ctx: Context) -> list:
    p = ctx.params
    R = ctx.barrier_radius
    b = moser.barrier_constants(p, R, ctx.barrier_samples, seed=ctx.seed)
    cert = b.certified
    out = [
        le("phi - 2K Phi_1 on B(0, 2R)", cert["upper_max"], 0.0),
        le("K Phi_1 - phi on the shell", cert["lower_max"], 0.0),
        ge("min phi beyond sqrt(3) R minus M", cert["far_shell_min_phi"] - b.M, 0.0),
        le("phi(0) - M", cert["origin_phi"] - b.M, 0.0),
        eq("C = 2K + 1", b.C == 2 * b.K + 1, True),
    ]
    if p.n >= 1:
        b2 = moser.barrier_constants(p, 2 * R, ctx.barrier_samples, seed=ctx.seed)
        out.append(ge("K(2R) - K(R)", b2.K - b.K, 0.0))
    return out


SUITE_FUNCS = {
    "areas": suite_areas,
    "maslov": suite_maslov,
    "moser": suite_moser,
    "lifts": suite_lifts,
    "barrier": suite_barrier,
    "stokes": suite_stokes,
}


def run_suite(name: str, ctx: Context) -> list:
    names = SUITES if name == "all" else (name,)
    out = []
    for nm in names:
        for chk in SUITE_FUNCS[nm](ctx):
            chk.name = f"[{nm}] {chk.name}"
            out.append(chk)
    return out


# -- pointwise residual helpers ---------------------------------------------------------


def _random_reduced(rng, p, count=32, min_h=0.1):
    pts = (rng.uniform(-1.5, 1.5, (4 * count, 2)) + 1j * rng.uniform(-1.5, 1.5, (4 * count, 2))).astype(complex)
    pts[:, 1] *= p.c
    keep = np.abs(eval_h(pts[:, 0], pts[:, 1], p)) > min_h
    return pts[keep][:count]


def reduction_identity_residual(p: ConicParams, rng, count=64) -> float:
    """theta_X(v) against theta_red(d pi v) for v tangent to mu^{-1}(0)."""
    x = rng.standard_normal(count) + 1j * rng.standard_normal(count)
    y = np.abs(x) * np.exp(2j * np.pi * rng.random(count))
    z = rng.standard_normal(count) + 1j * rng.standard_normal(count)
    pts = np.stack([x, y, z], axis=-1)
    assert np.max(np.abs(moment_map(x, y, p))) < 1e-12
    v = rng.standard_normal((count, 3)) + 1j * rng.standard_normal((count, 3))
    g = np.stack([x, -y, np.zeros_like(z)], axis=-1)
    v = v - (np.real(np.sum(np.conj(g) * v, axis=-1)) / np.sum(np.abs(g) ** 2, axis=-1))[:, None] * g
    dw = np.sum(grad_w(x, y, z, p) * v, axis=-1)
    w = p.c * (x * y + 1) - p.c**2 * z**p.n
    red_pts = np.stack([z, w], axis=-1)
    red_v = np.stack([v[:, 2], dw], axis=-1)
    a = kahler.eval_liouville(kahler.ambient(p), pts, v)
    b = kahler.eval_liouville(kahler.reduced(p), red_pts, red_v)
    return float(np.max(np.abs(a - b) / np.maximum(1.0, np.abs(a))))


def reduced_fd_residual(p: ConicParams, rng) -> float:
    spec = kahler.reduced(p)
    E = kahler.unit_vectors(2)
    worst = 0.0
    for pt in _random_reduced(rng, p, 8):
        for i in range(4):
            for j in range(i + 1, 4):
                a = kahler.eval_omega(spec, pt, E[i], E[j])
                b = kahler.fd_omega(spec, pt, E[i], E[j])
                worst = max(worst, abs(a - b) / max(1.0, abs(a)))
    return worst


def smoothed_agreement(p: ConicParams, rng) -> float:
    eps = kahler.DEFAULT_SMOOTHING
    a, b = kahler.reduced(p), kahler.reduced(p, True, eps)
    pts = _random_reduced(rng, p, 64, min_h=eps * 1.01)
    E = kahler.unit_vectors(2)
    worst = 0.0
    for i in range(4):
        for j in range(4):
            worst = max(worst, float(np.max(np.abs(kahler.eval_omega(a, pts, E[i], E[j]) - kahler.eval_omega(b, pts, E[i], E[j])))))
    return worst


def dtheta_residual(p: ConicParams, rng) -> float:
    E = kahler.unit_vectors(2)
    spec = kahler.reduced(p)
    worst = 0.0
    for pt in _random_reduced(rng, p, 4, min_h=1.0):
        for i in range(4):
            for j in range(i + 1, 4):
                a = kahler.eval_omega(spec, pt, E[i], E[j])
                worst = max(worst, abs(kahler.fd_dtheta(spec, pt, E[i], E[j]) - a) / max(1.0, abs(a)))
    return worst


def positivity_margin(p: ConicParams, rng) -> float:
    worst = np.inf
    for spec in (kahler.standard_c2(), kahler.reduced(p), kahler.reduced(p, True), kahler.ambient(p), kahler.standard_c3(p)):
        if spec.dim == 2:
            pts = _random_reduced(rng, p, 32)
        else:
            pts = rng.standard_normal((32, 3)) + 1j * rng.standard_normal((32, 3))
        v = rng.standard_normal(pts.shape) + 1j * rng.standard_normal(pts.shape)
        val = kahler.eval_omega(spec, pts, v, 1j * v) / np.sum(np.abs(v) ** 2, axis=-1)
        worst = min(worst, float(val.min()))
    return worst


def equivariance_residual(u, p: ConicParams, lifts, theta=0.7) -> float:
    """Lifts through a rotated base point are the rotated lifts, eps by eps."""
    p0 = default_base_point(u, p)
    rot = circle_action(theta, p0)
    turned = enumerate_lifts(u, rot, p, check=False)
    zeta = 0.8 * np.exp(2j * np.pi * np.arange(64) / 64)
    worst = 0.0
    for a, b in zip(lifts, turned):
        assert a.eps == b.eps
        worst = max(worst, float(np.max(np.abs(circle_action(theta, a.disc(zeta)) - b.disc(zeta)))))
    return worst
