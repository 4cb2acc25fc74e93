"""Moser isotopies between Kahler forms with potentials Phi_0, Phi_1.

With phi = Phi_1 - Phi_0 and omega_t = (1 - t) omega_0 + t omega_1, the
field xi_t = -grad_{g_t} phi satisfies iota_{xi_t} omega_t = -d^c phi, so its
flow psi_t has psi_t^* omega_t = omega_0 and psi_t^* theta_t - theta_0 exact.

Two applications: the reduced isotopy from the standard form on C^2 to the
reduced form (phi = kappa |h| / 2), and the straightening of omega_X to C
times the split form omega_1 on C^3 (phi = C Phi_1 - Phi_X).  The second is
very stiff near t = 0 when C is large, so it is integrated in the time
variable s with t = ((1 + C)^s - 1) / C.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import optimize
from scipy.interpolate import RectBivariateSpline

from . import kahler
from .conic import ConicParams, derived_w, eval_h
from .discs import ConicTorus, StandardTorus, build_torus_T, maslov_from_frames
from .errors import (
    DegenerateMetric,
    LeftDomain,
    NearSingularLocus,
    SamplingInsufficient,
)
from .quadrature import PolarGrid, circle_points, pairwise_sum

COND_LIMIT = 1e12
SINGULAR_GUARD = 0.05
JACOBIAN_STEP = 1e-6
PULLBACK_TOL = 1e-5
HALVING_TOL = 1e-8
DEFAULT_STEPS = 128


@dataclass(frozen=True)
class FlowSpec:
    """Endpoints of the affine family omega_t, the domain, and the RK4 step count.

    ``domain`` is "euclidean" (|p| <= radius) or "phi1" (the ball of radius
    ``radius`` for the metric whose squared norm is Phi_1).  ``stiffness`` > 0
    switches on the logarithmic time variable.
    """

    omega0: kahler.PotentialSpec
    omega1: kahler.PotentialSpec
    radius: float = 3.0
    step_count: int = DEFAULT_STEPS
    domain: str = "euclidean"
    singular_guard: float = SINGULAR_GUARD
    stiffness: float = 0.0

    def __post_init__(self):
        if self.omega0.dim != self.omega1.dim:
            raise ValueError("endpoint potentials live on different spaces")
        if self.step_count < 16:
            raise ValueError("step_count must be at least 16")
        if self.domain not in ("euclidean", "phi1"):
            raise ValueError(f"unknown domain {self.domain!r}")

    @property
    def dim(self) -> int:
        return self.omega0.dim

    @property
    def params(self) -> ConicParams | None:
        return self.omega1.params or self.omega0.params

    def with_steps(self, steps: int) -> FlowSpec:
        return replace(self, step_count=steps)

    def phi(self, pts):
        return self.omega1.value(pts) - self.omega0.value(pts)

    def dphi(self, pts):
        """Holomorphic gradient of phi."""
        return self.omega1.del_(pts) - self.omega0.del_(pts)

    def hessian(self, t, pts):
        return (1 - t) * self.omega0.hessian(pts) + t * self.omega1.hessian(pts)

    # time reparametrisation
    def time_of(self, s):
        C = self.stiffness
        if C <= 0:
            return s
        return np.expm1(s * np.log1p(C)) / C

    def dtime(self, s):
        C = self.stiffness
        if C <= 0:
            return 1.0
        return (self.time_of(s) + 1.0 / C) * np.log1p(C)

    def s_of(self, t):
        C = self.stiffness
        if C <= 0:
            return t
        return np.log1p(C * t) / np.log1p(C)

    def check_domain(self, pts):
        pts = np.asarray(pts, dtype=complex)
        if self.domain == "euclidean":
            size = np.sqrt(np.sum(np.abs(pts) ** 2, axis=-1))
        else:
            size = np.sqrt(phi1_value(pts, self.params))
        if np.any(~np.isfinite(size)) or np.max(size) > self.radius:
            raise LeftDomain(f"trajectory reached radius {np.nanmax(size):.4g} > {self.radius:.4g}")
        if self.omega1.variant in ("reduced", "reduced_smoothed") or self.omega0.variant in (
            "reduced",
            "reduced_smoothed",
        ):
            h = np.abs(eval_h(pts[..., 0], pts[..., 1], self.params))
            if np.min(h) < self.singular_guard:
                raise NearSingularLocus(f"|h| = {np.min(h):.3g} below the guard {self.singular_guard}")


def phi1_value(pts, p: ConicParams):
    return kahler.standard_c3(p).value(pts)


def reduced_flow_spec(p: ConicParams, radius=3.0, steps=DEFAULT_STEPS) -> FlowSpec:
    """Isotopy from the standard form on C^2 to the reduced form (phi = kappa |h| / 2)."""
    return FlowSpec(kahler.standard_c2(), kahler.reduced(p), radius, steps)


def straightening_flow_spec(p: ConicParams, C: float, radius: float, steps=DEFAULT_STEPS) -> FlowSpec:
    """Isotopy from omega_X to C omega_1 on the Phi_1-ball of radius sqrt(3) R."""
    return FlowSpec(
        kahler.ambient(p), kahler.standard_c3(p, scale=C), np.sqrt(3.0) * radius, steps, "phi1", stiffness=C
    )


# -- vector field -----------------------------------------------------------------


def _gram(H):
    """Real Gram matrix of g = 4 Re(u^T H conj(v)) on the basis e_j, i e_j."""
    d = H.shape[-1]
    E = kahler.unit_vectors(d)
    return 4.0 * np.real(np.einsum("aj,...jk,bk->...ab", E, H, np.conj(E)))


def moser_vector_field(spec: FlowSpec, t, pts, check=True):
    """xi_t at ``pts`` (shape ``(..., d)``), from the real Gram system g_t(xi, .) = -dphi."""
    pts = np.asarray(pts, dtype=complex)
    d = spec.dim
    G = _gram(spec.hessian(t, pts))
    E = kahler.unit_vectors(d)
    rhs = -2.0 * np.real(np.einsum("...j,aj->...a", spec.dphi(pts), E))
    if check:
        ev = np.linalg.eigvalsh(G)
        lo, hi = ev[..., 0], ev[..., -1]
        if np.any(lo <= 0) or np.any(hi / lo > COND_LIMIT):
            worst = float(np.max(np.where(lo > 0, hi / np.where(lo > 0, lo, 1), np.inf)))
            raise DegenerateMetric(f"metric g_t at t={float(np.max(t)):.3g} has condition number {worst:.3g}")
    coef = np.linalg.solve(G, rhs[..., None])[..., 0]
    return np.einsum("...a,aj->...j", coef, E)


def field_residual(spec: FlowSpec, t, pts, vectors):
    """max |omega_t(xi, v) + d^c phi(v)| over the given tangent vectors."""
    pts = np.asarray(pts, dtype=complex)
    xi = moser_vector_field(spec, t, pts)
    H = spec.hessian(t, pts)
    worst = 0.0
    for v in vectors:
        om = -4.0 * np.imag(np.einsum("...j,...jk,...k->...", xi, H, np.conj(v)))
        dc = 2.0 * np.imag(np.sum(spec.dphi(pts) * v, axis=-1))
        worst = max(worst, float(np.max(np.abs(om + dc))))
    return worst


# -- integration --------------------------------------------------------------------


@dataclass
class FlowPath:
    times: np.ndarray
    points: np.ndarray
    phi: np.ndarray

    @property
    def final(self) -> np.ndarray:
        return self.points[-1]


def integrate_flow(spec: FlowSpec, p0, t_end=1.0, steps=None, record=True) -> FlowPath:
    """Classical RK4 for dp/dt = xi_t(p) from t = 0 to ``t_end``.

    ``p0`` may hold many starting points (shape ``(..., d)``); all are
    advanced together.  Every accepted step is checked against the domain and
    the singular guard; failures raise rather than clamp.
    """
    p = np.array(p0, dtype=complex)
    spec.check_domain(p)
    n = steps or spec.step_count
    s_end = float(spec.s_of(t_end))
    hs = s_end / n

    def rhs(s, q):
        return spec.dtime(s) * moser_vector_field(spec, spec.time_of(s), q)

    times = [0.0]
    pts = [p.copy()] if record else []
    phis = [spec.phi(p)] if record else []
    if t_end == 0:
        return FlowPath(np.array(times), np.array([p]), np.array([spec.phi(p)]))
    for i in range(n):
        s = i * hs
        k1 = rhs(s, p)
        k2 = rhs(s + hs / 2, p + hs / 2 * k1)
        k3 = rhs(s + hs / 2, p + hs / 2 * k2)
        k4 = rhs(s + hs, p + hs * k3)
        p = p + hs / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        spec.check_domain(p)
        if record:
            times.append(float(spec.time_of(s + hs)))
            pts.append(p.copy())
            phis.append(spec.phi(p))
    if not record:
        return FlowPath(np.array([0.0, t_end]), np.array([np.asarray(p0, dtype=complex), p]), np.array([]))
    times[-1] = t_end
    return FlowPath(np.array(times), np.array(pts), np.array(phis))


def flow_map(spec: FlowSpec, pts, t_end=1.0, steps=None):
    return integrate_flow(spec, pts, t_end, steps, record=False).final


def flow_jacobian(spec: FlowSpec, pts, t_end=1.0, step=JACOBIAN_STEP, steps=None):
    """Images of the real basis vectors under D psi, shape ``(..., 2d, d)`` (central differences)."""
    pts = np.asarray(pts, dtype=complex)
    E = kahler.unit_vectors(spec.dim)
    shifted = np.concatenate(
        [pts[..., None, :] + step * E, pts[..., None, :] - step * E], axis=-2
    )
    img = flow_map(spec, shifted, t_end, steps)
    m = E.shape[0]
    return (img[..., :m, :] - img[..., m:, :]) / (2 * step)


@dataclass
class PullbackReport:
    residual: float
    relative: float
    t_end: float
    points: int
    pairs: int

    def to_dict(self) -> dict:
        return {"residual": self.residual, "relative": self.relative, "t_end": self.t_end,
                "points": self.points, "pairs": self.pairs}


def verify_pullback(spec: FlowSpec, p0, t_end=1.0, samples=8, seed=0, steps=None,
                    fd_step=JACOBIAN_STEP) -> PullbackReport:
    """max |omega_{t_end}(D psi v1, D psi v2) - omega_0(v1, v2)| over random tangent pairs.

    D psi comes from central differences of the flow map with step ``fd_step``.
    """
    pts = np.atleast_2d(np.asarray(p0, dtype=complex))
    if t_end == 0:
        return PullbackReport(0.0, 0.0, 0.0, pts.shape[0], samples)
    rng = np.random.default_rng(seed)
    E = kahler.unit_vectors(spec.dim)
    J = flow_jacobian(spec, pts, t_end, step=fd_step, steps=steps)
    image = flow_map(spec, pts, t_end, steps)
    end_spec = spec.omega1 if t_end == 1 else _interpolated(spec, t_end)
    worst = rel = 0.0
    for _ in range(samples):
        a = rng.standard_normal((pts.shape[0], E.shape[0]))
        b = rng.standard_normal((pts.shape[0], E.shape[0]))
        v1, v2 = a @ E, b @ E
        w1 = np.einsum("pa,paj->pj", a, J)
        w2 = np.einsum("pa,paj->pj", b, J)
        before = kahler.eval_omega(spec.omega0, pts, v1, v2)
        after = kahler.eval_omega(end_spec, image, w1, w2)
        diff = np.abs(after - before)
        worst = max(worst, float(diff.max()))
        rel = max(rel, float(np.max(diff / np.maximum(1.0, np.abs(before)))))
    return PullbackReport(worst, rel, float(t_end), pts.shape[0], samples)


class _Interpolated:
    """omega_t = (1 - t) omega_0 + t omega_1 as a potential-like object."""

    def __init__(self, spec, t):
        self.spec, self.t = spec, t
        self.dim = spec.dim

    def hessian(self, pts):
        return self.spec.hessian(self.t, pts)

    def del_(self, pts):
        return (1 - self.t) * self.spec.omega0.del_(pts) + self.t * self.spec.omega1.del_(pts)

    def value(self, pts):
        return (1 - self.t) * self.spec.omega0.value(pts) + self.t * self.spec.omega1.value(pts)


def _interpolated(spec, t):
    return _Interpolated(spec, t)


def flowed_loop(spec: FlowSpec, loop, t_end=1.0, steps=None):
    """Image of a sampled loop ``(N, d)`` under the time-``t_end`` flow."""
    return flow_map(spec, np.asarray(loop, dtype=complex), t_end, steps)


def exactness_defect(spec: FlowSpec, loop, t_end=1.0, steps=None) -> float:
    """|oint_{psi(loop)} theta_{t_end} - oint_loop theta_0| (zero for an exact isotopy)."""
    loop = np.asarray(loop, dtype=complex)
    img = flowed_loop(spec, loop, t_end, steps)
    end_spec = spec.omega1 if t_end == 1 else _interpolated(spec, t_end)
    return abs(kahler.boundary_liouville(end_spec, img) - kahler.boundary_liouville(spec.omega0, loop))


def flowed_disc_area(spec: FlowSpec, u, radial=24, angular=64, t_end=1.0, step=JACOBIAN_STEP) -> float:
    """Area of psi o u under omega_{t_end}, by quadrature of the transported tangent pair.

    ``psi o u`` is no longer holomorphic, so the density is
    omega(D psi u_x, D psi u_y) with u_x = u', u_y = i u'.
    """
    grid = PolarGrid.build(radial, angular)
    zeta = grid.zeta.ravel()
    base = u(zeta)
    du = u.derivative(zeta)
    stack = np.stack([base + step * du, base - step * du, base + step * 1j * du, base - step * 1j * du, base])
    img = flow_map(spec, stack, t_end)
    dx = (img[0] - img[1]) / (2 * step)
    dy = (img[2] - img[3]) / (2 * step)
    end_spec = spec.omega1 if t_end == 1 else _interpolated(spec, t_end)
    dens = kahler.eval_omega(end_spec, img[4], dx, dy)
    return pairwise_sum(grid.weights.ravel() * dens)


def convergence_order(spec: FlowSpec, pts, t_end=1.0, coarse=(4, 8, 16, 32), reference=256, floor=1e-13):
    """Observed RK4 order from position errors against a fine reference.

    Returns ``(errors, orders)`` where orders are log2 of successive error
    ratios, for pairs whose errors both exceed ``floor``.
    """
    ref = flow_map(spec, pts, t_end, reference)
    errs = [float(np.max(np.abs(flow_map(spec, pts, t_end, m) - ref))) for m in coarse]
    orders = [
        float(np.log2(a / b)) for a, b in zip(errs[:-1], errs[1:]) if a > floor and b > floor
    ]
    return errs, orders


def pullback_convergence(spec: FlowSpec, pts, t_end=1.0, steps=(4, 8, 16, 32), samples=4):
    """Pullback residual for a range of RK4 step counts."""
    return [verify_pullback(spec, pts, t_end, samples, steps=m).residual for m in steps]


# -- the flowed torus T_red -------------------------------------------------------------


class FlowedTorus:
    """T_red = psi_1(T_std) for the reduced isotopy.

    Points and tangent vectors are computed from the flow itself; a 64 x 64
    periodic spline of the image is kept only for plotting.
    """

    space = "reduced"
    dim = 2
    lagrangian_for_reduced = True

    def __init__(self, spec: FlowSpec, base=None, grid_size=64):
        self.spec = spec
        self.base = base or StandardTorus()
        self.grid_size = grid_size
        self._spline = None

    @property
    def params(self):
        return self.spec.params

    def point(self, theta1, theta2):
        return flow_map(self.spec, self.base.point(theta1, theta2))

    def tangents(self, theta1, theta2, step=JACOBIAN_STEP):
        theta1 = np.asarray(theta1, dtype=float)
        theta2 = np.asarray(theta2, dtype=float)
        pts = np.stack(
            [
                self.base.point(theta1 + step, theta2),
                self.base.point(theta1 - step, theta2),
                self.base.point(theta1, theta2 + step),
                self.base.point(theta1, theta2 - step),
            ]
        )
        img = flow_map(self.spec, pts)
        return np.stack([(img[0] - img[1]) / (2 * step), (img[2] - img[3]) / (2 * step)], axis=-2)

    def grid(self, m=None):
        return self.base.grid(m or self.grid_size)

    def min_abs_h(self, m=None):
        zw = self.point(*self.grid(m))
        return float(np.min(np.abs(eval_h(zw[..., 0], zw[..., 1], self.params))))

    def interpolate(self, theta1, theta2):
        """Spline interpolation of the image grid (for plots and quick looks only)."""
        if self._spline is None:
            m = self.grid_size
            t1, t2 = self.grid(m)
            img = self.point(t1, t2)
            pad = 3
            th = 2 * np.pi * np.arange(-pad, m + pad) / m
            wrap = np.arange(-pad, m + pad) % m
            self._spline = [
                RectBivariateSpline(th, th, part(img[..., j])[np.ix_(wrap, wrap)], kx=3, ky=3)
                for j in range(2)
                for part in (np.real, np.imag)
            ]
        a = np.mod(np.asarray(theta1, dtype=float), 2 * np.pi)
        b = np.mod(np.asarray(theta2, dtype=float), 2 * np.pi)
        vals = [s.ev(a, b) for s in self._spline]
        return np.stack([vals[0] + 1j * vals[1], vals[2] + 1j * vals[3]], axis=-1)

    def distance(self, pts):
        raise NotImplementedError("distance to the flowed torus is not available in closed form")


# -- calibration of kappa --------------------------------------------------------------


@dataclass
class Calibration:
    kappa: float
    attempts: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"kappa": self.kappa, "attempts": self.attempts}


def calibrate_kappa(n: int, c: float = 10.0, start=0.1, grid=64, points=20, seed=0, min_kappa=1e-4,
                    steps=DEFAULT_STEPS) -> Calibration:
    """Largest kappa in start / 2^j for which the reduced flow is usable.

    Usable means: flows from all grid points of T_std stay in the domain and
    away from C, the pullback residual at ``points`` random points of T_std is
    below 1e-5, the flowed torus keeps min |h| > 0.1, and halving the step
    moves those points by less than 1e-8.
    """
    from .errors import NumericalFailure

    kappa = start
    attempts = []
    rng = np.random.default_rng(seed)
    angles = rng.uniform(0, 2 * np.pi, size=(points, 2))
    T = StandardTorus()
    while kappa >= min_kappa:
        p = ConicParams(n, c, kappa)
        spec = reduced_flow_spec(p, steps=steps)
        record = {"kappa": kappa}
        try:
            img = flow_map(spec, T.point(*T.grid(grid)))
            record["min_abs_h"] = float(np.min(np.abs(eval_h(img[..., 0], img[..., 1], p))))
            rep = verify_pullback(spec, T.point(angles[:, 0], angles[:, 1]), samples=4, seed=seed)
            record["pullback"] = rep.residual
            sample = T.point(angles[:, 0], angles[:, 1])
            halving = np.max(np.abs(flow_map(spec, sample) - flow_map(spec, sample, steps=2 * spec.step_count)))
            record["step_halving"] = float(halving)
            ok = rep.residual < PULLBACK_TOL and record["min_abs_h"] > 0.1 and halving < HALVING_TOL
        except NumericalFailure as exc:
            record["error"] = type(exc).__name__
            ok = False
        attempts.append(record)
        if ok:
            return Calibration(kappa, attempts)
        kappa /= 2
    raise NearSingularLocus(f"no kappa >= {min_kappa} passed calibration")


# -- the barrier --------------------------------------------------------------------------


@dataclass(frozen=True)
class BarrierConstants:
    R: float
    K: float
    C: float
    M: float
    samples: int
    certified: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if not self.C > 1 or not self.M > 0:
            raise ValueError("barrier constants need C > 1 and M > 0")

    def to_dict(self) -> dict:
        return {"R": self.R, "K": self.K, "C": self.C, "M": self.M, "samples": self.samples,
                "certified": dict(self.certified)}


def _phi1_scales(p: ConicParams):
    # Phi_1 = |u|^2 for u = (sqrt(kappa)/2 x, sqrt(kappa)/2 y, z/2)
    return np.array([np.sqrt(p.kappa) / 2, np.sqrt(p.kappa) / 2, 0.5])


def phi1_shell_samples(p: ConicParams, r_in, r_out, count, rng):
    """Uniform samples of the Phi_1-metric shell r_in <= sqrt(Phi_1) <= r_out in C^3."""
    g = rng.standard_normal((count, 6))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    u = rng.random(count)
    r = (r_in**6 + u * (r_out**6 - r_in**6)) ** (1 / 6)
    v = (g[:, :3] + 1j * g[:, 3:]) * r[:, None]
    return v / _phi1_scales(p)


def _ratio(pts, p):
    w = derived_w(pts[..., 0], pts[..., 1], pts[..., 2], p)
    return 0.25 * np.abs(w) ** 2 / phi1_value(pts, p)


def _polish_sup(p, start, R):
    """Local maximisation of log(|w|^2 / (4 Phi_1)) over the shell from ``start``."""
    scales = _phi1_scales(p)

    def to_pts(v):
        return (v[:3] + 1j * v[3:]) / scales

    def neg(v):
        return -float(np.log(_ratio(to_pts(v), p)))

    u0 = start * scales
    v0 = np.concatenate([u0.real, u0.imag])
    norm = lambda v: float(np.dot(v, v)) / R**2  # noqa: E731
    cons = [
        {"type": "ineq", "fun": lambda v: 4 - norm(v)},
        {"type": "ineq", "fun": lambda v: norm(v) - 1},
    ]
    res = optimize.minimize(neg, v0, method="SLSQP", constraints=cons, options={"maxiter": 500, "ftol": 1e-15})
    v = res.x
    r = np.sqrt(norm(v))
    v = v * np.clip(r, 1.0, 2.0) / r
    return float(_ratio(to_pts(v), p))


def _structured_starts(p: ConicParams, R):
    """Points on the outer sphere along coordinate directions and their even mixtures."""
    scales = _phi1_scales(p)
    dirs = []
    for mask in range(1, 8):
        amp = np.array([(mask >> k) & 1 for k in range(3)], dtype=float)
        for phase in (0.0, np.pi / 2, np.pi):
            v = amp * np.exp(1j * phase * np.array([0, 1, 0]))
            dirs.append(v / np.linalg.norm(v))
    return [2 * R * d / scales for d in dirs]


def barrier_constants(p: ConicParams, R: float, samples: int = 100_000, seed: int = 0, polish=8) -> BarrierConstants:
    """Constants K, C = 2K + 1, M = 5/2 K R^2 for phi = C Phi_1 - Phi_X.

    K is the largest sampled value of |w|^2 / (4 Phi_1) on the shell
    R <= sqrt(Phi_1) <= 2R, improved by local maximisation from the best
    samples.  The two inequalities phi <= 2K Phi_1 (ball of radius 2R) and
    phi >= K Phi_1 (shell) are then certified on an independent sample four
    times denser; a violation raises :class:`SamplingInsufficient`.
    """
    if R <= 0:
        raise ValueError("R must be positive")
    if samples < 10_000:
        raise ValueError("barrier sampling needs at least 10^4 points")
    rng = np.random.default_rng(seed)
    pts = phi1_shell_samples(p, R, 2 * R, samples, rng)
    vals = _ratio(pts, p)
    K = float(vals.max())
    starts = [pts[idx] for idx in np.argsort(vals)[-polish:]] + _structured_starts(p, R)
    for start in starts:
        K = max(K, _polish_sup(p, start, R))
    C = 2 * K + 1
    M = 2.5 * K * R**2
    cert = certify_barrier(p, R, K, 4 * samples, rng)
    return BarrierConstants(R, K, C, M, samples, cert)


def certify_barrier(p: ConicParams, R, K, samples, rng) -> dict:
    C = 2 * K + 1
    phi_spec = FlowSpec(kahler.ambient(p), kahler.standard_c3(p, scale=C), 2 * R, 16, "phi1")
    ball = phi1_shell_samples(p, 0.0, 2 * R, samples, rng)
    shell = phi1_shell_samples(p, R, 2 * R, samples, rng)
    upper = phi_spec.phi(ball) - 2 * K * phi1_value(ball, p)
    lower = K * phi1_value(shell, p) - phi_spec.phi(shell)
    slack = 1e-12 * C * 4 * R**2
    far = shell[phi1_value(shell, p) >= 3 * R**2]
    far_min = float(np.min(phi_spec.phi(far))) if far.size else float("inf")
    M = 2.5 * K * R**2
    out = {
        "upper_max": float(upper.max()),
        "lower_max": float(lower.max()),
        "far_shell_min_phi": far_min,
        "far_shell_exceeds_M": bool(far_min > M),
        "origin_phi": float(phi_spec.phi(np.zeros(3, dtype=complex))),
        "samples": int(samples),
    }
    if out["upper_max"] > slack:
        raise SamplingInsufficient(f"phi <= 2K Phi_1 fails by {out['upper_max']:.3g}")
    if out["lower_max"] > slack:
        raise SamplingInsufficient(f"phi >= K Phi_1 fails by {out['lower_max']:.3g}; K was underestimated")
    if not out["far_shell_exceeds_M"]:
        raise SamplingInsufficient("phi does not exceed M beyond sqrt(3) R")
    return out


# -- straightening flow ------------------------------------------------------------------


def rescale_to_standard(pts, p: ConicParams, C: float):
    """Coordinates in which C omega_1 becomes the standard form (potential |.|^2 / 4)."""
    pts = np.asarray(pts, dtype=complex)
    return pts * np.array([np.sqrt(C * p.kappa), np.sqrt(C * p.kappa), np.sqrt(C)])


def torus_sample_points(p: ConicParams, m=8, fibre=4):
    """Points of the preimage of T_std in mu^{-1}(0), as starting points for the straightening flow."""
    T = ConicTorus(StandardTorus(), p)
    t1, t2 = StandardTorus().grid(m)
    sig = 2 * np.pi * np.arange(fibre) / fibre
    return T.point(t1[..., None], t2[..., None], sig).reshape(-1, 3)


def straightening_trace(p: ConicParams, R=1.0, steps=DEFAULT_STEPS, seeds=None, barrier=None, samples=100_000):
    """Run the straightening flow from points of T and return (barrier, spec, path).

    Raises if phi increases by more than 1e-9 at any accepted step.
    """
    from .errors import CheckFailed

    barrier = barrier or barrier_constants(p, R, samples)
    spec = straightening_flow_spec(p, barrier.C, R, steps)
    start = torus_sample_points(p) if seeds is None else np.asarray(seeds, dtype=complex)
    if np.max(phi1_value(start, p)) > R**2:
        raise LeftDomain("starting points are not inside the ball B(0, R)")
    path = integrate_flow(spec, start, 1.0)
    rise = float(np.max(np.diff(path.phi, axis=0), initial=-np.inf))
    if rise > 1e-9:
        raise CheckFailed("phi_nonincreasing", rise, 1e-9)
    return barrier, spec, path


def flow_trace_csv(path: FlowPath, trajectory=0) -> str:
    """CSV of one trajectory: t, Re/Im of each coordinate, phi."""
    pts = path.points[:, trajectory] if path.points.ndim == 3 else path.points
    phis = path.phi[:, trajectory] if path.phi.ndim == 2 else path.phi
    d = pts.shape[-1]
    names = ["x", "y", "z"] if d == 3 else ["z", "w"]
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["t"] + [f"{part}_{nm}" for nm in names for part in ("re", "im")] + ["phi"])
    for t, pt, ph in zip(path.times, pts, phis):
        row = [f"{t:.17g}"]
        for v in pt:
            row += [f"{v.real:.17g}", f"{v.imag:.17g}"]
        row.append(f"{ph:.17g}")
        wr.writerow(row)
    return buf.getvalue()


# -- monotonicity on T over T_red ----------------------------------------------------------


def flowed_base_loop(u_red, spec: FlowSpec, samples=512):
    """Boundary of a reduced disc on T_std, its image under psi, and its torus angles."""
    base = u_red(circle_points(samples))
    return base, flow_map(spec, base), StandardTorus().locate(base)


def transported_boundary(lift_disc, spec: FlowSpec, samples=512, flowed=None):
    """Carry the boundary loop of a lift on the T_std preimage to T over T_red.

    The base loop is flowed by psi; x is multiplied by the continuous square
    root of h_new / h_old along the loop so that |x| = |y| is kept.  Returns
    the loop in C^3 and the base torus angles (theta1, theta2) along it.
    ``flowed`` may pass a precomputed :func:`flowed_base_loop`.
    """
    p = spec.params
    base, new, theta = flowed or flowed_base_loop(lift_disc.projection(), spec, samples)
    pts = lift_disc(circle_points(base.shape[0]))
    h_old = eval_h(base[:, 0], base[:, 1], p)
    h_new = eval_h(new[:, 0], new[:, 1], p)
    ratio = h_new / h_old
    ph = np.unwrap(np.angle(ratio))
    ph -= 2 * np.pi * np.rint(ph[0] / (2 * np.pi))
    root = np.sqrt(np.abs(ratio)) * np.exp(0.5j * ph)
    x = pts[:, 0] * root
    y = h_new / x
    return np.stack([x, y, new[:, 0]], axis=-1), theta


def monotonicity_on_T(p: ConicParams, lifts_by_disc: dict, spec: FlowSpec | None = None, samples=512) -> dict:
    """Area and Maslov index of each lifted class on T = preimage of T_red.

    ``lifts_by_disc`` maps a label to (reduced disc, its lifts).  Areas are
    oint theta_X over the transported boundary loops; Maslov indices come
    from the 3-frame of T along them.
    """
    spec = spec or reduced_flow_spec(p)
    t_red = FlowedTorus(spec)
    T = build_torus_T(p, t_red, grid=8, fibre=2)
    amb = kahler.ambient(p)
    rows = []
    for key, (u_red, lifts) in lifts_by_disc.items():
        flowed = flowed_base_loop(u_red, spec, samples)
        base_frames = t_red.tangents(*flowed[2])
        for lf in lifts:
            loop, _ = transported_boundary(lf.disc, spec, samples, flowed)
            area = kahler.boundary_liouville(amb, loop)
            mas = maslov_from_frames(T._frame(loop, base_frames), name=f"T frame along {lf.disc.label}")
            rows.append({"disc": key, "eps": list(lf.eps), "area": area, "maslov": mas, "ratio": area / mas})
    ratios = np.array([r["ratio"] for r in rows])
    spread = float((ratios.max() - ratios.min()) / abs(ratios.mean()))
    return {"rows": rows, "relative_spread": spread, "torus_checks": T.checks}


# calibrate_kappa(n, c=10) at the default step count, n = 0..10; reproduced by the test suite
CALIBRATED_KAPPA_C10 = {
    0: 0.1, 1: 0.1, 2: 0.1, 3: 0.1, 4: 0.1, 5: 0.05,
    6: 0.025, 7: 0.025, 8: 0.025, 9: 0.0125, 10: 0.0125,
}


def default_kappa(n: int, c: float = 10.0) -> float:
    """Calibrated kappa: from the stored table for c = 10, otherwise calibrated now."""
    if c == 10.0 and n in CALIBRATED_KAPPA_C10:
        return CALIBRATED_KAPPA_C10[n]
    return calibrate_kappa(n, c).kappa
