"""Tori, explicit holomorphic discs, and their topological invariants.

Reduced discs map the unit disc into C^2 = {(z, w)}; ambient discs map it into
X with coordinates (x, y, z).  Maslov indices are winding numbers of
det^2 of a tangent frame of the boundary torus, taken in the constant
coordinate trivialisation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from . import kahler
from .conic import ConicParams, derived_w, eval_h, grad_h, grad_w, moment_map, project
from .errors import BoundaryZero, CheckFailed, FrameDegenerate, TooCloseToC
from .quadrature import circle_points
from .winding import BOUNDARY_SAMPLES, sort_points, winding_number, zeros_in_disc

BOUNDARY_TOL = 1e-8
CR_TOL = 1e-8
H_BOUNDARY_TOL = 1e-6


class HomotopyClass(NamedTuple):
    """Intersection numbers with {x=0}, {z=0}, {w=0}; ``a`` is None for reduced discs."""

    a: int | None
    b: int
    d: int

    def as_list(self) -> list:
        return [self.b, self.d] if self.a is None else [self.a, self.b, self.d]


# -- tori ------------------------------------------------------------------------


class StandardTorus:
    """T_std = {|z| = |w| = 1} in C^2."""

    space = "reduced"
    dim = 2
    lagrangian_for_reduced = False

    def point(self, theta1, theta2):
        theta1, theta2 = np.broadcast_arrays(np.asarray(theta1, float), np.asarray(theta2, float))
        return np.stack([np.exp(1j * theta1), np.exp(1j * theta2)], axis=-1)

    def locate(self, pts):
        pts = np.asarray(pts, dtype=complex)
        return np.angle(pts[..., 0]), np.angle(pts[..., 1])

    def tangents(self, theta1, theta2):
        """Tangent vectors d/dtheta1, d/dtheta2 as rows, shape ``(..., 2, 2)``."""
        pt = self.point(theta1, theta2)
        out = np.zeros(pt.shape[:-1] + (2, 2), dtype=complex)
        out[..., 0, 0] = 1j * pt[..., 0]
        out[..., 1, 1] = 1j * pt[..., 1]
        return out

    def frame_at(self, pts):
        return self.tangents(*self.locate(pts))

    def distance(self, pts):
        pts = np.asarray(pts, dtype=complex)
        return np.maximum(np.abs(np.abs(pts[..., 0]) - 1), np.abs(np.abs(pts[..., 1]) - 1))

    def grid(self, m=64):
        th = 2 * np.pi * np.arange(m) / m
        t1, t2 = np.meshgrid(th, th, indexing="ij")
        return t1, t2


class ConicTorus:
    """T: the part of mu^{-1}(0) lying over a torus in the reduced space.

    Parametrised by (theta1, theta2) on the base torus and the fibre angle
    sigma = arg x, with |x| = |y| = |h|^{1/2}.
    """

    space = "ambient"
    dim = 3

    def __init__(self, base, params: ConicParams):
        self.base = base
        self.params = params
        self.checks: dict = {}

    def point(self, theta1, theta2, sigma):
        zw = self.base.point(theta1, theta2)
        h = eval_h(zw[..., 0], zw[..., 1], self.params)
        x = np.sqrt(np.abs(h)) * np.exp(1j * np.asarray(sigma, dtype=float))
        return np.stack(np.broadcast_arrays(x, h / x, zw[..., 0]), axis=-1)

    def lift_tangents(self, pts, base_vectors):
        """Lift reduced tangent vectors (rows) at pi(pts) to T, keeping arg x fixed."""
        pts = np.asarray(pts, dtype=complex)
        x, y, z = pts[..., 0], pts[..., 1], pts[..., 2]
        w = derived_w(x, y, z, self.params)
        h = eval_h(z, w, self.params)
        gh = grad_h(z, w, self.params)
        dh = np.einsum("...j,...kj->...k", gh, base_vectors)
        s = np.abs(h)[..., None]
        ds = np.real(np.conj(h)[..., None] * dh) / s
        dx = x[..., None] * ds / (2 * s)
        dy = (dh - y[..., None] * dx) / x[..., None]
        return np.stack([dx, dy, base_vectors[..., 0]], axis=-1)

    def tangents(self, theta1, theta2, sigma):
        """Rows: fibre direction (ix, -iy, 0), then the lifts of the base tangents."""
        pts = self.point(theta1, theta2, sigma)
        return self._frame(pts, self.base.tangents(theta1, theta2))

    def _frame(self, pts, base_tangents):
        fib = np.stack([1j * pts[..., 0], -1j * pts[..., 1], np.zeros_like(pts[..., 0])], axis=-1)
        lifted = self.lift_tangents(pts, base_tangents)
        return np.concatenate([fib[..., None, :], lifted], axis=-2)

    def locate(self, pts):
        pts = np.asarray(pts, dtype=complex)
        t1, t2 = self.base.locate(project(pts, self.params))
        return t1, t2, np.angle(pts[..., 0])

    def frame_at(self, pts):
        return self.tangents(*self.locate(pts))

    def distance(self, pts):
        pts = np.asarray(pts, dtype=complex)
        base = self.base.distance(project(pts, self.params))
        return np.maximum(base, np.abs(np.abs(pts[..., 0]) - np.abs(pts[..., 1])))


def lagrangian_residual(spec: kahler.PotentialSpec, pts, frames) -> float:
    """max |omega(e_a, e_b)| over all pairs of frame rows."""
    k = frames.shape[-2]
    worst = 0.0
    for a in range(k):
        for b in range(a + 1, k):
            val = kahler.eval_omega(spec, pts, frames[..., a, :], frames[..., b, :])
            worst = max(worst, float(np.max(np.abs(val))))
    return worst


def build_torus_T(p: ConicParams, t_red, grid=16, fibre=4, strict=None) -> ConicTorus:
    """Preimage of the reduced torus ``t_red`` in mu^{-1}(0).

    Checks, on a grid x fibre sample, that T stays away from {h = 0}
    (min |h| > 0.1), that the moment map vanishes, and records the largest
    value of omega_X on pairs of tangent vectors.  With ``strict`` (default:
    whenever the base torus is Lagrangian for the reduced form) that value
    must be below 1e-8.
    """
    t1, t2 = t_red.grid(grid)
    zw = t_red.point(t1, t2)
    hmin = float(np.min(np.abs(eval_h(zw[..., 0], zw[..., 1], p))))
    if hmin <= 0.1:
        raise TooCloseToC(f"min |h| on the reduced torus is {hmin:.3g} <= 0.1")
    T = ConicTorus(t_red, p)
    sig = 2 * np.pi * np.arange(fibre) / fibre
    T1 = np.repeat(t1[..., None], fibre, axis=-1)
    T2 = np.repeat(t2[..., None], fibre, axis=-1)
    S = np.broadcast_to(sig, T1.shape)
    pts = T.point(T1, T2, S)
    mu = float(np.max(np.abs(moment_map(pts[..., 0], pts[..., 1], p))))
    base_frames = t_red.tangents(t1, t2)
    frames = T._frame(pts, np.repeat(base_frames[..., None, :, :], fibre, axis=-3))
    lag = lagrangian_residual(kahler.ambient(p), pts, frames)
    T.checks = {"min_abs_h": hmin, "moment_map": mu, "lagrangian": lag}
    if mu > 1e-12:
        raise CheckFailed("moment_map_on_T", mu, 1e-12)
    if strict is None:
        strict = getattr(t_red, "lagrangian_for_reduced", False)
    if strict and lag > 1e-8:
        raise CheckFailed("T_lagrangian", lag, 1e-8)
    return T


# -- disc maps ---------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class DiscMap:
    """A holomorphic map from the closed unit disc.

    ``func`` maps an array of disc points to ``(..., dim)`` coordinates.
    ``deriv`` (optional) gives the complex derivative; without it the
    derivative is taken by the Cauchy integral over a small circle.
    """

    space: str
    func: Callable
    deriv: Callable | None = None
    torus: object = None
    params: ConicParams | None = None
    label: str = ""
    meta: dict = field(default_factory=dict)

    def __call__(self, zeta):
        return self.func(np.asarray(zeta, dtype=complex))

    def derivative(self, zeta):
        zeta = np.asarray(zeta, dtype=complex)
        if self.deriv is not None:
            return self.deriv(zeta)
        m, rad = 32, 1e-2
        nodes = circle_points(m)
        acc = 0
        for node in nodes:
            acc = acc + self.func(zeta + rad * node) * np.conj(node)
        return acc / (m * rad)

    @property
    def dim(self) -> int:
        return 2 if self.space == "reduced" else 3

    @property
    def marked(self) -> np.ndarray:
        return self(np.array(1.0 + 0j))

    def boundary(self, samples=BOUNDARY_SAMPLES):
        """Boundary points u(e^{i phi}) and their phi-derivatives."""
        zeta = circle_points(samples)
        return self(zeta), 1j * zeta[:, None] * self.derivative(zeta)

    def projection(self) -> DiscMap:
        if self.space == "reduced":
            return self
        red = self.meta.get("reduced")
        if red is not None:
            return red
        p = self.params

        def func(zeta):
            return project(self(zeta), p)

        def deriv(zeta):
            v = self(zeta)
            dv = self.derivative(zeta)
            dw = np.sum(grad_w(v[..., 0], v[..., 1], v[..., 2], p) * dv, axis=-1)
            return np.stack([dv[..., 2], dw], axis=-1)

        base = self.torus.base if isinstance(self.torus, ConicTorus) else None
        return DiscMap("reduced", func, deriv, base, p, f"pi({self.label})")

    def coordinate(self, name):
        """A named scalar coordinate function: x, y, z, w (ambient) or z, w (reduced)."""
        if self.space == "reduced":
            idx = {"z": 0, "w": 1}[name]
            return lambda zeta: self(zeta)[..., idx]
        if name == "w":
            p = self.params
            return lambda zeta: derived_w(*np.moveaxis(self(zeta), -1, 0), p)
        idx = {"x": 0, "y": 1, "z": 2}[name]
        return lambda zeta: self(zeta)[..., idx]


def disc_u_alpha(alpha: float, torus=None) -> DiscMap:
    """zeta -> (zeta, e^{i alpha}), boundary on T_std."""
    c = np.exp(1j * alpha)

    def func(zeta):
        return np.stack([zeta, np.full_like(zeta, c)], axis=-1)

    def deriv(zeta):
        return np.stack([np.ones_like(zeta), np.zeros_like(zeta)], axis=-1)

    return DiscMap("reduced", func, deriv, torus or StandardTorus(), None, f"u_{alpha:g}",
                   {"kind": "u_alpha", "alpha": float(alpha)})


def disc_v_alpha(alpha: float, torus=None) -> DiscMap:
    """zeta -> (e^{i alpha}, zeta), boundary on T_std."""
    c = np.exp(1j * alpha)

    def func(zeta):
        return np.stack([np.full_like(zeta, c), zeta], axis=-1)

    def deriv(zeta):
        return np.stack([np.zeros_like(zeta), np.ones_like(zeta)], axis=-1)

    return DiscMap("reduced", func, deriv, torus or StandardTorus(), None, f"v_{alpha:g}",
                   {"kind": "v_alpha", "alpha": float(alpha)})


def disc_power(alpha: float, k: int) -> DiscMap:
    """zeta -> (zeta^k, e^{i alpha}): a k-fold cover of u_alpha (Maslov index 2k)."""
    c = np.exp(1j * alpha)

    def func(zeta):
        return np.stack([zeta**k, np.full_like(zeta, c)], axis=-1)

    def deriv(zeta):
        return np.stack([k * zeta ** (k - 1), np.zeros_like(zeta)], axis=-1)

    return DiscMap("reduced", func, deriv, StandardTorus(), None, f"u_{alpha:g}^{k}",
                   {"kind": "power", "alpha": float(alpha), "k": k})


def check_disc(u: DiscMap, samples=256, step=1e-5) -> dict:
    """Boundary-on-torus distance and Cauchy-Riemann residual of a disc."""
    zb = circle_points(samples)
    dist = float(np.max(u.torus.distance(u(zb)))) if u.torus is not None else float("nan")
    rng = np.random.default_rng(0)
    zeta = 0.9 * np.sqrt(rng.random(samples)) * np.exp(2j * np.pi * rng.random(samples))
    dx = (u(zeta + step) - u(zeta - step)) / (2 * step)
    dy = (u(zeta + 1j * step) - u(zeta - 1j * step)) / (2 * step)
    cr = float(np.max(np.abs(0.5 * (dx + 1j * dy))))
    return {"boundary_distance": dist, "cauchy_riemann": cr}


# -- intersections and invariants ----------------------------------------------


def _h_along(u: DiscMap, p: ConicParams):
    red = u.projection()

    def f(zeta):
        v = red(zeta)
        return eval_h(v[..., 0], v[..., 1], p)

    def df(zeta):
        v = red(zeta)
        return np.sum(grad_h(v[..., 0], v[..., 1], p) * red.derivative(zeta), axis=-1)

    return f, df


def radical_roots(alpha: float, p: ConicParams) -> np.ndarray:
    """z_k = e^{2 pi i k/n} c^{-1/n} (1 - e^{i alpha}/c)^{1/n}, k = 0..n-1."""
    if p.n == 0:
        return np.zeros(0, dtype=complex)
    base = (1 - np.exp(1j * alpha) / p.c) ** (1.0 / p.n) * p.c ** (-1.0 / p.n)
    return base * np.exp(2j * np.pi * np.arange(p.n) / p.n)


def intersections_with_C(u: DiscMap, p: ConicParams) -> np.ndarray:
    """Interior points where the reduced disc meets C = {h = 0}.

    The count is the boundary winding of h o u.  For u_alpha the points come
    from the radical formula and are cross-checked against companion-matrix
    roots of c z^n + e^{i alpha}/c - 1; otherwise they are found from contour
    moments.  All intersections must be transverse.
    """
    f, df = _h_along(u, p)
    hb = np.abs(f(circle_points(BOUNDARY_SAMPLES)))
    if hb.min() <= H_BOUNDARY_TOL:
        raise BoundaryZero("h", float(hb.min()))
    count = winding_number(f(circle_points(BOUNDARY_SAMPLES)), name="h o u")
    if u.meta.get("kind") == "u_alpha":
        alpha = u.meta["alpha"]
        pts = radical_roots(alpha, p)
        pts = pts[np.abs(pts) < 1]
        if p.n:
            coeffs = np.zeros(p.n + 1, dtype=complex)
            coeffs[0] = p.c
            coeffs[-1] = np.exp(1j * alpha) / p.c - 1
            comp = np.roots(coeffs)
            comp = comp[np.abs(comp) < 1]
            if comp.size != pts.size or (
                pts.size and np.max(np.min(np.abs(pts[:, None] - comp[None, :]), axis=1)) > 1e-10
            ):
                raise CheckFailed("radical_vs_companion_roots", float("inf"), 1e-10)
        deriv = np.abs(df(pts))
        if pts.size and deriv.min() < 1e-8:
            from .errors import NonTransverse

            raise NonTransverse(f"|(h o u)'| = {deriv.min():.2e} at an intersection point")
        pts = sort_points(pts)
    else:
        pts = zeros_in_disc(f, df)
    if pts.size != count:
        raise CheckFailed("intersection_count_vs_winding", abs(pts.size - count), 0)
    return pts


def maslov_from_frames(frames, name="frame") -> int:
    """Maslov index of a loop of totally real frames (rows) sampled around a circle."""
    det = np.linalg.det(frames)
    size = np.prod(np.linalg.norm(frames, axis=-1), axis=-1)
    rel = np.abs(det) / size
    if rel.min() < 1e-10:
        raise FrameDegenerate(f"{name}: tangent frame nearly singular (relative det {rel.min():.2e})")
    return winding_number(det**2 / np.abs(det) ** 2, name=name)


def maslov_index(u: DiscMap, method="projection", samples=BOUNDARY_SAMPLES) -> int:
    """Maslov index of a disc with boundary on its torus.

    Reduced discs use the boundary frame of the reduced torus.  For ambient
    discs the default is the index of the projection; ``method="direct"``
    uses the 3-dimensional frame of T in C^3 instead.
    """
    if u.space == "ambient" and method == "projection":
        return maslov_index(u.projection(), samples=samples)
    pts = u(circle_points(samples))
    return maslov_from_frames(u.torus.frame_at(pts), name=f"Maslov frame of {u.label}")


def class_coordinates(u: DiscMap, samples=BOUNDARY_SAMPLES) -> HomotopyClass:
    """Intersection numbers with the coordinate hypersurfaces, as boundary windings."""
    zeta = circle_points(samples)
    names = ("z", "w") if u.space == "reduced" else ("x", "z", "w")
    nums = []
    for name in names:
        vals = u.coordinate(name)(zeta)
        try:
            nums.append(winding_number(vals, name=name))
        except BoundaryZero as exc:
            raise BoundaryZero(name, getattr(exc, "value", None)) from exc
    if u.space == "reduced":
        return HomotopyClass(None, *nums)
    return HomotopyClass(*nums)
