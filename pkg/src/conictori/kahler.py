"""Kahler potentials, symplectic and Liouville forms, and their integrals over discs.

Conventions (used everywhere in the package):

* tangent vectors are complex coordinate vectors, J is multiplication by i;
* for a potential Phi with complex Hessian H_jk = d^2 Phi / dz_j dzbar_k,
  omega = dd^c Phi evaluates as omega(u, v) = -4 Im(u^T H conj(v)) and the
  metric as g(u, v) = omega(u, J v) = 4 Re(u^T H conj(v));
* d^c Phi = -dPhi o J, so the Liouville form is theta(v) = 2 Im(dPhi . v)
  with dPhi the holomorphic gradient, and d theta = omega.  On C with
  Phi = |z|^2 / 4 this gives theta = (x dy - y dx) / 2 and omega = dx ^ dy.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .conic import ConicParams, derived_w, eval_h, grad_h, grad_w
from .errors import QuadratureDivergence, SingularLocus
from .quadrature import (
    PolarGrid,
    QuadSpec,
    circle_points,
    gauss_legendre,
    integrate_with_refinement,
    pairwise_sum,
    smooth_cutoff,
)

VARIANTS_C2 = ("standard_C2", "reduced", "reduced_smoothed")
VARIANTS_C3 = ("ambient_X", "standard_C3_scaled")
SINGULAR_TOL = 1e-8
DEFAULT_SMOOTHING = 0.05


# -- the smoothing function rho ------------------------------------------------


def rho(s, eps):
    """Even convex quartic on [0, eps], identity beyond; C^2 at s = eps."""
    s = np.asarray(s, dtype=float)
    t = s / eps
    inner = eps * (0.375 + 0.75 * t**2 - 0.125 * t**4)
    return np.where(t < 1, inner, s)


def rho_prime(s, eps):
    t = np.asarray(s, dtype=float) / eps
    return np.where(t < 1, 1.5 * t - 0.5 * t**3, 1.0)


def rho_second(s, eps):
    t = np.asarray(s, dtype=float) / eps
    return np.where(t < 1, (1.5 - 1.5 * t**2) / eps, 0.0)


def _rho_prime_over_s(s, eps):
    # rho'(s)/s without dividing by s near 0
    s = np.asarray(s, dtype=float)
    t = s / eps
    inside = (1.5 - 0.5 * t**2) / eps
    with np.errstate(divide="ignore"):
        outside = 1.0 / s
    return np.where(t < 1, inside, outside)


# -- potentials ------------------------------------------------------------------


@dataclass(frozen=True)
class PotentialSpec:
    """One of the five Kahler potentials, optionally multiplied by ``scale``.

    C^2 variants act on ``(..., 2)`` arrays of (z, w); C^3 variants on
    ``(..., 3)`` arrays of (x, y, z) with w derived.
    """

    variant: str
    params: ConicParams | None = None
    smoothing_epsilon: float = DEFAULT_SMOOTHING
    scale: float = 1.0

    def __post_init__(self):
        if self.variant not in VARIANTS_C2 + VARIANTS_C3:
            raise ValueError(f"unknown potential variant {self.variant!r}")
        if self.variant != "standard_C2" and self.params is None:
            raise ValueError(f"variant {self.variant!r} needs ConicParams")
        if not self.smoothing_epsilon > 0:
            raise ValueError("smoothing_epsilon must be positive")

    @property
    def dim(self) -> int:
        return 2 if self.variant in VARIANTS_C2 else 3

    @property
    def is_singular(self) -> bool:
        return self.variant == "reduced"

    def _pts(self, pts):
        pts = np.asarray(pts, dtype=complex)
        if pts.shape[-1] != self.dim:
            raise ValueError(f"{self.variant} expects points with {self.dim} coordinates, got shape {pts.shape}")
        return pts

    def _phi1_weights(self):
        k = self.params.kappa
        return np.array([k / 4, k / 4, 0.25])

    def _h_data(self, pts):
        p = self.params
        z, w = pts[..., 0], pts[..., 1]
        h = eval_h(z, w, p)
        s = np.abs(h)
        if self.variant == "reduced" and np.any(s < SINGULAR_TOL):
            raise SingularLocus(f"|h| = {s.min():.2e} below {SINGULAR_TOL:.0e}: reduced form is singular on C")
        return h, s, grad_h(z, w, p)

    def value(self, pts):
        pts = self._pts(pts)
        v = self.variant
        if v in VARIANTS_C2:
            out = 0.25 * np.sum(np.abs(pts) ** 2, axis=-1)
            if v != "standard_C2":
                s = np.abs(eval_h(pts[..., 0], pts[..., 1], self.params))
                bump = s if v == "reduced" else rho(s, self.smoothing_epsilon)
                out = out + 0.5 * self.params.kappa * bump
        else:
            out = np.sum(self._phi1_weights() * np.abs(pts) ** 2, axis=-1)
            if v == "ambient_X":
                w = derived_w(pts[..., 0], pts[..., 1], pts[..., 2], self.params)
                out = out + 0.25 * np.abs(w) ** 2
        return self.scale * out

    def del_(self, pts):
        """Holomorphic gradient dPhi/dz_j, shape ``(..., dim)``."""
        pts = self._pts(pts)
        v = self.variant
        if v in VARIANTS_C2:
            out = 0.25 * np.conj(pts)
            if v != "standard_C2":
                h, s, gh = self._h_data(pts)
                if v == "reduced":
                    coef = 0.5 / s
                else:
                    coef = 0.5 * _rho_prime_over_s(s, self.smoothing_epsilon)
                out = out + 0.5 * self.params.kappa * (coef * np.conj(h))[..., None] * gh
        else:
            out = self._phi1_weights() * np.conj(pts)
            if v == "ambient_X":
                x, y, z = pts[..., 0], pts[..., 1], pts[..., 2]
                w = derived_w(x, y, z, self.params)
                out = out + 0.25 * np.conj(w)[..., None] * grad_w(x, y, z, self.params)
        return self.scale * out

    def hessian(self, pts):
        """Complex Hessian H_jk = d^2 Phi / dz_j dzbar_k, shape ``(..., dim, dim)``."""
        pts = self._pts(pts)
        v = self.variant
        shape = pts.shape[:-1] + (self.dim, self.dim)
        if v in VARIANTS_C2:
            H = np.broadcast_to(0.25 * np.eye(2, dtype=complex), shape).copy()
            if v != "standard_C2":
                h, s, gh = self._h_data(pts)
                if v == "reduced":
                    coef = 1.0 / s
                else:
                    eps = self.smoothing_epsilon
                    coef = _rho_prime_over_s(s, eps) + rho_second(s, eps)
                outer = gh[..., :, None] * np.conj(gh)[..., None, :]
                H = H + (self.params.kappa / 8) * coef[..., None, None] * outer
        else:
            H = np.broadcast_to(np.diag(self._phi1_weights()).astype(complex), shape).copy()
            if v == "ambient_X":
                gw = grad_w(pts[..., 0], pts[..., 1], pts[..., 2], self.params)
                H = H + 0.25 * gw[..., :, None] * np.conj(gw)[..., None, :]
        return self.scale * H


def standard_c2() -> PotentialSpec:
    return PotentialSpec("standard_C2")


def reduced(p: ConicParams, smoothed=False, eps=DEFAULT_SMOOTHING) -> PotentialSpec:
    return PotentialSpec("reduced_smoothed" if smoothed else "reduced", p, eps)


def ambient(p: ConicParams) -> PotentialSpec:
    return PotentialSpec("ambient_X", p)


def standard_c3(p: ConicParams, scale=1.0) -> PotentialSpec:
    return PotentialSpec("standard_C3_scaled", p, scale=scale)


# -- pointwise forms ---------------------------------------------------------------


def _sesq(H, u, v):
    return np.einsum("...j,...jk,...k->...", u, H, np.conj(v))


def eval_potential(spec: PotentialSpec, pt):
    return spec.value(_coords(pt))


def eval_omega(spec: PotentialSpec, pt, v1, v2):
    """omega = dd^c Phi evaluated on the tangent vectors ``v1``, ``v2`` at ``pt``."""
    H = spec.hessian(_coords(pt))
    return -4.0 * np.imag(_sesq(H, np.asarray(v1, dtype=complex), np.asarray(v2, dtype=complex)))


def eval_metric(spec: PotentialSpec, pt, v1, v2):
    H = spec.hessian(_coords(pt))
    return 4.0 * np.real(_sesq(H, np.asarray(v1, dtype=complex), np.asarray(v2, dtype=complex)))


def eval_liouville(spec: PotentialSpec, pt, v):
    """theta = d^c Phi evaluated on ``v`` at ``pt``."""
    d = spec.del_(_coords(pt))
    return 2.0 * np.imag(np.sum(d * np.asarray(v, dtype=complex), axis=-1))


def _coords(pt):
    if hasattr(pt, "coords"):
        return pt.coords
    return np.asarray(pt, dtype=complex)


# -- finite-difference oracles -----------------------------------------------------


def fd_levi(spec: PotentialSpec, pt, v, step):
    """Levi form v^T H conj(v) from fourth-order second differences of the potential.

    Uses L(v) = (D_v^2 Phi + D_{iv}^2 Phi) / 4 with D the real directional
    derivative.  Independent of the closed-form Hessian.
    """
    pt = _coords(pt)
    v = np.asarray(v, dtype=complex)
    total = 0.0
    for d in (v, 1j * v):
        f = [spec.value(pt + k * step * d) for k in (-2, -1, 0, 1, 2)]
        total = total + (-f[0] + 16 * f[1] - 30 * f[2] + 16 * f[3] - f[4]) / (12 * step**2)
    return 0.25 * total


def fd_omega(spec: PotentialSpec, pt, v1, v2, step=None):
    """omega(v1, v2) from second differences of the potential alone (polarisation)."""
    pt = _coords(pt)
    if step is None:
        step = 3e-3 * _length_scale(spec, pt)
    v1 = np.asarray(v1, dtype=complex)
    v2 = np.asarray(v2, dtype=complex)
    return -(fd_levi(spec, pt, v1 + 1j * v2, step) - fd_levi(spec, pt, v1 - 1j * v2, step))


def _length_scale(spec, pt):
    if spec.variant in ("reduced", "reduced_smoothed"):
        h = eval_h(pt[..., 0], pt[..., 1], spec.params)
        gh = np.linalg.norm(grad_h(pt[..., 0], pt[..., 1], spec.params), axis=-1)
        return np.minimum(1.0, np.abs(h) / np.maximum(gh, 1e-300))
    return 1.0


def fd_dtheta(spec: PotentialSpec, pt, v1, v2, step=1e-5):
    """Exterior derivative of theta on constant fields: v1(theta(v2)) - v2(theta(v1))."""
    pt = _coords(pt)
    v1 = np.asarray(v1, dtype=complex)
    v2 = np.asarray(v2, dtype=complex)

    def deriv(direction, arg):
        return (eval_liouville(spec, pt + step * direction, arg) - eval_liouville(spec, pt - step * direction, arg)) / (
            2 * step
        )

    return deriv(v1, v2) - deriv(v2, v1)


def fd_liouville(spec: PotentialSpec, pt, v, step=1e-6):
    """theta(v) = -dPhi(J v) by a central difference of the potential."""
    pt = _coords(pt)
    jv = 1j * np.asarray(v, dtype=complex)
    return -(spec.value(pt + step * jv) - spec.value(pt - step * jv)) / (2 * step)


# -- integrals ---------------------------------------------------------------------


def area_density(spec: PotentialSpec, values, derivs):
    """Density of u^* omega w.r.t. Lebesgue measure for a holomorphic disc u.

    For holomorphic u, u^* omega = 4 u'^T H conj(u') dx ^ dy.
    """
    H = spec.hessian(values)
    return 4.0 * np.real(_sesq(H, derivs, derivs))


def _singular_points(spec: PotentialSpec, u):
    """Zeros of h o u inside the disc, where reduced integrands lose smoothness."""
    if spec.variant not in ("reduced", "reduced_smoothed"):
        return np.zeros(0, dtype=complex)
    from .winding import zeros_in_disc

    p = spec.params

    def f(zeta):
        v = u(zeta)
        return eval_h(v[..., 0], v[..., 1], p)

    def df(zeta):
        v = u(zeta)
        return np.sum(grad_h(v[..., 0], v[..., 1], p) * u.derivative(zeta), axis=-1)

    return zeros_in_disc(f, df)


def _patch_radii(points):
    """Outer radius of a disjoint cutoff patch around each singular point."""
    pts = np.asarray(points)
    radii = 0.9 * (1.0 - np.abs(pts))
    if pts.size > 1:
        gaps = np.abs(pts[:, None] - pts[None, :]) + np.eye(pts.size) * 10
        radii = np.minimum(radii, 0.45 * gaps.min(axis=1))
    return radii


def _first_crossing(f, r_max, level, phi, iters=80):
    """Smallest r in (0, r_max) along each ray with f(r, phi) = level (bisection)."""
    lo = np.zeros_like(phi)
    hi = np.full_like(phi, r_max)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        below = f(mid, phi) < level
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    return 0.5 * (lo + hi)


def _disc_area_rule(spec, u, sing, radii, q: QuadSpec):
    grid = PolarGrid.from_spec(q)
    inner = 0.5 * radii

    chi = np.zeros(grid.zeta.shape)
    for t, b in zip(sing, radii):
        chi = chi + smooth_cutoff(np.abs(grid.zeta - t), 0.5 * b, b)
    live = chi < 1.0
    dens = np.zeros(grid.zeta.shape)
    zl = grid.zeta[live]
    dens[live] = area_density(spec, u(zl), u.derivative(zl))
    total = pairwise_sum(grid.weights * (1.0 - chi) * dens)

    eps = spec.smoothing_epsilon
    for t, b, a in zip(sing, radii, inner):
        phi = grid.phi
        nr = q.radial_nodes

        def hmod(r, ph):
            v = u(t + r * np.exp(1j * ph))
            return np.abs(eval_h(v[..., 0], v[..., 1], spec.params))

        if spec.variant == "reduced_smoothed":
            rstar = _first_crossing(hmod, b, eps, phi)
            if np.any(rstar >= a):
                raise QuadratureDivergence(
                    "smoothing region |h| < eps is not contained in the inner cutoff patch; decrease eps"
                )
            pieces = [(np.zeros_like(phi), rstar), (rstar, np.full_like(phi, b))]
        else:
            pieces = [(np.zeros_like(phi), np.full_like(phi, b))]
        for lo, hi in pieces:
            x, w = gauss_legendre(nr)
            r = lo[None, :] + (hi - lo)[None, :] * x[:, None]
            wr = (hi - lo)[None, :] * w[:, None]
            zeta = t + r * np.exp(1j * phi)[None, :]
            weight = wr * r * (2 * np.pi / phi.size) * smooth_cutoff(r, a, b)
            total += pairwise_sum(weight * area_density(spec, u(zeta), u.derivative(zeta)))
    return total


def disc_area(spec: PotentialSpec, u, grid: QuadSpec | None = None) -> float:
    """Symplectic area of a holomorphic disc by polar quadrature.

    ``u`` must be callable on arrays of disc points and expose
    ``derivative``.  For the reduced forms the crossings with C are handled by
    a smooth partition of unity: each crossing gets a local polar patch
    centred on it, where the 1/|zeta - t| singularity is cancelled by the
    Jacobian, and the rest of the disc is integrated on the global grid.
    For the smoothed form the local radial rule is additionally split where
    |h| = eps.
    """
    q = grid or QuadSpec()
    sing = _singular_points(spec, u)
    radii = _patch_radii(sing) if sing.size else np.zeros(0)
    value, _, _ = integrate_with_refinement(
        lambda qs: _disc_area_rule(spec, u, sing, radii, qs), q, QuadratureDivergence
    )
    return value


def spectral_derivative(points):
    """d/dphi of a closed loop sampled at phi_k = 2 pi k / N (FFT differentiation)."""
    pts = np.asarray(points, dtype=complex)
    n = pts.shape[0]
    k = np.fft.fftfreq(n, d=1.0 / n)
    if n % 2 == 0:
        k[n // 2] = 0.0
    spec = np.fft.fft(pts, axis=0)
    return np.fft.ifft(1j * k.reshape((-1,) + (1,) * (pts.ndim - 1)) * spec, axis=0)


def boundary_liouville(spec: PotentialSpec, loop, samples: int = 2048) -> float:
    """Line integral of theta along a closed loop (periodic trapezoid rule).

    ``loop`` is either an object with ``boundary(samples)`` returning
    ``(points, d/dphi points)`` (a disc), or an ``(N, dim)`` array of points
    sampled uniformly in the loop parameter, differentiated spectrally.
    """
    if hasattr(loop, "boundary"):
        pts, tangents = loop.boundary(samples)
    else:
        pts = np.asarray(loop, dtype=complex)
        tangents = spectral_derivative(pts)
    n = pts.shape[0]
    vals = eval_liouville(spec, pts, tangents)
    return pairwise_sum(vals) * 2 * np.pi / n


def unit_vectors(dim: int) -> np.ndarray:
    """Real coordinate basis e_0 = d/dRe z_0, e_1 = d/dIm z_0, ... as complex vectors."""
    E = np.zeros((2 * dim, dim), dtype=complex)
    for j in range(dim):
        E[2 * j, j] = 1.0
        E[2 * j + 1, j] = 1j
    return E


__all__ = [
    "PotentialSpec",
    "area_density",
    "boundary_liouville",
    "circle_points",
    "disc_area",
    "eval_liouville",
    "eval_metric",
    "eval_omega",
    "eval_potential",
    "fd_dtheta",
    "fd_liouville",
    "fd_omega",
    "rho",
]
