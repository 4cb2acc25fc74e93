"""Holomorphic lifts of reduced discs to (X, T) by Blaschke products and square roots.

A reduced disc u meeting C transversely at t_1..t_k lifts in exactly 2^k
ways.  With g = (h o u) / prod_j b_j (b_j the disc automorphism vanishing at
t_j) nonvanishing on the closed disc, the lift for the sign vector eps is

    x = e^{i theta/2} B_+ sqrt(g),   y = e^{-i theta/2} B_- sqrt(g),

where B_+ (B_-) is the product of the b_j with eps_j = +1 (-1).  Then
x y = h o u, |x| = |y| on the boundary, and x / y = e^{i theta} theta_eps
with theta_eps = B_+ / B_-.
"""

from __future__ import annotations

import itertools
import json
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .conic import AmbientPoint, ConicParams, eval_h, fiber_point, grad_h, project
from .discs import ConicTorus, DiscMap, HomotopyClass, class_coordinates, intersections_with_C
from .errors import BranchJump, CheckFailed, PointOnBoundary, UnexpectedZero
from .quadrature import PolarGrid, QuadSpec, circle_points
from .winding import BOUNDARY_SAMPLES, winding_number

LIFT_TOL = 1e-10
QUOTIENT_TOL = 1e-9
DISTINCT_TOL = 1e-3
BOUNDARY_MARGIN = 1e-6
RAY_SUBSTEPS = 16
MAX_RAY_SUBSTEPS = 1024
REMOVABLE_RADIUS = 1e-3
REMOVABLE_NODES = 32


def _removable(func, z, points):
    """Evaluate ``func`` (analytic, with removable singularities at ``points``).

    Near those points the value is the mean over a small circle around z,
    which is exact up to terms of order radius^REMOVABLE_NODES.
    """
    z = np.asarray(z, dtype=complex)
    pts = np.asarray(points, dtype=complex).ravel()
    if not pts.size:
        return func(z)
    near = np.min(np.abs(z[..., None] - pts), axis=-1) < REMOVABLE_RADIUS
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.array(func(z), dtype=complex)
    if np.any(near):
        rad = REMOVABLE_RADIUS
        if pts.size > 1:
            gaps = np.abs(pts[:, None] - pts[None, :]) + np.eye(pts.size)
            rad = min(rad, 0.25 * float(gaps.min()))
        ring = z[near][:, None] + 2 * rad * circle_points(REMOVABLE_NODES)
        out[near] = np.mean(func(ring), axis=-1)
    return out


class Blaschke:
    """theta_eps(z) = prod_j ((z - t_j) / (1 - conj(t_j) z))^{eps_j}."""

    def __init__(self, points, eps=None):
        pts = np.asarray(points, dtype=complex).ravel()
        if pts.size and np.max(np.abs(pts)) >= 1 - BOUNDARY_MARGIN:
            raise PointOnBoundary(f"Blaschke point with |t| = {np.max(np.abs(pts)):.9f} too close to the circle")
        eps = np.ones(pts.size, dtype=int) if eps is None else np.asarray(eps, dtype=int).ravel()
        if eps.size != pts.size or not np.all(np.abs(eps) == 1):
            raise ValueError("eps must assign +1 or -1 to every point")
        self.points = pts
        self.eps = eps

    def factors(self, z):
        z = np.asarray(z, dtype=complex)[..., None]
        t = self.points
        return (z - t) / (1 - np.conj(t) * z)

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        if not self.points.size:
            return np.ones_like(z)
        return np.prod(self.factors(z) ** self.eps, axis=-1)

    def derivative(self, z):
        """Derivative of a product of zeros only (all eps = +1), finite at the t_j."""
        if np.any(self.eps < 0):
            raise ValueError("derivative is provided for zero-only products")
        z = np.asarray(z, dtype=complex)
        if not self.points.size:
            return np.zeros_like(z)
        f = self.factors(z)
        t = self.points
        d = (1 - np.abs(t) ** 2) / (1 - np.conj(t) * z[..., None]) ** 2
        out = np.zeros_like(z)
        for j in range(t.size):
            others = np.prod(np.delete(f, j, axis=-1), axis=-1)
            out = out + d[..., j] * others
        return out

    def log_derivative(self, z):
        """theta_eps'/theta_eps = sum_j eps_j (1 - |t_j|^2) / ((z - t_j)(1 - conj(t_j) z))."""
        z = np.asarray(z, dtype=complex)[..., None]
        t = self.points
        terms = (1 - np.abs(t) ** 2) / ((z - t) * (1 - np.conj(t) * z))
        return np.sum(self.eps * terms, axis=-1)


def blaschke(t_points, eps=None) -> Blaschke:
    return Blaschke(t_points, eps)


class HolomorphicSqrt:
    """A holomorphic square root of f, whose only zeros are double zeros at ``zeros``.

    g = B_D * exp(log(f_0) / 2) with f_0 = f / B_D^2; log f_0 is continued
    along the ray from 0, starting from the principal branch at the centre.
    ``remainder`` may supply an already constructed root of f_0 (shared
    between functions with the same f_0).
    """

    def __init__(self, f, zeros=(), df=None, remainder=None, check=True):
        self.f = f
        self.df = df
        self.B = Blaschke(zeros)
        if remainder is None:
            remainder = _NonvanishingRoot(self._f0, self._df0 if df is not None else None)
        self.root = remainder
        if check:
            self._check_zero_count()

    def _f0(self, z):
        return _removable(lambda s: self.f(s) / self.B(s) ** 2, z, self.B.points)

    def _df0(self, z):
        def raw(s):
            return (self.df(s) - 2 * self.f(s) * self.B.log_derivative(s)) / self.B(s) ** 2

        return _removable(raw, z, self.B.points)

    def _check_zero_count(self):
        vals = self.f(circle_points(BOUNDARY_SAMPLES))
        wn = winding_number(vals, name="f")
        if wn != 2 * self.B.points.size:
            raise UnexpectedZero(f"f has {wn} zeros in the disc, expected {2 * self.B.points.size}")

    def __call__(self, z):
        return self.B(z) * self.root(z)

    def derivative(self, z):
        return self.B.derivative(z) * self.root(z) + self.B(z) * self.root.derivative(z)


class _NonvanishingRoot:
    """exp(log(f0)/2) for nonvanishing f0, branch fixed by radial continuation."""

    def __init__(self, f0, df0=None):
        self.f0 = f0
        self.df0 = df0
        c = complex(f0(np.array(0j)))
        if c == 0:
            raise UnexpectedZero("remainder vanishes at the centre")
        self.centre_phase = np.angle(c)
        self._cache: dict = {}

    def phase(self, z):
        z = np.asarray(z, dtype=complex)
        m = RAY_SUBSTEPS
        while m <= MAX_RAY_SUBSTEPS:
            acc = np.full(z.shape, self.centre_phase)
            prev = np.full(z.shape, complex(self.f0(np.array(0j))))
            ok = True
            for k in range(1, m + 1):
                cur = self.f0(z * (k / m))
                inc = np.angle(cur / prev)
                if np.max(np.abs(inc), initial=0.0) > np.pi / 2:
                    ok = False
                    break
                acc = acc + inc
                prev = cur
            if ok:
                final = np.angle(prev)
                turns = np.rint((acc - final) / (2 * np.pi))
                return final + 2 * np.pi * turns, prev
            m *= 2
        raise BranchJump("phase of the remainder jumps by more than pi/2 between ray samples")

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        key = (z.shape, hash(z.tobytes()))
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        ph, val = self.phase(z)
        out = np.sqrt(np.abs(val)) * np.exp(0.5j * ph)
        if len(self._cache) > 16:
            self._cache.clear()
        self._cache[key] = out
        return out

    def derivative(self, z):
        if self.df0 is None:
            raise ValueError("derivative of the square root needs df")
        z = np.asarray(z, dtype=complex)
        return 0.5 * self(z) * self.df0(z) / self.f0(z)


def holomorphic_sqrt(f, zeros=(), df=None, remainder=None) -> HolomorphicSqrt:
    return HolomorphicSqrt(f, zeros, df, remainder)


# -- lifts ------------------------------------------------------------------------


@dataclass(eq=False)
class Lift:
    disc: DiscMap
    eps: tuple
    half_phase: complex
    residuals: dict = field(default_factory=dict)

    @property
    def ell(self) -> int:
        return sum(1 for e in self.eps if e > 0)

    @property
    def homotopy_class(self) -> HomotopyClass:
        return class_coordinates(self.disc)

    def to_dict(self) -> dict:
        return {
            "eps": list(self.eps),
            "class": self.homotopy_class.as_list(),
            "residuals": {k: float(v) for k, v in sorted(self.residuals.items())},
        }


def sign_assignments(k: int):
    """All eps in {-1, +1}^k in lexicographic order."""
    return [tuple(e) for e in itertools.product((-1, 1), repeat=k)]


def default_base_point(u_red: DiscMap, p: ConicParams) -> AmbientPoint:
    """The point over u_red(1) with arg x = 0 (inside the [0, pi) convention)."""
    pt = fiber_point(u_red.marked, p, 0.0)
    return AmbientPoint(complex(pt[0]), complex(pt[1]), complex(pt[2]), p)


def _h_of_disc(u_red: DiscMap, p: ConicParams):
    def f(zeta):
        v = u_red(zeta)
        return eval_h(v[..., 0], v[..., 1], p)

    def df(zeta):
        v = u_red(zeta)
        return np.sum(grad_h(v[..., 0], v[..., 1], p) * u_red.derivative(zeta), axis=-1)

    return f, df


def enumerate_lifts(u_red: DiscMap, p0, p: ConicParams, check=True, grid=None) -> list:
    """All 2^k holomorphic lifts of ``u_red`` through ``p0``, in lexicographic eps order."""
    if p0 is None:
        p0 = default_base_point(u_red, p)
    x0 = complex(p0.x) if isinstance(p0, AmbientPoint) else complex(np.asarray(p0)[0])
    pt0 = p0.coords if isinstance(p0, AmbientPoint) else np.asarray(p0, dtype=complex)
    base = project(pt0, p)
    if np.max(np.abs(base - u_red.marked)) > 1e-10:
        raise CheckFailed("p0_over_marked_point", float(np.max(np.abs(base - u_red.marked))), 1e-10)
    if abs(abs(pt0[0]) - abs(pt0[1])) > 1e-10:
        raise CheckFailed("p0_on_T", abs(abs(pt0[0]) - abs(pt0[1])), 1e-10)

    t = intersections_with_C(u_red, p)
    k = t.size
    h, dh = _h_of_disc(u_red, p)
    B_all = Blaschke(t)

    def g(zeta):
        return _removable(lambda s: h(s) / B_all(s), zeta, t)

    def dg(zeta):
        def raw(s):
            return (dh(s) - h(s) * B_all.log_derivative(s)) / B_all(s)

        return _removable(raw, zeta, t)

    root = _NonvanishingRoot(g, dg)
    torus = ConicTorus(u_red.torus, p)
    lifts = []
    for eps in sign_assignments(k):
        eps_arr = np.array(eps, dtype=int)
        plus, minus = t[eps_arr > 0], t[eps_arr < 0]
        theta_eps = Blaschke(t, eps_arr)

        def f_plus(zeta, _th=theta_eps):
            return h(zeta) * _th(zeta)

        def f_minus(zeta, _th=theta_eps):
            return h(zeta) / _th(zeta)

        zp = HolomorphicSqrt(f_plus, plus, remainder=root, check=check)
        zm = HolomorphicSqrt(f_minus, minus, remainder=root, check=check)
        half = x0 / complex(zp(np.array(1.0 + 0j)))
        disc = _lift_disc(u_red, zp, zm, half, torus, p, eps)
        lift = Lift(disc, eps, half)
        if check:
            lift.residuals = lift_residuals(lift, t, theta_eps, p, grid)
        lifts.append(lift)
    if check:
        check_distinct(lifts)
    return lifts


def _lift_disc(u_red, zp, zm, half, torus, p, eps) -> DiscMap:
    def func(zeta):
        v = u_red(zeta)
        return np.stack([half * zp(zeta), zm(zeta) / half, v[..., 0]], axis=-1)

    def deriv(zeta):
        dv = u_red.derivative(zeta)
        return np.stack([half * zp.derivative(zeta), zm.derivative(zeta) / half, dv[..., 0]], axis=-1)

    label = f"lift[{''.join('+' if e > 0 else '-' for e in eps)}]({u_red.label})"
    return DiscMap("ambient", func, deriv, torus, p, label, {"reduced": u_red, "eps": eps})


def lift_residuals(lift: Lift, t, theta_eps, p: ConicParams, grid: QuadSpec | None = None) -> dict:
    """Algebraic residuals of a lift on a polar grid plus boundary ring.

    Refines the grid once if a check fails, then raises :class:`CheckFailed`.
    """
    q = grid or QuadSpec()
    for attempt in range(2):
        res = _residuals_on(lift, t, theta_eps, p, PolarGrid.from_spec(q).sample_points)
        failed = [name for name, tol in _RESIDUAL_TOLS.items() if res[name] > tol]
        if not failed:
            return res
        q = q.refined()
    name = failed[0]
    raise CheckFailed(f"{lift.disc.label}:{name}", res[name], _RESIDUAL_TOLS[name])


_RESIDUAL_TOLS = {
    "xy_minus_h": LIFT_TOL,
    "boundary_modulus": LIFT_TOL,
    "quotient": QUOTIENT_TOL,
    "boundary_on_T": QUOTIENT_TOL,
}


def _residuals_on(lift: Lift, t, theta_eps, p, zeta) -> dict:
    u = lift.disc
    red = u.meta["reduced"]
    v = u(zeta)
    zw = red(zeta)
    h = eval_h(zw[..., 0], zw[..., 1], p)
    x, y = v[..., 0], v[..., 1]
    scale = max(1.0, float(np.max(np.abs(h))))
    xy = float(np.max(np.abs(x * y - h))) / scale
    ring = v[-1]
    hb = np.abs(h[-1])
    bmod = float(np.max(np.abs(np.abs(ring[:, 0]) - np.abs(ring[:, 1]))))
    on_T = float(np.max(np.abs(np.abs(ring[:, 0]) - np.sqrt(hb))))
    # x / y against e^{i theta} theta_eps away from the intersection points
    away = np.ones(zeta.shape, dtype=bool)
    for tj in np.atleast_1d(t):
        away &= np.abs(zeta - tj) > 1e-2
    q = x[away] / y[away]
    expected = lift.half_phase**2 * theta_eps(zeta[away])
    quot = float(np.max(np.abs(q - expected) / np.maximum(1.0, np.abs(expected)), initial=0.0))
    return {"xy_minus_h": xy, "boundary_modulus": bmod, "quotient": quot, "boundary_on_T": on_T}


def check_distinct(lifts, samples=64):
    """Pairwise sup distance between lifts must exceed 1e-3."""
    zeta = 0.5 * circle_points(samples)
    vals = [lf.disc(zeta) for lf in lifts]
    for i, j in itertools.combinations(range(len(vals)), 2):
        d = float(np.max(np.abs(vals[i] - vals[j])))
        if d <= DISTINCT_TOL:
            raise CheckFailed(f"lifts {lifts[i].eps} and {lifts[j].eps} coincide", d, DISTINCT_TOL)


def lift_class_histogram(lifts) -> dict:
    """Number of lifts in each homotopy class, keyed by sorted class triples."""
    counts = Counter(lf.homotopy_class for lf in lifts)
    return {cls: counts[cls] for cls in sorted(counts)}


def ell_histogram(lifts) -> list:
    """Counts of lifts by intersection number with {x = 0}, for ell = 0..max."""
    hist = lift_class_histogram(lifts)
    top = max((cls.a for cls in hist), default=0)
    out = [0] * (top + 1)
    for cls, cnt in hist.items():
        out[cls.a] += cnt
    return out


def lifts_to_json(lifts, extra=None) -> str:
    """JSON list of lifts: eps vector, class triple, residuals, plus optional per-lift extras."""
    rows = []
    for i, lf in enumerate(lifts):
        row = lf.to_dict()
        if extra is not None:
            row.update(extra[i])
        rows.append(row)
    return json.dumps(rows, indent=2, sort_keys=True)
