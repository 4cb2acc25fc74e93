"""The conic bundle X = {xy = h(z, w)} and its circle action.

X is identified with C^3 through the coordinates (x, y, z); the fourth
coordinate w is always recomputed from them and never stored.  The reduced
space is C^2 with coordinates (z, w).

Vectorised helpers take complex arrays whose last axis holds the coordinates:
``(..., 3)`` for points of X and ``(..., 2)`` for reduced points.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numpy as np

ALG_TOL = 1e-10  # absolute tolerance for algebraic identities
DEFAULT_C = 10.0
DEFAULT_KAPPA = 0.02


@dataclass(frozen=True)
class ConicParams:
    """Parameters (n, c, kappa) of h(z, w) = c z^n + w / c - 1 and of the Kahler form."""

    n: int
    c: float = DEFAULT_C
    kappa: float = DEFAULT_KAPPA

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 0:
            raise ValueError(f"n must be a nonnegative integer, got {self.n!r}")
        if not self.c > 1:
            raise ValueError(f"c must exceed 1, got {self.c!r}")
        if not self.kappa > 0:
            raise ValueError(f"kappa must be positive, got {self.kappa!r}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "c", float(self.c))
        object.__setattr__(self, "kappa", float(self.kappa))

    def replace(self, **changes) -> ConicParams:
        return ConicParams(**{**asdict(self), **changes})

    def to_dict(self) -> dict:
        return {"n": self.n, "c": self.c, "kappa": self.kappa}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, data: dict) -> ConicParams:
        unknown = set(data) - {"n", "c", "kappa"}
        if unknown:
            raise ValueError(f"unknown ConicParams keys: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def from_json(cls, text: str) -> ConicParams:
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class AmbientPoint:
    """A point of X.  ``w`` is a derived property."""

    x: complex
    y: complex
    z: complex
    params: ConicParams

    @property
    def w(self) -> complex:
        return derived_w(self.x, self.y, self.z, self.params)

    @property
    def coords(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=complex)


@dataclass(frozen=True)
class ReducedPoint:
    z: complex
    w: complex

    @property
    def coords(self) -> np.ndarray:
        return np.array([self.z, self.w], dtype=complex)


def eval_h(z, w, p: ConicParams):
    return p.c * z**p.n + w / p.c - 1


def grad_h(z, w, p: ConicParams):
    """Holomorphic gradient (dh/dz, dh/dw), stacked on a new last axis."""
    z = np.asarray(z, dtype=complex)
    if p.n == 0:
        hz = np.zeros_like(z)
    else:
        hz = p.c * p.n * z ** (p.n - 1)
    hw = np.full_like(z, 1.0 / p.c)
    return np.stack([hz, hw], axis=-1)


def derived_w(x, y, z, p: ConicParams):
    return p.c * (x * y + 1) - p.c**2 * z**p.n


def grad_w(x, y, z, p: ConicParams):
    """Holomorphic gradient of w(x, y, z) = c(xy + 1) - c^2 z^n."""
    x, y, z = np.broadcast_arrays(*(np.asarray(a, dtype=complex) for a in (x, y, z)))
    if p.n == 0:
        wz = np.zeros_like(z)
    else:
        wz = -(p.c**2) * p.n * z ** (p.n - 1)
    return np.stack([p.c * y, p.c * x, wz], axis=-1)


def moment_map(x, y, p: ConicParams):
    return 0.5 * p.kappa * (np.abs(x) ** 2 - np.abs(y) ** 2)


def circle_action(theta, pt):
    """Rotate by e^{i theta}: x -> e^{i theta} x, y -> e^{-i theta} y, z fixed.

    Accepts an :class:`AmbientPoint` or an ``(..., 3)`` coordinate array.
    """
    rot = np.exp(1j * theta)
    if isinstance(pt, AmbientPoint):
        return AmbientPoint(rot * pt.x, pt.y / rot, pt.z, pt.params)
    pt = np.asarray(pt, dtype=complex)
    out = pt.copy()
    out[..., 0] *= rot
    out[..., 1] /= rot
    return out


def ambient_w(pts, p: ConicParams):
    """w-coordinate of ``(..., 3)`` points of X."""
    pts = np.asarray(pts, dtype=complex)
    return derived_w(pts[..., 0], pts[..., 1], pts[..., 2], p)


def project(pts, p: ConicParams):
    """The projection pi: X -> C^2, (x, y, z) -> (z, w)."""
    pts = np.asarray(pts, dtype=complex)
    return np.stack([pts[..., 2], ambient_w(pts, p)], axis=-1)


def fiber_point(zw, p: ConicParams, phase=0.0):
    """The point of mu^{-1}(0) over ``zw`` with arg(x) = ``phase``.

    |x| = |y| = |h|^{1/2}; raises if h vanishes (the fibre is the fixed point).
    """
    zw = np.asarray(zw, dtype=complex)
    h = eval_h(zw[..., 0], zw[..., 1], p)
    if np.any(np.abs(h) == 0):
        raise ValueError("h vanishes: the fibre over this point is singular")
    x = np.sqrt(np.abs(h)) * np.exp(1j * np.asarray(phase))
    y = h / x
    return np.stack([x, y, zw[..., 0] * np.ones_like(x)], axis=-1)
