"""Polar tensor-product quadrature on the closed unit disc."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np


@dataclass(frozen=True)
class QuadSpec:
    """Radial Gauss-Legendre x uniform angular rule, refined by doubling."""

    radial_nodes: int = 64
    angular_nodes: int = 256
    tol: float = 1e-8
    max_refinements: int = 3

    def __post_init__(self):
        if self.radial_nodes < 2 or self.angular_nodes < 4:
            raise ValueError("quadrature needs at least 2 radial and 4 angular nodes")
        if not self.tol > 0:
            raise ValueError("tol must be positive")

    def refined(self, k=1) -> QuadSpec:
        return QuadSpec(self.radial_nodes * 2**k, self.angular_nodes * 2**k, self.tol, self.max_refinements)

    def to_dict(self) -> dict:
        return {"radial_nodes": self.radial_nodes, "angular_nodes": self.angular_nodes, "tol": self.tol}

    @classmethod
    def from_dict(cls, data: dict) -> QuadSpec:
        unknown = set(data) - {"radial_nodes", "angular_nodes", "tol", "max_refinements"}
        if unknown:
            raise ValueError(f"unknown quadrature keys: {sorted(unknown)}")
        return cls(**data)


@lru_cache(maxsize=64)
def gauss_legendre(n: int, a: float = 0.0, b: float = 1.0):
    x, w = np.polynomial.legendre.leggauss(n)
    half = 0.5 * (b - a)
    return a + half * (x + 1.0), half * w


@dataclass(frozen=True)
class PolarGrid:
    """Nodes r_i (Gauss-Legendre on [0, 1]) times phi_k = 2 pi k / N.

    ``zeta`` has shape ``(nr, nphi)``; ``weights`` already includes the
    Jacobian r so that ``sum(weights * f(zeta))`` approximates the area
    integral of f over the disc.
    """

    r: np.ndarray
    phi: np.ndarray
    zeta: np.ndarray
    weights: np.ndarray

    @classmethod
    def build(cls, radial_nodes: int, angular_nodes: int) -> PolarGrid:
        r, wr = gauss_legendre(radial_nodes)
        phi = 2 * np.pi * np.arange(angular_nodes) / angular_nodes
        zeta = r[:, None] * np.exp(1j * phi)[None, :]
        weights = (wr * r)[:, None] * np.full(angular_nodes, 2 * np.pi / angular_nodes)[None, :]
        return cls(r, phi, zeta, weights)

    @classmethod
    def from_spec(cls, spec: QuadSpec) -> PolarGrid:
        return cls.build(spec.radial_nodes, spec.angular_nodes)

    @property
    def sample_points(self) -> np.ndarray:
        """Grid nodes plus the boundary ring r = 1, shape ``(nr + 1, nphi)``."""
        return np.vstack([self.zeta, np.exp(1j * self.phi)[None, :]])


def circle_points(n: int) -> np.ndarray:
    return np.exp(2j * np.pi * np.arange(n) / n)


def pairwise_sum(values) -> float:
    """Sum in a fixed pairwise order, independent of how work was tiled."""
    v = np.ravel(np.asarray(values, dtype=float))
    while v.size > 1:
        if v.size % 2:
            v = np.append(v, 0.0)
        v = v[0::2] + v[1::2]
    return float(v[0]) if v.size else 0.0


def _psi(s):
    out = np.zeros_like(s, dtype=float)
    pos = s > 0
    out[pos] = np.exp(-1.0 / s[pos])
    return out


def smooth_cutoff(r, inner: float, outer: float):
    """C-infinity function equal to 1 for r <= inner and 0 for r >= outer."""
    s = (np.asarray(r, dtype=float) - inner) / (outer - inner)
    a, b = _psi(1.0 - s), _psi(s)
    return a / (a + b)


def integrate_with_refinement(rule, spec: QuadSpec, error_cls):
    """Evaluate ``rule(spec)`` on successively doubled grids until two agree.

    Returns ``(value, spec_used, last_difference)``.
    """
    prev = rule(spec)
    cur_spec = spec
    for _ in range(spec.max_refinements):
        cur_spec = cur_spec.refined()
        cur = rule(cur_spec)
        diff = abs(cur - prev)
        if diff <= spec.tol * max(1.0, abs(cur)):
            return cur, cur_spec, diff
        prev = cur
    raise error_cls(
        f"quadrature did not settle: last two refinements differ by {diff:.3e} (tol {spec.tol:.1e})"
    )
