"""Winding numbers and zero location by the argument principle."""

from __future__ import annotations

import numpy as np

from .errors import BoundaryZero, NonTransverse, WindingUnresolved
from .quadrature import circle_points

BOUNDARY_SAMPLES = 1024
MAX_INCREMENT = np.pi / 2


def phase_increments(values) -> np.ndarray:
    """Phase steps between consecutive samples of a closed loop (wraps around)."""
    v = np.asarray(values, dtype=complex)
    return np.angle(np.roll(v, -1, axis=0) / v)


def winding_number(values, name="loop", zero_tol=1e-14) -> int:
    """Winding number about 0 of a closed loop sampled uniformly along axis 0.

    Raises :class:`BoundaryZero` if the loop meets 0 and
    :class:`WindingUnresolved` if a single phase step exceeds pi/2.
    """
    v = np.asarray(values, dtype=complex)
    mod = np.abs(v)
    scale = max(float(np.max(mod)), 1.0)
    if np.min(mod) <= zero_tol * scale:
        raise BoundaryZero(name, float(np.min(mod)))
    inc = phase_increments(v)
    worst = float(np.max(np.abs(inc)))
    if worst > MAX_INCREMENT:
        raise WindingUnresolved(f"{name}: phase step {worst:.3f} rad exceeds pi/2; sample more finely")
    total = np.sum(inc, axis=0) / (2 * np.pi)
    wn = np.rint(total)
    if np.any(np.abs(total - wn) > 1e-6):
        raise WindingUnresolved(f"{name}: accumulated phase {total} is not an integer multiple of 2 pi")
    return int(wn) if np.ndim(wn) == 0 else wn.astype(int)


def boundary_winding(f, samples=BOUNDARY_SAMPLES, name="f") -> int:
    """Number of zeros of an analytic ``f`` inside the unit disc (argument principle)."""
    return winding_number(f(circle_points(samples)), name=name)


def zeros_in_disc(f, df, samples=BOUNDARY_SAMPLES, polish_steps=8, simple_tol=1e-8):
    """Locate all zeros of an analytic function inside the unit disc.

    The count comes from the boundary winding of ``f``; the locations from the
    contour moments s_m = (1/2 pi i) oint zeta^m f'/f (trapezoid rule, which
    is spectrally accurate on the circle), Newton's identities and a companion
    matrix solve, followed by Newton polishing on ``f`` itself.  Zeros must be
    simple; a double zero raises :class:`NonTransverse`.
    """
    zeta = circle_points(samples)
    fv = f(zeta)
    k = winding_number(fv, name="f")
    if k == 0:
        return np.zeros(0, dtype=complex)
    logd = df(zeta) / fv
    # s_m = mean(zeta^{m+1} f'/f) for the unit circle parametrisation
    s = np.array([np.mean(zeta ** (m + 1) * logd) for m in range(1, k + 1)])
    # Newton's identities: e_m from power sums
    e = np.zeros(k + 1, dtype=complex)
    e[0] = 1.0
    for m in range(1, k + 1):
        acc = 0.0
        for i in range(1, m + 1):
            acc += (-1) ** (i - 1) * e[m - i] * s[i - 1]
        e[m] = acc / m
    coeffs = np.array([(-1) ** m * e[m] for m in range(k + 1)])
    roots = np.roots(coeffs)
    for _ in range(polish_steps):
        step = f(roots) / df(roots)
        roots = roots - step
        if np.max(np.abs(step)) < 1e-15:
            break
    deriv = np.abs(df(roots))
    if np.any(deriv < simple_tol):
        raise NonTransverse(f"zero with |f'| = {deriv.min():.2e}; zeros must be simple")
    if k > 1:
        gaps = np.abs(roots[:, None] - roots[None, :]) + np.eye(k)
        if gaps.min() < 1e-8:
            raise NonTransverse("two zeros coincide after polishing")
    if np.any(np.abs(roots) >= 1):
        raise NonTransverse("a located zero left the open disc during polishing")
    return sort_points(roots)


def sort_points(pts) -> np.ndarray:
    """Deterministic order: by argument in [0, 2 pi), then by modulus."""
    pts = np.asarray(pts, dtype=complex)
    ang = np.mod(np.round(np.angle(pts), 12), 2 * np.pi)
    order = np.lexsort((np.round(np.abs(pts), 12), ang))
    return pts[order]
