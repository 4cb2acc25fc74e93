"""Static figures written as SVG with reproducible bytes."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

SVG_SALT = "conictori"


def _save(fig, path):
    with matplotlib.rc_context({"svg.hashsalt": SVG_SALT, "svg.fonttype": "path"}):
        fig.savefig(path, format="svg", metadata={"Date": None, "Creator": None})
    plt.close(fig)


def _unit_circle(ax):
    phi = np.linspace(0, 2 * np.pi, 513)
    ax.plot(np.cos(phi), np.sin(phi), color="0.4", lw=1)
    ax.set_aspect("equal")
    ax.set_xlim(-1.1, 1.1)
    ax.set_ylim(-1.1, 1.1)


def plot_intersections(points, path, title=""):
    """Intersection points of a disc with C, drawn in the unit disc."""
    pts = np.asarray(points, dtype=complex)
    fig, ax = plt.subplots(figsize=(4.5, 4.5))
    _unit_circle(ax)
    ax.scatter(pts.real, pts.imag, color="C3", zorder=3, s=25)
    for k, z in enumerate(pts):
        ax.annotate(f"$t_{{{k}}}$", (z.real, z.imag), textcoords="offset points", xytext=(5, 5))
    ax.set_xlabel("Re")
    ax.set_ylabel("Im")
    ax.set_title(title or f"{pts.size} intersection points with C")
    _save(fig, path)


def plot_boundaries(loops, labels, path, title="boundary loops"):
    """x-coordinate of boundary loops in the complex plane, one curve per disc."""
    fig, ax = plt.subplots(figsize=(5, 5))
    for i, (loop, lab) in enumerate(zip(loops, labels)):
        loop = np.asarray(loop)
        closed = np.append(loop, loop[:1])
        ax.plot(closed.real, closed.imag, lw=1, color=f"C{i % 10}", label=lab)
        ax.plot(loop[0].real, loop[0].imag, "o", ms=3, color=f"C{i % 10}")
    ax.set_aspect("equal")
    ax.set_xlabel("Re x")
    ax.set_ylabel("Im x")
    ax.set_title(title)
    if len(labels) <= 16:
        ax.legend(fontsize=6, loc="upper right")
    _save(fig, path)


def plot_hull(points, lattice, path, title=""):
    """Class triples and hull lattice points, projected to the (a, d) plane (b = 1 - d)."""
    pts = np.asarray(points, dtype=float)
    lat = np.asarray(lattice, dtype=float)
    fig, ax = plt.subplots(figsize=(5, 3.5))
    corners = np.array([[pts[:, 0].min(), 0], [pts[:, 0].max(), 0], [0, 1]])
    poly = np.vstack([corners, corners[:1]])
    ax.fill(poly[:, 0], poly[:, 1], color="C0", alpha=0.15)
    ax.plot(poly[:, 0], poly[:, 1], color="C0", lw=1)
    ax.scatter(lat[:, 0], lat[:, 2], color="C1", s=40, zorder=3, label="lattice points")
    ax.scatter(pts[:, 0], pts[:, 2], color="k", s=10, zorder=4, label="classes")
    ax.set_xlabel("a (intersection with x = 0)")
    ax.set_ylabel("d (intersection with w = 0)")
    ax.set_title(title or f"{len(lat)} lattice points in the hull")
    ax.legend(fontsize=7)
    _save(fig, path)


def plot_flow_trace(times, phi, path, title="phi along the flow"):
    """phi against t for each trajectory of a flow."""
    phi = np.asarray(phi)
    fig, ax = plt.subplots(figsize=(5, 3.5))
    if phi.ndim == 1:
        phi = phi[:, None]
    for j in range(phi.shape[1]):
        ax.plot(times, phi[:, j], lw=0.8, color="C0", alpha=0.5)
    ax.set_xlabel("t")
    ax.set_ylabel("phi")
    ax.set_title(title)
    _save(fig, path)
