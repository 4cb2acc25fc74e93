"""The disc census: signed counts of Maslov-2 discs on T by homotopy class.

Counts come from the explicit lifts of u_alpha and v_alpha, one +1 per lift.
Orientation signs are not re-derived; every evaluation map is taken to have
degree +1, and the reports say so.
"""

from __future__ import annotations

import csv
import io
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from math import comb, gcd

import numpy as np

from .conic import ConicParams
from .discs import HomotopyClass, disc_u_alpha, disc_v_alpha, intersections_with_C, maslov_index
from .errors import CheckFailed
from .lifts import enumerate_lifts, lift_class_histogram

SIGN_CONVENTION = "every lift counted with sign +1 (positive degree of the evaluation maps)"


@dataclass
class CensusTable:
    params: ConicParams
    entries: dict
    residuals: dict = field(default_factory=dict)
    alpha: float = 0.0

    @property
    def total(self) -> int:
        return sum(self.entries.values())

    @property
    def classes(self) -> list:
        return sorted(self.entries)

    @property
    def hull_lattice_points(self) -> int:
        return hull_lattice_count(self)

    @property
    def mod2_classes(self) -> int:
        return sum(mod2_census(self).values())

    def to_dict(self) -> dict:
        return {
            "params": self.params.to_dict(),
            "alpha": self.alpha,
            "classes": [{"class": list(cls), "count": self.entries[cls]} for cls in self.classes],
            "total": self.total,
            "hull_points": self.hull_lattice_points,
            "mod2_odd_classes": [list(cls) for cls, bit in mod2_census(self).items() if bit],
            "sign_convention": SIGN_CONVENTION,
            "residuals": {k: self.residuals[k] for k in sorted(self.residuals)},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["n", "a", "b", "d", "count", "mod2"])
        bits = mod2_census(self)
        for cls in self.classes:
            wr.writerow([self.params.n, *cls, self.entries[cls], bits[cls]])
        return buf.getvalue()

    def format(self) -> str:
        lines = [
            f"disc census for n={self.params.n}, c={self.params.c:g}, kappa={self.params.kappa:g}",
            f"{'class (a,b,d)':>16}  count",
        ]
        for cls in self.classes:
            lines.append(f"{str(tuple(cls)):>16}  {self.entries[cls]:5d}")
        lines.append(f"{'classes':>16}  {len(self.entries):5d}")
        lines.append(f"{'total':>16}  {self.total:5d}")
        lines.append(f"{'hull points':>16}  {self.hull_lattice_points:5d}")
        lines.append(f"signs: {SIGN_CONVENTION}")
        return "\n".join(lines)


def disc_census(p: ConicParams, alpha: float = 0.0, check: bool = True) -> CensusTable:
    """Census of Maslov-2 classes from the lifts of u_alpha and v_alpha.

    With ``check`` every lift passes its algebraic residual checks, has Maslov
    index 2 (both from its projection and from the frame of T) and b + d = 1,
    and u_alpha meets C in exactly n points.  A failed check raises
    :class:`CheckFailed` naming it.
    """
    u, v = disc_u_alpha(alpha), disc_v_alpha(alpha)
    lifts_u = enumerate_lifts(u, None, p, check=check)
    lifts_v = enumerate_lifts(v, None, p, check=check)
    entries: dict = {}
    for hist in (lift_class_histogram(lifts_u), lift_class_histogram(lifts_v)):
        for cls, cnt in hist.items():
            entries[cls] = entries.get(cls, 0) + cnt
    residuals: dict = {}
    if check:
        lifts = lifts_u + lifts_v
        for key in ("xy_minus_h", "boundary_modulus", "quotient", "boundary_on_T"):
            residuals[key] = max(lf.residuals[key] for lf in lifts)
        k = intersections_with_C(u, p).size
        if k != p.n:
            raise CheckFailed("intersections_with_C", k, p.n)
        residuals["intersections_with_C"] = k
        maslov = {maslov_index(lf.disc) for lf in lifts} | {maslov_index(lf.disc, "direct") for lf in lifts}
        if maslov != {2}:
            raise CheckFailed("maslov_index", max(maslov - {2}, key=abs), 2)
        residuals["maslov"] = 2
        bad = [cls for cls in entries if cls.b + cls.d != 1]
        if bad:
            raise CheckFailed("b_plus_d", bad[0].b + bad[0].d, 1)
        expected = {HomotopyClass(ell, 1, 0): comb(p.n, ell) for ell in range(p.n + 1)}
        expected[HomotopyClass(0, 0, 1)] = 1
        if entries != expected:
            raise CheckFailed("binomial_multiplicities", float("nan"), 0)
    return CensusTable(p, dict(sorted(entries.items())), residuals, float(alpha))


def thread_cap(default: int | None = None) -> int:
    """Worker count: MTL_THREADS if set, otherwise ``default`` or the CPU count."""
    env = os.environ.get("MTL_THREADS")
    if env:
        return max(1, int(env))
    return default or os.cpu_count() or 1


def census_many(ns, base: ConicParams, alpha=0.0, check=True) -> list:
    """Independent censuses for several n, in input order."""
    with ThreadPoolExecutor(max_workers=thread_cap()) as pool:
        jobs = [pool.submit(disc_census, base.replace(n=n), alpha, check) for n in ns]
        return [j.result() for j in jobs]


# -- convex hull lattice count (exact) ---------------------------------------------------


def _sub(a, b):
    return tuple(x - y for x, y in zip(a, b))


def _cross(a, b):
    return (a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0])


def _dot(a, b):
    return sum(x * y for x, y in zip(a, b))


def _rank(vectors) -> int:
    rows = [[Fraction(x) for x in v] for v in vectors]
    rank, col = 0, 0
    ncols = len(rows[0]) if rows else 0
    while rank < len(rows) and col < ncols:
        piv = next((i for i in range(rank, len(rows)) if rows[i][col] != 0), None)
        if piv is None:
            col += 1
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        for i in range(len(rows)):
            if i != rank and rows[i][col] != 0:
                f = rows[i][col] / rows[rank][col]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[rank])]
        rank += 1
        col += 1
    return rank


def hull_halfspaces(points):
    """Exact description of conv(points) in Z^3: (equalities, inequalities).

    Each constraint is (normal, offset) meaning normal . q == offset or
    normal . q <= offset, with integer data.
    """
    pts = sorted(set(tuple(int(c) for c in pt) for pt in points))
    o = pts[0]
    diffs = [_sub(q, o) for q in pts[1:]]
    dim = _rank(diffs) if diffs else 0
    eqs, ineqs = [], []
    axes = [(1, 0, 0), (0, 1, 0), (0, 0, 1)]
    if dim == 0:
        eqs = [(e, _dot(e, o)) for e in axes]
        return eqs, ineqs
    if dim == 1:
        d = next(v for v in diffs if any(v))
        for e in axes:
            nrm = _cross(d, e)
            if any(nrm):
                eqs.append((nrm, _dot(nrm, o)))
        proj = [_dot(d, q) for q in pts]
        ineqs = [(d, max(proj)), (tuple(-x for x in d), -min(proj))]
        return eqs, ineqs
    if dim == 2:
        a = next(v for v in diffs if any(v))
        nrm = next(_cross(a, b) for b in diffs if any(_cross(a, b)))
        eqs = [(nrm, _dot(nrm, o))]
        for i, j in product(range(len(pts)), repeat=2):
            if i == j:
                continue
            edge = _sub(pts[j], pts[i])
            out = _cross(edge, nrm)
            if not any(out):
                continue
            off = _dot(out, pts[i])
            if all(_dot(out, q) <= off for q in pts):
                ineqs.append((out, off))
        return eqs, sorted(set(ineqs))
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            for k in range(j + 1, len(pts)):
                nrm = _cross(_sub(pts[j], pts[i]), _sub(pts[k], pts[i]))
                if not any(nrm):
                    continue
                off = _dot(nrm, pts[i])
                side = [_dot(nrm, q) - off for q in pts]
                if all(s <= 0 for s in side):
                    ineqs.append((nrm, off))
                if all(s >= 0 for s in side):
                    ineqs.append((tuple(-x for x in nrm), -off))
    return eqs, sorted(set(ineqs))


def lattice_points_in_hull(points) -> list:
    """All integer points of conv(points), by enumeration over the bounding box."""
    pts = [tuple(int(c) for c in pt) for pt in points]
    eqs, ineqs = hull_halfspaces(pts)
    lo = [min(q[i] for q in pts) for i in range(3)]
    hi = [max(q[i] for q in pts) for i in range(3)]
    out = []
    for q in product(*(range(a, b + 1) for a, b in zip(lo, hi))):
        if all(_dot(nrm, q) == off for nrm, off in eqs) and all(_dot(nrm, q) <= off for nrm, off in ineqs):
            out.append(q)
    return out


def class_points(table_or_n) -> list:
    """The class triples {(l, 1, 0): l = 0..n} and (0, 0, 1)."""
    n = table_or_n.params.n if isinstance(table_or_n, CensusTable) else int(table_or_n)
    return [(ell, 1, 0) for ell in range(n + 1)] + [(0, 0, 1)]


def hull_lattice_count(table) -> int:
    """Number of lattice points in the convex hull of the census classes."""
    if isinstance(table, CensusTable):
        if not table.entries:
            raise ValueError("empty census table")
        pts = [tuple(cls) for cls in table.entries]
    else:
        pts = class_points(table)
    return len(lattice_points_in_hull(pts))


def segment_lattice_points(a, b) -> int:
    """gcd formula for the lattice points on a closed segment (independent check)."""
    d = _sub(b, a)
    return gcd(gcd(abs(d[0]), abs(d[1])), abs(d[2])) + 1


# -- mod 2 data and comparisons ------------------------------------------------------


def mod2_census(table: CensusTable) -> dict:
    return {cls: table.entries[cls] % 2 for cls in table.classes}


def binomial_is_odd(n: int, k: int) -> bool:
    """Lucas: C(n, k) is odd iff the binary digits of k are a subset of those of n."""
    return 0 <= k <= n and (k & ~n) == 0


def distinguish(n1: int, n2: int, base: ConicParams | None = None, check=False) -> dict:
    """Compare the census invariants of the tori for n1 and n2."""
    if n1 == n2:
        raise ValueError("distinguish needs two different values of n")
    base = base or ConicParams(0)
    t1, t2 = (disc_census(base.replace(n=k), check=check) for k in (n1, n2))
    inv = {
        "class_count": (len(t1.entries), len(t2.entries)),
        "total": (t1.total, t2.total),
        "hull_points": (t1.hull_lattice_points, t2.hull_lattice_points),
        "mod2_odd_classes": (t1.mod2_classes, t2.mod2_classes),
    }
    witnesses = [k for k, (a, b) in inv.items() if a != b]
    return {
        "n": [n1, n2],
        "invariants": {k: list(v) for k, v in inv.items()},
        "witnesses": witnesses,
        "verdict": "distinguished" if witnesses else "not distinguished",
        "sign_convention": SIGN_CONVENTION,
    }


def ell_counts(table: CensusTable) -> np.ndarray:
    """Counts of the classes (l, 1, 0) for l = 0..n."""
    return np.array([table.entries.get(HomotopyClass(ell, 1, 0), 0) for ell in range(table.params.n + 1)])
