"""Command-line front end: census, verification suites, and data/figure export.

Exit codes: 0 success, 1 usage error, 2 verification or numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from .conic import DEFAULT_C, ConicParams
from .errors import CheckFailed, ConicToriError

EXIT_OK, EXIT_USAGE, EXIT_FAIL = 0, 1, 2
EXPORTS = ("disc-boundaries", "intersections", "flow-trace", "hull")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass
class RunConfig:
    command: str = ""
    n: int | None = None
    c: float = DEFAULT_C
    kappa: float | None = None
    steps: int = 128
    tol: float = 1e-8
    seed: int = 0
    alpha: float = 0.0
    radial_nodes: int = 64
    angular_nodes: int = 256
    radius: float = 1.0
    barrier_radius: float = 5.0
    samples: int = 100_000
    suite: str | None = None
    what: str | None = None
    json: str | None = None
    csv: str | None = None
    svg: str | None = None

    @classmethod
    def merge(cls, config: dict, flags: dict) -> RunConfig:
        """Built-in defaults, then the config file, then explicit flags."""
        known = {f.name for f in fields(cls)}
        unknown = set(config) - known
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        data = {**config, **{k: v for k, v in flags.items() if v is not None and k in known}}
        cfg = cls(**data)
        cfg.validate()
        return cfg

    def validate(self):
        if self.n is not None and (int(self.n) != self.n or self.n < 0):
            raise UsageError("--n must be a nonnegative integer")
        if not self.c > 1:
            raise UsageError("--c must exceed 1")
        if self.kappa is not None and not self.kappa > 0:
            raise UsageError("--kappa must be positive")
        if self.steps < 16:
            raise UsageError("--steps must be at least 16")
        if not self.tol > 0:
            raise UsageError("--tol must be positive")
        if self.samples < 10_000:
            raise UsageError("samples must be at least 10^4")

    def params(self) -> ConicParams:
        from .moser import default_kappa

        n = 2 if self.n is None else int(self.n)
        kappa = self.kappa if self.kappa is not None else default_kappa(n, self.c)
        try:
            return ConicParams(n, self.c, kappa)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc

    def quad(self):
        from .quadrature import QuadSpec

        return QuadSpec(self.radial_nodes, self.angular_nodes, self.tol)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--n", type=int, help="degree n of z in h (default 2 for verify/export)")
    common.add_argument("--c", type=float, help="the constant c > 1 (default 10)")
    common.add_argument("--kappa", type=float, help="Kahler weight (default: calibrated for n, c)")
    common.add_argument("--steps", type=int, help="RK4 steps for Moser flows (default 128)")
    common.add_argument("--tol", type=float, help="quadrature refinement tolerance (default 1e-8)")
    common.add_argument("--seed", type=int, help="seed for random sampling (default 0)")
    common.add_argument("--alpha", type=float, help="angle alpha of the discs u_alpha, v_alpha (default 0)")
    common.add_argument("--json", metavar="PATH", help="write JSON output to PATH")
    common.add_argument("--csv", metavar="PATH", nargs="?", const="", help="write CSV (to PATH, or stdout)")
    common.add_argument("--svg", metavar="PATH", nargs="?", const="", help="write an SVG figure")
    common.add_argument("--config", metavar="FILE", help="JSON config; flags override its values")

    parser = _Parser(prog="conictori", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("census", parents=[common], help="disc census of the torus for one n")
    ver = sub.add_parser("verify", parents=[common], help="run an invariant suite")
    ver.add_argument("--suite", required=True, choices=("areas", "maslov", "moser", "lifts", "barrier", "stokes", "all"))
    exp = sub.add_parser("export", parents=[common], help="export data and figures")
    exp.add_argument("what", choices=EXPORTS)
    return parser


def _load_config(path) -> dict:
    if not path:
        return {}
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise UsageError("config must be a JSON object")
    return data


def _write(path, text):
    Path(path).write_text(text)


def _svg_path(cfg: RunConfig, default: str):
    if cfg.svg is None:
        return None
    return cfg.svg or default


# -- commands -----------------------------------------------------------------------------


def cmd_census(cfg: RunConfig, out) -> int:
    from .census import class_points, disc_census, lattice_points_in_hull

    if cfg.n is None:
        raise UsageError("census needs --n")
    p = cfg.params()
    table = disc_census(p, cfg.alpha)
    meta = {"kappa_source": "flag/config" if cfg.kappa is not None else "calibrated"}
    n = p.n
    if len(table.entries) != n + 2:
        raise CheckFailed("class_count", len(table.entries), n + 2)
    if table.total != 2**n + 1:
        raise CheckFailed("total", table.total, 2**n + 1)
    if table.hull_lattice_points != n + 2:
        raise CheckFailed("hull_points", table.hull_lattice_points, n + 2)
    print(table.format(), file=out)
    if cfg.json:
        data = table.to_dict()
        data["metadata"] = meta
        _write(cfg.json, json.dumps(data, indent=2, sort_keys=True) + "\n")
    if cfg.csv is not None:
        _emit_csv(cfg, table.to_csv(), out)
    svg = _svg_path(cfg, f"census_n{n}.svg")
    if svg:
        from .plotting import plot_hull

        pts = class_points(n)
        plot_hull(pts, lattice_points_in_hull(pts), svg, f"classes and hull lattice points, n={n}")
    return EXIT_OK


def cmd_verify(cfg: RunConfig, out) -> int:
    from .verify import Context, run_suite

    p = cfg.params()
    ctx = Context(p, cfg.quad(), cfg.steps, cfg.seed, cfg.barrier_radius, cfg.radius, cfg.samples)
    print(f"suite {cfg.suite}: n={p.n} c={p.c:g} kappa={p.kappa:g}", file=out)
    checks = run_suite(cfg.suite, ctx)
    for chk in checks:
        print(chk.line(), file=out)
    failed = [c for c in checks if not c.passed]
    print(f"{len(checks) - len(failed)}/{len(checks)} checks passed", file=out)
    if cfg.json:
        report = {"params": p.to_dict(), "suite": cfg.suite, "checks": [_jsonable(c.to_dict()) for c in checks]}
        _write(cfg.json, json.dumps(report, indent=2, sort_keys=True) + "\n")
    if failed:
        print(f"verification failed: {failed[0].name}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def _emit_csv(cfg, text, out):
    if cfg.csv:
        _write(cfg.csv, text)
    else:
        out.write(text)


def cmd_export(cfg: RunConfig, out) -> int:
    from . import plotting

    what = cfg.what
    p = cfg.params()
    if what == "intersections":
        from .discs import disc_u_alpha, intersections_with_C

        pts = intersections_with_C(disc_u_alpha(cfg.alpha), p)
        rows = ["k,re,im,abs,arg"] + [
            f"{k},{z.real:.17g},{z.imag:.17g},{abs(z):.17g},{np.angle(z):.17g}" for k, z in enumerate(pts)
        ]
        text = "\n".join(rows) + "\n"
        svg = _svg_path(cfg, "intersections.svg")
        if svg:
            plotting.plot_intersections(pts, svg, f"u_alpha meets C in {pts.size} points (n={p.n})")
    elif what == "disc-boundaries":
        from .discs import disc_u_alpha
        from .lifts import enumerate_lifts
        from .quadrature import circle_points

        lifts = enumerate_lifts(disc_u_alpha(cfg.alpha), None, p)
        zeta = circle_points(256)
        rows = ["eps,k,phi,re_x,im_x,re_y,im_y,re_z,im_z"]
        loops, labels = [], []
        for lf in lifts:
            vals = lf.disc(zeta)
            tag = "".join("+" if e > 0 else "-" for e in lf.eps) or "0"
            loops.append(vals[:, 0])
            labels.append(tag)
            for k, v in enumerate(vals):
                coords = ",".join(f"{c.real:.17g},{c.imag:.17g}" for c in v)
                rows.append(f"{tag},{k},{2 * np.pi * k / 256:.17g},{coords}")
        text = "\n".join(rows) + "\n"
        svg = _svg_path(cfg, "disc-boundaries.svg")
        if svg:
            plotting.plot_boundaries(loops, labels, svg, f"x along the boundaries of the {len(lifts)} lifts (n={p.n})")
    elif what == "flow-trace":
        from .moser import flow_trace_csv, straightening_trace

        barrier, spec, path = straightening_trace(p, cfg.radius, cfg.steps, samples=cfg.samples)
        text = flow_trace_csv(path, 0)
        svg = _svg_path(cfg, "flow-trace.svg")
        if svg:
            plotting.plot_flow_trace(path.times, path.phi, svg, f"phi along the straightening flow (C={barrier.C:.4g})")
    else:
        from .census import class_points, lattice_points_in_hull

        pts = class_points(p.n)
        lattice = lattice_points_in_hull(pts)
        text = "a,b,d\n" + "".join(f"{a},{b},{d}\n" for a, b, d in lattice)
        print(f"{len(lattice)} lattice points in the hull (n={p.n})", file=sys.stderr)
        svg = _svg_path(cfg, "hull.svg")
        if svg:
            plotting.plot_hull(pts, lattice, svg, f"{len(lattice)} lattice points in the hull, n={p.n}")
    if cfg.csv is not None or cfg.svg is None:
        if cfg.csv:
            _write(cfg.csv, text)
        else:
            out.write(text)
    if cfg.json:
        _write(cfg.json, json.dumps({"what": what, "params": p.to_dict(), "csv": text}, indent=2, sort_keys=True) + "\n")
    return EXIT_OK


COMMANDS = {"census": cmd_census, "verify": cmd_verify, "export": cmd_export}


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    flags = vars(args).copy()
    config_path = flags.pop("config", None)
    try:
        cfg = RunConfig.merge(_load_config(config_path), flags)
        return COMMANDS[cfg.command](cfg, out)
    except UsageError as exc:
        print(f"conictori: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CheckFailed as exc:
        print(f"conictori: check failed: {exc.check}: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except ConicToriError as exc:
        print(f"conictori: numerical failure ({type(exc).__name__}): {exc}", file=sys.stderr)
        return EXIT_FAIL
    except OSError as exc:
        print(f"conictori: I/O failure: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())


__all__ = ["RunConfig", "build_parser", "main"]
