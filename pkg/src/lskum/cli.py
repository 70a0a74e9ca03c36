"""Command-line driver: ``solve``, ``bench``, ``generate`` and ``validate``.

Exit codes: 0 success, 1 configuration or input error, 2 cloud validation
failure (or layouts disagreeing in ``bench``), 3 solver divergence.
"""
from __future__ import annotations

import argparse
import math
import sys

import numpy as np

from .bench import BenchReport, apply_bump, freestream_init, relative_performance
from .cloud import (
    PointKind,
    generate_annulus_cloud,
    generate_rect_cloud,
    read_point_cloud,
    validate_cloud,
    wall_loop_order,
    write_point_cloud,
)
from .config import ConfigError, SolverConfig, coerce, freestream_state, parse_grid_size, \
    read_config_file
from .errors import CloudFormatError, DomainError, LskumError, PositivityError, \
    ReconstructionError
from .layout import store_equivalence_check
from .runtime import partition_cloud, run_fixed_point

EXIT_OK, EXIT_CONFIG, EXIT_INVALID, EXIT_DIVERGED = 0, 1, 2, 3

# flag dest -> SolverConfig field
_FLAG_FIELDS = {
    "grid": "grid", "generate": "generate", "annulus": "annulus", "jitter": "jitter",
    "seed": "seed", "k": "k", "mach": "mach", "aoa": "aoa_deg", "gamma": "gamma",
    "iters": "n_iterations", "inner": "n_inner", "cfl": "cfl", "order": "order",
    "layout": "layout", "residual_mode": "residual_mode", "parts": "n_parts",
    "workers": "n_workers", "bump": "bump", "bump_radius": "bump_radius",
    "out_prefix": "out_prefix",
}


def _add_cloud_flags(p):
    src = p.add_argument_group("point cloud")
    src.add_argument("--grid", metavar="PATH", help="read the cloud from a grid file")
    src.add_argument("--generate", metavar="NXxNY", help="rectangular jittered cloud")
    src.add_argument("--annulus", metavar="NRxNT", help="annular cloud around a unit circle")
    src.add_argument("--jitter", type=float)
    src.add_argument("--seed", type=int)
    src.add_argument("--k", type=int, help="neighbours per stencil")
    p.add_argument("--config", metavar="PATH", help="key=value file; flags override it")


def _add_solver_flags(p):
    g = p.add_argument_group("solver")
    g.add_argument("--mach", type=float)
    g.add_argument("--aoa", type=float, help="angle of attack in degrees")
    g.add_argument("--gamma", type=float)
    g.add_argument("--iters", type=int)
    g.add_argument("--inner", type=int)
    g.add_argument("--cfl", type=float)
    g.add_argument("--order", type=int, choices=(1, 2))
    g.add_argument("--layout", choices=("aos", "soa"))
    g.add_argument("--residual-mode", dest="residual_mode", choices=("fused", "split4"))
    g.add_argument("--parts", type=int)
    g.add_argument("--workers", type=int)
    g.add_argument("--bump", type=float, help="relative density/pressure bump amplitude")
    g.add_argument("--bump-radius", dest="bump_radius", type=float)
    g.add_argument("--out-prefix", dest="out_prefix", metavar="PATH")


def build_parser():
    parser = argparse.ArgumentParser(prog="lskum", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("solve", help="run the fixed-point solver")
    _add_cloud_flags(p)
    _add_solver_flags(p)
    p = sub.add_parser("bench", help="time the solver per kernel, per layout")
    _add_cloud_flags(p)
    _add_solver_flags(p)
    p.add_argument("--layouts", default="aos,soa", help="comma-separated layouts to compare")
    p = sub.add_parser("generate", help="write a generated cloud to a grid file")
    _add_cloud_flags(p)
    p.add_argument("--out", "-o", required=True, metavar="PATH")
    p = sub.add_parser("validate", help="report stencil sizes and determinants")
    _add_cloud_flags(p)
    return parser


def config_from_args(args):
    values = {}
    if getattr(args, "config", None):
        try:
            values.update(read_config_file(args.config))
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}") from None
    for dest, name in _FLAG_FIELDS.items():
        v = getattr(args, dest, None)
        if v is not None:
            values[name] = coerce(name, v)[1]
    explicit = _explicit(args)
    if explicit:
        # a source given on the command line replaces any from the file
        for src in ("grid", "annulus", "generate"):
            if src not in explicit:
                values[src] = None
    try:
        return SolverConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


def _explicit(args):
    return {d for d in ("grid", "generate", "annulus") if getattr(args, d, None) is not None}


def load_cloud(config, layout=None):
    layout = layout or config.layout
    if config.grid is not None:
        try:
            return read_point_cloud(config.grid, layout=layout)
        except OSError as exc:
            raise ConfigError(f"cannot read grid file: {exc}") from None
    try:
        if config.annulus is not None:
            nr, nt = parse_grid_size(config.annulus)
            return generate_annulus_cloud(nr, nt, jitter=config.jitter, seed=config.seed,
                                          k=config.k, layout=layout)
        nx, ny = parse_grid_size(config.generate)
        return generate_rect_cloud(nx, ny, jitter=config.jitter, seed=config.seed, k=config.k,
                                   layout=layout)
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from None


def initialise(cloud, config):
    freestream_init(cloud, config.mach, config.aoa_deg, config.gamma)
    if config.bump:
        apply_bump(cloud, config.bump, radius=config.bump_radius)


def solve(cloud, config, on_iteration=None):
    initialise(cloud, config)
    parts = partition_cloud(cloud, config.n_parts)
    return run_fixed_point(cloud, parts, config, on_iteration=on_iteration)


# ---------------------------------------------------------------- outputs

def _g(v):
    return "%.17g" % v


def write_residue(path, history):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("iter,residue,log10rel,wall_ms\n")
        for i, (r, lr, w) in enumerate(zip(history.residue, history.log10_rel,
                                           history.wall_seconds), start=1):
            fh.write(f"{i},{_g(r)},{_g(lr)},{1e3 * w:.6g}\n")


def write_solution(path, cloud):
    prim = cloud.store.get("prim")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("id x y rho u1 u2 p\n")
        for i in range(cloud.n_points):
            vals = (cloud.x[i], cloud.y[i], *prim[:, i])
            fh.write(f"{i} " + " ".join(_g(v) for v in vals) + "\n")


def surface_cp(cloud, config):
    """Wall ids, arc positions and pressure coefficients (nan when M = 0)."""
    ids, arc = wall_loop_order(cloud)
    p_inf = freestream_state(config.mach, config.aoa_deg, config.gamma)[3]
    p = cloud.store.get("prim", ids)[3]
    q_inf = 0.5 * config.mach ** 2
    cp = (p - p_inf) / q_inf if q_inf > 0 else np.full(ids.size, math.nan)
    return ids, arc, cp


def write_surface(path, cloud, config):
    ids, arc, cp = surface_cp(cloud, config)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("id,arc,x,y,cp\n")
        for i, s, c in zip(ids, arc, cp):
            fh.write(f"{i},{_g(s)},{_g(cloud.x[i])},{_g(cloud.y[i])},{_g(c)}\n")


def write_bench(path, report):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("kernel,seconds,rdp\n")
        for k, v in report.kernel_seconds.items():
            fh.write(f"{k},{v:.6g},{report.kernel_rdp.get(k, 0.0):.6g}\n")
        fh.write(f"total,{report.total_seconds:.6g},{report.rdp:.6g}\n")


def write_outputs(prefix, cloud, config, history, report):
    write_residue(f"{prefix}.residue.csv", history)
    write_solution(f"{prefix}.solution.dat", cloud)
    write_bench(f"{prefix}.bench.csv", report)
    if np.any(cloud.kind == PointKind.WALL):
        write_surface(f"{prefix}.surface.csv", cloud, config)


# --------------------------------------------------------------- commands

def _validated_cloud(config, layout=None, out=sys.stdout):
    cloud = load_cloud(config, layout)
    report = validate_cloud(cloud)
    if not report.ok:
        print(report.summary(), file=out)
    return cloud, report.ok


def cmd_solve(config, out=sys.stdout):
    cloud, ok = _validated_cloud(config, out=out)
    if not ok:
        return EXIT_INVALID
    try:
        history = solve(cloud, config)
    except (PositivityError, ReconstructionError, DomainError) as exc:
        print(f"solver diverged: {exc}", file=out)
        return EXIT_DIVERGED
    report = BenchReport.from_history(history, label=f"solve[{config.layout}]")
    prefix = config.out_prefix or "lskum"
    write_outputs(prefix, cloud, config, history, report)
    if history.iterations:
        print(f"final residue {history.residue[-1]:.6g} "
              f"(log10 rel {history.log10_rel[-1]:.6g})", file=out)
    print(report.summary(), file=out)
    return EXIT_OK


def cmd_bench(config, layouts, out=sys.stdout):
    layouts = [s.strip() for s in layouts.split(",") if s.strip()]
    for lay in layouts:
        if lay not in ("aos", "soa"):
            raise ConfigError(f"unknown layout {lay!r}")
    if not layouts:
        raise ConfigError("no layouts given")
    clouds, reports = {}, {}
    for lay in layouts:
        cfg = config.with_(layout=lay)
        cloud, ok = _validated_cloud(cfg, out=out)
        if not ok:
            return EXIT_INVALID
        try:
            history = solve(cloud, cfg)
        except (PositivityError, ReconstructionError, DomainError) as exc:
            print(f"solver diverged ({lay}): {exc}", file=out)
            return EXIT_DIVERGED
        report = BenchReport.from_history(history, label=f"bench[{lay}]")
        clouds[lay], reports[lay] = cloud, report
        print(report.summary(), file=out)
        print("  kernels by RDP: " + ", ".join(report.ranked_kernels()), file=out)
        prefix = config.out_prefix or "lskum"
        write_bench(f"{prefix}.{lay}.bench.csv" if len(layouts) > 1 else f"{prefix}.bench.csv",
                    report)
    ref = layouts[0]
    same = all(store_equivalence_check(clouds[ref].store, clouds[lay].store) for lay in layouts)
    print(f"layouts bitwise equivalent: {same}", file=out)
    for lay in layouts[1:]:
        ratio = relative_performance(reports[lay].rdp, reports[ref].rdp)
        print(f"relative performance {lay}/{ref}: {ratio:.4f}", file=out)
    return EXIT_OK if same else EXIT_INVALID


def cmd_generate(config, path, out=sys.stdout):
    cloud = load_cloud(config)
    write_point_cloud(cloud, path)
    print(f"wrote {cloud.n_points} points to {path}", file=out)
    return EXIT_OK


def cmd_validate(config, out=sys.stdout):
    cloud = load_cloud(config)
    report = validate_cloud(cloud)
    print(report.summary(), file=out)
    return EXIT_OK if report.ok else EXIT_INVALID


def run_cli(argv=None, out=sys.stdout):
    args = build_parser().parse_args(argv)
    try:
        config = config_from_args(args)
        if args.command == "solve":
            return cmd_solve(config, out)
        if args.command == "bench":
            return cmd_bench(config, args.layouts, out)
        if args.command == "generate":
            return cmd_generate(config, args.out, out)
        return cmd_validate(config, out)
    except (ConfigError, CloudFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except LskumError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def main():
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
