"""Command-line driver: ``lsreinit {run,convergence,curvature,mesh}``."""

import argparse
import os
import sys
from dataclasses import dataclass, fields, replace
from typing import Optional

import numpy as np

from . import harness
from .mesh import MeshError, generate_cartesian, generate_perturbed, read_mesh, write_mesh


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    case: str = "circle"
    mesh: Optional[str] = None
    cells: int = 16
    perturb: float = 0.0
    seed: int = 0
    degree: int = 4
    scheme: str = "ldg"
    eps: float = 50.0
    cfl: float = 0.5
    integrator: str = "euler"
    cutoff: Optional[float] = None
    s_up: float = -6.5
    s_low: float = -7.5
    n: int = 2
    xi_tol: float = 1e-12
    n_stall: int = 100
    max_iter: int = 20000
    degree_scaling: bool = True
    vtk: Optional[str] = None
    csv: Optional[str] = None
    every: int = 0


_TYPES = {f.name: f.type for f in fields(RunConfig)}
_OPTIONAL = {"mesh", "cutoff", "vtk", "csv"}


def case_defaults(name):
    d = harness.get_case(name).defaults
    return dict(case=name, cells=d["cells"], degree=d["N"], scheme=d["scheme"], eps=d["eps"],
                cfl=d["cfl"], integrator=d["integrator"], cutoff=d["cutoff"], s_up=d["s_up"],
                s_low=d["s_low"], n=d["n_modes"], max_iter=d["max_iter"])


def _convert(key, raw):
    if key in _OPTIONAL and raw.strip().lower() in ("", "none"):
        return None
    t = _TYPES[key]
    text = raw.strip()
    try:
        if t in (int, "int"):
            return int(text)
        if t in (float, "float") or "float" in str(t):
            return float(text.replace("−", "-"))
        if t in (bool, "bool"):
            low = text.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(text)
    except ValueError:
        raise ConfigError(f"{key}: cannot read {text!r} as {getattr(t, '__name__', t)}") from None
    return text


def validate(cfg):
    def bad(key, rule):
        raise ConfigError(f"{key}: {rule} (got {getattr(cfg, key)!r})")
    if cfg.case not in harness.CASES:
        bad("case", f"must be one of {', '.join(harness.CASES)}")
    if cfg.cells < 1:
        bad("cells", "must be >= 1")
    if not 0 <= cfg.degree <= 10:
        bad("degree", "must lie in [0, 10]")
    if cfg.scheme not in ("ldg", "fv", "regularized"):
        bad("scheme", "must be ldg, fv or regularized")
    if not cfg.eps > 0:
        bad("eps", "must be > 0")
    if not 0 < cfg.cfl <= 1:
        bad("cfl", "must lie in (0, 1]")
    if cfg.integrator not in ("euler", "rk3"):
        bad("integrator", "must be euler or rk3")
    if cfg.cutoff is not None and not cfg.cutoff > 0:
        bad("cutoff", "must be > 0 or none")
    if not cfg.s_low < cfg.s_up:
        raise ConfigError(f"s_low/s_up: s_low < s_up violated ({cfg.s_low} >= {cfg.s_up})")
    if cfg.n not in (1, 2):
        bad("n", "must be 1 or 2")
    if cfg.scheme == "regularized" and cfg.n > cfg.degree:
        bad("n", f"must not exceed the degree {cfg.degree}")
    if not cfg.xi_tol > 0:
        bad("xi_tol", "must be > 0")
    if cfg.n_stall < 1:
        bad("n_stall", "must be >= 1")
    if cfg.max_iter < 0:
        bad("max_iter", "must be >= 0")
    if cfg.every < 0:
        bad("every", "must be >= 0")
    if not 0 <= cfg.perturb < 0.5:
        bad("perturb", "must lie in [0, 0.5)")
    return cfg


def parse_config(text, overrides=None):
    """Read ``key = value`` lines (``#`` comments) into a validated :class:`RunConfig`.

    The test case picks the defaults; explicit keys and then *overrides* win.
    """
    pairs = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _TYPES:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        pairs[key] = _convert(key, val)
    pairs.update(overrides or {})
    case = pairs.get("case", "circle")
    if case not in harness.CASES:
        raise ConfigError(f"case: must be one of {', '.join(harness.CASES)} (got {case!r})")
    cfg = replace(RunConfig(), **case_defaults(case))
    return validate(replace(cfg, **pairs))


def _threads():
    raw = os.environ.get("LSREINIT_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"LSREINIT_THREADS must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise ConfigError(f"LSREINIT_THREADS must be a positive integer, got {raw!r}")
    return n


def _add_run_flags(p):
    p.add_argument("--config", help="key = value run configuration file")
    for f in fields(RunConfig):
        flag = "--" + f.name.replace("_", "-")
        if f.type in (bool, "bool"):
            p.add_argument(flag, dest=f.name, default=None, type=str, metavar="BOOL")
        else:
            p.add_argument(flag, dest=f.name, default=None, type=str)


def _collect(args):
    text = ""
    if args.config:
        try:
            with open(args.config) as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read config file {args.config}: {exc.strerror}") from None
    over = {f.name: _convert(f.name, getattr(args, f.name))
            for f in fields(RunConfig) if getattr(args, f.name) is not None}
    return parse_config(text, over)


def _load_mesh(cfg, case):
    if cfg.mesh:
        try:
            with open(cfg.mesh) as fh:
                return read_mesh(fh.read())
        except OSError as exc:
            raise ConfigError(f"cannot read mesh file {cfg.mesh}: {exc.strerror}") from None
    return harness.build_mesh(case, cfg.cells, cfg.perturb, cfg.seed)


def cmd_run(args, out):
    from .vtk import write_level_set
    cfg = _collect(args)
    case = harness.get_case(cfg.case)
    mesh = _load_mesh(cfg, case)
    sink = open(cfg.csv, "w") if cfg.csv else None

    def snapshot(it, fld, res):
        if cfg.vtk and cfg.every and it % cfg.every == 0:
            write_level_set(fld.space, fld, f"{cfg.vtk}_{it:06d}.vtk")

    try:
        res = harness.run_case(case, mesh, N=cfg.degree, scheme=cfg.scheme, eps=cfg.eps,
                               cfl=cfg.cfl, integrator=cfg.integrator, cutoff=cfg.cutoff,
                               s_up=cfg.s_up, s_low=cfg.s_low, n_modes=cfg.n,
                               xi_tol=cfg.xi_tol, n_stall=cfg.n_stall, max_iter=cfg.max_iter,
                               degree_scaling=cfg.degree_scaling, sink=sink, callback=snapshot)
    finally:
        if sink is not None:
            sink.close()
    rep = res.report
    if cfg.vtk:
        write_level_set(res.space, res.field, f"{cfg.vtk}_final.vtk", alpha=rep.alpha)
    out.write(f"case={cfg.case} elements={res.space.n_elements} N={cfg.degree} "
              f"iterations={rep.iterations} cause={rep.cause} "
              f"residual={rep.final_residual:.3e} dt={rep.dt:.3e}\n")
    if rep.alpha is not None:
        out.write(f"fv_ratio>0 fraction={float((rep.alpha > 0).mean()):.4f}\n")
    if case.exact is not None:
        keep = harness.exclusion_mask(res.space, (0.5, 0.5))
        e = harness.error_norms(res.space, res.field.phi, case.exact, keep)
        out.write(f"L1={e.l1:.4e} L2={e.l2:.4e} Linf={e.linf:.4e}\n")
    return 0


def cmd_convergence(args, out):
    if args.case != "circle":
        raise ConfigError("convergence: only the circle case has an exact solution")
    start = args.start_cells or (4 if args.scheme == "ldg" else 16)
    degrees = None
    if args.p_sweep:
        degrees = [int(v) for v in args.p_sweep.split(",")]
        cells = (start,)
    else:
        cells = tuple(start * 2 ** i for i in range(args.levels))
    if args.cells_list:
        cells = tuple(int(v) for v in args.cells_list.split(","))
    rows = harness.run_convergence_suite(
        scheme=args.scheme, cells=cells, degrees=degrees, N=args.degree,
        perturb=args.perturb, seed=args.seed, max_iter=args.max_iter, cfl=args.cfl,
        eps=args.eps, workers=_threads())
    text = harness.table_csv(rows)
    if args.output:
        try:
            with open(args.output, "w") as fh:
                fh.write(text)
        except OSError as exc:
            raise ConfigError(f"cannot write {args.output}: {exc.strerror}") from None
    else:
        out.write(text)
    return 0


def cmd_curvature(args, out):
    from .geometry import curvature
    from .space import Space
    from .field import init_analytic
    case = harness.get_case("circle")
    mesh = harness.build_mesh(case, args.cells, args.perturb, args.seed)
    sp = Space(mesh, args.degree)
    fld = init_analytic(sp, case.exact)
    cv = curvature(sp, fld.phi, args.method)
    keep = harness.exclusion_mask(sp, (0.5, 0.5), kappa_box=(0.375, 0.625))
    e = harness.error_norms(sp, np.abs(cv.kappa), case.exact_kappa, keep, where=cv.location)
    out.write(f"method={args.method} elements={sp.n_elements} N={args.degree} "
              f"L1={e.l1:.4e} L2={e.l2:.4e} Linf={e.linf:.4e}\n")
    return 0


def cmd_mesh(args, out):
    if args.action == "generate":
        lo = [float(v) for v in args.lo.split(",")]
        hi = [float(v) for v in args.hi.split(",")]
        counts = [int(v) for v in args.cells.split(",")]
        if len(counts) == 1:
            counts = counts * len(lo)
        if args.perturb > 0:
            mesh = generate_perturbed(lo, hi, counts, amplitude=args.perturb, seed=args.seed)
        else:
            mesh = generate_cartesian(lo, hi, counts)
        text = write_mesh(mesh)
        if args.output:
            with open(args.output, "w") as fh:
                fh.write(text)
        else:
            out.write(text)
        return 0
    if not args.file:
        raise ConfigError("mesh validate: a mesh file is required")
    try:
        with open(args.file) as fh:
            mesh = read_mesh(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read mesh file {args.file}: {exc.strerror}") from None
    from .basis import build_reference_element
    from .mesh import compute_metrics
    met = compute_metrics(mesh, build_reference_element(1))
    out.write(f"dim={mesh.dim} nodes={len(mesh.nodes)} elements={mesh.n_elements} "
              f"boundary_faces={int(mesh.boundary.sum())} min_volume={met.volume.min():.4e} "
              f"l_ref={met.l_ref:.4e}\n")
    return 0


def build_parser():
    ap = argparse.ArgumentParser(prog="lsreinit",
                                 description="Level-set reinitialization with a regularized LDG scheme.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="single reinitialization run")
    _add_run_flags(p)

    p = sub.add_parser("convergence", help="circle convergence table as CSV")
    p.add_argument("--scheme", choices=("ldg", "fv"), default="ldg")
    p.add_argument("--case", default="circle")
    p.add_argument("--levels", type=int, default=4)
    p.add_argument("--degree", type=int, default=4)
    p.add_argument("--start-cells", type=int, default=None)
    p.add_argument("--cells-list", default=None, help="explicit comma separated cell counts")
    p.add_argument("--p-sweep", default=None, help="comma separated degrees, e.g. 0,1,2,3")
    p.add_argument("--perturb", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--eps", type=float, default=50.0)
    p.add_argument("--cfl", type=float, default=0.5)
    p.add_argument("--max-iter", type=int, default=20000)
    p.add_argument("--output", "-o", default=None)

    p = sub.add_parser("curvature", help="curvature error norms of the exact circle distance")
    p.add_argument("--method", choices=("direct", "br1", "central-ls"), default="br1")
    p.add_argument("--cells", type=int, default=16)
    p.add_argument("--degree", type=int, default=4)
    p.add_argument("--perturb", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("mesh", help="generate or validate a mesh file")
    p.add_argument("action", choices=("generate", "validate"))
    p.add_argument("file", nargs="?")
    p.add_argument("--lo", default="0,0")
    p.add_argument("--hi", default="1,1")
    p.add_argument("--cells", default="8")
    p.add_argument("--perturb", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", "-o", default=None)
    return ap


def main(argv=None, out=None):
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    handler = {"run": cmd_run, "convergence": cmd_convergence,
               "curvature": cmd_curvature, "mesh": cmd_mesh}[args.command]
    try:
        return handler(args, out)
    except (ConfigError, MeshError, ValueError, OSError) as exc:
        print(f"lsreinit: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
