"""Benchmark cases, exclusion-aware error norms and convergence tables."""

import csv
import io
import math
from dataclasses import dataclass, field as dc_field
from typing import Callable, Optional

import numpy as np

from .field import apply_cutoff, freeze_sign, init_analytic
from .geometry import curvature
from .mesh import generate_cartesian, generate_perturbed
from .regularization import IndicatorConfig
from .space import Space
from .timeint import TimeConfig, reinitialize

CSV_HEADER = ("level,h,n_elem,l1_phi,l2_phi,linf_phi,eoc_l1_phi,eoc_l2_phi,eoc_linf_phi,"
              "l1_kappa,l2_kappa,linf_kappa,eoc_l1_kappa,eoc_l2_kappa,eoc_linf_kappa,"
              "iterations,cause")


def _circle_r(x, y):
    return np.sqrt((x - 0.5) ** 2 + (y - 0.5) ** 2)


def _circle_init(x, y):
    return np.exp(10.0 * _circle_r(x, y) - 2.313) - 1.0


def _circle_exact(x, y):
    return _circle_r(x, y) - 0.2313


def _circle_kappa(x, y):
    return 1.0 / _circle_r(x, y)


def _rectangle(x, y):
    return np.where((np.abs(x) >= 0.5) | (np.abs(y) >= 0.5), 1.0, -1.0)


def _rectangle_rot45(x, y):
    c = math.sqrt(0.5)
    return _rectangle(c * (x + y), c * (y - x))


def _hartmann(x, y):
    g = 0.1 + (x - 3.0) ** 2 + (y - 3.0) ** 2
    return g * (3.0 - np.sqrt(x * x + y * y))


def _sphere(x, y, z):
    g = (x - 1.0) ** 2 + (y - 1.0) ** 2 + (z - 1.0) ** 2 + 0.1
    return g * (np.sqrt(x * x + y * y + z * z) - 1.0)


@dataclass(frozen=True)
class TestCase:
    name: str
    lo: tuple
    hi: tuple
    init: Callable
    exact: Optional[Callable] = None
    exact_kappa: Optional[Callable] = None
    defaults: dict = dc_field(default_factory=dict)

    __test__ = False   # keep pytest from collecting this class

    @property
    def dim(self):
        return len(self.lo)


_BENCH = dict(scheme="regularized", integrator="rk3", n_modes=2)

CASES = {
    "circle": TestCase(
        "circle", (0.0, 0.0), (1.0, 1.0), _circle_init, _circle_exact, _circle_kappa,
        dict(N=4, cells=16, eps=50.0, cfl=0.5, cutoff=None, s_up=-6.5, s_low=-7.5, n_modes=2,
             integrator="euler", scheme="ldg", max_iter=20000)),
    "rectangle": TestCase(
        "rectangle", (-1.0, -1.0), (1.0, 1.0), _rectangle,
        defaults=dict(_BENCH, N=4, cells=33, eps=20.0, cfl=0.5, cutoff=0.25,
                      s_up=-6.5, s_low=-7.5, max_iter=5000)),
    "rectangle-rot45": TestCase(
        "rectangle-rot45", (-1.0, -1.0), (1.0, 1.0), _rectangle_rot45,
        defaults=dict(_BENCH, N=4, cells=33, eps=20.0, cfl=0.5, cutoff=0.25,
                      s_up=-6.5, s_low=-7.5, max_iter=5000)),
    "hartmann": TestCase(
        "hartmann", (-5.0, -5.0), (5.0, 5.0), _hartmann,
        defaults=dict(_BENCH, N=4, cells=96, eps=20.0, cfl=0.9, cutoff=1.0,
                      s_up=-5.5, s_low=-6.5, max_iter=3000)),
    "sphere3d": TestCase(
        "sphere3d", (-2.0, -2.0, -2.0), (2.0, 2.0, 2.0), _sphere,
        defaults=dict(_BENCH, N=2, cells=32, eps=20.0, cfl=0.9, cutoff=0.6,
                      s_up=-8.0, s_low=-9.0, n_modes=1, max_iter=3000)),
}


def get_case(name):
    try:
        return CASES[name]
    except KeyError:
        raise ValueError(f"unknown test case {name!r}; known: {', '.join(CASES)}") from None


def build_mesh(case, cells, perturb=0.0, seed=0):
    counts = (cells,) * case.dim
    if perturb > 0:
        return generate_perturbed(case.lo, case.hi, counts, amplitude=perturb, seed=seed)
    return generate_cartesian(case.lo, case.hi, counts)


@dataclass
class RunResult:
    space: Space
    field: object
    report: object


def run_case(case, mesh, N=None, **overrides):
    """Initialise, cut off, freeze the sign and reinitialize one case on *mesh*."""
    p = dict(case.defaults)
    p.update({k: v for k, v in overrides.items() if v is not None or k == "cutoff"})
    space = Space(mesh, p["N"] if N is None else N)
    fld = init_analytic(space, case.init)
    if p.get("cutoff") is not None:
        apply_cutoff(fld, p["cutoff"])
    freeze_sign(fld, p["eps"])
    tcfg = TimeConfig(cfl=p["cfl"], integrator=p["integrator"],
                      xi_tol=p.get("xi_tol", 1e-12), n_stall=p.get("n_stall", 100),
                      max_iter=p["max_iter"], degree_scaling=p.get("degree_scaling", True))
    ind = None
    if p["scheme"] == "regularized":
        ind = IndicatorConfig(p["s_low"], p["s_up"], p["n_modes"])
    rep = reinitialize(space, fld, tcfg, scheme=p["scheme"], indicator=ind,
                       sink=p.get("sink"), callback=p.get("callback"))
    return RunResult(space, fld, rep)


@dataclass
class ErrorReport:
    l1: float
    l2: float
    linf: float
    n_included: int


def _norms(err, w):
    return ErrorReport(float((w * np.abs(err)).sum() / w.sum()),
                       float(np.sqrt((w * err * err).sum() / w.sum())),
                       float(np.abs(err).max()), 0)


def exclusion_mask(space, center, kappa_box=None):
    """Elements kept in the norms (True = included).

    Structured meshes drop the four elements nearest *center*; otherwise all
    elements whose barycenter lies within two mean element diameters.
    ``kappa_box`` = (lo, hi) additionally drops barycenters strictly inside.
    """
    bc = space.metrics.barycenter
    dist = np.linalg.norm(bc - np.asarray(center), axis=1)
    keep = np.ones(space.n_elements, dtype=bool)
    if space.mesh.structured:
        keep[np.argsort(dist, kind="stable")[:4]] = False
    else:
        keep &= dist >= 2.0 * space.mesh.element_diameters().mean()
    if kappa_box is not None:
        lo, hi = kappa_box
        keep &= ~((bc > lo) & (bc < hi)).all(axis=1)
    return keep


def error_norms(space, values, exact, keep, where="nodes"):
    """Normalised L1/L2 (quadrature-weighted) and nodal Linf errors over *keep* elements.

    ``where='subcells'`` treats *values* as sub-cell data weighted by sub-cell volume.
    """
    keep = np.asarray(keep, dtype=bool)
    if not keep.any():
        raise ValueError("no elements left after the exclusions")
    d = space.dim
    if where == "subcells":
        topo = space.topology
        x = topo.centers.reshape(space.tensor_shape + (d,))
        w = topo.volume.reshape(space.tensor_shape)
    else:
        x = space.metrics.x
        w1 = space.ref.weights
        w = space.metrics.J * np.einsum(",".join("ijk"[:d]) + "->" + "ijk"[:d], *([w1] * d))
    ex = exact(*np.moveaxis(x, -1, 0))
    rep = _norms((values - ex)[keep], w[keep])
    rep.n_included = int(keep.sum())
    return rep


def eoc(e_coarse, e_fine, h_coarse, h_fine):
    return math.log(e_coarse / e_fine) / math.log(h_coarse / h_fine)


def level_size(space):
    """Mesh size descriptor: the edge length for structured meshes, ``K**(-1/d)`` otherwise."""
    if space.mesh.structured:
        return float(space.mesh.element_diameters().mean() / math.sqrt(space.dim))
    return space.n_elements ** (-1.0 / space.dim)


@dataclass
class LevelResult:
    level: int
    h: float
    n_elem: int
    phi: ErrorReport
    kappa: ErrorReport
    iterations: int
    cause: str
    eoc_phi: tuple = (math.nan,) * 3
    eoc_kappa: tuple = (math.nan,) * 3


def _run_level(level, c, n, scheme, perturb, seed, max_iter, cfl, eps, kappa_method, p_sweep):
    case = CASES["circle"]
    mesh = build_mesh(case, c, perturb, seed)
    sch = "fv" if n == 0 else scheme
    res = run_case(case, mesh, N=n, scheme=sch, integrator="euler", cutoff=None,
                   max_iter=max_iter, cfl=cfl, eps=eps)
    sp, fld = res.space, res.field
    keep = exclusion_mask(sp, (0.5, 0.5))
    phi_err = error_norms(sp, fld.phi, case.exact, keep)
    cv = curvature(sp, fld.phi, kappa_method or ("central-ls" if sch == "fv" else "br1"))
    kkeep = exclusion_mask(sp, (0.5, 0.5), kappa_box=(0.375, 0.625))
    kap_err = error_norms(sp, np.abs(cv.kappa), case.exact_kappa, kkeep, where=cv.location)
    h = float(n) if p_sweep else level_size(sp)
    return LevelResult(level, h, sp.n_elements, phi_err, kap_err,
                       res.report.iterations, res.report.cause)


def run_convergence_suite(scheme="ldg", cells=(4, 8, 16, 32), degrees=None, N=4,
                          perturb=0.0, seed=0, max_iter=20000, cfl=0.5, eps=50.0,
                          kappa_method=None, workers=1, progress=None):
    """h-convergence (``degrees is None``) or p-convergence of the circle case.

    For a p-sweep pass ``degrees`` and a single entry in ``cells``; degree 0 is
    always run with the FV scheme. Curvature uses BR1 for LDG runs and the
    central least squares for FV runs unless *kappa_method* says otherwise.
    Levels are independent and may run on ``workers`` threads; rows come
    back in level order either way.
    """
    p_sweep = degrees is not None
    plan = [(cells[0], n) for n in degrees] if p_sweep else [(c, N) for c in cells]
    args = [(lvl, c, n, scheme, perturb, seed, max_iter, cfl, eps, kappa_method, p_sweep)
            for lvl, (c, n) in enumerate(plan)]
    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(lambda a: _run_level(*a), args))
        if progress is not None:
            for r in rows:
                progress(r)
    else:
        rows = []
        for a in args:
            rows.append(_run_level(*a))
            if progress is not None:
                progress(rows[-1])
    if not p_sweep:
        for prev, row in zip(rows, rows[1:]):
            row.eoc_phi = tuple(eoc(getattr(prev.phi, k), getattr(row.phi, k), prev.h, row.h)
                                for k in ("l1", "l2", "linf"))
            row.eoc_kappa = tuple(eoc(getattr(prev.kappa, k), getattr(row.kappa, k), prev.h, row.h)
                                  for k in ("l1", "l2", "linf"))
    return rows


def table_csv(rows):
    buf = io.StringIO()
    buf.write(CSV_HEADER + "\n")
    w = csv.writer(buf, lineterminator="\n")
    for r in rows:
        w.writerow([r.level, f"{r.h:.6g}", r.n_elem,
                    *(f"{v:.6e}" for v in (r.phi.l1, r.phi.l2, r.phi.linf)),
                    *(f"{v:.4f}" for v in r.eoc_phi),
                    *(f"{v:.6e}" for v in (r.kappa.l1, r.kappa.l2, r.kappa.linf)),
                    *(f"{v:.4f}" for v in r.eoc_kappa),
                    r.iterations, r.cause])
    return buf.getvalue()


# benchmark post-conditions ---------------------------------------------------

def gradient_magnitude(space, phi):
    return np.linalg.norm(curvature(space, phi, "br1").gradient, axis=-1)


def zero_contour_elements(fld):
    """Elements whose nodal values change sign (or touch zero)."""
    K = fld.space.n_elements
    v = fld.phi.reshape(K, -1)
    return (v.min(axis=1) <= 0.0) & (v.max(axis=1) >= 0.0)


@dataclass
class BenchmarkCheck:
    flagged_fraction: float
    grad_min: float
    grad_max: float
    n_checked: int
    contour_alpha_max: float
    max_grad_dev: float
    band_grad_min: float = math.nan
    band_grad_max: float = math.nan
    n_band: int = 0


def benchmark_check(result, band=None):
    """Summaries used by the benchmark acceptance checks.

    ``grad_min``/``grad_max`` range over every node of the alpha = 0 elements
    that lie in the band ``|phi| < band`` (default: the cut-off) and touch the
    zero contour or its face neighbours. ``band_grad_*`` drop the contour
    condition and cover every alpha = 0 element inside the band.
    """
    sp, fld, rep = result.space, result.field, result.report
    K = sp.n_elements
    alpha = rep.alpha if rep.alpha is not None else np.zeros(K)
    g = gradient_magnitude(sp, fld.phi).reshape(K, -1)
    zc = zero_contour_elements(fld)
    band = fld.cutoff if band is None else band
    inside = (np.abs(fld.phi).reshape(K, -1) < band).all(axis=1) if band else np.ones(K, bool)
    near = zc.copy()
    nb = sp.mesh.neighbor
    for f in range(nb.shape[1]):
        ok = nb[:, f] >= 0
        near[ok] |= zc[nb[ok, f]]
    sel = (alpha == 0.0) & inside & near
    gs = g[sel]
    gb = g[(alpha == 0.0) & inside]
    return BenchmarkCheck(
        flagged_fraction=float((alpha > 0).mean()),
        grad_min=float(gs.min()) if gs.size else math.nan,
        grad_max=float(gs.max()) if gs.size else math.nan,
        n_checked=int(sel.sum()),
        contour_alpha_max=float(alpha[zc].max()) if zc.any() else 0.0,
        max_grad_dev=float(np.abs(g[zc] - 1.0).max()) if zc.any() else math.nan,
        band_grad_min=float(gb.min()) if gb.size else math.nan,
        band_grad_max=float(gb.max()) if gb.size else math.nan,
        n_band=int(len(gb)),
    )
