"""
Three ways to get a curvature
=============================

Given a nodal level set, the normal is the normalized gradient and the
curvature its divergence. The gradient can come from the element
polynomial alone, from a BR1 lifting that sees the neighbours, or from a
central least-squares fit on the sub-cell means. We compare them on the
exact distance function of a circle.
"""

import numpy as np

from lsreinit.field import init_analytic
from lsreinit.geometry import curvature
from lsreinit.harness import error_norms, exclusion_mask, get_case
from lsreinit.mesh import generate_perturbed
from lsreinit.space import Space

case = get_case("circle")
for cells in (8, 16, 32):
    sp = Space(generate_perturbed((0, 0), (1, 1), (cells, cells), amplitude=0.15, seed=3), 3)
    phi = init_analytic(sp, case.exact).phi
    keep = exclusion_mask(sp, (0.5, 0.5), kappa_box=(0.375, 0.625))
    line = [f"{cells:3d}^2"]
    for method in ("direct", "br1", "central-ls"):
        cv = curvature(sp, phi, method)
        e = error_norms(sp, np.abs(cv.kappa), case.exact_kappa, keep, where=cv.location)
        line.append(f"{method}: {e.l1:.2e}")
    print("  ".join(line))
