"""
p-refinement on a fixed mesh
============================

Keep 16 x 16 elements and raise the polynomial degree. Degree 0 has no
polynomial to speak of, so it runs the first order finite-volume scheme on
one sub-cell per element.
"""

from lsreinit.harness import run_convergence_suite

rows = run_convergence_suite("ldg", cells=(16,), degrees=[0, 1, 2, 3, 4], eps=50.0)
for r in rows:
    print(f"N = {int(r.h)}: L1(phi) = {r.phi.l1:.3e}, L1(kappa) = {r.kappa.l1:.3e}, "
          f"{r.iterations} steps")
