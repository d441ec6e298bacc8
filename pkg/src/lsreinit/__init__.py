"""Level-set reinitialization with an LDG scheme regularized by finite-volume sub-cells."""

from .field import LevelSetField, apply_cutoff, freeze_sign, init_analytic
from .geometry import curvature
from .harness import benchmark_check, get_case, run_case, run_convergence_suite
from .mesh import Mesh, generate_cartesian, generate_perturbed, read_mesh, write_mesh
from .space import Space
from .timeint import TimeConfig, reinitialize

__all__ = [
    "LevelSetField", "Mesh", "Space", "TimeConfig",
    "apply_cutoff", "benchmark_check", "curvature", "freeze_sign", "generate_cartesian",
    "generate_perturbed", "get_case", "init_analytic", "read_mesh", "reinitialize",
    "run_case", "run_convergence_suite", "write_mesh",
]
