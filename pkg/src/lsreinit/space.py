from functools import cached_property

from .basis import build_reference_element
from .mesh import compute_metrics


class Space:
    """A mesh together with its reference element and metrics.

    Sub-cell topology and least-squares operators are assembled lazily on
    first use and cached, since pure LDG runs never need them.
    """

    def __init__(self, mesh, N):
        self.mesh = mesh
        self.ref = build_reference_element(N)
        self.metrics = compute_metrics(mesh, self.ref)

    @property
    def dim(self):
        return self.mesh.dim

    @property
    def N(self):
        return self.ref.N

    @property
    def n(self):
        return self.ref.n

    @property
    def n_elements(self):
        return self.mesh.n_elements

    @property
    def tensor_shape(self):
        return (self.n_elements,) + (self.n,) * self.dim

    @property
    def l_ref(self):
        return self.metrics.l_ref

    @cached_property
    def topology(self):
        from .fvsubcell import build_topology
        return build_topology(self)

    @cached_property
    def ls_operators(self):
        from .fvsubcell import build_ls_operators
        return build_ls_operators(self, self.topology)

    @cached_property
    def central_ls(self):
        from .geometry import build_central_ls
        return build_central_ls(self.topology)

    def __repr__(self):
        return f"Space(dim={self.dim}, K={self.n_elements}, N={self.N})"
