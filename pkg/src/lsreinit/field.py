"""Nodal level-set storage with sub-cell mean cache and frozen smoothed sign."""

import numpy as np

from .basis import project_tensor


class FieldError(ValueError):
    pass


class LevelSetField:
    """Per-element nodal values of the level set on a :class:`~lsreinit.space.Space`.

    ``phi`` is never written in place by callers; use :meth:`set_values` so
    the per-element mean cache stays coherent.
    """

    def __init__(self, space, phi):
        phi = np.array(phi, dtype=float)
        if phi.shape != space.tensor_shape:
            raise FieldError(f"field shape {phi.shape} does not match {space.tensor_shape}")
        self.space = space
        self._phi = phi
        self._means = np.zeros_like(phi)
        self.means_valid = np.zeros(space.n_elements, dtype=bool)
        self.active = np.ones(space.n_elements, dtype=bool)
        self.cutoff = None
        self.sign_nodes = None
        self.sign_subcells = None

    @property
    def phi(self):
        return self._phi

    def set_values(self, phi, elems=None):
        if elems is None:
            self._phi = np.array(phi, dtype=float)
            self.means_valid[:] = False
        else:
            self._phi[elems] = phi
            self.means_valid[elems] = False

    def subcell_means(self):
        stale = np.flatnonzero(~self.means_valid)
        if stale.size:
            self._means[stale] = project_tensor(self.space.ref, self._phi[stale], self.space.dim)
            self.means_valid[stale] = True
        return self._means

    def copy(self):
        new = LevelSetField(self.space, self._phi)
        new.active = self.active.copy()
        new.cutoff = self.cutoff
        new.sign_nodes = self.sign_nodes
        new.sign_subcells = self.sign_subcells
        return new

    @property
    def signs_frozen(self):
        return self.sign_nodes is not None


def init_analytic(space, f):
    """Collocate ``f(x, y[, z])`` at the mapped Gauss nodes of every element."""
    x = space.metrics.x
    vals = np.asarray(f(*np.moveaxis(x, -1, 0)), dtype=float)
    vals = np.broadcast_to(vals, space.tensor_shape).copy()
    bad = ~np.isfinite(vals)
    if bad.any():
        e = int(np.flatnonzero(bad.reshape(space.n_elements, -1).any(axis=1))[0])
        raise FieldError(f"initial function is not finite in element {e}")
    return LevelSetField(space, vals)


def apply_cutoff(field, cutoff):
    """Clip to ``[-cutoff, cutoff]`` and flag elements lying fully outside the band."""
    if not cutoff > 0:
        raise FieldError(f"cut-off must be positive, got {cutoff}")
    clipped = np.clip(field.phi, -cutoff, cutoff)
    field.set_values(clipped)
    field.cutoff = float(cutoff)
    field.active = band_mask(field.space, clipped, cutoff)
    return field


def band_mask(space, phi, cutoff, halo=True):
    """Elements carrying part of the narrow band.

    An element belongs to the band if some value lies strictly inside
    ``(-cutoff, cutoff)``, if its values change sign, or if a face neighbour
    has the opposite mean sign (a jump between saturated elements). With
    *halo* the face neighbours of those elements are added as well.
    """
    K = space.n_elements
    v = phi.reshape(K, -1)
    if cutoff is None:
        return np.ones(K, dtype=bool)
    core = (np.abs(v) < cutoff).any(axis=1) | ((v.min(axis=1) < 0) & (v.max(axis=1) > 0))
    sgn = np.sign(v.mean(axis=1))
    nb = space.mesh.neighbor
    inner = nb >= 0
    nbs = np.where(inner, sgn[np.where(inner, nb, 0)], sgn[:, None])
    core |= (nbs * sgn[:, None] < 0).any(axis=1)
    if not halo:
        return core
    out = core.copy()
    for f in range(nb.shape[1]):
        ok = inner[:, f]
        out[ok] |= core[nb[ok, f]]
    return out


def smoothed_sign(phi, eps, l_ref):
    return phi / np.sqrt(phi * phi + eps * l_ref)


def freeze_sign(field, eps, l_ref=None):
    """Store the smoothed sign at nodes and sub-cells; allowed once per field."""
    if field.signs_frozen:
        raise FieldError("sign has already been frozen for this field")
    if not eps > 0:
        raise FieldError(f"eps must be positive, got {eps}")
    if l_ref is None:
        l_ref = field.space.l_ref
    if not l_ref > 0:
        raise FieldError(f"l_ref must be positive, got {l_ref}")
    field.sign_nodes = smoothed_sign(field.phi, eps, l_ref)
    field.sign_subcells = smoothed_sign(field.subcell_means(), eps, l_ref)
    field.sign_nodes.setflags(write=False)
    field.sign_subcells.setflags(write=False)
    return field
