"""Gradients of the nodal level set via the lifting weak form.

Upwind/downwind fluxes give the one-sided pair (p, q) for the Godunov
Hamiltonian; the central (BR1) flux gives a single gradient used for
normals and curvature.
"""

from dataclasses import dataclass

import numpy as np

from .basis import apply_along


@dataclass
class GradientPair:
    p: np.ndarray   # (..., d): uses the neighbour value on faces with n_i >= 0
    q: np.ndarray   # (..., d): uses the neighbour value on faces with n_i < 0


def face_traces(space, u):
    """Interpolate *u* ``(K, n.., *extra)`` to all face points: ``(K, 2d, P, *extra)``."""
    ref, d = space.ref, space.dim
    K = u.shape[0]
    extra = u.shape[1 + d:]
    out = np.empty((K, 2 * d, space.n ** (d - 1)) + extra)
    for m in range(d):
        out[:, 2 * m] = np.tensordot(u, ref.l_minus, axes=([1 + m], [0])).reshape((K, -1) + extra)
        out[:, 2 * m + 1] = np.tensordot(u, ref.l_plus, axes=([1 + m], [0])).reshape((K, -1) + extra)
    return out


def exterior_traces(space, traces, elems=None):
    """Neighbour-side traces matched to each face point; boundary faces mirror the interior."""
    mesh, met = space.mesh, space.metrics
    nb, nbf, perm = mesh.neighbor, mesh.neighbor_face, met.face_perm
    if elems is not None:
        nb, nbf, perm = nb[elems], nbf[elems], perm[elems]
        own = np.asarray(elems)[:, None]
    else:
        own = np.arange(mesh.n_elements)[:, None]
    bnd = nb < 0
    e = np.where(bnd, own, nb)
    f = np.where(bnd, np.arange(2 * space.dim)[None, :], nbf)
    return traces[e[:, :, None], f[:, :, None], perm]


def _volume_term(space, phi, elems):
    d, ref = space.dim, space.ref
    Ja = space.metrics.Ja if elems is None else space.metrics.Ja[elems]
    out = 0.0
    for m in range(d):
        F = Ja[..., m, :] * phi[..., None]
        out = out + apply_along(ref.Dhat, F, 1 + m)
    return out


def _lift(space, flux):
    """Distribute face fluxes ``(k, 2d, P, c)`` into the volume with the collocated mass matrix."""
    d, n, ref = space.dim, space.n, space.ref
    k, c = flux.shape[0], flux.shape[-1]
    out = np.zeros((k,) + (n,) * d + (c,))
    lifts = (ref.l_minus / ref.weights, ref.l_plus / ref.weights)
    for f in range(2 * d):
        m, side = divmod(f, 2)
        g = flux[:, f].reshape((k,) + (n,) * (d - 1) + (c,))
        g = np.expand_dims(g, 1 + m)
        shape = [1] * (d + 2)
        shape[1 + m] = n
        out += lifts[side].reshape(shape) * g
    return out


def _prepare(space, phi, elems):
    tr = face_traces(space, phi)
    ext = exterior_traces(space, tr, elems)
    if elems is not None:
        tr, phi_e = tr[elems], phi[elems]
        normal, sJ, J = (space.metrics.normal[elems], space.metrics.surf_J[elems],
                         space.metrics.J[elems])
    else:
        phi_e = phi
        normal, sJ, J = space.metrics.normal, space.metrics.surf_J, space.metrics.J
    return phi_e, tr, ext, normal, sJ, J


def _finish(space, vol, star, normal, sJ, J):
    flux = star * normal * sJ[..., None]
    return (vol + _lift(space, flux)) / J[..., None]


def ldg_gradients(space, phi, elems=None):
    """Upwind/downwind LDG gradients of the nodal field *phi*.

    If *elems* is given, only those elements are computed (neighbour traces
    are still read from the full field).
    """
    phi_e, tr, ext, normal, sJ, J = _prepare(space, phi, elems)
    vol = _volume_term(space, phi_e, None if elems is None else elems)
    up = normal >= 0.0
    t_int, t_ext = tr[..., None], ext[..., None]
    p = _finish(space, vol, np.where(up, t_ext, t_int), normal, sJ, J)
    q = _finish(space, vol, np.where(up, t_int, t_ext), normal, sJ, J)
    return GradientPair(p, q)


def br1_gradient(space, phi, elems=None):
    """Gradient with the central flux ``(phi_int + phi_ext) / 2``."""
    phi_e, tr, ext, normal, sJ, J = _prepare(space, phi, elems)
    vol = _volume_term(space, phi_e, None if elems is None else elems)
    star = (0.5 * (tr + ext))[..., None]
    return _finish(space, vol, star, normal, sJ, J)


def direct_gradient(space, phi):
    """Element-local chain rule ``grad phi = sum_m a^m d(phi)/d(xi_m)``."""
    d, ref = space.dim, space.ref
    out = 0.0
    for m in range(d):
        dphi = apply_along(ref.D, phi, 1 + m)
        out = out + space.metrics.contra[..., m, :] * dphi[..., None]
    return out
