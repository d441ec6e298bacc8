"""Normals and curvature of a level set.

Three gradient flavours are offered: the element-local chain rule
(``direct``), the lifted gradient with the central flux (``br1``) and a
central least-squares fit over the face neighbours of every sub-cell
(``central-ls``). Curvature is the divergence of the normalised gradient,
computed with the same flavour applied to each normal component.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .basis import project_tensor
from .ldg import br1_gradient, direct_gradient

METHODS = ("direct", "br1", "central-ls")
GRADIENT_FLOOR = 1e-10


@dataclass(eq=False)
class CentralLs:
    weights: np.ndarray      # (Nc, d_i, d, 2) weight of each face neighbour jump
    degenerate: np.ndarray   # (Nc,) bool, fewer than d independent offsets


@dataclass
class CurvatureField:
    gradient: np.ndarray
    normal: np.ndarray
    kappa: np.ndarray
    valid: np.ndarray
    location: str            # "nodes" or "subcells"


def build_central_ls(topo):
    """Least-squares weights over all existing face neighbours of each sub-cell."""
    x = topo.centers
    Nc, d = x.shape
    off = x[topo.neighbor] - x[:, None, None, :]                 # (Nc, d, 2, d)
    off = np.where(topo.boundary[..., None], 0.0, off).reshape(Nc, 2 * d, d)
    B = np.einsum("crk,crl->ckl", off, off)
    rank = np.linalg.matrix_rank(B)
    degenerate = rank < d
    W = np.zeros((Nc, d, 2 * d))
    ok = np.flatnonzero(~degenerate)
    if ok.size:
        W[ok] = np.einsum("ckl,crl->ckr", np.linalg.inv(B[ok]), off[ok])
    if degenerate.any():
        warnings.warn(f"{int(degenerate.sum())} sub-cells have fewer than {d} independent "
                      "neighbour offsets; their central gradient is set to zero",
                      RuntimeWarning, stacklevel=2)
    return CentralLs(W.reshape(Nc, d, d, 2), degenerate)


def central_ls_gradient(space, means):
    """Central least-squares gradient of sub-cell means ``(K, n.., )`` -> ``(K, n.., d)``."""
    topo, ls = space.topology, space.central_ls
    flat = means.reshape(-1)
    jump = flat[topo.neighbor] - flat[:, None, None]             # boundary jumps vanish
    g = np.einsum("cimk,cmk->ci", ls.weights, jump)
    return g.reshape(means.shape + (space.dim,))


def _gradient(space, u, method):
    if method == "direct":
        return direct_gradient(space, u)
    if method == "br1":
        return br1_gradient(space, u)
    return central_ls_gradient(space, u)


def curvature(space, phi, method="br1"):
    """Normal field and ``kappa = div(grad phi / |grad phi|)``.

    For ``central-ls`` the nodal field is first projected onto the sub-cell
    means and the result lives on sub-cells. Points whose gradient falls
    below ``1e-10 / l_ref`` are flagged invalid and get zero normal and
    curvature.
    """
    if method not in METHODS:
        raise ValueError(f"unknown gradient method {method!r}, expected one of {METHODS}")
    d = space.dim
    u = project_tensor(space.ref, phi, d) if method == "central-ls" else phi
    g = _gradient(space, u, method)
    mag = np.linalg.norm(g, axis=-1)
    valid = mag > GRADIENT_FLOOR / space.l_ref
    normal = np.where(valid[..., None], g / np.where(valid, mag, 1.0)[..., None], 0.0)
    kappa = np.zeros_like(mag)
    for i in range(d):
        kappa += _gradient(space, np.ascontiguousarray(normal[..., i]), method)[..., i]
    kappa = np.where(valid, kappa, 0.0)
    return CurvatureField(g, normal, kappa, valid,
                          "subcells" if method == "central-ls" else "nodes")
