"""Godunov numerical Hamiltonian and the semi-discrete right-hand sides."""

from dataclasses import dataclass

import numpy as np

from .basis import reconstruct_tensor
from .fvsubcell import fv_gradients
from .ldg import ldg_gradients


@dataclass(frozen=True)
class HamiltonianConfig:
    eps: float
    l_ref: float

    def __post_init__(self):
        if not self.eps > 0:
            raise ValueError(f"eps must be positive, got {self.eps}")
        if not self.l_ref > 0:
            raise ValueError(f"l_ref must be positive, got {self.l_ref}")


def godunov(p, q, s):
    """``s * (G - 1)`` with the Godunov upwind selection of the gradient pair.

    *p* and *q* have the spatial components on their last axis; *s* is the
    frozen smoothed sign broadcast against ``p[..., 0]``.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    s = np.asarray(s, dtype=float)
    pp, pm = np.maximum(p, 0.0), np.minimum(p, 0.0)
    qp, qm = np.maximum(q, 0.0), np.minimum(q, 0.0)
    neg = np.maximum(pp * pp, qm * qm).sum(axis=-1)    # sign <= 0 branch: a_m, b_m
    pos = np.maximum(pm * pm, qp * qp).sum(axis=-1)    # sign > 0 branch: c_m, d_m
    G = np.sqrt(np.where(s <= 0.0, neg, pos))
    return s * (G - 1.0)


def _scatter(shape, elems, vals):
    out = np.zeros(shape)
    if elems is None:
        out[...] = vals
    else:
        out[elems] = vals
    return out


def rhs_ldg(space, field, elems=None):
    """``dphi/dtau = -H(p_LDG, q_LDG)`` at the nodes; zero outside *elems*."""
    g = ldg_gradients(space, field.phi, elems)
    s = field.sign_nodes if elems is None else field.sign_nodes[elems]
    return _scatter(space.tensor_shape, elems, -godunov(g.p, g.q, s))


def rhs_fv_subcells(space, field, elems=None):
    """FV update of the sub-cell means (sub-cell tensor layout)."""
    means = field.subcell_means()
    g = fv_gradients(space, means, elems)
    s = field.sign_subcells if elems is None else field.sign_subcells[elems]
    return _scatter(space.tensor_shape, elems, -godunov(g.p, g.q, s))


def rhs_fv(space, field, elems=None):
    """FV sub-cell update mapped back to nodal coefficients."""
    sub = rhs_fv_subcells(space, field, elems)
    if elems is None:
        return reconstruct_tensor(space.ref, sub, space.dim)
    out = np.zeros_like(sub)
    out[elems] = reconstruct_tensor(space.ref, sub[elems], space.dim)
    return out
