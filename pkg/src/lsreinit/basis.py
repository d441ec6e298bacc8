"""One-dimensional reference-element operators on [-1, 1].

Everything multidimensional is built from these by applying the 1D
matrices line-wise along each tensor axis (see :func:`apply_along`).
"""

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import legendre

MAX_DEGREE = 10


def lagrange_matrix(nodes, x):
    """Return ``L[k, j] = l_j(x[k])`` for the Lagrange basis on *nodes*.

    Uses the barycentric form, so it is stable for the small degrees used
    here and exact (to roundoff) when ``x`` coincides with a node.
    """
    nodes = np.asarray(nodes, dtype=float)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    n = nodes.size
    diff = nodes[:, None] - nodes[None, :]
    np.fill_diagonal(diff, 1.0)
    bw = 1.0 / diff.prod(axis=1)

    out = np.empty((x.size, n))
    for k, xk in enumerate(x):
        d = xk - nodes
        hit = np.flatnonzero(d == 0.0)
        if hit.size:
            out[k] = 0.0
            out[k, hit[0]] = 1.0
        else:
            t = bw / d
            out[k] = t / t.sum()
    return out


def derivative_matrix(nodes):
    """``D[i, j] = l_j'(nodes[i])``."""
    nodes = np.asarray(nodes, dtype=float)
    n = nodes.size
    diff = nodes[:, None] - nodes[None, :]
    np.fill_diagonal(diff, 1.0)
    bw = 1.0 / diff.prod(axis=1)
    D = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            if i != j:
                D[i, j] = bw[j] / bw[i] / (nodes[i] - nodes[j])
        D[i, i] = -D[i].sum()
    return D


def orthonormal_legendre(x, N):
    """Orthonormal Legendre polynomials ``L_k(x)``, k = 0..N, as columns."""
    V = legendre.legvander(np.asarray(x, dtype=float), N)
    return V * np.sqrt((2.0 * np.arange(N + 1) + 1.0) / 2.0)


@dataclass(frozen=True, eq=False)
class ReferenceElement:
    N: int
    nodes: np.ndarray
    weights: np.ndarray
    D: np.ndarray
    V: np.ndarray
    Vinv: np.ndarray
    P: np.ndarray
    R: np.ndarray
    subcell_bounds: np.ndarray
    subcell_centers: np.ndarray
    #: Lagrange basis evaluated at xi = -1 and xi = +1
    l_minus: np.ndarray
    l_plus: np.ndarray
    #: weak-form derivative ``Dhat[a, i] = -w_i D[i, a] / w_a``
    Dhat: np.ndarray

    @property
    def n(self):
        return self.N + 1


def build_reference_element(N):
    if not isinstance(N, (int, np.integer)) or not 0 <= N <= MAX_DEGREE:
        raise ValueError(f"polynomial degree must be an integer in [0, {MAX_DEGREE}], got {N!r}")
    N = int(N)
    nodes, weights = legendre.leggauss(N + 1)
    D = derivative_matrix(nodes)
    V = orthonormal_legendre(nodes, N)
    Vinv = np.linalg.inv(V)

    bounds = np.linspace(-1.0, 1.0, N + 2)
    centers = 0.5 * (bounds[:-1] + bounds[1:])
    # sub-cell mean of each Lagrange polynomial, Gauss rule per sub-cell (exact for degree N)
    P = np.empty((N + 1, N + 1))
    for k in range(N + 1):
        a, b = bounds[k], bounds[k + 1]
        xq = 0.5 * (a + b) + 0.5 * (b - a) * nodes
        P[k] = 0.5 * weights @ lagrange_matrix(nodes, xq)
    R = np.linalg.inv(P)

    l_minus = lagrange_matrix(nodes, [-1.0])[0]
    l_plus = lagrange_matrix(nodes, [1.0])[0]
    Dhat = -(weights[None, :] * D.T) / weights[:, None]

    return ReferenceElement(
        N=N, nodes=nodes, weights=weights, D=D, V=V, Vinv=Vinv, P=P, R=R,
        subcell_bounds=bounds, subcell_centers=centers,
        l_minus=l_minus, l_plus=l_plus, Dhat=Dhat,
    )


def apply_along(mat, u, axis):
    """Apply the matrix *mat* to every line of *u* along *axis*."""
    u = np.asarray(u)
    if u.shape[axis] != mat.shape[1]:
        raise ValueError(
            f"extent mismatch: axis {axis} has length {u.shape[axis]}, operator expects {mat.shape[1]}")
    out = np.tensordot(mat, u, axes=([1], [axis]))
    return np.moveaxis(out, 0, axis)


def nodal_to_modal(ref, nodal, axis=-1):
    return apply_along(ref.Vinv, nodal, axis)


def modal_to_nodal(ref, modal, axis=-1):
    return apply_along(ref.V, modal, axis)


def project_dg_to_fv(ref, nodal, axis=-1):
    """Sub-cell means of the nodal polynomial along one line direction."""
    return apply_along(ref.P, nodal, axis)


def reconstruct_fv_to_dg(ref, means, axis=-1):
    return apply_along(ref.R, means, axis)


def project_tensor(ref, u, ndim, first_axis=1):
    """DG -> FV on a full tensor, line-wise over *ndim* axes starting at *first_axis*."""
    for ax in range(first_axis, first_axis + ndim):
        u = apply_along(ref.P, u, ax)
    return u


def reconstruct_tensor(ref, u, ndim, first_axis=1):
    for ax in range(first_axis, first_axis + ndim):
        u = apply_along(ref.R, u, ax)
    return u
