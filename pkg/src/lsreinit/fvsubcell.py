"""First-order finite-volume scheme on the equidistant sub-cells of each element.

Sub-cells are addressed globally as ``g = e * n**d + flat(i, j[, k])`` so a
sub-cell tensor of shape ``(K, n, .., n)`` flattens straight onto them.
"""

from dataclasses import dataclass

import numpy as np

from .ldg import GradientPair
from .mesh import _shape, map_points, tensor_index_grid

FULL, DIRECT, PINV, ZERO = 0, 1, 2, 3
TAG_NAMES = {FULL: "full", DIRECT: "direct", PINV: "pseudo-inverse", ZERO: "zero-gradient"}


class AssemblyError(RuntimeError):
    pass


@dataclass(eq=False)
class SubcellTopology:
    n_per_element: int
    centers: np.ndarray      # (Nc, d)
    neighbor: np.ndarray     # (Nc, d, 2) global sub-cell index, self on the boundary
    boundary: np.ndarray     # (Nc, d, 2) bool
    normal: np.ndarray       # (Nc, d_m, 2, d_i) outward unit normal of each sub-cell face
    volume: np.ndarray       # (Nc,)

    @property
    def n_cells(self):
        return len(self.centers)


@dataclass(eq=False)
class LsOperators:
    """Per sub-cell and physical direction i: one weight row over the reference jumps.

    ``sel_*[c, i, m]`` is True when the value on the +/- face of reference
    direction m is taken from the neighbour, False when it is the cell itself.
    """
    w_p: np.ndarray
    w_q: np.ndarray
    sel_plus_p: np.ndarray
    sel_minus_p: np.ndarray
    sel_plus_q: np.ndarray
    sel_minus_q: np.ndarray
    tag_p: np.ndarray        # (Nc, d) int8
    tag_q: np.ndarray
    # gather indices resolving the selections, (Nc, d, d_m)
    idx_plus_p: np.ndarray = None
    idx_minus_p: np.ndarray = None
    idx_plus_q: np.ndarray = None
    idx_minus_q: np.ndarray = None


def build_topology(space):
    mesh, ref, d, n = space.mesh, space.ref, space.dim, space.n
    K = mesh.n_elements
    npe = n ** d
    idx = tensor_index_grid(n, d)                               # (npe, d)
    centers_ref = ref.subcell_centers[idx]
    centers = map_points(mesh, centers_ref).reshape(K * npe, d)

    # sub-cell volumes: J is at most quadratic per direction, two Gauss points are exact
    g2, w2 = np.polynomial.legendre.leggauss(2)
    vol = np.zeros((K, npe))
    half = 1.0 / n
    for q in tensor_index_grid(2, d):
        pts = centers_ref + half * g2[q][None, :]
        _, dN = _shape(pts)
        A = np.einsum("pvm,kvi->kpim", dN, mesh.nodes[mesh.elements], optimize=True)
        vol += np.prod(w2[q]) * half ** d * np.linalg.det(A)
    volume = vol.reshape(-1)

    normal = np.empty((K, npe, d, 2, d))
    for m in range(d):
        for side in (0, 1):
            pts = centers_ref.copy()
            pts[:, m] = ref.subcell_bounds[idx[:, m] + side]
            _, dN = _shape(pts)
            A = np.einsum("pvm,kvi->kpim", dN, mesh.nodes[mesh.elements], optimize=True)
            g = np.linalg.det(A)[..., None] * np.linalg.inv(A)[..., m, :]
            normal[:, :, m, side] = (1.0 if side else -1.0) * g / np.linalg.norm(g, axis=-1, keepdims=True)
    normal = normal.reshape(K * npe, d, 2, d)

    strides = n ** np.arange(d - 1, -1, -1)
    own = np.arange(K)[:, None] * npe + np.arange(npe)[None, :]
    # face_cells[f][p]: local sub-cell touching local face f at face position p (C order)
    face_cells = np.array([np.flatnonzero(idx[:, f // 2] == (n - 1) * (f % 2)) for f in range(2 * d)])
    perm = space.metrics.face_perm
    nbr = np.empty((K, npe, d, 2), dtype=np.int64)
    bnd = np.zeros((K, npe, d, 2), dtype=bool)
    for m in range(d):
        for side in (0, 1):
            f = 2 * m + side
            target = own + (1 if side else -1) * strides[m]
            cells = face_cells[f]
            nb, nbf = mesh.neighbor[:, f], mesh.neighbor_face[:, f]
            inter = nb >= 0
            across = np.where(inter, nb, 0)[:, None] * npe + face_cells[np.where(inter, nbf, 0)[:, None], perm[:, f]]
            target[:, cells] = np.where(inter[:, None], across, own[:, cells])
            bnd[:, cells, m, side] = ~inter[:, None]
            nbr[:, :, m, side] = target
    return SubcellTopology(n, centers, nbr.reshape(K * npe, d, 2), bnd.reshape(K * npe, d, 2),
                           normal, volume)


def _selections(normal):
    """Donor choices for the upwind (p) and downwind (q) systems, shape (Nc, d_i, d_m)."""
    n_plus = np.swapaxes(normal[:, :, 1, :], 1, 2)
    n_minus = np.swapaxes(normal[:, :, 0, :], 1, 2)
    return (n_plus >= 0.0, n_minus >= 0.0), (n_plus < 0.0, n_minus < 0.0)


def _solve_rows(M, tol, cells):
    """Generalised inverse of each jump matrix ``M (G, d_m, d_k)`` after zero row/column deletion.

    Returns ``W (G, d_k, d_m)`` and a case tag per matrix and target column.
    """
    G, dm, dk = M.shape
    W = np.zeros((G, dk, dm))
    tags = np.full((G, dk), ZERO, dtype=np.int8)
    nz = np.abs(M) >= tol
    row_ok = nz.any(axis=2)
    col_ok = nz.any(axis=1)
    code = (row_ok * (1 << np.arange(dm))).sum(1) + ((col_ok * (1 << np.arange(dk))).sum(1) << dm)
    for c in np.unique(code):
        g = np.flatnonzero(code == c)
        rows = np.flatnonzero(row_ok[g[0]])
        cols = np.flatnonzero(col_ok[g[0]])
        r, k = rows.size, cols.size
        if r == 0 or k == 0:
            continue
        A = M[g][:, rows][:, :, cols]                       # (G', r, k)
        if r >= k:
            B = np.einsum("gri,grj->gij", A, A)
            case = FULL
        else:
            B = np.einsum("gir,gjr->gij", A, A)
            case = PINV
        ev = np.linalg.eigvalsh(B)                          # B is symmetric positive semi-definite
        with np.errstate(divide="ignore", invalid="ignore"):
            cond = ev[:, -1] / ev[:, 0]
        bad = np.flatnonzero(~np.isfinite(cond) | (cond <= 0) | (cond > 1e14))
        if bad.size:
            raise AssemblyError(
                f"singular least-squares system at sub-cell {cells[g[bad[0]]]} "
                f"(rows {rows.tolist()}, columns {cols.tolist()})")
        Binv = np.linalg.inv(B)
        if r >= k:
            Wr = np.einsum("gij,grj->gir", Binv, A)           # (M^T M)^-1 M^T
        else:
            Wr = np.einsum("gri,grj->gij", A, Binv)            # M^T (M M^T)^-1, shape (G', k, r)
        if r == k:
            single = (nz[g][:, rows][:, :, cols].sum(axis=2) == 1).all(axis=1) & \
                     (nz[g][:, rows][:, :, cols].sum(axis=1) == 1).all(axis=1)
            case_g = np.where(single, DIRECT, FULL)
        else:
            case_g = np.full(g.size, case)
        sub = np.zeros((g.size, dk, dm))
        sub[:, cols[:, None], rows[None, :]] = Wr
        W[g] = sub
        tags[g[:, None], cols[None, :]] = case_g[:, None]
    return W, tags


def build_ls_operators(space, topo):
    """Upwind/downwind least-squares weights for every sub-cell (a one-time preprocessing pass)."""
    d = space.dim
    x = topo.centers
    Nc = len(x)
    xn = x[topo.neighbor]                                        # (Nc, d_m, 2, d_k)
    tol = 1e-13 * space.l_ref
    (sp_p, sm_p), (sp_q, sm_q) = _selections(topo.normal)
    out = {}
    for name, sp, sm in (("p", sp_p, sm_p), ("q", sp_q, sm_q)):
        w = np.empty((Nc, d, d))
        tag = np.empty((Nc, d), dtype=np.int8)
        chunk = 65536
        for s in range(0, Nc, chunk):
            c = slice(s, min(s + chunk, Nc))
            xc = x[c][:, None, None, :]
            plus = np.where(sp[c][..., None], xn[c][:, None, :, 1, :], xc)
            minus = np.where(sm[c][..., None], xn[c][:, None, :, 0, :], xc)
            M = (plus - minus).reshape(-1, d, d)                 # (n*d_i, d_m, d_k)
            cells = np.repeat(np.arange(c.start, c.stop), d)
            W, t = _solve_rows(M, tol, cells)
            W = W.reshape(-1, d, d, d)                           # (n, d_i, d_k, d_m)
            t = t.reshape(-1, d, d)
            ii = np.arange(d)
            w[c] = W[:, ii, ii, :]                               # row i of the system for direction i
            tag[c] = t[:, ii, ii]
        out[name] = (w, tag)
    own = np.arange(Nc)[:, None, None]
    nb_plus, nb_minus = topo.neighbor[:, None, :, 1], topo.neighbor[:, None, :, 0]
    idx = {k: np.where(sel, nb, own) for k, sel, nb in (
        ("pp", sp_p, nb_plus), ("mp", sm_p, nb_minus), ("pq", sp_q, nb_plus), ("mq", sm_q, nb_minus))}
    return LsOperators(
        w_p=out["p"][0], w_q=out["q"][0],
        sel_plus_p=sp_p, sel_minus_p=sm_p, sel_plus_q=sp_q, sel_minus_q=sm_q,
        tag_p=out["p"][1], tag_q=out["q"][1],
        idx_plus_p=idx["pp"], idx_minus_p=idx["mp"], idx_plus_q=idx["pq"], idx_minus_q=idx["mq"],
    )


def subcell_index(space, elems):
    npe = space.n ** space.dim
    return (np.asarray(elems)[:, None] * npe + np.arange(npe)[None, :]).reshape(-1)


def fv_gradients(space, means, elems=None):
    """One-sided least-squares gradients ``p = W+ [phi+]``, ``q = W- [phi-]`` on sub-cells."""
    ops = space.ls_operators
    flat = means.reshape(-1)
    cells = slice(None) if elems is None else subcell_index(space, elems)

    def grad(w, ip, im):
        return np.einsum("cim,cim->ci", w[cells], flat[ip[cells]] - flat[im[cells]])

    p = grad(ops.w_p, ops.idx_plus_p, ops.idx_minus_p)
    q = grad(ops.w_q, ops.idx_plus_q, ops.idx_minus_q)
    k = space.n_elements if elems is None else len(elems)
    shape = (k,) + (space.n,) * space.dim + (space.dim,)
    return GradientPair(p.reshape(shape), q.reshape(shape))
