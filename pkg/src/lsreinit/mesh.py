"""Quadrilateral / hexahedral meshes, face connectivity and mapping metrics.

Element node ordering follows the VTK convention: counterclockwise in 2D,
bottom face then top face (both counterclockwise) in 3D.  Local faces are
numbered ``f = 2*m + side`` where ``m`` is the reference direction and
``side`` is 0 for ``xi_m = -1`` and 1 for ``xi_m = +1``.
"""

from dataclasses import dataclass, field
import itertools

import numpy as np

from .basis import ReferenceElement


class MeshError(ValueError):
    """Malformed mesh input or invalid geometry."""


CORNERS = {
    2: np.array([[-1, -1], [1, -1], [1, 1], [-1, 1]], dtype=float),
    3: np.array([[-1, -1, -1], [1, -1, -1], [1, 1, -1], [-1, 1, -1],
                 [-1, -1, 1], [1, -1, 1], [1, 1, 1], [-1, 1, 1]], dtype=float),
}

# local vertex indices of each local face, order irrelevant (matched as sets)
FACE_VERTICES = {
    2: [(0, 3), (1, 2), (0, 1), (3, 2)],
    3: [(0, 3, 7, 4), (1, 2, 6, 5), (0, 1, 5, 4), (3, 2, 6, 7), (0, 1, 2, 3), (4, 5, 6, 7)],
}


@dataclass(eq=False)
class Mesh:
    """Conforming straight-sided quad/hex mesh with face neighbours.

    ``neighbor[e, f]`` is the element across local face ``f`` (``-1`` on the
    boundary) and ``neighbor_face[e, f]`` its local face id.
    """
    dim: int
    nodes: np.ndarray
    elements: np.ndarray
    neighbor: np.ndarray = field(init=False)
    neighbor_face: np.ndarray = field(init=False)
    structured: bool = False

    def __post_init__(self):
        self.nodes = np.ascontiguousarray(self.nodes, dtype=float)
        self.elements = np.ascontiguousarray(self.elements, dtype=np.int64)
        if self.dim not in (2, 3):
            raise MeshError(f"dimension must be 2 or 3, got {self.dim}")
        if self.nodes.ndim != 2 or self.nodes.shape[1] != self.dim:
            raise MeshError(f"node array must have shape (n, {self.dim})")
        nv = 2 ** self.dim
        if self.elements.ndim != 2 or self.elements.shape[1] != nv:
            raise MeshError(f"elements must have {nv} node indices each")
        bad = np.flatnonzero(((self.elements < 0) | (self.elements >= len(self.nodes))).any(axis=1))
        if bad.size:
            raise MeshError(f"element {bad[0]} references a node index out of range")
        self._connect()
        self._check_orientation()

    @property
    def n_elements(self):
        return len(self.elements)

    @property
    def n_faces_per_element(self):
        return 2 * self.dim

    @property
    def boundary(self):
        return self.neighbor < 0

    def _connect(self):
        K, nf = self.n_elements, 2 * self.dim
        fv = np.array(FACE_VERTICES[self.dim])
        keys = np.sort(self.elements[:, fv], axis=2).reshape(K * nf, -1)
        order = np.lexsort(keys.T[::-1])
        sk = keys[order]
        same = (sk[1:] == sk[:-1]).all(axis=1)
        if (same[1:] & same[:-1]).any():
            i = np.flatnonzero(same[1:] & same[:-1])[0]
            raise MeshError(f"face shared by more than two elements (element {order[i] // nf})")
        nb = -np.ones(K * nf, dtype=np.int64)
        a, b = order[:-1][same], order[1:][same]
        nb[a], nb[b] = b, a
        self.neighbor = np.where(nb >= 0, nb // nf, -1).reshape(K, nf)
        self.neighbor_face = np.where(nb >= 0, nb % nf, -1).reshape(K, nf)

    def _check_orientation(self):
        J = element_jacobians(self, CORNERS[self.dim] * (1 - 1e-12))
        det = np.linalg.det(J)
        bad = np.flatnonzero((det <= 0).any(axis=1))
        if bad.size:
            raise MeshError(f"element {bad[0]} is inverted or degenerate (nonpositive Jacobian)")

    def faces(self):
        """Unique faces as ``(e0, f0, e1, f1)``; ``e1 = f1 = -1`` on the boundary."""
        out = []
        for e in range(self.n_elements):
            for f in range(2 * self.dim):
                nb = self.neighbor[e, f]
                if nb < 0:
                    out.append((e, f, -1, -1))
                elif e < nb:
                    out.append((e, f, nb, self.neighbor_face[e, f]))
        return out

    def element_diameters(self):
        v = self.nodes[self.elements]
        d = v[:, :, None, :] - v[:, None, :, :]
        return np.sqrt((d ** 2).sum(-1)).max(axis=(1, 2))

    def vertex_barycenters(self):
        return self.nodes[self.elements].mean(axis=1)


def _shape(xi):
    """Multilinear shape functions and their reference gradients at points *xi* (P, d)."""
    xi = np.atleast_2d(xi)
    d = xi.shape[1]
    c = CORNERS[d]
    fac = 0.5 * (1.0 + xi[:, None, :] * c[None, :, :])    # (P, nv, d)
    N = fac.prod(axis=2)
    dN = np.empty(fac.shape)
    for m in range(d):
        others = np.delete(fac, m, axis=2).prod(axis=2)
        dN[:, :, m] = 0.5 * c[None, :, m] * others
    return N, dN


def map_points(mesh, xi):
    """Physical coordinates ``(K, P, d)`` of reference points *xi* in every element."""
    N, _ = _shape(xi)
    return np.einsum("pv,kvi->kpi", N, mesh.nodes[mesh.elements], optimize=True)


def element_jacobians(mesh, xi):
    """``A[k, p, i, m] = dx_i/dxi_m``; column m is the covariant vector a_m."""
    _, dN = _shape(xi)
    return np.einsum("pvm,kvi->kpim", dN, mesh.nodes[mesh.elements], optimize=True)


def _check_box(lo, hi, counts):
    lo, hi = np.asarray(lo, dtype=float), np.asarray(hi, dtype=float)
    counts = [int(c) for c in counts]
    if len(counts) not in (2, 3) or lo.shape != (len(counts),) or hi.shape != lo.shape:
        raise ValueError("box corners and counts must all have dimension 2 or 3")
    if any(c < 1 for c in counts):
        raise ValueError(f"element counts must be >= 1, got {counts}")
    if np.any(hi <= lo):
        raise ValueError("degenerate box")
    return lo, hi, counts


def generate_cartesian(lo, hi, counts):
    """Structured mesh of ``prod(counts)`` axis-aligned elements on the box [lo, hi]."""
    lo, hi, counts = _check_box(lo, hi, counts)
    d = len(counts)
    axes = [np.linspace(lo[i], hi[i], counts[i] + 1) for i in range(d)]
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)
    npts = [c + 1 for c in counts]
    idx = np.arange(grid.shape[0]).reshape(npts)

    starts = np.stack(np.meshgrid(*[np.arange(c) for c in counts], indexing="ij"), -1).reshape(-1, d)
    corners = ((CORNERS[d] + 1) // 2).astype(int)
    elems = np.empty((len(starts), 2 ** d), dtype=np.int64)
    for v, off in enumerate(corners):
        elems[:, v] = idx[tuple((starts + off).T)]
    return Mesh(d, grid, elems, structured=True)


def generate_perturbed(lo, hi, counts, amplitude=0.2, seed=0):
    """Cartesian mesh with interior nodes jittered by up to ``amplitude*h`` per axis.

    Boundary nodes only slide along their boundary so the box stays intact.
    """
    base = generate_cartesian(lo, hi, counts)
    lo, hi = np.asarray(lo, float), np.asarray(hi, float)
    h = (hi - lo) / np.asarray(counts)
    rng = np.random.default_rng(seed)
    x = base.nodes.copy()
    jit = rng.uniform(-amplitude, amplitude, size=x.shape) * h
    on_bnd = np.isclose(x, lo) | np.isclose(x, hi)
    jit[on_bnd] = 0.0
    return Mesh(base.dim, x + jit, base.elements, structured=False)


def read_mesh(text):
    """Parse the ``lsmesh`` text format.

    Format::

        lsmesh 1 <d>
        nodes <count>
        <x> <y> [<z>]          (count lines)
        elements <count>
        <i0> ... <i3|i7>       (count lines, 0-based)
    """
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    it = iter(enumerate(lines, 1))

    def take(what):
        try:
            return next(it)
        except StopIteration:
            raise MeshError(f"unexpected end of file while reading {what}") from None

    _, head = take("header")
    tok = head.split()
    if len(tok) != 3 or tok[0] != "lsmesh" or tok[1] != "1" or tok[2] not in ("2", "3"):
        raise MeshError(f"bad header {head!r}, expected 'lsmesh 1 <2|3>'")
    d = int(tok[2])

    def section(name, width, conv):
        lineno, ln = take(f"'{name}' section")
        t = ln.split()
        if len(t) != 2 or t[0] != name or not t[1].isdigit():
            raise MeshError(f"line {lineno}: expected '{name} <count>', got {ln!r}")
        rows = []
        for i in range(int(t[1])):
            lineno, ln = take(f"{name} entry {i}")
            vals = ln.split()
            if len(vals) != width:
                raise MeshError(f"line {lineno}: {name[:-1]} {i} needs {width} values, got {len(vals)}")
            try:
                rows.append([conv(v) for v in vals])
            except ValueError:
                raise MeshError(f"line {lineno}: cannot parse {name[:-1]} {i}: {ln!r}") from None
        return rows

    nodes = np.array(section("nodes", d, float), dtype=float).reshape(-1, d)
    elems = np.array(section("elements", 2 ** d, int), dtype=np.int64).reshape(-1, 2 ** d)
    rest = list(it)
    if rest:
        raise MeshError(f"line {rest[0][0]}: unexpected content after elements section")
    if not np.isfinite(nodes).all():
        raise MeshError("non-finite node coordinate")
    return Mesh(d, nodes, elems)


def write_mesh(mesh):
    out = [f"lsmesh 1 {mesh.dim}", f"nodes {len(mesh.nodes)}"]
    out += [" ".join(repr(float(v)) for v in x) for x in mesh.nodes]
    out.append(f"elements {mesh.n_elements}")
    out += [" ".join(str(int(v)) for v in e) for e in mesh.elements]
    return "\n".join(out) + "\n"


def _tensor_points(pts1d, d):
    """Tensor grid of 1D points, first axis slowest: shape (n**d, d)."""
    g = np.meshgrid(*([pts1d] * d), indexing="ij")
    return np.stack(g, axis=-1).reshape(-1, d)


def face_points(ref_pts, d, f):
    """Reference coordinates of the tensor points on local face *f*."""
    m, side = divmod(f, 2)
    sub = _tensor_points(ref_pts, d - 1) if d > 1 else np.zeros((1, 0))
    return np.insert(sub, m, -1.0 if side == 0 else 1.0, axis=1)


@dataclass(eq=False)
class Metrics:
    """Mapping metrics of every element, arrays indexed by element first.

    Volume arrays have tensor shape ``(K, n, ..., n)`` (``d`` node axes);
    face arrays are ``(K, 2d, P)`` with ``P = n**(d-1)`` face points.
    """
    x: np.ndarray            # (K, n.., d) node coordinates
    J: np.ndarray            # (K, n..)
    cov: np.ndarray          # (K, n.., d_i, d_m) covariant a_m as columns
    contra: np.ndarray       # (K, n.., d_m, d_i) contravariant a^m as rows
    Ja: np.ndarray           # J * contra
    volume: np.ndarray       # (K,)
    dx: np.ndarray           # (K,) characteristic length
    barycenter: np.ndarray   # (K, d)
    face_x: np.ndarray       # (K, 2d, P, d)
    normal: np.ndarray       # (K, 2d, P, d) outward unit normals
    surf_J: np.ndarray       # (K, 2d, P) surface element
    face_perm: np.ndarray    # (K, 2d, P) matching point index on the neighbour face

    @property
    def l_ref(self):
        d = self.x.shape[-1]
        return float(np.min(self.volume ** (1.0 / d)))


def compute_metrics(mesh, ref):
    if not isinstance(ref, ReferenceElement):
        raise TypeError("ref must be a ReferenceElement")
    d, K, n = mesh.dim, mesh.n_elements, ref.n
    tshape = (K,) + (n,) * d
    xi = _tensor_points(ref.nodes, d)

    x = map_points(mesh, xi).reshape(tshape + (d,))
    cov = element_jacobians(mesh, xi)
    J = np.linalg.det(cov)
    if np.any(J <= 0):
        e = int(np.flatnonzero((J <= 0).any(axis=1))[0])
        raise MeshError(f"element {e} is inverted (nonpositive Jacobian)")
    contra = np.linalg.inv(cov)
    Ja = J[..., None, None] * contra

    w = _tensor_points(ref.weights, d).prod(axis=1)
    volume = (w[None, :] * J).sum(axis=1)
    barycenter = np.einsum("kp,kpi->ki", w[None, :] * J, x.reshape(K, -1, d)) / volume[:, None]
    mag = np.linalg.norm(contra, axis=-1)                        # (K, P, d_m)
    mean_mag = (w[None, :, None] * mag).sum(axis=1) / w.sum()
    dx = 2.0 / mean_mag.sum(axis=1)

    nf, P = 2 * d, n ** (d - 1)
    face_x = np.empty((K, nf, P, d))
    normal = np.empty((K, nf, P, d))
    surf_J = np.empty((K, nf, P))
    for f in range(nf):
        m, side = divmod(f, 2)
        fp = face_points(ref.nodes, d, f)
        face_x[:, f] = map_points(mesh, fp)
        A = element_jacobians(mesh, fp)
        Jf = np.linalg.det(A)
        g = Jf[..., None] * np.linalg.inv(A)[:, :, m, :]
        s = np.linalg.norm(g, axis=-1)
        surf_J[:, f] = s
        normal[:, f] = (1.0 if side else -1.0) * g / s[..., None]

    face_perm = _match_faces(mesh, face_x)

    return Metrics(
        x=x, J=J.reshape(tshape), cov=cov.reshape(tshape + (d, d)),
        contra=contra.reshape(tshape + (d, d)), Ja=Ja.reshape(tshape + (d, d)),
        volume=volume, dx=dx, barycenter=barycenter,
        face_x=face_x, normal=normal, surf_J=surf_J, face_perm=face_perm,
    )


def _match_faces(mesh, face_x):
    K, nf, P, _ = face_x.shape
    perm = np.broadcast_to(np.arange(P), (K, nf, P)).copy()
    e, f = np.nonzero(mesh.neighbor >= 0)
    if e.size == 0:
        return perm
    chunk = 8192
    for s in range(0, e.size, chunk):
        ec, fc = e[s:s + chunk], f[s:s + chunk]
        mine = face_x[ec, fc]
        theirs = face_x[mesh.neighbor[ec, fc], mesh.neighbor_face[ec, fc]]
        dist = np.linalg.norm(mine[:, :, None, :] - theirs[:, None, :, :], axis=-1)
        if P > 1:
            scale = np.linalg.norm(mine[:, 0] - mine[:, -1], axis=-1)
            gap = dist.min(axis=2).max(axis=1)
            bad = np.flatnonzero(gap > 1e-8 * scale)
            if bad.size:
                i = bad[0]
                raise MeshError(f"non-conforming face at element {ec[i]}, local face {fc[i]}")
        perm[ec, fc] = dist.argmin(axis=2)
    return perm


def tensor_index_grid(n, d):
    """All multi-indices of an n**d tensor in C order."""
    return np.array(list(itertools.product(range(n), repeat=d)), dtype=np.int64).reshape(-1, d)
