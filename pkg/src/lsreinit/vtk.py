"""Legacy ASCII VTK output of the sub-cell lattice of every element."""

import numpy as np

from .basis import apply_along, lagrange_matrix, project_tensor
from .mesh import CORNERS, map_points, tensor_index_grid

VTK_QUAD, VTK_HEX = 9, 12


def _lattice_values(space, u, alpha):
    """Values of nodal data *u* at the (n+1)^d sub-cell corner points of each element.

    Elements with ``alpha == 1`` show their sub-cell means instead (each
    corner gets the average of the sub-cells of that element touching it).
    """
    ref, d, n = space.ref, space.dim, space.n
    L = lagrange_matrix(ref.nodes, ref.subcell_bounds)          # (n+1, n)
    out = u
    for m in range(d):
        out = apply_along(L, out, 1 + m)
    fv = np.flatnonzero(alpha >= 1.0) if alpha is not None else np.array([], dtype=int)
    if fv.size:
        means = project_tensor(ref, u[fv], d)
        A = np.zeros((n + 1, n))                                # corner <- adjacent sub-cells
        for c in range(n + 1):
            adj = [s for s in (c - 1, c) if 0 <= s < n]
            A[c, adj] = 1.0 / len(adj)
        v = means
        for m in range(d):
            v = apply_along(A, v, 1 + m)
        out[fv] = v
    return out


def write_vtk(space, path, point_data=None, cell_data=None, alpha=None, title="lsreinit"):
    """Write an UNSTRUCTURED_GRID file; every element becomes n^d quads/hexahedra.

    *point_data* maps names to nodal tensors ``(K, n.., )``; *cell_data* maps
    names to per-element arrays, repeated on each sub-cell.
    """
    ref, d, n, K = space.ref, space.dim, space.n, space.n_elements
    point_data = point_data or {}
    cell_data = cell_data or {}
    for name, v in point_data.items():
        if np.shape(v) != space.tensor_shape:
            raise ValueError(f"point field {name!r} has shape {np.shape(v)}, expected {space.tensor_shape}")
    for name, v in cell_data.items():
        if np.shape(v) != (K,):
            raise ValueError(f"cell field {name!r} has shape {np.shape(v)}, expected ({K},)")

    lat = tensor_index_grid(n + 1, d)                           # (P, d), C order
    pts = map_points(space.mesh, ref.subcell_bounds[lat])       # (K, P, d)
    P = len(lat)
    if d == 2:
        pts = np.concatenate([pts, np.zeros((K, P, 1))], axis=-1)
    strides = (n + 1) ** np.arange(d - 1, -1, -1)
    corner_off = ((CORNERS[d] + 1) / 2).astype(int)             # VTK vertex order
    sub = tensor_index_grid(n, d)                               # (C, d)
    local = ((sub[:, None, :] + corner_off[None]) * strides).sum(-1)   # (C, 2^d)
    conn = (np.arange(K)[:, None, None] * P + local[None]).reshape(-1, 2 ** d)
    C = len(conn)

    lines = ["# vtk DataFile Version 3.0", title, "ASCII", "DATASET UNSTRUCTURED_GRID",
             f"POINTS {K * P} double"]
    lines += [" ".join(f"{c:.12g}" for c in p) for p in pts.reshape(-1, 3)]
    lines.append(f"CELLS {C} {C * (2 ** d + 1)}")
    lines += [f"{2 ** d} " + " ".join(map(str, row)) for row in conn]
    lines.append(f"CELL_TYPES {C}")
    lines += [str(VTK_QUAD if d == 2 else VTK_HEX)] * C
    if point_data:
        lines.append(f"POINT_DATA {K * P}")
        for name, v in point_data.items():
            vals = _lattice_values(space, np.asarray(v, dtype=float), alpha).reshape(-1)
            lines += [f"SCALARS {name} double 1", "LOOKUP_TABLE default"]
            lines += [f"{x:.12g}" for x in vals]
    if cell_data:
        lines.append(f"CELL_DATA {C}")
        for name, v in cell_data.items():
            vals = np.repeat(np.asarray(v, dtype=float), n ** d)
            lines += [f"SCALARS {name} double 1", "LOOKUP_TABLE default"]
            lines += [f"{x:.12g}" for x in vals]
    text = "\n".join(lines) + "\n"
    try:
        with open(path, "w") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write VTK file {path}: {exc}") from exc
    return text


def write_level_set(space, fld, path, alpha=None, kappa_method="br1"):
    """Convenience wrapper exporting phi, |grad phi|, kappa and fv_ratio."""
    from .geometry import curvature
    cv = curvature(space, fld.phi, kappa_method)
    K = space.n_elements
    a = np.zeros(K) if alpha is None else np.asarray(alpha, dtype=float)
    return write_vtk(space, path,
                     point_data={"phi": fld.phi,
                                 "grad_abs": np.linalg.norm(cv.gradient, axis=-1),
                                 "kappa": cv.kappa},
                     cell_data={"fv_ratio": a}, alpha=a)
