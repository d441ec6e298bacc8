import numpy as np
import pytest

from lsreinit.fvsubcell import DIRECT, FULL, PINV, ZERO, _solve_rows, fv_gradients
from lsreinit.mesh import Mesh, generate_cartesian
from lsreinit.space import Space


def _grid_view(space):
    """Sub-cell tensor -> 2D array ordered by (x, y) barycentre position."""
    c = space.topology.centers
    h = space.l_ref / space.n
    ij = np.rint((c - c.min(axis=0)) / h).astype(int)
    return ij


def test_cartesian_reduces_to_one_sided_differences():
    sp = Space(generate_cartesian((0, 0), (1, 1), (3, 3)), 2)
    rng = np.random.default_rng(0)
    means = rng.normal(size=sp.tensor_shape)
    g = fv_gradients(sp, means)
    ij = _grid_view(sp)
    m = ij.max() + 1
    u = np.zeros((m, m))
    u[ij[:, 0], ij[:, 1]] = means.reshape(-1)
    h = 1.0 / m
    fwd = np.zeros((m, m))
    bwd = np.zeros((m, m))
    fwd[1:-1] = (u[2:] - u[1:-1]) / h
    bwd[1:-1] = (u[1:-1] - u[:-2]) / h
    p = np.zeros((m, m))
    q = np.zeros((m, m))
    p[ij[:, 0], ij[:, 1]] = g.p[..., 0].reshape(-1)
    q[ij[:, 0], ij[:, 1]] = g.q[..., 0].reshape(-1)
    assert np.allclose(p[1:-1], fwd[1:-1], atol=1e-13 / h)
    assert np.allclose(q[1:-1], bwd[1:-1], atol=1e-13 / h)
    assert np.all(sp.ls_operators.tag_p[(ij[:, 0] > 0) & (ij[:, 0] < m - 1), 0] == DIRECT)


def test_hand_three_cells():
    # one element of width 3 at N = 2 has unit sub-cells
    sp = Space(generate_cartesian((0, 0), (3, 3), (1, 1)), 2)
    means = np.tile(np.array([1.0, 2.0, 4.0])[:, None], (1, 3))[None]
    g = fv_gradients(sp, means)
    # neighbour across the +x face is the forward donor
    assert np.isclose(g.p[0, 1, 1, 0], 2.0)
    assert np.isclose(g.q[0, 1, 1, 0], 1.0)


def _skewed_space():
    nodes = np.array([[0, 0], [1, 0.2], [2.1, 0], [0.1, 1], [1.2, 1.1], [2, 1.3],
                      [0, 2], [1.1, 2.2], [2.2, 2]], float)
    elems = [[0, 1, 4, 3], [1, 2, 5, 4], [3, 4, 7, 6], [4, 5, 8, 7]]
    return Space(Mesh(2, nodes, elems), 3)


def test_linear_exact_on_skewed_mesh():
    sp = _skewed_space()
    c = sp.topology.centers
    means = (2 * c[:, 0] + 3 * c[:, 1]).reshape(sp.tensor_shape)
    g = fv_gradients(sp, means)
    ops = sp.ls_operators
    inner = ~sp.topology.boundary.reshape(len(c), -1).any(axis=1)
    for pair, tag in ((g.p, ops.tag_p), (g.q, ops.tag_q)):
        # the minimum-norm pseudo-inverse rows are not exact, the other cases are
        ok = inner[:, None] & ((tag == FULL) | (tag == DIRECT))
        err = np.abs(pair.reshape(-1, 2) - [2, 3])
        assert ok.sum() > 0
        assert err[ok].max() < 1e-11
    assert (ops.tag_p == FULL).any()


def test_constant_zero():
    sp = _skewed_space()
    g = fv_gradients(sp, np.full(sp.tensor_shape, -1.3))
    assert np.abs(g.p).max() < 1e-12 and np.abs(g.q).max() < 1e-12


def test_solve_rows_cases():
    M = np.array([
        [[1.0, 0.2], [0.3, 1.0]],     # full
        [[0.5, 0.0], [0.0, 2.0]],     # one datum per direction
        [[1.0, 1.0], [0.0, 0.0]],     # one row, two unknowns
        [[0.0, 0.0], [0.0, 0.0]],     # no information
    ])
    W, tags = _solve_rows(M, 1e-13, np.arange(4))
    assert np.allclose(W[0] @ M[0], np.eye(2))
    assert list(tags[0]) == [FULL, FULL]
    assert list(tags[1]) == [DIRECT, DIRECT]
    assert np.allclose(W[1], np.diag([2.0, 0.5]))
    assert list(tags[2]) == [PINV, PINV]
    assert np.allclose(M[2] @ W[2] @ M[2], M[2])     # generalised inverse
    assert list(tags[3]) == [ZERO, ZERO] and not W[3].any()


def test_reflection_swaps_donors():
    sp = Space(generate_cartesian((0, 0), (1, 1), (2, 2)), 2)
    spm = Space(generate_cartesian((-1, 0), (0, 1), (2, 2)), 2)
    f = lambda x, y: np.sin(4 * x) + y ** 2
    c, cm = sp.topology.centers, spm.topology.centers
    g = fv_gradients(sp, f(c[:, 0], c[:, 1]).reshape(sp.tensor_shape))
    gm = fv_gradients(spm, f(-cm[:, 0], cm[:, 1]).reshape(spm.tensor_shape))
    ia = np.lexsort(np.round(c, 10).T)
    ib = np.lexsort(np.round(cm * [-1, 1], 10).T)
    assert np.allclose(g.p.reshape(-1, 2)[ia, 0], -gm.q.reshape(-1, 2)[ib, 0], atol=1e-10)
