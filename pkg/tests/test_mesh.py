import numpy as np
import pytest

from lsreinit.basis import build_reference_element
from lsreinit.mesh import (Mesh, MeshError, compute_metrics, generate_cartesian,
                           generate_perturbed, read_mesh, write_mesh)


def test_cartesian_connectivity_2d():
    m = generate_cartesian((0, 0), (1, 1), (3, 2))
    assert m.n_elements == 6
    assert m.boundary.sum() == 2 * (3 + 2)
    for e in range(m.n_elements):
        for f in range(4):
            nb = m.neighbor[e, f]
            if nb >= 0:
                assert m.neighbor[nb, m.neighbor_face[e, f]] == e


def test_cartesian_connectivity_3d():
    m = generate_cartesian((0, 0, 0), (1, 1, 1), (2, 2, 2))
    assert m.boundary.sum() == 6 * 4
    # opposite local faces face each other on a Cartesian grid
    e, f = np.nonzero(m.neighbor >= 0)
    assert np.all(m.neighbor_face[e, f] == f ^ 1)


def test_metrics_cartesian_2d():
    h = 1.0 / 16
    m = generate_cartesian((0, 0), (1, 1), (16, 16))
    met = compute_metrics(m, build_reference_element(3))
    assert np.allclose(met.J, (h / 2) ** 2)
    assert np.allclose(met.dx, h / 2)
    assert np.isclose(met.l_ref, h)
    assert np.isclose(met.volume.sum(), 1.0)


def test_metrics_cartesian_3d():
    h = 0.5
    m = generate_cartesian((0, 0, 0), (1, 1, 1), (2, 2, 2))
    met = compute_metrics(m, build_reference_element(2))
    assert np.allclose(met.dx, h / 3)
    assert np.isclose(met.volume.sum(), 1.0)


def test_metrics_perturbed_area_and_normals():
    m = generate_perturbed((0, 0), (2, 1), (6, 5), amplitude=0.25, seed=3)
    met = compute_metrics(m, build_reference_element(4))
    assert np.isclose(met.volume.sum(), 2.0)
    assert np.allclose(np.linalg.norm(met.normal, axis=-1), 1.0)
    # normals on a shared face are opposite at matched points
    e, f = np.nonzero(m.neighbor >= 0)
    nb, nf = m.neighbor[e, f], m.neighbor_face[e, f]
    theirs = met.normal[nb, nf][np.arange(len(e))[:, None], met.face_perm[e, f]]
    assert np.allclose(met.normal[e, f], -theirs, atol=1e-12)


def test_perturbed_keeps_boundary():
    m = generate_perturbed((0, 0), (1, 1), (5, 5), amplitude=0.3, seed=1)
    x = m.nodes
    on = np.isclose(x[:, 0], 0) | np.isclose(x[:, 0], 1) | np.isclose(x[:, 1], 0) | np.isclose(x[:, 1], 1)
    assert on.sum() == 20
    assert not m.structured


def test_roundtrip_text_format():
    m = generate_perturbed((0, 0, 0), (1, 1, 1), (2, 3, 2), amplitude=0.1)
    back = read_mesh(write_mesh(m))
    assert np.array_equal(back.elements, m.elements)
    assert np.allclose(back.nodes, m.nodes)


@pytest.mark.parametrize("text,msg", [
    ("", "end of file"),
    ("mesh 1 2\n", "bad header"),
    ("lsmesh 1 2\nnodes 2\n0 0\n", "end of file"),
    ("lsmesh 1 2\nnodes 1\n0 zero\nelements 0\n", "line 3"),
    ("lsmesh 1 2\nnodes 4\n0 0\n1 0\n1 1\n0 1\nelements 1\n0 1 2 9\n", "out of range"),
    ("lsmesh 1 2\nnodes 4\n0 0\n1 0\n1 1\n0 1\nelements 1\n0 3 2 1\n", "inverted"),
    ("lsmesh 1 2\nnodes 4\n0 0\n1 0\n1 1\n0 1\nelements 1\n0 1 2\n", "needs 4 values"),
])
def test_read_mesh_errors(text, msg):
    with pytest.raises(MeshError, match=msg):
        read_mesh(text)


def test_face_shared_three_times():
    nodes = np.array([[0, 0], [1, 0], [1, 1], [0, 1], [2, 0], [2, 1], [-1, 0], [-1, 1]], float)
    # three quads all claiming the edge 1-2
    elems = [[0, 1, 2, 3], [1, 4, 5, 2], [1, 4, 5, 2]]
    with pytest.raises(MeshError, match="more than two"):
        Mesh(2, nodes, elems)


def test_generator_arguments():
    with pytest.raises(ValueError):
        generate_cartesian((0, 0), (1, 1), (0, 3))
    with pytest.raises(ValueError):
        generate_cartesian((0, 0), (0, 1), (2, 2))
