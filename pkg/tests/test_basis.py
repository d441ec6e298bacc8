import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lsreinit.basis import (apply_along, build_reference_element, derivative_matrix,
                            lagrange_matrix, modal_to_nodal, nodal_to_modal,
                            orthonormal_legendre, project_dg_to_fv, project_tensor,
                            reconstruct_fv_to_dg, reconstruct_tensor)


@pytest.mark.parametrize("N", range(0, 8))
def test_quadrature_exact_to_degree_2N_plus_1(N):
    ref = build_reference_element(N)
    for k in range(2 * N + 2):
        exact = 0.0 if k % 2 else 2.0 / (k + 1)
        assert abs(ref.weights @ ref.nodes ** k - exact) < 1e-13


def test_quadrature_not_exact_beyond():
    ref = build_reference_element(2)
    k = 6
    assert abs(ref.weights @ ref.nodes ** k - 2.0 / 7) > 1e-6


@pytest.mark.parametrize("N", [1, 3, 6])
def test_derivative_matrix_exact_on_polynomials(N):
    ref = build_reference_element(N)
    x = ref.nodes
    for k in range(N + 1):
        d = k * x ** (k - 1) if k else np.zeros_like(x)
        assert np.allclose(ref.D @ x ** k, d, atol=1e-11)


def test_derivative_rows_sum_to_zero():
    ref = build_reference_element(5)
    assert np.abs(ref.D.sum(axis=1)).max() < 1e-12


@pytest.mark.parametrize("N", range(0, 9))
def test_vandermonde_pair_inverse(N):
    ref = build_reference_element(N)
    assert np.allclose(ref.V @ ref.Vinv, np.eye(N + 1), atol=1e-12)


def test_orthonormal_legendre_is_orthonormal():
    N = 6
    ref = build_reference_element(10)
    L = orthonormal_legendre(ref.nodes, N)
    G = L.T @ (ref.weights[:, None] * L)
    assert np.allclose(G, np.eye(N + 1), atol=1e-12)


@pytest.mark.parametrize("N", range(0, 9))
def test_projection_reconstruction_identity(N):
    ref = build_reference_element(N)
    assert np.allclose(ref.P @ ref.R, np.eye(N + 1), atol=1e-10)
    assert np.allclose(ref.R @ ref.P, np.eye(N + 1), atol=1e-10)


def test_projection_of_constant_and_linear():
    ref = build_reference_element(4)
    c = np.full(5, 2.5)
    assert np.allclose(ref.P @ c, 2.5)
    # sub-cell means of a linear function are its values at sub-cell centers
    assert np.allclose(ref.P @ ref.nodes, ref.subcell_centers, atol=1e-14)


def test_subcells_are_equidistant():
    ref = build_reference_element(3)
    assert np.allclose(np.diff(ref.subcell_bounds), 0.5)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 7), st.integers(0, 2 ** 31 - 1))
def test_conservation_of_element_mean(N, seed):
    ref = build_reference_element(N)
    u = np.random.default_rng(seed).normal(size=N + 1)
    mean_dg = ref.weights @ u / 2.0
    mean_fv = project_dg_to_fv(ref, u).mean()
    assert abs(mean_dg - mean_fv) < 1e-12
    back = reconstruct_fv_to_dg(ref, project_dg_to_fv(ref, u))
    assert np.allclose(back, u, atol=1e-10)


def test_tensor_projection_conserves_2d_mean():
    ref = build_reference_element(3)
    u = np.random.default_rng(1).normal(size=(5, 4, 4))
    w = np.outer(ref.weights, ref.weights) / 4.0
    m = project_tensor(ref, u, 2)
    assert np.allclose((u * w).sum(axis=(1, 2)), m.mean(axis=(1, 2)), atol=1e-12)
    assert np.allclose(reconstruct_tensor(ref, m, 2), u, atol=1e-10)


def test_modal_roundtrip():
    ref = build_reference_element(4)
    u = np.random.default_rng(2).normal(size=(3, 5))
    assert np.allclose(modal_to_nodal(ref, nodal_to_modal(ref, u)), u)


def test_lagrange_matrix_interpolates():
    nodes = build_reference_element(3).nodes
    x = np.array([-1.0, 0.3, nodes[1], 1.0])
    L = lagrange_matrix(nodes, x)
    assert np.allclose(L @ nodes ** 3, x ** 3)
    assert np.allclose(L[2], np.eye(4)[1])


def test_derivative_matrix_standalone():
    nodes = np.array([-1.0, 0.0, 1.0])
    D = derivative_matrix(nodes)
    assert np.allclose(D @ nodes ** 2, 2 * nodes)


def test_apply_along_checks_extent():
    with pytest.raises(ValueError):
        apply_along(np.eye(3), np.zeros((2, 4)), 1)


@pytest.mark.parametrize("N", [-1, 11])
def test_degree_range(N):
    with pytest.raises(ValueError):
        build_reference_element(N)


def test_strong_derivative_relation():
    # Dhat is the weak-form derivative: w_a Dhat[a, i] = -w_i D[i, a]
    ref = build_reference_element(4)
    w = ref.weights
    assert np.allclose(w[:, None] * ref.Dhat, -(w[:, None] * ref.D).T)
