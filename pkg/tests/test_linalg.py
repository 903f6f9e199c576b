import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from byzgossip.linalg import jacobi_eigh, spectral_pinv, symmetric_eigh


def random_symmetric(rng, n):
    A = rng.standard_normal((n, n))
    return (A + A.T) / 2


@pytest.mark.parametrize("n", [1, 2, 5, 12])
def test_jacobi_matches_lapack(rng, n):
    A = random_symmetric(rng, n)
    w, V = jacobi_eigh(A)
    np.testing.assert_allclose(w, np.linalg.eigvalsh(A), atol=1e-10)
    np.testing.assert_allclose(V.T @ V, np.eye(n), atol=1e-10)
    np.testing.assert_allclose(V @ np.diag(w) @ V.T, A, atol=1e-10)


def test_jacobi_on_k3_laplacian():
    L = np.array([[2, -1, -1], [-1, 2, -1], [-1, -1, 2]], dtype=float)
    w, _ = jacobi_eigh(L)
    np.testing.assert_allclose(w, [0, 3, 3], atol=1e-12)


def test_jacobi_zero_matrix():
    w, V = jacobi_eigh(np.zeros((3, 3)))
    assert np.all(w == 0) and np.array_equal(V, np.eye(3))


def test_jacobi_rejects_non_symmetric():
    with pytest.raises(ValueError):
        jacobi_eigh(np.array([[1.0, 2.0], [0.0, 1.0]]))
    with pytest.raises(ValueError):
        jacobi_eigh(np.ones((2, 3)))


def test_symmetric_eigh_unknown_method():
    with pytest.raises(ValueError):
        symmetric_eigh(np.eye(2), method="qr")


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 8), st.integers(0, 2**31 - 1))
def test_spectral_pinv_is_moore_penrose(n, seed):
    rng = np.random.default_rng(seed)
    B = rng.standard_normal((n, n - 1))
    A = B @ B.T  # rank n-1, like a connected Laplacian
    w, V = symmetric_eigh(A)
    P = spectral_pinv(w, V)
    np.testing.assert_allclose(A @ P @ A, A, atol=1e-8 * max(1, np.abs(A).max()))
    np.testing.assert_allclose(P @ A @ P, P, atol=1e-8 * max(1, np.abs(P).max()))
    np.testing.assert_allclose(P, np.linalg.pinv(A), atol=1e-8 * max(1, np.abs(P).max()))
