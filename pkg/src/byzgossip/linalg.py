"""Small dense symmetric eigen-solvers and the spectral pseudo-inverse."""

import numpy as np

JACOBI_TOL = 1e-12
PINV_RTOL = 1e-10


def jacobi_eigh(A, tol=JACOBI_TOL, max_sweeps=100):
    """Cyclic Jacobi eigendecomposition of a real symmetric matrix.

    Sweeps over all (p, q) pairs until the off-diagonal Frobenius norm falls
    below ``tol * ||A||_F``.

    Returns:
        (w, V) with ascending eigenvalues ``w`` and orthonormal columns ``V``.
    """
    A = np.array(A, dtype=np.float64)
    n = A.shape[0]
    if A.shape != (n, n):
        raise ValueError("matrix must be square")
    if not np.allclose(A, A.T, rtol=0, atol=1e-12 * max(1.0, np.abs(A).max(initial=0))):
        raise ValueError("matrix must be symmetric")
    V = np.eye(n)
    scale = np.linalg.norm(A)
    if scale == 0.0:
        return np.zeros(n), V
    for _ in range(max_sweeps):
        off = np.linalg.norm(A - np.diag(np.diag(A)))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if abs(apq) <= 1e-300:
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                t = np.copysign(1.0, theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                ap = A[:, p].copy()
                aq = A[:, q].copy()
                A[:, p] = c * ap - s * aq
                A[:, q] = s * ap + c * aq
                ap = A[p, :].copy()
                aq = A[q, :].copy()
                A[p, :] = c * ap - s * aq
                A[q, :] = s * ap + c * aq
                vp = V[:, p].copy()
                vq = V[:, q].copy()
                V[:, p] = c * vp - s * vq
                V[:, q] = s * vp + c * vq
    else:
        raise RuntimeError("Jacobi iteration did not converge")
    w = np.diag(A).copy()
    order = np.argsort(w, kind="stable")
    return w[order], V[:, order]


def symmetric_eigh(A, method="lapack"):
    """Ascending eigenpairs of a symmetric matrix via LAPACK or cyclic Jacobi."""
    if method == "lapack":
        return np.linalg.eigh(np.asarray(A, dtype=np.float64))
    if method == "jacobi":
        return jacobi_eigh(A)
    raise ValueError(f"unknown eigen-solver {method!r}")


def spectral_pinv(w, V, rtol=PINV_RTOL):
    """Moore-Penrose inverse from an eigendecomposition, dropping |w| <= rtol * max|w|."""
    cutoff = rtol * np.abs(w).max(initial=0.0)
    inv = np.zeros_like(w)
    keep = np.abs(w) > cutoff
    inv[keep] = 1.0 / w[keep]
    return (V * inv) @ V.T
