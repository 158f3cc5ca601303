"""Discrete norms, Gram matrices, Hermitian eigenvalues and normal equations."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import MatrixError, ShapeError, SingularSystemError
from .spaces import basis_eval

HERMITIAN_TOL = 1e-12
JACOBI_TOL = 1e-12
SINGULAR_TOL = 1e-12


@dataclass(frozen=True)
class GramMatrix:
    """Hermitian matrix of discrete inner products ``<L_j, L_k>_X``."""

    entries: np.ndarray
    sample_size: int

    @property
    def n(self):
        return self.entries.shape[0]


def _entries(G):
    return G.entries if isinstance(G, GramMatrix) else np.asarray(G, dtype=complex)


def check_hermitian(A, tol=HERMITIAN_TOL):
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise MatrixError(f"expected a square matrix, got shape {A.shape}")
    scale = max(1.0, float(np.max(np.abs(A))) if A.size else 1.0)
    if np.max(np.abs(A - A.conj().T), initial=0.0) > tol * scale:
        raise MatrixError("matrix is not Hermitian within tolerance")
    return A


def jacobi_eigh(A, tol=JACOBI_TOL, max_sweeps=100):
    """Eigen-decomposition of a Hermitian matrix by cyclic Jacobi rotations.

    Returns ascending eigenvalues and the unitary matrix of eigenvectors
    (columns). Sweeps stop once the off-diagonal Frobenius norm drops below
    ``tol`` times ``max(1, ||A||_F)``.
    """
    A = check_hermitian(A).copy()
    n = A.shape[0]
    V = np.eye(n, dtype=complex)
    threshold = tol * max(1.0, np.linalg.norm(A))
    # entries this small cannot keep the off-diagonal norm above threshold
    negligible = threshold / (2 * n)
    for _ in range(max_sweeps):
        if np.linalg.norm(A - np.diag(np.diag(A))) <= threshold:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                mag = abs(apq)
                if mag <= negligible:
                    continue
                # phase makes the (p, q) entry real, then a real rotation zeroes it
                phase = apq / mag
                # t = sign(tau) / (|tau| + sqrt(1 + tau^2)), tau = half_gap / mag,
                # scaled through by mag so tiny entries cannot overflow tau
                half_gap = 0.5 * (A[q, q].real - A[p, p].real)
                t = (1.0 if half_gap >= 0 else -1.0) * mag / (abs(half_gap) + np.hypot(mag, half_gap))
                c = 1.0 / np.hypot(1.0, t)
                s = t * c
                R = np.array([[c, s], [-s * np.conj(phase), c * np.conj(phase)]])
                idx = [p, q]
                A[:, idx] = A[:, idx] @ R
                A[idx, :] = R.conj().T @ A[idx, :]
                A[p, q] = A[q, p] = 0.0
                V[:, idx] = V[:, idx] @ R
    else:
        raise MatrixError("Jacobi iteration did not converge")
    vals = np.diag(A).real
    order = np.argsort(vals, kind="stable")
    return vals[order], V[:, order]


def eigvalsh(G):
    """Ascending eigenvalues of a Hermitian matrix (Jacobi)."""
    return jacobi_eigh(_entries(G))[0]


def lambda_min(G) -> float:
    return float(eigvalsh(G)[0])


def lambda_max(G) -> float:
    return float(eigvalsh(G)[-1])


def spectral_distance_to_identity(G) -> float:
    """``||G - I||_2 = max_j |lambda_j(G) - 1|``."""
    return float(np.max(np.abs(eigvalsh(G) - 1.0)))


def gram(sample, space) -> GramMatrix:
    """``G_jk = (1/|X|) sum_i w_i L_j(x_i) conj(L_k(x_i))``."""
    V = basis_eval(space, sample.points)
    w = np.asarray(sample.weights, dtype=float)
    m = len(w)
    G = (V.T * w) @ np.conj(V) / m
    G = 0.5 * (G + G.conj().T)
    return GramMatrix(G, m)


def frame_vectors(sample, space):
    """Rows ``a_i = sqrt(w_i / m) (L_j(x_i))_j``, so ``G = A.T @ conj(A)`` for the ``(m, n)`` result."""
    V = basis_eval(space, sample.points)
    w = np.asarray(sample.weights, dtype=float)
    return V * np.sqrt(w / len(w))[:, None]


def discrete_norm_sq(sample, v) -> float:
    """``(1/m) sum_i w(x_i) |v(x_i)|^2``."""
    vals = np.asarray(v(np.asarray(sample.points)), dtype=complex)
    w = np.asarray(sample.weights, dtype=float)
    return float(np.mean(w * np.abs(vals) ** 2))


def rhs_vector(sample, space, values) -> np.ndarray:
    """``b_j = (1/m) sum_i w(x_i) L_j(x_i) conj(y_i)``."""
    values = np.asarray(values, dtype=complex)
    m = len(sample.points)
    if values.shape != (m,):
        raise ShapeError(f"expected {m} values, got shape {values.shape}")
    V = basis_eval(space, sample.points)
    w = np.asarray(sample.weights, dtype=float)
    return (V.T * w) @ np.conj(values) / m


def solve_normal_equations(G, b) -> np.ndarray:
    """Solve ``G a = b`` by Cholesky; singular systems raise."""
    A = check_hermitian(_entries(G))
    b = np.asarray(b, dtype=complex)
    if b.shape != (A.shape[0],):
        raise ShapeError(f"right-hand side has shape {b.shape}, expected ({A.shape[0]},)")
    lmin = lambda_min(A)
    if lmin <= SINGULAR_TOL:
        raise SingularSystemError(f"Gram matrix is singular (lambda_min = {lmin:.3e})")
    factor = scipy.linalg.cho_factor(A, lower=True)
    return scipy.linalg.cho_solve(factor, b)
