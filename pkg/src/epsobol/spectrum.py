"""Eigendecomposition and truncated-SVD regularised inverse."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SYMMETRY_TOL = 1e-10


@dataclass(frozen=True)
class SpectralDecomposition:
    eigenvalues: np.ndarray  # descending
    eigenvectors: np.ndarray  # columns

    def reconstruct(self) -> np.ndarray:
        P = self.eigenvectors
        return (P * self.eigenvalues) @ P.T


@dataclass(frozen=True)
class RegularizedInverse:
    gamma_hat: np.ndarray
    rank: int
    threshold: float


def eigh(matrix) -> SpectralDecomposition:
    """Symmetric eigendecomposition with eigenvalues in descending order.

    Eigenvector signs are fixed so that the largest-magnitude component of
    each vector is positive.
    """
    a = np.asarray(matrix, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("square matrix expected")
    if np.max(np.abs(a - a.T), initial=0.0) > SYMMETRY_TOL:
        raise ValueError("matrix is not symmetric")
    w, P = np.linalg.eigh(a)
    order = np.argsort(w)[::-1]
    w, P = w[order], P[:, order]
    pivot = np.argmax(np.abs(P), axis=0)
    signs = np.sign(P[pivot, np.arange(P.shape[1])])
    signs[signs == 0] = 1.0
    return SpectralDecomposition(w, P * signs)


def tsvd_inverse(decomposition: SpectralDecomposition, t: float) -> RegularizedInverse:
    """``P diag(g_t(lambda)) P^T`` with ``g_t(l) = 1/l`` if ``l > t`` else 0."""
    if t < 0:
        raise ValueError("threshold must be >= 0")
    lam = np.clip(decomposition.eigenvalues, 0.0, None)
    keep = lam > t
    g = np.zeros_like(lam)
    g[keep] = 1.0 / lam[keep]
    P = decomposition.eigenvectors
    gamma = (P * g) @ P.T
    gamma = (gamma + gamma.T) / 2
    return RegularizedInverse(gamma, int(keep.sum()), float(t))


def default_tau(n: int) -> float:
    return 0.1 * n ** (-1.0 / 3.0)


def threshold_rule(decomposition: SpectralDecomposition, n: int, tau: float | None = None) -> float:
    """``t = tau_n * lambda_1`` with ``tau_n = 0.1 n^(-1/3)`` unless overridden."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if tau is None:
        tau = default_tau(n)
    if not 0 <= tau < 1:
        raise ValueError("tau must lie in [0, 1)")
    lam1 = max(float(decomposition.eigenvalues[0]), 0.0)
    return tau * lam1
