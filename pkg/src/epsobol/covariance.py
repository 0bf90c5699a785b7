"""Delta-method covariance of the empirical xi process at a finite design."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Design, Sample, SubsetMask, eta_hat, empirical_moment, influence_vectors


def splice(x, x_prime, u: SubsetMask) -> np.ndarray:
    """Coordinates of ``x`` on ``u`` and of ``x_prime`` elsewhere."""
    x = np.asarray(x, dtype=float).reshape(-1)
    x_prime = np.asarray(x_prime, dtype=float).reshape(-1)
    return np.where(u.bool_mask(), x, x_prime)


def omega_hat(sample: Sample, u: SubsetMask, x, x_prime) -> np.ndarray:
    """Plug-in estimate of the 3x3 cross-covariance kernel between the
    moment triples at ``x`` and ``x_prime``.

    Each entry is one empirical truncated moment evaluated at a composed
    point (componentwise minimum and/or splice), minus ``eta(x) eta(x')^T``.
    """
    x = np.asarray(x, dtype=float).reshape(-1)
    xp = np.asarray(x_prime, dtype=float).reshape(-1)
    full = u.full
    ubar = SubsetMask(u.ubar, u.p)
    lo = np.minimum(x, xp)

    def m(k, mask, point):
        return empirical_moment(sample, k, mask, point)

    raw = np.array(
        [
            [m(2, full, lo), m(2, full, splice(lo, x, u)), m(1, full, splice(x, lo, u))],
            [m(2, full, splice(lo, xp, u)), m(2, u, lo), m(1, full, splice(x, xp, u))],
            [m(1, full, splice(xp, lo, u)), m(1, full, splice(xp, x, u)), m(0, ubar, lo)],
        ]
    )
    eta = eta_hat(sample, u, np.vstack([x, xp]))
    return raw - np.outer(eta[0], eta[1])


def phi_gradient(eta: np.ndarray) -> np.ndarray:
    """Gradient of ``(s, t, w) -> s - t*w`` at each row of ``eta``."""
    eta = np.atleast_2d(eta)
    return np.column_stack([np.ones(len(eta)), -eta[:, 2], -eta[:, 1]])


@dataclass(frozen=True)
class CovarianceBundle:
    eta_hat: np.ndarray  # (K, 3)
    sigma_hat: np.ndarray  # (K, K)
    gradient_rows: np.ndarray  # (K, 3)

    @property
    def xi_hat(self) -> np.ndarray:
        return self.eta_hat[:, 0] - self.eta_hat[:, 1] * self.eta_hat[:, 2]


def sigma_hat(sample: Sample, u: SubsetMask, design: Design) -> CovarianceBundle:
    """Estimate the asymptotic covariance of ``sqrt(n) * xi_hat(design)``.

    ``sigma[k, l] = g_k^T Omega(x_k, x_l) g_l`` with ``g_k`` the gradient of
    ``s - t*w`` at the k-th moment triple. Since every kernel entry is an
    empirical cross-moment of the per-row vectors returned by
    :func:`~epsobol.core.influence_vectors`, the whole matrix equals
    ``L^T L / n`` with ``L[i, k] = g_k . (v_i(x_k) - eta(x_k))``.
    Only the upper triangle is computed; the lower one is its mirror.
    """
    v = influence_vectors(sample, u, design.points)  # (n, K, 3)
    eta = v.mean(axis=0)
    grad = phi_gradient(eta)
    lin = np.einsum("ika,ka->ik", v - eta[None], grad)
    K = design.K
    sig = np.empty((K, K))
    for k in range(K):
        sig[k, k:] = lin[:, k] @ lin[:, k:] / sample.n
    iu = np.triu_indices(K, 1)
    sig[(iu[1], iu[0])] = sig[iu]
    return CovarianceBundle(eta, sig, grad)


def sigma_hat_from_kernel(sample: Sample, u: SubsetMask, design: Design) -> np.ndarray:
    """Entry-by-entry assembly through :func:`omega_hat`; O(K^2 n p), for checks."""
    pts = design.points
    eta = eta_hat(sample, u, pts)
    grad = phi_gradient(eta)
    K = design.K
    sig = np.empty((K, K))
    for k in range(K):
        for l in range(k, K):
            sig[k, l] = grad[k] @ omega_hat(sample, u, pts[k], pts[l]) @ grad[l]
            sig[l, k] = sig[k, l]
    return sig
