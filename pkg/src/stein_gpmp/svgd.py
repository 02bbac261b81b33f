"""Second-order Stein variational updates with an averaged-Hessian metric."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .linalg import BandedCholesky
from .trajectory import ParticleSet

MIN_BANDWIDTH = 1e-6


@dataclass
class Metric:
    """Shared metric ``M`` with its banded Cholesky factor."""

    m: sp.csr_matrix
    cholesky: BandedCholesky

    def apply(self, x: np.ndarray) -> np.ndarray:
        return self.m @ x


@dataclass
class KernelEval:
    """All-pairs kernel values.

    ``gram[j, i] = k(theta_j, theta_i)`` and ``grad_terms[j, i]`` is the
    gradient of that entry with respect to ``theta_j``.
    """

    gram: np.ndarray
    grad_terms: np.ndarray


def build_metric(hessians, bandwidth: int) -> Metric:
    """Average per-particle Hessians into one metric and factorize it.

    ``bandwidth`` is the half-bandwidth of the block-tridiagonal envelope.
    Summation runs in list order so the result is reproducible.
    """
    hessians = list(hessians)
    if not hessians:
        raise ValueError("need at least one Hessian")
    shape = hessians[0].shape
    total = sp.csr_matrix(shape)
    for h in hessians:
        if h.shape != shape:
            raise ValueError(f"Hessian shapes differ: {h.shape} vs {shape}")
        total = total + h
    m = (total / len(hessians)).tocsr()
    return Metric(m, BandedCholesky(m, bandwidth))


def kernel(metric: Metric, h: float, a, b) -> tuple[float, np.ndarray]:
    """Anisotropic RBF ``exp(-(a-b)^T M (a-b) / (2h))`` and its gradient in ``a``."""
    if not h > 0:
        raise ValueError(f"bandwidth must be positive, got {h!r}")
    diff = np.asarray(a, dtype=float) - np.asarray(b, dtype=float)
    m_diff = metric.apply(diff)
    k = float(np.exp(-0.5 * float(diff @ m_diff) / h))
    return k, -(k / h) * m_diff


def median_bandwidth(metric: Metric, particles) -> float:
    """Median heuristic ``med^2 / log(n + 1)`` over Mahalanobis distances.

    A single particle returns 1. The result is floored at ``MIN_BANDWIDTH``.
    """
    x = particles.values if isinstance(particles, ParticleSet) else np.atleast_2d(particles)
    n = x.shape[0]
    if n == 1:
        return 1.0
    d2 = []
    for j in range(n):
        for i in range(j + 1, n):
            diff = x[j] - x[i]
            d2.append(float(diff @ metric.apply(diff)))
    med = float(np.median(np.sqrt(np.maximum(d2, 0.0))))
    return max(med**2 / np.log(n + 1.0), MIN_BANDWIDTH)


def kernel_matrix(metric: Metric, h: float, particles) -> KernelEval:
    """Evaluate the kernel and its first-argument gradient for every ordered pair."""
    if not h > 0:
        raise ValueError(f"bandwidth must be positive, got {h!r}")
    x = particles.values if isinstance(particles, ParticleSet) else np.atleast_2d(particles)
    mx = np.asarray(metric.m @ x.T).T
    diff = x[:, None, :] - x[None, :, :]
    m_diff = mx[:, None, :] - mx[None, :, :]
    gram = np.exp(-0.5 * np.einsum("jid,jid->ji", diff, m_diff) / h)
    grad_terms = -(gram / h)[:, :, None] * m_diff
    return KernelEval(gram, grad_terms)


def svgd_direction(kernels: KernelEval, grads) -> np.ndarray:
    """Particle estimate of the Stein variational direction.

    Row ``i`` is ``mean_j [gram[j, i] * grads[j] + grad_terms[j, i]]``.
    """
    g = np.atleast_2d(np.asarray(grads, dtype=float))
    n = g.shape[0]
    if kernels.gram.shape != (n, n) or kernels.grad_terms.shape[:2] != (n, n):
        raise ValueError("kernel evaluation and gradient list disagree on particle count")
    phi = (kernels.gram.T @ g + kernels.grad_terms.sum(axis=0)) / n
    return phi


def preconditioned_step(metric: Metric, phi, step_size: float,
                        particles: ParticleSet) -> tuple[ParticleSet, np.ndarray]:
    """Solve ``M delta_i = phi_i`` for all particles and move them by ``step_size * delta_i``.

    Returns the updated set (generation incremented) and ``||delta_i||`` per particle.
    """
    phi = np.atleast_2d(np.asarray(phi, dtype=float))
    if phi.shape != particles.values.shape:
        raise ValueError(f"phi has shape {phi.shape}, particles {particles.values.shape}")
    delta = metric.cholesky.solve(phi.T).T
    if not np.all(np.isfinite(delta)):
        raise FloatingPointError("metric solve produced non-finite updates")
    new = ParticleSet(particles.values + step_size * delta, particles.spec,
                      particles.generation + 1)
    return new, np.linalg.norm(delta, axis=1)
