"""Particle weights, soft-value estimate and weighted cost statistics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class IterationReport:
    iter: int
    v_hat: float
    expected_cost: float
    cost_variance: float
    weights: np.ndarray
    mean_update_norm: float


def _scores(costs, log_priors, lam: float) -> np.ndarray:
    costs = np.asarray(costs, dtype=float)
    log_priors = np.asarray(log_priors, dtype=float)
    if costs.ndim != 1 or costs.shape != log_priors.shape or costs.size == 0:
        raise ValueError("costs and log_priors must be nonempty vectors of equal length")
    if not lam > 0:
        raise ValueError(f"lambda must be positive, got {lam!r}")
    if np.any(np.isnan(costs)) or np.any(np.isnan(log_priors)):
        raise ValueError("costs and log_priors must not contain NaN")
    s = -costs / lam + log_priors
    if not np.any(np.isfinite(s)) or np.any(s == np.inf):
        raise ValueError("degenerate particle set: no finite log-weight")
    return s


def _logsumexp(s: np.ndarray) -> tuple[float, np.ndarray]:
    top = np.max(s)
    shifted = np.exp(s - top)
    return top + float(np.log(np.sum(shifted))), shifted


def particle_weights(costs, log_priors, lam: float) -> np.ndarray:
    """Normalized weights ``softmax(-costs / lam + log_priors)``."""
    _, shifted = _logsumexp(_scores(costs, log_priors, lam))
    return shifted / np.sum(shifted)


def value_estimate(costs, log_priors, lam: float) -> float:
    """``-lam * logsumexp(-costs / lam + log_priors)``."""
    lse, _ = _logsumexp(_scores(costs, log_priors, lam))
    return -lam * lse


def cost_statistics(costs, weights) -> tuple[float, float]:
    """Weighted mean and variance of ``costs``."""
    costs = np.asarray(costs, dtype=float)
    weights = np.asarray(weights, dtype=float)
    if costs.shape != weights.shape:
        raise ValueError("costs and weights must have equal length")
    mean = float(weights @ costs)
    var = float(weights @ (costs - mean) ** 2)
    return mean, max(var, 0.0)
