"""Obstacle likelihood as a factor graph: residuals, Jacobians, gradients, Hessians.

All obstacle factors are unary (one per support state), so the stacked
Jacobian is block-diagonal and the Gauss-Newton term it contributes never
leaves the block-tridiagonal envelope of the prior precision.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .environment import ObstacleParams, RobotModel, World2D, state_obstacle_residual
from .prior import GpPrior, _as_vector
from .trajectory import StateSpec


@dataclass(frozen=True)
class FactorGraph:
    """Obstacle factors over every support state of a trajectory."""

    world: World2D
    model: RobotModel
    params: ObstacleParams
    spec: StateSpec

    def __post_init__(self):
        if self.model.dof != self.spec.dof:
            raise ValueError(
                f"robot has {self.model.dof} dof but the state spec declares {self.spec.dof}"
            )

    @property
    def residuals_per_state(self) -> int:
        return len(self.model.spheres)

    @property
    def residual_dim(self) -> int:
        return self.spec.num_support * self.residuals_per_state

    @property
    def sigma_inv(self) -> sp.dia_matrix:
        """Block-diagonal residual precision, isotropic ``1 / sigma_obs**2``."""
        return sp.identity(self.residual_dim, format="dia") / self.params.sigma_obs**2


@dataclass
class ParticleWorkspace:
    """Per-particle quantities evaluated once per planner iteration."""

    residual: np.ndarray
    jacobian: sp.csr_matrix
    grad: np.ndarray
    hessian: sp.csr_matrix
    cost: float
    log_prior: float


def evaluate_residual(fg: FactorGraph, theta) -> tuple[np.ndarray, sp.csr_matrix]:
    """Stack the obstacle residuals of every support state.

    Returns ``h`` of length ``fg.residual_dim`` and its block-diagonal
    Jacobian ``J`` of shape ``(residual_dim, spec.size)``.
    """
    spec = fg.spec
    theta = _as_vector(theta, spec.size)
    states = theta.reshape(spec.num_support, spec.state_dim)
    res_blocks, jac_blocks = [], []
    for state in states:
        r, j = state_obstacle_residual(fg.world, fg.model, fg.params, state)
        res_blocks.append(r)
        jac_blocks.append(j)
    jac = sp.block_diag(jac_blocks, format="csr")
    jac.eliminate_zeros()
    return np.concatenate(res_blocks), jac


def _quadratic_cost(fg: FactorGraph, h: np.ndarray) -> float:
    return 0.5 * float(h @ h) / fg.params.sigma_obs**2


def combined_cost(fg: FactorGraph, theta) -> float:
    """``0.5 * h^T Sigma^{-1} h`` at ``theta``."""
    h, _ = evaluate_residual(fg, theta)
    return _quadratic_cost(fg, h)


def log_posterior_grad(fg: FactorGraph, prior: GpPrior, lam: float, theta) -> np.ndarray:
    """``-K^{-1}(theta - mu) - J^T Sigma^{-1} h / lam``."""
    theta = _as_vector(theta, fg.spec.size)
    h, jac = evaluate_residual(fg, theta)
    return -(prior.precision @ (theta - prior.mu)) - (jac.T @ (fg.sigma_inv @ h)) / lam


def gauss_newton_hessian(fg: FactorGraph, prior: GpPrior, lam: float, theta) -> sp.csr_matrix:
    """``K^{-1} + J^T Sigma^{-1} J / lam``, in CSR form."""
    _, jac = evaluate_residual(fg, theta)
    return _gn_hessian(fg, prior, lam, jac)


def _gn_hessian(fg, prior, lam, jac):
    return (prior.precision + (jac.T @ fg.sigma_inv @ jac) / lam).tocsr()


def evaluate_particle(fg: FactorGraph, prior: GpPrior, lam: float, theta) -> ParticleWorkspace:
    """Everything the planner needs from one particle, sharing one residual pass."""
    theta = _as_vector(theta, fg.spec.size)
    h, jac = evaluate_residual(fg, theta)
    diff = theta - prior.mu
    k_inv_diff = prior.precision @ diff
    w_h = fg.sigma_inv @ h
    grad = -k_inv_diff - (jac.T @ w_h) / lam
    log_prior = prior.log_norm_const - 0.5 * float(diff @ k_inv_diff)
    return ParticleWorkspace(
        residual=h,
        jacobian=jac,
        grad=grad,
        hessian=_gn_hessian(fg, prior, lam, jac),
        cost=_quadratic_cost(fg, h),
        log_prior=log_prior,
    )
