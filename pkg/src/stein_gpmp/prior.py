"""Discrete constant-velocity Gaussian-process prior over support states.

The prior is the product of a start factor on the full first state, a goal
factor on the position half of the last state, and white-noise-on-acceleration
transition factors between neighbours. Its precision is block-tridiagonal.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .linalg import BandedCholesky, FactorizationError, block_tridiagonal, half_bandwidth
from .trajectory import ParticleSet, StateSpec, SupportTrajectory, straight_line_init

LOG_2PI = np.log(2.0 * np.pi)


@dataclass(frozen=True)
class PriorSpec:
    """Prior hyperparameters.

    Parameters
    ----------
    goal_pos : array-like of shape (dof,)
        Target configuration pinned at the final support state.
    q_c : float
        Power-spectral density of the acceleration white noise.
    sigma_start, sigma_goal : float
        Standard deviations of the start (full state) and goal (position)
        pinning factors.
    """

    goal_pos: tuple
    q_c: float = 1.0
    sigma_start: float = 1e-3
    sigma_goal: float = 1e-2

    def __post_init__(self):
        object.__setattr__(self, "goal_pos", tuple(float(g) for g in np.ravel(self.goal_pos)))
        for name in ("q_c", "sigma_start", "sigma_goal"):
            val = getattr(self, name)
            if not (np.isfinite(val) and val > 0):
                raise ValueError(f"{name} must be positive, got {val!r}")


def transition_matrix(dof: int, dt: float) -> np.ndarray:
    eye = np.eye(dof)
    return np.block([[eye, dt * eye], [np.zeros((dof, dof)), eye]])


def transition_covariance(dof: int, dt: float, q_c: float) -> np.ndarray:
    base = q_c * np.array([[dt**3 / 3.0, dt**2 / 2.0], [dt**2 / 2.0, dt]])
    return np.kron(base, np.eye(dof))


def transition_precision(dof: int, dt: float, q_c: float) -> np.ndarray:
    """Closed-form inverse of :func:`transition_covariance`."""
    base = np.array([[12.0 / dt**3, -6.0 / dt**2], [-6.0 / dt**2, 4.0 / dt]]) / q_c
    return np.kron(base, np.eye(dof))


@dataclass
class GpPrior:
    spec: StateSpec
    prior_spec: PriorSpec
    mu: np.ndarray
    precision: sp.csr_matrix
    chol: BandedCholesky
    log_norm_const: float

    @property
    def size(self) -> int:
        return self.spec.size


def build_prior(spec: StateSpec, prior_spec: PriorSpec, start) -> GpPrior:
    """Assemble the prior mean and sparse precision.

    The mean is the straight-line constant-velocity trajectory from ``start``
    to ``prior_spec.goal_pos``. Every factor is centred on that mean, so the
    mean is also the mode of the factor product.

    Raises
    ------
    FactorizationError
        If the assembled precision is not positive definite.
    """
    dof, sd, n_sup = spec.dof, spec.state_dim, spec.num_support
    mu = straight_line_init(spec, start, np.asarray(prior_spec.goal_pos)).values

    phi = transition_matrix(dof, spec.dt)
    q_inv = transition_precision(dof, spec.dt, prior_spec.q_c)
    # factor residual theta_{n+1} - phi theta_n, lifted onto blocks (n, n+1)
    pp = phi.T @ q_inv @ phi
    pn = -phi.T @ q_inv
    nn = q_inv

    diag = [np.zeros((sd, sd)) for _ in range(n_sup)]
    upper = []
    for n in range(spec.num_intervals):
        diag[n] += pp
        diag[n + 1] += nn
        upper.append(pn)
    diag[0] += np.eye(sd) / prior_spec.sigma_start**2
    diag[-1][:dof, :dof] += np.eye(dof) / prior_spec.sigma_goal**2

    precision = block_tridiagonal(diag, upper)
    try:
        chol = BandedCholesky(precision, half_bandwidth(sd))
    except FactorizationError as exc:
        raise FactorizationError(f"degenerate prior specification: {exc}") from exc

    log_norm_const = -0.5 * spec.size * LOG_2PI + 0.5 * chol.logdet()
    return GpPrior(spec, prior_spec, mu, precision, chol, float(log_norm_const))


def _as_vector(theta, size: int) -> np.ndarray:
    if isinstance(theta, SupportTrajectory):
        theta = theta.values
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (size,):
        raise ValueError(f"expected a trajectory vector of length {size}, got {theta.shape}")
    if not np.all(np.isfinite(theta)):
        raise ValueError("trajectory contains non-finite values")
    return theta


def log_prior_and_grad(prior: GpPrior, theta) -> tuple[float, np.ndarray]:
    """Log-density of the prior (normalized) and its gradient."""
    theta = _as_vector(theta, prior.size)
    diff = theta - prior.mu
    k_inv_diff = prior.precision @ diff
    logp = prior.log_norm_const - 0.5 * float(diff @ k_inv_diff)
    return logp, -k_inv_diff


def sample_prior(prior: GpPrior, rng, count: int) -> ParticleSet:
    """Draw ``count`` trajectories from the prior.

    Uses the upper Cholesky factor ``U`` of the precision: ``mu + U^{-1} z``
    has covariance ``(U^T U)^{-1}``. ``rng`` needs a ``standard_normal(shape)``
    method, e.g. :func:`numpy.random.default_rng`.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    z = np.asarray(rng.standard_normal((prior.size, count)), dtype=float)
    draws = prior.mu[:, None] + prior.chol.solve_upper(z)
    return ParticleSet(draws.T.copy(), prior.spec)
