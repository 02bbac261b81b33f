"""scikit-learn style wrapper around :func:`stein_gpmp.planner.plan`."""

from __future__ import annotations

import numbers

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils import check_random_state
from sklearn.utils.validation import check_is_fitted

from .environment import ObstacleParams, RobotModel, World2D
from .planner import PlanRequest, plan
from .prior import PriorSpec
from .trajectory import PlannerConfig, StateSpec


def _check_vector(x, name, allowed_sizes):
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be a 1-D array, got shape {arr.shape}")
    if arr.size not in allowed_sizes:
        raise ValueError(f"{name} must have one of {sorted(allowed_sizes)} entries, got {arr.size}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


class SteinGPPlanner(BaseEstimator):
    """Particle trajectory planner with a GP prior and Stein variational updates.

    ``fit(start, goal)`` runs the planner and stores a weighted set of
    trajectories. Hyperparameters follow the usual ``get_params`` /
    ``set_params`` protocol, so the planner can be cloned or grid-searched.

    Parameters
    ----------
    world : World2D, default=None
        Obstacle layout; ``None`` means free space.
    robot : RobotModel, default=None
        Robot geometry; ``None`` means a point robot.
    n_particles : int, default=8
    n_support : int, default=16
        Number of support states.
    dt : float, default=0.5
    lam : float, default=1.0
        Temperature dividing the obstacle cost.
    step_size : float, default=1.0
    max_iters : int, default=100
    update_tol : float, default=1e-6
    bandwidth : "median" or float, default="median"
    q_c, sigma_start, sigma_goal : float
        Prior hyperparameters.
    eps, sigma_obs : float
        Obstacle margin and residual scale.
    init : {"prior", "straight"}, default="prior"
    init_jitter : float, default=0.0
    n_jobs : int, default=1
        Worker threads for per-particle evaluation. Does not change results.
    random_state : int, RandomState or None, default=None

    Attributes
    ----------
    particles_ : ndarray of shape (n_particles, n_support, 2 * dof)
    weights_ : ndarray of shape (n_particles,)
    value_ : float
        Soft-value estimate after the final iteration.
    expected_cost_, cost_variance_ : float
    reports_ : list of IterationReport
    n_iter_ : int
    termination_ : str
    """

    def __init__(self, world=None, robot=None, n_particles=8, n_support=16, dt=0.5, lam=1.0,
                 step_size=1.0, max_iters=100, update_tol=1e-6, bandwidth="median", q_c=1.0,
                 sigma_start=1e-3, sigma_goal=1e-2, eps=0.2, sigma_obs=0.1, init="prior",
                 init_jitter=0.0, n_jobs=1, random_state=None):
        self.world = world
        self.robot = robot
        self.n_particles = n_particles
        self.n_support = n_support
        self.dt = dt
        self.lam = lam
        self.step_size = step_size
        self.max_iters = max_iters
        self.update_tol = update_tol
        self.bandwidth = bandwidth
        self.q_c = q_c
        self.sigma_start = sigma_start
        self.sigma_goal = sigma_goal
        self.eps = eps
        self.sigma_obs = sigma_obs
        self.init = init
        self.init_jitter = init_jitter
        self.n_jobs = n_jobs
        self.random_state = random_state

    def _seed(self):
        if isinstance(self.random_state, numbers.Integral):
            return int(self.random_state)
        return int(check_random_state(self.random_state).randint(np.iinfo(np.int32).max))

    def build_request(self, start, goal) -> PlanRequest:
        """Validate inputs and assemble the underlying :class:`PlanRequest`."""
        robot = self.robot if self.robot is not None else RobotModel.point()
        world = self.world if self.world is not None else World2D()
        dof = robot.dof
        goal = _check_vector(goal, "goal", {dof})
        start = _check_vector(start, "start", {dof, 2 * dof})
        if start.size == dof:
            start = np.concatenate([start, np.zeros(dof)])
        return PlanRequest(
            spec=StateSpec(dof, self.n_support, self.dt),
            prior_spec=PriorSpec(goal, self.q_c, self.sigma_start, self.sigma_goal),
            start=start,
            world=world,
            model=robot,
            obstacle=ObstacleParams(self.eps, self.sigma_obs),
            config=PlannerConfig(self.lam, self.step_size, self.max_iters, self.update_tol,
                                 self.bandwidth, self._seed()),
            n_particles=self.n_particles,
            init_mode=self.init,
            init_jitter=self.init_jitter,
            threads=self.n_jobs,
        )

    def fit(self, start, goal):
        """Plan from ``start`` (positions, or positions then velocities) to ``goal``."""
        req = self.build_request(start, goal)
        result = plan(req)
        spec = req.spec
        last = result.reports[-1]
        self.request_ = req
        self.result_ = result
        self.particles_ = result.particles.values.reshape(-1, spec.num_support, spec.state_dim)
        self.weights_ = last.weights
        self.value_ = last.v_hat
        self.expected_cost_ = last.expected_cost
        self.cost_variance_ = last.cost_variance
        self.reports_ = result.reports
        self.n_iter_ = last.iter
        self.termination_ = result.termination
        return self

    def sample(self, n_samples=1, random_state=None):
        """Draw fitted trajectories with probability proportional to their weights."""
        check_is_fitted(self, "particles_")
        rng = check_random_state(random_state)
        idx = rng.choice(len(self.weights_), size=n_samples, p=self.weights_)
        return self.particles_[idx].copy()

    def best_trajectory(self):
        """Highest-weight trajectory, shape ``(n_support, 2 * dof)``."""
        check_is_fitted(self, "particles_")
        return self.particles_[int(np.argmax(self.weights_))].copy()

    def score(self, start=None, goal=None):
        """Negative soft value of the fitted particle set (higher is better).

        Passing ``start``/``goal`` refits first.
        """
        if start is not None or goal is not None:
            if start is None or goal is None:
                raise ValueError("pass both start and goal, or neither")
            self.fit(start, goal)
        check_is_fitted(self, "value_")
        return -self.value_
