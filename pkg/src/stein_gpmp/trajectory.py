"""Support-state trajectory parameterization shared by the planner modules.

A trajectory is a flat vector of ``num_support`` kinematic states stored
state-major, each state laid out as ``[positions | velocities]``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class StateSpec:
    """Shape of a support-state trajectory.

    Parameters
    ----------
    dof : int
        Number of configuration dimensions.
    num_support : int
        Number of support states (``N + 1``).
    dt : float
        Time between consecutive support states, in seconds.
    """

    dof: int
    num_support: int
    dt: float

    def __post_init__(self):
        if int(self.dof) != self.dof or self.dof < 1:
            raise ValueError(f"dof must be a positive integer, got {self.dof!r}")
        if int(self.num_support) != self.num_support or self.num_support < 2:
            raise ValueError(f"num_support must be >= 2, got {self.num_support!r}")
        if not (np.isfinite(self.dt) and self.dt > 0):
            raise ValueError(f"dt must be positive, got {self.dt!r}")

    @property
    def state_dim(self) -> int:
        return 2 * self.dof

    @property
    def num_intervals(self) -> int:
        """``N``, the number of GP transitions between support states."""
        return self.num_support - 1

    @property
    def size(self) -> int:
        """Length of the flat trajectory vector."""
        return self.num_support * self.state_dim

    def times(self) -> np.ndarray:
        return np.arange(self.num_support) * self.dt


@dataclass
class SupportTrajectory:
    values: np.ndarray
    spec: StateSpec

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.spec.size,):
            raise ValueError(
                f"expected a flat vector of length {self.spec.size}, "
                f"got shape {self.values.shape}"
            )
        if not np.all(np.isfinite(self.values)):
            raise ValueError("trajectory contains non-finite values")

    def states(self) -> np.ndarray:
        """View of the trajectory as a ``(num_support, state_dim)`` array."""
        return self.values.reshape(self.spec.num_support, self.spec.state_dim)

    def positions(self) -> np.ndarray:
        return self.states()[:, : self.spec.dof]

    def velocities(self) -> np.ndarray:
        return self.states()[:, self.spec.dof :]


@dataclass
class ParticleSet:
    """A batch of trajectories sharing one :class:`StateSpec`.

    ``values`` has shape ``(n_particles, spec.size)``; row ``i`` is particle ``i``.
    """

    values: np.ndarray
    spec: StateSpec
    generation: int = 0

    def __post_init__(self):
        self.values = np.atleast_2d(np.asarray(self.values, dtype=float))
        if self.values.ndim != 2 or self.values.shape[1] != self.spec.size:
            raise ValueError(
                f"particles must have shape (n, {self.spec.size}), got {self.values.shape}"
            )
        if self.values.shape[0] < 1:
            raise ValueError("a particle set needs at least one particle")

    def __len__(self):
        return self.values.shape[0]

    def __getitem__(self, i) -> SupportTrajectory:
        return SupportTrajectory(self.values[i], self.spec)

    def copy(self) -> "ParticleSet":
        return ParticleSet(self.values.copy(), self.spec, self.generation)


@dataclass(frozen=True)
class PlannerConfig:
    """Hyperparameters of the particle planner.

    ``bandwidth`` is either the string ``"median"`` or a fixed positive float.
    """

    lam: float = 1.0
    step_size: float = 1.0
    max_iters: int = 100
    update_tol: float = 1e-6
    bandwidth: object = "median"
    seed: int = 0

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError(f"lambda must be positive, got {self.lam!r}")
        if not self.step_size > 0:
            raise ValueError(f"step_size must be positive, got {self.step_size!r}")
        if int(self.max_iters) != self.max_iters or self.max_iters < 1:
            raise ValueError(f"max_iters must be >= 1, got {self.max_iters!r}")
        if not self.update_tol >= 0:
            raise ValueError(f"update_tol must be >= 0, got {self.update_tol!r}")
        if self.bandwidth != "median":
            if isinstance(self.bandwidth, str) or not float(self.bandwidth) > 0:
                raise ValueError(
                    f"bandwidth must be 'median' or a positive number, got {self.bandwidth!r}"
                )


def state_at(traj: SupportTrajectory, n: int) -> np.ndarray:
    """Return support state ``n`` of ``traj`` (a view, not a copy)."""
    spec = traj.spec
    if not 0 <= n < spec.num_support:
        raise IndexError(f"support index {n} out of range [0, {spec.num_support - 1}]")
    d = spec.state_dim
    return traj.values[n * d : (n + 1) * d]


def straight_line_init(spec: StateSpec, start, goal_pos) -> SupportTrajectory:
    """Constant-velocity trajectory from ``start`` position to ``goal_pos``.

    Positions interpolate linearly across the support states and every
    velocity is the secant ``(goal_pos - start_pos) / (N * dt)``. The velocity
    half of ``start`` is ignored.
    """
    start = np.asarray(start, dtype=float)
    goal_pos = np.asarray(goal_pos, dtype=float)
    if start.shape != (spec.state_dim,):
        raise ValueError(f"start must have {spec.state_dim} entries, got shape {start.shape}")
    if goal_pos.shape != (spec.dof,):
        raise ValueError(f"goal_pos must have {spec.dof} entries, got shape {goal_pos.shape}")

    start_pos = start[: spec.dof]
    n_int = spec.num_intervals
    frac = np.arange(spec.num_support)[:, None] / n_int
    pos = start_pos + frac * (goal_pos - start_pos)
    vel = np.broadcast_to((goal_pos - start_pos) / (n_int * spec.dt), pos.shape)
    return SupportTrajectory(np.hstack([pos, vel]).ravel(), spec)
