"""Stein variational Gaussian-process motion planning.

Particles are GP-parameterized trajectories moved by second-order Stein
variational gradient descent on a factor-graph posterior; the planner also
reports a particle estimate of the soft (free-energy) value.
"""

from .environment import Box, Circle, CollisionSphere, ObstacleParams, RobotModel, World2D
from .estimator import SteinGPPlanner
from .planner import PlanRequest, PlanResult, PlanningError, plan
from .prior import GpPrior, PriorSpec, build_prior
from .trajectory import ParticleSet, PlannerConfig, StateSpec, SupportTrajectory

__all__ = [
    "Box",
    "Circle",
    "CollisionSphere",
    "GpPrior",
    "ObstacleParams",
    "ParticleSet",
    "PlanRequest",
    "PlanResult",
    "PlannerConfig",
    "PlanningError",
    "PriorSpec",
    "RobotModel",
    "StateSpec",
    "SteinGPPlanner",
    "SupportTrajectory",
    "World2D",
    "build_prior",
    "plan",
]

__version__ = "0.1.0"
