"""Scenario builders shared by the planner and acceptance tests."""

import dataclasses

import numpy as np

from stein_gpmp.config import load_scenario
from stein_gpmp.environment import Circle, CollisionSphere, ObstacleParams, RobotModel, World2D
from stein_gpmp.planner import PlanRequest
from stein_gpmp.prior import PriorSpec
from stein_gpmp.trajectory import PlannerConfig, StateSpec


def scenario(name, **changes):
    """Shipped scenario with planner-config fields and request fields overridden."""
    req = load_scenario(name)
    cfg_fields = {f.name for f in dataclasses.fields(PlannerConfig)}
    cfg = dataclasses.replace(req.config, **{k: v for k, v in changes.items() if k in cfg_fields})
    rest = {k: v for k, v in changes.items() if k not in cfg_fields}
    return dataclasses.replace(req, config=cfg, **rest)


def free_space(n_particles, **cfg):
    spec = StateSpec(2, 8, 0.5)
    return PlanRequest(spec, PriorSpec((3.0, 2.0)), np.zeros(4), World2D(),
                       RobotModel.point(), ObstacleParams(), PlannerConfig(**cfg),
                       n_particles=n_particles)


def toy_arm(lam=1.0, q_c=1.0, n_particles=32, max_iters=300, seed=0):
    """One-joint arm, three support states: only the middle position is free.

    An obstacle sits next to the straight-line sweep from 0 to pi/2.
    """
    spec = StateSpec(1, 3, 1.0)
    arm = RobotModel("planar_arm", (1.0,), (CollisionSphere(0, 1.0, 0.1),))
    world = World2D((Circle((np.cos(0.9), np.sin(0.9)), 0.15),))
    return PlanRequest(spec, PriorSpec((np.pi / 2,), q_c=q_c), np.zeros(2), world, arm,
                       ObstacleParams(0.1, 0.1),
                       PlannerConfig(lam=lam, max_iters=max_iters, update_tol=1e-6, seed=seed),
                       n_particles=n_particles)
