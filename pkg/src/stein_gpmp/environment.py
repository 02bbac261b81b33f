"""2D signed-distance worlds, robot models and the per-state obstacle residual."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

EMPTY_WORLD_DISTANCE = 1e6


@dataclass(frozen=True)
class Circle:
    center: tuple
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))
        if len(self.center) != 2:
            raise ValueError("circle center must be a 2-vector")
        if not self.radius > 0:
            raise ValueError(f"circle radius must be positive, got {self.radius!r}")

    def distance(self, p: np.ndarray) -> tuple[float, np.ndarray]:
        diff = p - np.asarray(self.center)
        norm = float(np.hypot(diff[0], diff[1]))
        if norm == 0.0:
            # gradient undefined at the center; pick +x for determinism
            return -self.radius, np.array([1.0, 0.0])
        return norm - self.radius, diff / norm

    def translated(self, offset) -> "Circle":
        return Circle(tuple(np.asarray(self.center) + offset), self.radius)


@dataclass(frozen=True)
class Box:
    lo: tuple
    hi: tuple

    def __post_init__(self):
        object.__setattr__(self, "lo", tuple(float(c) for c in self.lo))
        object.__setattr__(self, "hi", tuple(float(c) for c in self.hi))
        if len(self.lo) != 2 or len(self.hi) != 2:
            raise ValueError("box corners must be 2-vectors")
        if not all(a < b for a, b in zip(self.lo, self.hi)):
            raise ValueError(f"box min corner must be below max corner: {self.lo} {self.hi}")

    def distance(self, p: np.ndarray) -> tuple[float, np.ndarray]:
        lo, hi = np.asarray(self.lo), np.asarray(self.hi)
        center = 0.5 * (lo + hi)
        half = 0.5 * (hi - lo)
        rel = p - center
        sign = np.where(rel >= 0.0, 1.0, -1.0)
        q = np.abs(rel) - half
        outside = np.maximum(q, 0.0)
        out_norm = float(np.hypot(outside[0], outside[1]))
        if out_norm > 0.0:
            return out_norm, sign * outside / out_norm
        # inside or on the boundary: nearest face is the axis with largest q
        axis = int(np.argmax(q))
        grad = np.zeros(2)
        grad[axis] = sign[axis]
        return float(q[axis]), grad

    def translated(self, offset) -> "Box":
        return Box(tuple(np.asarray(self.lo) + offset), tuple(np.asarray(self.hi) + offset))


@dataclass(frozen=True)
class World2D:
    """Planar workspace made of circles and axis-aligned boxes.

    ``bounds`` is ``(xmin, ymin, xmax, ymax)``; it only describes the plotting
    and sampling region and does not act as an obstacle.
    """

    obstacles: tuple = ()
    bounds: tuple = (-10.0, -10.0, 10.0, 10.0)
    empty_distance: float = EMPTY_WORLD_DISTANCE

    def __post_init__(self):
        object.__setattr__(self, "obstacles", tuple(self.obstacles))
        object.__setattr__(self, "bounds", tuple(float(b) for b in self.bounds))

    def translated(self, offset) -> "World2D":
        offset = np.asarray(offset, dtype=float)
        b = self.bounds
        bounds = (b[0] + offset[0], b[1] + offset[1], b[2] + offset[0], b[3] + offset[1])
        return World2D(tuple(o.translated(offset) for o in self.obstacles), bounds,
                       self.empty_distance)


def signed_distance(world: World2D, point) -> tuple[float, np.ndarray]:
    """Distance from ``point`` to the nearest obstacle surface (negative inside).

    The gradient is the outward unit direction of the nearest obstacle. Ties
    go to the obstacle listed first. An empty world returns
    ``world.empty_distance`` and a zero gradient.
    """
    p = np.asarray(point, dtype=float)
    if p.shape != (2,) or not np.all(np.isfinite(p)):
        raise ValueError(f"query point must be a finite 2-vector, got {point!r}")
    best_d, best_g = world.empty_distance, np.zeros(2)
    found = False
    for obs in world.obstacles:
        d, g = obs.distance(p)
        if not found or d < best_d:
            best_d, best_g, found = d, g, True
    return float(best_d), best_g


def hinge_cost(d: float, eps: float) -> tuple[float, float]:
    """``max(eps - d, 0)`` and its derivative in ``d`` (zero at the kink)."""
    if d < eps:
        return eps - d, -1.0
    return 0.0, 0.0


@dataclass(frozen=True)
class CollisionSphere:
    link: int
    offset: float
    radius: float

    def __post_init__(self):
        if not self.radius >= 0:
            raise ValueError(f"sphere radius must be nonnegative, got {self.radius!r}")


@dataclass(frozen=True)
class RobotModel:
    """Point robot or planar revolute arm carrying collision spheres.

    For ``kind="point"`` the configuration is the 2D position itself and
    ``spheres`` defaults to a single sphere of radius zero. For
    ``kind="planar_arm"`` joint ``i`` rotates link ``i``; a sphere sits on
    ``link`` at ``offset`` (length units) from that link's proximal joint.
    """

    kind: str = "point"
    link_lengths: tuple = ()
    spheres: tuple = ()
    base: tuple = (0.0, 0.0)

    def __post_init__(self):
        object.__setattr__(self, "link_lengths", tuple(float(x) for x in self.link_lengths))
        object.__setattr__(self, "base", tuple(float(x) for x in self.base))
        spheres = tuple(self.spheres)
        if self.kind == "point":
            if self.link_lengths:
                raise ValueError("a point robot has no links")
            if not spheres:
                spheres = (CollisionSphere(0, 0.0, 0.0),)
        elif self.kind == "planar_arm":
            if not self.link_lengths:
                raise ValueError("a planar arm needs at least one link")
            if any(l <= 0 for l in self.link_lengths):
                raise ValueError("link lengths must be positive")
            if not spheres:
                raise ValueError("a planar arm needs collision spheres")
            for s in spheres:
                if not 0 <= s.link < len(self.link_lengths):
                    raise ValueError(f"sphere references missing link {s.link}")
        else:
            raise ValueError(f"unknown robot kind {self.kind!r}")
        object.__setattr__(self, "spheres", spheres)

    @property
    def dof(self) -> int:
        return 2 if self.kind == "point" else len(self.link_lengths)

    @classmethod
    def point(cls, radius: float = 0.0) -> "RobotModel":
        return cls("point", spheres=(CollisionSphere(0, 0.0, radius),))

    @classmethod
    def planar_arm(cls, link_lengths, spheres_per_link: int = 2, radius: float = 0.1,
                   base=(0.0, 0.0)) -> "RobotModel":
        """Arm with ``spheres_per_link`` evenly spaced spheres ending at each link tip."""
        spheres = []
        for i, length in enumerate(link_lengths):
            for k in range(1, spheres_per_link + 1):
                spheres.append(CollisionSphere(i, length * k / spheres_per_link, radius))
        return cls("planar_arm", tuple(link_lengths), tuple(spheres), base)


def forward_kinematics(model: RobotModel, q) -> tuple[np.ndarray, np.ndarray]:
    """Collision-sphere centers and their position Jacobians.

    Returns
    -------
    centers : ndarray of shape (n_spheres, 2)
    jacobians : ndarray of shape (n_spheres, 2, dof)
    """
    q = np.asarray(q, dtype=float)
    if q.shape != (model.dof,):
        raise ValueError(f"configuration must have {model.dof} entries, got shape {q.shape}")
    n_sph = len(model.spheres)

    if model.kind == "point":
        centers = np.tile(q, (n_sph, 1))
        jacobians = np.tile(np.eye(2), (n_sph, 1, 1))
        return centers, jacobians

    angles = np.cumsum(q)
    dirs = np.stack([np.cos(angles), np.sin(angles)], axis=1)
    perps = np.stack([-np.sin(angles), np.cos(angles)], axis=1)
    lengths = np.asarray(model.link_lengths)
    joints = np.asarray(model.base) + np.vstack([np.zeros(2), np.cumsum(lengths[:, None] * dirs, axis=0)])

    centers = np.empty((n_sph, 2))
    jacobians = np.zeros((n_sph, 2, model.dof))
    for s, sph in enumerate(model.spheres):
        i = sph.link
        centers[s] = joints[i] + sph.offset * dirs[i]
        # joint j moves every link k >= j; the sphere sees links j..i-1 fully
        # plus its own link up to the offset
        tip = sph.offset * perps[i]
        for j in range(i, -1, -1):
            jacobians[s, :, j] = tip
            if j > 0:
                tip = tip + lengths[j - 1] * perps[j - 1]
    return centers, jacobians


@dataclass(frozen=True)
class ObstacleParams:
    eps: float = 0.2
    sigma_obs: float = 0.1

    def __post_init__(self):
        if not self.eps >= 0:
            raise ValueError(f"eps must be nonnegative, got {self.eps!r}")
        if not self.sigma_obs > 0:
            raise ValueError(f"sigma_obs must be positive, got {self.sigma_obs!r}")


def state_obstacle_residual(world: World2D, model: RobotModel, params: ObstacleParams,
                            state) -> tuple[np.ndarray, np.ndarray]:
    """Hinge residual per collision sphere and its Jacobian in the full state.

    Velocity columns of the Jacobian are zero.
    """
    state = np.asarray(state, dtype=float)
    dof = model.dof
    if state.shape != (2 * dof,):
        raise ValueError(f"state must have {2 * dof} entries, got shape {state.shape}")
    centers, fk_jac = forward_kinematics(model, state[:dof])
    n_sph = len(model.spheres)
    res = np.zeros(n_sph)
    jac = np.zeros((n_sph, 2 * dof))
    for s, sph in enumerate(model.spheres):
        d, grad = signed_distance(world, centers[s])
        cost, dcost = hinge_cost(d - sph.radius, params.eps)
        res[s] = cost
        if dcost != 0.0:
            jac[s, :dof] = dcost * (grad @ fk_jac[s])
    return res, jac
