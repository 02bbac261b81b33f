"""The particle planning loop.

Each iteration evaluates residuals, gradients and Gauss-Newton Hessians for
every particle, averages the Hessians into a shared metric, evaluates the
anisotropic kernel over all particle pairs, forms the Stein direction, and
moves every particle by a metric-preconditioned step. A report of the soft
value and weighted cost statistics follows every update (and the
initialization).
"""

from __future__ import annotations

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .environment import ObstacleParams, RobotModel, World2D
from .factor_graph import FactorGraph, ParticleWorkspace, evaluate_particle
from .linalg import half_bandwidth
from .prior import GpPrior, PriorSpec, build_prior, sample_prior
from .svgd import build_metric, kernel_matrix, median_bandwidth, preconditioned_step, svgd_direction
from .trajectory import ParticleSet, PlannerConfig, StateSpec, straight_line_init
from .value import IterationReport, cost_statistics, particle_weights, value_estimate

logger = logging.getLogger(__name__)

INIT_MODES = ("prior", "straight")


class PlanningError(RuntimeError):
    """A numerical failure inside the loop, tagged with the iteration index."""

    def __init__(self, iteration: int, message: str):
        super().__init__(f"iteration {iteration}: {message}")
        self.iteration = iteration


@dataclass
class PlanRequest:
    """Everything needed to run the planner.

    ``init_mode`` is ``"prior"`` (sample the GP prior) or ``"straight"``
    (straight line plus Gaussian jitter of scale ``init_jitter`` on the
    interior support states).
    """

    spec: StateSpec
    prior_spec: PriorSpec
    start: np.ndarray
    world: World2D
    model: RobotModel
    obstacle: ObstacleParams
    config: PlannerConfig
    n_particles: int = 8
    init_mode: str = "prior"
    init_jitter: float = 0.0
    threads: int = 1

    def __post_init__(self):
        self.start = np.asarray(self.start, dtype=float)
        if self.start.shape != (self.spec.state_dim,):
            raise ValueError(
                f"start must have {self.spec.state_dim} entries, got shape {self.start.shape}"
            )
        if len(self.prior_spec.goal_pos) != self.spec.dof:
            raise ValueError(f"goal must have {self.spec.dof} entries")
        if self.model.dof != self.spec.dof:
            raise ValueError(
                f"robot has {self.model.dof} dof but the state spec declares {self.spec.dof}"
            )
        if int(self.n_particles) != self.n_particles or self.n_particles < 1:
            raise ValueError(f"n_particles must be >= 1, got {self.n_particles!r}")
        if self.init_mode not in INIT_MODES:
            raise ValueError(f"init_mode must be one of {INIT_MODES}, got {self.init_mode!r}")
        if not self.init_jitter >= 0:
            raise ValueError(f"init_jitter must be >= 0, got {self.init_jitter!r}")
        if int(self.threads) != self.threads or self.threads < 1:
            raise ValueError(f"threads must be >= 1, got {self.threads!r}")


@dataclass
class PlanResult:
    particles: ParticleSet
    initial_particles: ParticleSet
    reports: list
    termination: str
    wall_seconds: float
    final_costs: np.ndarray = field(repr=False)
    final_log_priors: np.ndarray = field(repr=False)
    prior: GpPrior = field(repr=False)
    factor_graph: FactorGraph = field(repr=False)


def initial_particles(req: PlanRequest, prior: GpPrior, rng) -> ParticleSet:
    if req.init_mode == "prior":
        return sample_prior(prior, rng, req.n_particles)
    base = straight_line_init(req.spec, req.start, np.asarray(req.prior_spec.goal_pos)).values
    spec = req.spec
    values = np.tile(base, (req.n_particles, 1))
    if req.init_jitter > 0:
        sd = spec.state_dim
        noise = rng.standard_normal((req.n_particles, spec.size)) * req.init_jitter
        noise[:, :sd] = 0.0
        noise[:, -sd:] = 0.0
        values = values + noise
    return ParticleSet(values, spec)


def _evaluate_all(fg, prior, lam, particles: ParticleSet, pool) -> list[ParticleWorkspace]:
    def one(i):
        return evaluate_particle(fg, prior, lam, particles.values[i])

    idx = range(len(particles))
    if pool is None:
        return [one(i) for i in idx]
    # map preserves particle order, so downstream reductions are order-fixed
    return list(pool.map(one, idx))


def _report(iteration: int, ws: list[ParticleWorkspace], lam: float,
            mean_update_norm: float) -> IterationReport:
    costs = np.array([w.cost for w in ws])
    log_priors = np.array([w.log_prior for w in ws])
    weights = particle_weights(costs, log_priors, lam)
    exp_cost, cost_var = cost_statistics(costs, weights)
    return IterationReport(
        iter=iteration,
        v_hat=value_estimate(costs, log_priors, lam),
        expected_cost=exp_cost,
        cost_variance=cost_var,
        weights=weights,
        mean_update_norm=mean_update_norm,
    )


def svgd_iteration(particles: ParticleSet, ws: list[ParticleWorkspace],
                   config: PlannerConfig, bandwidth: int):
    """One particle update from already-evaluated workspaces.

    Returns ``(new_particles, update_norms, kernel_bandwidth)``.
    """
    metric = build_metric([w.hessian for w in ws], bandwidth)
    if config.bandwidth == "median":
        h = median_bandwidth(metric, particles)
    else:
        h = float(config.bandwidth)
    kernels = kernel_matrix(metric, h, particles)
    phi = svgd_direction(kernels, np.stack([w.grad for w in ws]))
    new, norms = preconditioned_step(metric, phi, config.step_size, particles)
    return new, norms, h


def plan(req: PlanRequest, callback=None) -> PlanResult:
    """Run the planner to convergence or until the iteration budget is spent.

    ``callback(report, particles)`` is invoked after every report if given.
    Results depend only on the request and ``config.seed``; the worker count
    does not change them.
    """
    t0 = time.perf_counter()
    cfg = req.config
    lam = cfg.lam
    rng = np.random.default_rng(cfg.seed)
    bw = half_bandwidth(req.spec.state_dim)

    try:
        prior = build_prior(req.spec, req.prior_spec, req.start)
        fg = FactorGraph(req.world, req.model, req.obstacle, req.spec)
        particles = initial_particles(req, prior, rng)
    except (ValueError, np.linalg.LinAlgError) as exc:
        raise PlanningError(0, str(exc)) from exc
    init = particles.copy()

    pool = ThreadPoolExecutor(max_workers=req.threads) if req.threads > 1 else None
    try:
        iteration = 0
        try:
            ws = _evaluate_all(fg, prior, lam, particles, pool)
            reports = [_report(0, ws, lam, float("nan"))]
        except (ValueError, FloatingPointError, np.linalg.LinAlgError) as exc:
            raise PlanningError(0, str(exc)) from exc
        if callback is not None:
            callback(reports[-1], particles)

        termination = "max_iters"
        for iteration in range(1, cfg.max_iters + 1):
            try:
                particles, norms, h = svgd_iteration(particles, ws, cfg, bw)
                ws = _evaluate_all(fg, prior, lam, particles, pool)
                mean_norm = float(np.mean(norms))
                reports.append(_report(iteration, ws, lam, mean_norm))
            except (ValueError, FloatingPointError, np.linalg.LinAlgError) as exc:
                raise PlanningError(iteration, str(exc)) from exc
            logger.debug("iter %d: v_hat=%.6g E[C]=%.6g |d|=%.3g h=%.3g", iteration,
                         reports[-1].v_hat, reports[-1].expected_cost, mean_norm, h)
            if callback is not None:
                callback(reports[-1], particles)
            if mean_norm < cfg.update_tol:
                termination = "converged"
                break
    finally:
        if pool is not None:
            pool.shutdown()

    return PlanResult(
        particles=particles,
        initial_particles=init,
        reports=reports,
        termination=termination,
        wall_seconds=time.perf_counter() - t0,
        final_costs=np.array([w.cost for w in ws]),
        final_log_priors=np.array([w.log_prior for w in ws]),
        prior=prior,
        factor_graph=fg,
    )
