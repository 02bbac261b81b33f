import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import central_diff, central_diff_jac, dense_prior_precision
from stein_gpmp.environment import Circle, ObstacleParams, RobotModel, World2D, signed_distance
from stein_gpmp.factor_graph import (FactorGraph, combined_cost, evaluate_particle,
                                     evaluate_residual, gauss_newton_hessian, log_posterior_grad)
from stein_gpmp.linalg import in_block_tridiagonal_envelope
from stein_gpmp.prior import PriorSpec, build_prior, log_prior_and_grad
from stein_gpmp.trajectory import StateSpec

PARAMS = ObstacleParams(eps=0.3, sigma_obs=0.2)


def point_setup(n=6, world=None, q_c=1.0):
    spec = StateSpec(2, n, 0.5)
    world = World2D((Circle((2.0, 0.3), 0.8),)) if world is None else world
    fg = FactorGraph(world, RobotModel.point(), PARAMS, spec)
    prior = build_prior(spec, PriorSpec((4.0, 0.0), q_c, 0.1, 0.1), np.zeros(4))
    return fg, prior


def away_from_kinks(fg, theta, tol=1e-3):
    states = theta.reshape(fg.spec.num_support, fg.spec.state_dim)
    for st_ in states:
        d = signed_distance(fg.world, st_[:2])[0]
        if abs(d - fg.params.eps) < tol:
            return False
    return True


def test_free_space_zero():
    fg, prior = point_setup(world=World2D((Circle((0, 10), 1.0),)))
    h, j = evaluate_residual(fg, prior.mu)
    assert not h.any() and j.nnz == 0
    assert combined_cost(fg, prior.mu) == 0
    np.testing.assert_array_equal(log_posterior_grad(fg, prior, 1.0, prior.mu), 0)
    np.testing.assert_allclose(gauss_newton_hessian(fg, prior, 1.0, prior.mu).toarray(),
                               prior.precision.toarray())


def test_single_state_inside_is_local():
    fg, prior = point_setup(world=World2D((Circle((20, 20), 1.0),)))
    theta = prior.mu.copy()
    theta[3 * 4:3 * 4 + 2] = [20, 20]
    h, j = evaluate_residual(fg, theta)
    assert np.flatnonzero(h).tolist() == [3]
    assert h[3] == pytest.approx(1.3)
    assert set(j.tocoo().row) == {3}


def test_scalar_cost():
    fg, prior = point_setup(world=World2D((Circle((20, 20), 1.0),)))
    theta = prior.mu.copy()
    theta[4:6] = [20, 20.5]
    r = 0.8
    assert combined_cost(fg, theta) == pytest.approx(r**2 / (2 * 0.2**2), rel=1e-12)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**31))
def test_cost_dense_oracle(seed):
    fg, prior = point_setup()
    theta = prior.mu + np.random.default_rng(seed).normal(size=prior.size) * 0.7
    h, _ = evaluate_residual(fg, theta)
    sig_half = np.eye(len(h)) / PARAMS.sigma_obs
    expect = 0.5 * np.sum((sig_half @ h) ** 2)
    assert combined_cost(fg, theta) == pytest.approx(expect, rel=1e-10, abs=1e-14)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**31), lam=st.floats(0.1, 10))
def test_residual_jacobian_and_grad_fd(seed, lam):
    fg, prior = point_setup()
    theta = prior.mu + np.random.default_rng(seed).normal(size=prior.size) * 0.7
    if not away_from_kinks(fg, theta):
        return
    _, jac = evaluate_residual(fg, theta)
    fd = central_diff_jac(lambda x: evaluate_residual(fg, x)[0], theta)
    np.testing.assert_allclose(jac.toarray(), fd, rtol=1e-4, atol=1e-6)

    g = log_posterior_grad(fg, prior, lam, theta)
    fdg = central_diff(
        lambda x: log_prior_and_grad(prior, x)[0] - combined_cost(fg, x) / lam, theta)
    np.testing.assert_allclose(g, fdg, rtol=1e-4, atol=1e-4 * np.max(np.abs(g)))

    # composed from the other operations
    comp = log_prior_and_grad(prior, theta)[1] - (jac.T @ (fg.sigma_inv @ evaluate_residual(fg, theta)[0])) / lam
    np.testing.assert_allclose(g, comp, rtol=0, atol=1e-12 * max(1, np.max(np.abs(g))))


def test_lambda_limits_and_scaling():
    fg, prior = point_setup()
    theta = prior.mu + np.random.default_rng(5).normal(size=prior.size) * 0.5
    prior_grad = log_prior_and_grad(prior, theta)[1]
    assert combined_cost(fg, theta) > 0
    lik1 = log_posterior_grad(fg, prior, 1.0, theta) - prior_grad
    lik3 = log_posterior_grad(fg, prior, 3.0, theta) - prior_grad
    np.testing.assert_allclose(lik3, lik1 / 3, rtol=1e-12, atol=1e-12)
    far = log_posterior_grad(fg, prior, 1e12, theta)
    np.testing.assert_allclose(far, prior_grad, rtol=1e-9, atol=1e-9)


def test_hessian_dense_oracle_and_psd():
    spec = StateSpec(2, 3, 0.5)
    world = World2D((Circle((1.0, 0.2), 0.8),))
    fg = FactorGraph(world, RobotModel.point(), PARAMS, spec)
    prior = build_prior(spec, PriorSpec((2.0, 0.0), 1.0, 0.1, 0.1), np.zeros(4))
    theta = prior.mu + np.array([0, 0, 0, 0, 0.1, -0.1, 0.2, 0, 0, 0, 0, 0])
    lam = 0.7
    h, jac = evaluate_residual(fg, theta)
    assert h.any()
    jd = jac.toarray()
    expect = dense_prior_precision(2, 3, 0.5, 1.0, 0.1, 0.1) + jd.T @ jd / PARAMS.sigma_obs**2 / lam
    hess = gauss_newton_hessian(fg, prior, lam, theta)
    np.testing.assert_allclose(hess.toarray(), expect, rtol=1e-12, atol=1e-12 * np.abs(expect).max())
    diff = (hess - prior.precision).toarray()
    assert np.linalg.eigvalsh(diff)[0] >= -1e-9
    assert in_block_tridiagonal_envelope(hess, 4)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**31))
def test_arm_hessian_stays_in_envelope(seed):
    rng = np.random.default_rng(seed)
    spec = StateSpec(3, 5, 0.3)
    arm = RobotModel.planar_arm((1.0, 0.8, 0.6))
    world = World2D((Circle(rng.uniform(-1.5, 1.5, 2), 0.5),))
    fg = FactorGraph(world, arm, PARAMS, spec)
    prior = build_prior(spec, PriorSpec((1.0, 0.5, -0.5), 1.0, 0.1, 0.1), np.zeros(6))
    theta = prior.mu + rng.normal(size=prior.size)
    ws = evaluate_particle(fg, prior, 1.0, theta)
    assert in_block_tridiagonal_envelope(ws.hessian, 6)
    jac = ws.jacobian.toarray().reshape(-1, 5, 6)
    np.testing.assert_array_equal(jac[:, :, 3:], 0)


def test_workspace_consistency():
    fg, prior = point_setup()
    theta = prior.mu + np.random.default_rng(2).normal(size=prior.size) * 0.5
    ws = evaluate_particle(fg, prior, 2.0, theta)
    np.testing.assert_array_equal(ws.grad, log_posterior_grad(fg, prior, 2.0, theta))
    assert ws.cost == combined_cost(fg, theta)
    assert ws.log_prior == pytest.approx(log_prior_and_grad(prior, theta)[0], rel=1e-14)
    assert (ws.hessian != gauss_newton_hessian(fg, prior, 2.0, theta)).nnz == 0


def test_dof_mismatch():
    with pytest.raises(ValueError):
        FactorGraph(World2D(), RobotModel.point(), PARAMS, StateSpec(3, 3, 1.0))
