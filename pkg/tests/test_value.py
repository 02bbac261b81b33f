import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import naive_value
from stein_gpmp.value import cost_statistics, particle_weights, value_estimate

finite = st.floats(-50, 50)


def test_weight_examples():
    np.testing.assert_array_equal(particle_weights([3.0], [-2.0], 1.0), [1.0])
    np.testing.assert_allclose(particle_weights([1.0] * 4, [0.5] * 4, 2.0), 0.25)
    np.testing.assert_allclose(particle_weights([0.0, 0.0], [0.0, np.log(3)], 1.0),
                               [0.25, 0.75], rtol=1e-15)


def test_value_examples():
    assert value_estimate([2.0], [-1.5], 3.0) == pytest.approx(2.0 - 3.0 * -1.5)
    one = value_estimate([2.0], [-1.5], 3.0)
    two = value_estimate([2.0, 2.0], [-1.5, -1.5], 3.0)
    assert two - one == pytest.approx(-3.0 * np.log(2), rel=1e-14)


@settings(max_examples=50, deadline=None)
@given(c=st.lists(st.floats(0, 200), min_size=1, max_size=8), seed=st.integers(0, 999),
       lam=st.floats(0.05, 10))
def test_value_high_precision(c, seed, lam):
    lp = np.random.default_rng(seed).normal(size=len(c)) * 20
    assert value_estimate(c, lp, lam) == pytest.approx(naive_value(c, lp, lam), rel=1e-10,
                                                        abs=1e-12)


def test_cost_statistics_examples():
    assert cost_statistics([4.0] * 3, [0.2, 0.3, 0.5]) == pytest.approx((4.0, 0.0))
    assert cost_statistics([0.0, 2.0], [0.5, 0.5]) == (1.0, 1.0)


@settings(max_examples=50, deadline=None)
@given(c=st.lists(st.floats(0, 100), min_size=1, max_size=10), seed=st.integers(0, 999))
def test_cost_statistics_naive(c, seed):
    w = np.random.default_rng(seed).random(len(c)) + 1e-3
    w /= w.sum()
    mean = sum(wi * ci for wi, ci in zip(w, c))
    var = sum(wi * (ci - mean) ** 2 for wi, ci in zip(w, c))
    m, v = cost_statistics(c, w)
    assert m == pytest.approx(mean, rel=1e-12, abs=1e-12)
    assert v == pytest.approx(var, rel=1e-12, abs=1e-12 * max(1.0, mean**2))


@settings(max_examples=50, deadline=None)
@given(c=st.lists(st.floats(0, 100), min_size=1, max_size=8), shift=finite,
       lam=st.floats(0.1, 5), seed=st.integers(0, 999))
def test_shift_invariance(c, shift, lam, seed):
    lp = np.random.default_rng(seed).normal(size=len(c))
    c = np.array(c)
    np.testing.assert_allclose(particle_weights(c + shift, lp, lam),
                               particle_weights(c, lp, lam), rtol=1e-9, atol=1e-15)
    assert value_estimate(c + shift, lp, lam) - value_estimate(c, lp, lam) == pytest.approx(
        shift, abs=1e-9 * max(1.0, np.abs(c).max(), abs(shift)))


@settings(max_examples=50, deadline=None)
@given(c=st.lists(st.floats(0, 100), min_size=1, max_size=8), extra=st.floats(0, 1e3),
       lam=st.floats(0.1, 5), seed=st.integers(0, 999))
def test_appending_never_increases_value(c, extra, lam, seed):
    lp = np.random.default_rng(seed).normal(size=len(c) + 1)
    base = value_estimate(c, lp[:-1], lam)
    more = value_estimate(c + [extra], lp, lam)
    assert more <= base + 1e-12 * max(1.0, abs(base))


def test_degenerate_inputs():
    with pytest.raises(ValueError):
        particle_weights([np.inf, np.inf], [0.0, 0.0], 1.0)
    with pytest.raises(ValueError):
        value_estimate([1.0], [np.nan], 1.0)
    with pytest.raises(ValueError):
        value_estimate([], [], 1.0)
    with pytest.raises(ValueError):
        value_estimate([1.0], [0.0], 0.0)
    # one infinite cost is fine as long as another particle is finite
    np.testing.assert_array_equal(particle_weights([np.inf, 1.0], [0.0, 0.0], 1.0), [0, 1])


def test_grid_free_energy_bounds_any_subset():
    from helpers import toy_arm
    from oracles import grid_log_weights
    from stein_gpmp.factor_graph import FactorGraph, combined_cost
    from stein_gpmp.prior import build_prior, log_prior_and_grad

    req = toy_arm(lam=0.5)
    prior = build_prior(req.spec, req.prior_spec, req.start)
    fg = FactorGraph(req.world, req.model, req.obstacle, req.spec)
    lam = req.config.lam
    costs, logps = [], []

    def score(theta):
        costs.append(combined_cost(fg, theta))
        logps.append(log_prior_and_grad(prior, theta)[0])
        return -costs[-1] / lam + logps[-1]

    _, scores, _ = grid_log_weights(score, prior.mu, 2, 1.5, 201)
    costs, logps = np.array(costs), np.array(logps)
    full = value_estimate(costs, logps, lam)
    rng = np.random.default_rng(0)
    for _ in range(200):
        subset = rng.choice(201, size=rng.integers(1, 201), replace=False)
        assert value_estimate(costs[subset], logps[subset], lam) >= full - 1e-12
    assert costs.max() > 0
