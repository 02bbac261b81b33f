import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from stein_gpmp.trajectory import (ParticleSet, PlannerConfig, StateSpec, SupportTrajectory,
                                   state_at, straight_line_init)


def test_state_at_slices():
    traj = SupportTrajectory(np.array([1.0, 2, 3, 4]), StateSpec(1, 2, 1.0))
    np.testing.assert_array_equal(state_at(traj, 1), [3, 4])
    np.testing.assert_array_equal(state_at(traj, 0), [1, 2])


def test_state_at_out_of_range():
    traj = SupportTrajectory(np.arange(4.0), StateSpec(1, 2, 1.0))
    with pytest.raises(IndexError):
        state_at(traj, 2)
    with pytest.raises(IndexError):
        state_at(traj, -1)


def test_straight_line_example():
    traj = straight_line_init(StateSpec(1, 3, 1.0), [0, 0], [2])
    np.testing.assert_allclose(traj.positions().ravel(), [0, 1, 2])
    np.testing.assert_allclose(traj.velocities().ravel(), [1, 1, 1])


def test_straight_line_degenerate():
    traj = straight_line_init(StateSpec(2, 4, 0.3), [1, -2, 5, 5], [1, -2])
    np.testing.assert_allclose(traj.positions(), [[1, -2]] * 4)
    np.testing.assert_allclose(traj.velocities(), 0)


def test_straight_line_per_coordinate():
    spec = StateSpec(2, 5, 0.5)
    traj = straight_line_init(spec, [0, 1, 0, 0], [4, -3])
    # hand oracle: x goes 0..4 in steps of 1, y goes 1..-3 in steps of -1, over 2 s
    np.testing.assert_allclose(traj.positions()[:, 0], [0, 1, 2, 3, 4])
    np.testing.assert_allclose(traj.positions()[:, 1], [1, 0, -1, -2, -3])
    np.testing.assert_allclose(traj.velocities(), [[2, -2]] * 5)


@settings(max_examples=50, deadline=None)
@given(dof=st.integers(1, 3), n=st.integers(2, 7), dt=st.floats(0.05, 3.0),
       seed=st.integers(0, 2**31))
def test_state_roundtrip_and_fd_consistency(dof, n, dt, seed):
    rng = np.random.default_rng(seed)
    spec = StateSpec(dof, n, dt)
    traj = SupportTrajectory(rng.normal(size=spec.size), spec)
    flat = np.concatenate([state_at(traj, k) for k in range(n)])
    np.testing.assert_array_equal(flat, traj.values)

    line = straight_line_init(spec, rng.normal(size=2 * dof), rng.normal(size=dof))
    pos, vel = line.positions(), line.velocities()
    np.testing.assert_allclose(np.diff(pos, axis=0) / dt, vel[:-1], atol=1e-12, rtol=1e-9)


def test_spec_validation():
    with pytest.raises(ValueError):
        StateSpec(0, 3, 1.0)
    with pytest.raises(ValueError):
        StateSpec(1, 1, 1.0)
    with pytest.raises(ValueError):
        StateSpec(1, 3, 0.0)
    with pytest.raises(ValueError):
        SupportTrajectory(np.zeros(5), StateSpec(1, 3, 1.0))
    with pytest.raises(ValueError):
        ParticleSet(np.zeros((2, 5)), StateSpec(1, 3, 1.0))


def test_config_validation():
    with pytest.raises(ValueError):
        PlannerConfig(lam=0)
    with pytest.raises(ValueError):
        PlannerConfig(step_size=-1)
    with pytest.raises(ValueError):
        PlannerConfig(max_iters=0)
    with pytest.raises(ValueError):
        PlannerConfig(bandwidth="silverman")
    assert PlannerConfig(bandwidth=2.5).bandwidth == 2.5
