import math
from dataclasses import replace

import numpy as np
import pytest

from nflab import (FiringRate, FlowParams, absorbing_radius, rhs, rotate,
                   simulate, solve_constant, step_etd1, step_rk4)
from nflab.attractor import random_state_in_ball
from nflab.dynamics import rhs_values
from nflab.grid import GridFunction, l2_norm

from conftest import C_STAR, R_L2, R_POINTWISE


def test_rhs_zero_at_constant_equilibrium(params_default, const_eq):
    out = rhs(params_default, const_eq.state)
    assert np.max(np.abs(out.values)) < 1e-13


def test_rhs_at_zero_state(params_default, grid256):
    out = rhs(params_default, GridFunction.constant(grid256, 0.0))
    assert np.max(np.abs(out.values - 1.0)) < 1e-13


def test_rhs_equivariance(params_default, grid256):
    rng = np.random.default_rng(0)
    u = GridFunction(grid256, rng.normal(size=grid256.n))
    for k in (1, 50, 200):
        lhs = rhs(params_default, rotate(u, k)).values
        rhs_ = rotate(rhs(params_default, u), k).values
        assert np.max(np.abs(lhs - rhs_)) < 1e-13


def test_params_validation(kernel256):
    with pytest.raises(ValueError, match="positive"):
        FlowParams(kernel=kernel256, firing=FiringRate(), h=0.0)
    with pytest.raises(ValueError, match="dt"):
        FlowParams(kernel=kernel256, firing=FiringRate(), h=0.5, dt=-1.0)
    with pytest.raises(ValueError, match="integrator"):
        FlowParams(kernel=kernel256, firing=FiringRate(), h=0.5, integrator="euler")


def test_etd1_preserves_equilibrium(params_default, const_eq):
    u = const_eq.state
    stepped = step_etd1(params_default, u)
    assert np.max(np.abs(stepped.values - u.values)) < 1e-14


def test_etd1_consistency_with_rhs(params_default, grid256):
    rng = np.random.default_rng(1)
    u = GridFunction(grid256, rng.normal(size=grid256.n))
    p = replace(params_default, dt=1e-4)
    du = (step_etd1(p, u).values - u.values) / p.dt
    assert np.max(np.abs(du - rhs(p, u).values)) < 1e-4 * np.max(np.abs(rhs(p, u).values)) + 1e-6


def test_etd1_matches_scalar_recurrence(params_default, grid256):
    from scipy.special import expit

    u = GridFunction.constant(grid256, 0.0)
    c = 0.0
    a = math.exp(-params_default.dt)
    for _ in range(20):
        u = step_etd1(params_default, u)
        c = a * c + (1 - a) * (expit(c) + 0.5)
        assert np.max(np.abs(u.values - c)) < 1e-14


def test_simulate_converges_to_constant(params_default, grid256):
    traj = simulate(params_default, GridFunction.constant(grid256, 0.0), 40.0)
    assert np.max(np.abs(traj.final_state.values - C_STAR)) < 1e-8
    assert np.all(np.diff(traj.times) > 0)


def test_simulate_absorbing_inequality(params_default, grid256):
    rng = np.random.default_rng(2)
    u0 = GridFunction(grid256, rng.normal(size=grid256.n))
    u0 = GridFunction(grid256, u0.values * (30.0 / l2_norm(u0.values, grid256.weight)))
    traj = simulate(params_default, u0, 15.0)
    bound = np.exp(-traj.times) * 30.0 + R_L2 + 1e-6
    assert np.all(traj.l2_norm <= bound)


def test_simulate_pointwise_bound(params_default, grid256):
    rng = np.random.default_rng(3)
    u0 = GridFunction(grid256, 5.0 * rng.normal(size=grid256.n))
    m0 = np.max(np.abs(u0.values))
    traj = simulate(params_default, u0, 10.0)
    bound = np.exp(-traj.times) * m0 + R_POINTWISE + 1e-9
    assert np.all(np.maximum(np.abs(traj.min_u), np.abs(traj.max_u)) <= bound)


def test_simulate_equivariance(params_default, grid256):
    rng = np.random.default_rng(4)
    u0 = GridFunction(grid256, rng.normal(size=grid256.n))
    k = 37
    t1 = simulate(params_default, rotate(u0, k), 5.0, stride=5)
    t2 = simulate(params_default, u0, 5.0, stride=5)
    for s1, s2 in zip(t1.states, t2.states):
        assert np.max(np.abs(s1.values - rotate(s2, k).values)) < 1e-13


def test_integrator_cross_check(params_default, grid256):
    rng = np.random.default_rng(5)
    u0 = random_state_in_ball(grid256, rng, R_L2)
    p_etd = replace(params_default, dt=0.01, integrator="etd1")
    p_rk4 = replace(params_default, dt=0.01, integrator="rk4")
    a = simulate(p_etd, u0, 10.0).final_state.values
    b = simulate(p_rk4, u0, 10.0).final_state.values
    assert np.max(np.abs(a - b)) < 1e-4


def test_simulate_rejects_tiny_horizon(params_default, grid256):
    with pytest.raises(ValueError, match="T must be"):
        simulate(params_default, GridFunction.constant(grid256, 0.0), 1e-6)


def test_nonfinite_state_aborts(params_default, grid256):
    # rk4 with an absurd step is unstable for the linear decay part and
    # must fail loudly instead of returning garbage
    p = replace(params_default, dt=10.0, integrator="rk4")
    u0 = GridFunction.constant(grid256, 1e6)
    with pytest.raises(RuntimeError, match="non-finite"):
        simulate(p, u0, 5000.0)


def test_state_decimation(params_default, grid256):
    traj = simulate(params_default, GridFunction.constant(grid256, 0.0), 2.0, stride=10)
    # 40 steps: snapshots at 0, 10, 20, 30, 40
    assert list(traj.state_indices) == [0, 10, 20, 30, 40]
    assert len(traj.times) == 41
    assert traj.state_indices[-1] == len(traj.times) - 1


def test_absorbing_radius_values(params_default):
    R, R_l2 = absorbing_radius(params_default)
    assert R == pytest.approx(R_POINTWISE, abs=1e-9)
    assert R_l2 == pytest.approx(R_L2, abs=1e-9)


def test_absorbing_radius_affine_in_h(params_default):
    R1, _ = absorbing_radius(params_default)
    R2, _ = absorbing_radius(replace(params_default, h=1.0))
    assert R2 - R1 == pytest.approx(0.5, abs=1e-12)


def test_residual_diagnostic_definition(params_default, grid256):
    rng = np.random.default_rng(6)
    u0 = GridFunction(grid256, rng.normal(size=grid256.n))
    traj = simulate(params_default, u0, 1.0, stride=1)
    for idx, state in zip(traj.state_indices, traj.states):
        want = float(np.max(np.abs(rhs_values(params_default, state.values))))
        assert traj.max_residual[idx] == pytest.approx(want, rel=1e-12)


def test_step_rk4_accuracy_order(params_default, grid256):
    # halving dt should shrink the one-step defect against a tiny-step
    # reference by roughly 2^5 (local order of rk4)
    rng = np.random.default_rng(7)
    u = GridFunction(grid256, rng.normal(size=grid256.n))
    ref = u
    p_ref = replace(params_default, dt=1e-3, integrator="rk4")
    for _ in range(100):
        ref = step_rk4(p_ref, ref)
    errs = []
    for dt in (0.1, 0.05):
        p = replace(params_default, dt=dt, integrator="rk4")
        v = u
        for _ in range(int(round(0.1 / dt))):
            v = step_rk4(p, v)
        errs.append(np.max(np.abs(v.values - ref.values)))
    assert errs[1] < errs[0] / 8
