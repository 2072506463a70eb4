"""Shared fixtures and frozen reference values.

Reference constants were computed with independent oracles before the
implementation existed: adaptive quadrature (scipy.integrate.quad at
1e-14 tolerance) for integrals, Brent root solves at 1e-15 for scalar
equilibria, and plain arithmetic on those outputs. They are frozen here
and the library must reproduce them.
"""

from __future__ import annotations

import numpy as np
import pytest

from nflab import (FiringRate, FlowParams, MultistartSpec, build_grid,
                   bump_profile, find_destabilizing_h, find_equilibria,
                   make_kernel, newton_solve, solve_constant)
from nflab.grid import GridFunction

# integral of exp(-1/(1-x^2)) over [-1, 1]
I_BUMP = 0.4439938161680793
# sup of the normalized bump = exp(-1) / I_BUMP
BUMP_PEAK = 0.8285688398691055
# constant equilibrium c - f(c) = h at beta=1, h=0.5
C_STAR = 1.2829518230740553
S_STAR = 0.7829518230740552          # f(C_STAR)
FP_STAR = 0.16993826581906857        # f'(C_STAR)
PHI_HALF = -0.6931471805599453       # Phi(1/2) = -log 2
PHI_S_STAR = -0.5231464678073928     # Phi(S_STAR)
ENERGY_STAR = -2.9307099791325926    # energy of the constant equilibrium, tau=1.2
R_POINTWISE = 2.488565215685853      # 2*tau*BUMP_PEAK + 0.5
R_L2 = 3.855268654520951             # R_POINTWISE * sqrt(2.4)
# cosine coefficients of the normalized bump at tau = 1.2 (adaptive quadrature)
JHAT = [1.0, 0.5521499380319298, -0.03023494206851435, -0.053609630227803864,
        0.03574072778479667, -0.008673825250446908, -0.005615534626607705,
        0.008079242947755166, -0.004863173403740975]

TAU = 1.2
TURING_BETA = 12.0
TURING_THETA = 0.55


@pytest.fixture(scope="session")
def grid256():
    return build_grid(TAU, 256)


@pytest.fixture(scope="session")
def kernel256(grid256):
    return make_kernel(bump_profile(), grid256)


@pytest.fixture(scope="session")
def params_default(kernel256):
    return FlowParams(kernel=kernel256, firing=FiringRate(), h=0.5)


@pytest.fixture(scope="session")
def const_eq(params_default):
    return solve_constant(params_default)


@pytest.fixture(scope="session")
def turing_params_256(kernel256):
    fr = FiringRate(beta=TURING_BETA, theta=TURING_THETA)
    probe = FlowParams(kernel=kernel256, firing=fr, h=0.1)
    scan = find_destabilizing_h(probe, mode=1)
    return FlowParams(kernel=kernel256, firing=fr, h=scan.h), scan


@pytest.fixture(scope="session")
def turing_pattern_256(turing_params_256):
    p, scan = turing_params_256
    x = p.grid.points
    guess = GridFunction(p.grid, scan.c + 0.3 * np.cos(np.pi * x / p.grid.tau))
    eq = newton_solve(p, guess, tol=1e-11)
    assert eq.converged and eq.kind == "nonconstant"
    return eq


@pytest.fixture(scope="session")
def turing_params_512():
    grid = build_grid(TAU, 512)
    kernel = make_kernel(bump_profile(), grid)
    fr = FiringRate(beta=TURING_BETA, theta=TURING_THETA)
    probe = FlowParams(kernel=kernel, firing=fr, h=0.1)
    scan = find_destabilizing_h(probe, mode=1)
    return FlowParams(kernel=kernel, firing=fr, h=scan.h), scan


@pytest.fixture(scope="session")
def turing_pattern_512(turing_params_512):
    p, scan = turing_params_512
    x = p.grid.points
    guess = GridFunction(p.grid, scan.c + 0.3 * np.cos(np.pi * x / p.grid.tau))
    eq = newton_solve(p, guess, tol=1e-11)
    assert eq.converged and eq.kind == "nonconstant"
    return eq


@pytest.fixture(scope="session")
def turing_equilibria_256(turing_params_256):
    p, _ = turing_params_256
    return find_equilibria(p, MultistartSpec(seed=3))
