"""Numerical laboratory for a nonlocal neural-field equation on the circle.

The evolution law is du/dt = -u + J*(f(u)) + h with circular convolution
against an even, unit-mass connectivity kernel J supported in [-1, 1] and
a logistic firing rate f. The package provides the discretized flow, its
energy functional, equilibrium solvers with spectral classification, and
empirical attractor-continuity sweeps in the kernel.
"""

from .attractor import (AttractorSample, ContinuityReport, SampleSpec, SweepSpec,
                        continuity_sweep, equilibrium_set_distance,
                        random_state_in_ball, sample_attractor, semidistance,
                        semidistance_bruteforce, trace_unstable_manifold)
from .config import RunConfig, config_fingerprint, parse_config
from .dynamics import (FlowParams, Trajectory, absorbing_radius, rhs, simulate,
                       step_etd1, step_rk4)
from .energy import EnergyReport, dissipation_check, lyapunov
from .equilibria import (Equilibrium, MultistartSpec, SpectrumReport,
                         constant_mode_eigenvalues, constant_roots,
                         find_destabilizing_h, find_equilibria,
                         linearization_matrix, newton_solve, orbit_min_distance,
                         rotation_orbit, solve_constant, spectrum)
from .firing import (FiringRate, HypothesisReport, check_hypotheses, f_eval,
                     f_inverse, primitive_of_inverse)
from .grid import (CircleGrid, GridFunction, build_grid, integrate,
                   load_gridfunction_csv, norms_and_inner, rotate,
                   save_gridfunction_csv, spectral_derivative)
from .kernel import (Kernel, KernelProfile, bump_profile, convolve,
                     convolve_direct, fourier_coefficients, l1_distance,
                     make_kernel, mexican_hat_profile, scaled_bump_profile,
                     table_profile)

__version__ = "0.1.0"
