import numpy as np
import pytest

from nflab import (build_grid, bump_profile, convolve, convolve_direct,
                   fourier_coefficients, integrate, l1_distance, make_kernel,
                   mexican_hat_profile, rotate, scaled_bump_profile,
                   table_profile)
from nflab.grid import GridFunction
from nflab.kernel import KernelProfile, class_checks

from conftest import BUMP_PEAK, JHAT, TAU


@pytest.fixture(scope="module")
def kernel1024():
    return make_kernel(bump_profile(), build_grid(TAU, 1024))


def test_bump_peak_matches_oracle(kernel1024):
    assert kernel1024.linf_norm == pytest.approx(BUMP_PEAK, abs=1e-8)


def test_unnormalized_peak_is_exp_minus_one():
    assert bump_profile()(np.array([0.0]))[0] == pytest.approx(np.exp(-1.0), abs=1e-15)


def test_l1_normalization(kernel1024):
    absval = GridFunction(kernel1024.grid, np.abs(kernel1024.samples.values))
    assert integrate(absval) == pytest.approx(1.0, abs=1e-10)


def test_jhat0_is_one(kernel1024):
    assert fourier_coefficients(kernel1024, 0)[0] == pytest.approx(1.0, abs=1e-10)


def test_shifted_profile_rejected(grid256):
    base = bump_profile()
    shifted = KernelProfile(kind="bump", a=1.0,
                            rule=lambda x: base(np.asarray(x) - 0.5))
    with pytest.raises(ValueError, match="not even"):
        make_kernel(shifted, grid256)


def test_support_exactness(kernel1024):
    outside = np.abs(kernel1024.grid.points) > 1.0
    assert np.all(kernel1024.samples.values[outside] == 0.0)


def test_constants_are_fixed_points(kernel256, grid256):
    for c in (1.0, -3.7, 0.25):
        u = GridFunction.constant(grid256, c)
        out = convolve(kernel256, u).values
        assert np.max(np.abs(out - c)) < 1e-13 * max(1.0, abs(c))


def test_convolve_shift_equivariance(kernel256, grid256):
    rng = np.random.default_rng(0)
    u = GridFunction(grid256, rng.normal(size=grid256.n))
    for k in (1, 13, 128, 255):
        lhs = convolve(kernel256, rotate(u, k)).values
        rhs = rotate(convolve(kernel256, u), k).values
        assert np.max(np.abs(lhs - rhs)) < 1e-13


def test_cosine_modes_are_eigenvectors(kernel1024):
    grid = kernel1024.grid
    jhat = fourier_coefficients(kernel1024, 8)
    x = grid.points
    for k in range(1, 9):
        u = GridFunction(grid, np.cos(np.pi * k * x / TAU))
        out = convolve(kernel1024, u).values
        assert np.max(np.abs(out - jhat[k] * u.values)) < 1e-10


def test_fourier_coefficients_match_quadrature_oracle(kernel1024):
    got = fourier_coefficients(kernel1024, 8)
    assert np.max(np.abs(got - np.array(JHAT))) < 1e-8
    assert np.all(np.abs(got) <= 1.0 + 1e-12)
    # the k >= 1 envelope stays below the mean coefficient and trails off
    assert np.all(np.abs(got[1:]) <= got[0])
    assert np.max(np.abs(got[4:])) < np.abs(got[1])


def test_fourier_coefficients_equal_fft_multipliers(kernel256):
    kmax = kernel256.grid.n // 2 - 1
    quad = fourier_coefficients(kernel256, kmax)
    fast = kernel256.multipliers[:kmax + 1]
    assert np.max(np.abs(quad - fast)) < 1e-12


def test_fourier_coefficients_kmax_range(kernel256):
    with pytest.raises(ValueError):
        fourier_coefficients(kernel256, kernel256.grid.n // 2)


@pytest.mark.parametrize("n", [64, 256, 1024])
def test_direct_vs_fft_convolution(n):
    grid = build_grid(TAU, n)
    kernel = make_kernel(bump_profile(), grid)
    rng = np.random.default_rng(n)
    for _ in range(3):
        u = GridFunction(grid, rng.normal(size=n))
        fast = convolve(kernel, u).values
        slow = convolve_direct(kernel, u).values
        scale = np.max(np.abs(slow)) or 1.0
        assert np.max(np.abs(fast - slow)) / scale < 1e-12


def test_l1_distance_identity(kernel256):
    assert l1_distance(kernel256, kernel256) == 0.0


def test_l1_distance_shrinks_toward_base(grid256, kernel256):
    dists = [l1_distance(make_kernel(scaled_bump_profile(a), grid256), kernel256)
             for a in (0.9, 0.95, 0.99)]
    assert dists[0] > dists[1] > dists[2] > 0.0


def test_l1_distance_triangle_inequality(grid256):
    ka = make_kernel(bump_profile(), grid256)
    kb = make_kernel(scaled_bump_profile(0.9), grid256)
    kc = make_kernel(scaled_bump_profile(0.8), grid256)
    assert l1_distance(ka, kc) <= l1_distance(ka, kb) + l1_distance(kb, kc) + 1e-14


def test_class_checks_pass_for_bump(kernel256):
    checks = class_checks(kernel256)
    assert checks["all_ok"]
    assert checks["nonnegative"]


def test_mexican_hat_flagged_sign_indefinite(grid256):
    profile = mexican_hat_profile(20.0, 4.0)
    assert not profile.nonnegative
    kernel = make_kernel(profile, grid256)
    assert np.min(kernel.samples.values) < 0.0
    # mean coefficient still one by construction, L1 mass exceeds it
    assert fourier_coefficients(kernel, 0)[0] == pytest.approx(1.0, abs=1e-10)
    absval = GridFunction(grid256, np.abs(kernel.samples.values))
    assert integrate(absval) > 1.0


def test_mexican_hat_parameter_order():
    with pytest.raises(ValueError):
        mexican_hat_profile(2.0, 8.0)


def test_table_profile_round_trip(grid256, kernel256):
    xs = np.linspace(-1.0, 1.0, 2001)
    vals = bump_profile()(xs)
    kernel = make_kernel(table_profile(xs, vals), grid256)
    assert np.max(np.abs(kernel.samples.values - kernel256.samples.values)) < 1e-5


def test_table_profile_rejects_support_violation():
    xs = np.linspace(-1.5, 1.5, 11)
    with pytest.raises(ValueError, match="vanish"):
        table_profile(xs, np.ones_like(xs))


def test_scaled_bump_support(grid256):
    kernel = make_kernel(scaled_bump_profile(0.5), grid256)
    outside = np.abs(grid256.points) >= 0.5
    assert np.all(kernel.samples.values[outside] == 0.0)
    assert kernel.profile.sweep_param == pytest.approx(0.5)
