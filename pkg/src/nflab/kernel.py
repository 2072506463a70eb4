"""Connectivity kernels on the circle.

Admissible kernels are even, non-negative, supported in [-1, 1] and
normalized to unit L1 norm. Profiles are defined on the real line and
periodized onto [-tau, tau); since tau > 1 >= support half-width, the
periodization never wraps. Normalization is applied at the discrete level
(divide by the grid quadrature), so constants are exact fixed points of
the convolution J * (.).

A truncated mexican-hat profile (difference of Gaussians) is provided for
exploration; it is sign-indefinite and excluded from the class guarantees.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .grid import CircleGrid, GridFunction, rotate

__all__ = [
    "KernelProfile",
    "Kernel",
    "bump_profile",
    "scaled_bump_profile",
    "mexican_hat_profile",
    "table_profile",
    "make_kernel",
    "convolve",
    "convolve_direct",
    "fourier_coefficients",
    "l1_distance",
]

EVENNESS_TOL = 1e-12


@dataclass(frozen=True)
class KernelProfile:
    """Evaluation rule for a connectivity profile on the real line.

    `a` is the support half-width (rule(x) = 0 for |x| >= a, a <= 1).
    `nonnegative` marks membership in the admissible class; sign-indefinite
    profiles are carried through but skip the class checks.
    """

    kind: str
    a: float
    rule: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    nonnegative: bool = True

    def __post_init__(self) -> None:
        if not 0.0 < self.a <= 1.0:
            raise ValueError(f"support half-width must lie in (0, 1], got {self.a}")

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return self.rule(np.asarray(x, dtype=np.float64))

    @property
    def sweep_param(self) -> float:
        """Distance-to-reference parameter s = 1 - a used by kernel sweeps."""
        return 1.0 - self.a


def _bump_rule(a: float) -> Callable[[np.ndarray], np.ndarray]:
    def rule(x: np.ndarray) -> np.ndarray:
        out = np.zeros_like(x)
        inside = np.abs(x) < a
        xs = x[inside] / a
        out[inside] = np.exp(-1.0 / (1.0 - xs * xs))
        return out

    return rule


def bump_profile() -> KernelProfile:
    """Smooth bump exp(-1/(1-x^2)) on |x| < 1, zero outside."""
    return KernelProfile(kind="bump", a=1.0, rule=_bump_rule(1.0))


def scaled_bump_profile(a: float) -> KernelProfile:
    """Bump rescaled to support half-width a in (0, 1]."""
    return KernelProfile(kind="scaled_bump", a=float(a), rule=_bump_rule(float(a)))


def mexican_hat_profile(b1: float, b2: float, a: float = 1.0) -> KernelProfile:
    """Difference of unit-mass Gaussians (widths 1/sqrt(b)), truncated to |x| < a.

    Requires b1 > b2 > 0 so the narrow positive center dominates at the
    origin. Sign-indefinite; truncation makes it discontinuous at the
    support edge.
    """
    if not b1 > b2 > 0:
        raise ValueError(f"need b1 > b2 > 0, got b1={b1}, b2={b2}")

    def rule(x: np.ndarray) -> np.ndarray:
        out = np.zeros_like(x)
        inside = np.abs(x) < a
        xs = x[inside]
        out[inside] = (np.sqrt(b1 / np.pi) * np.exp(-b1 * xs * xs)
                       - np.sqrt(b2 / np.pi) * np.exp(-b2 * xs * xs))
        return out

    return KernelProfile(kind="mexican_hat", a=float(a), rule=rule, nonnegative=False)


def table_profile(x: np.ndarray, values: np.ndarray) -> KernelProfile:
    """Profile interpolated linearly from (x, value) pairs; zero outside the table.

    The table must vanish for |x| >= 1.
    """
    x = np.asarray(x, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    if x.ndim != 1 or x.shape != values.shape:
        raise ValueError("table must be two equal-length 1-d arrays")
    order = np.argsort(x)
    x, values = x[order], values[order]
    if np.any((np.abs(x) >= 1.0) & (values != 0.0)):
        raise ValueError("table profile must vanish for |x| >= 1")
    nonzero = np.abs(values) > 0
    a = float(min(1.0, np.max(np.abs(x[nonzero])))) if np.any(nonzero) else 1.0

    def rule(q: np.ndarray) -> np.ndarray:
        return np.interp(q, x, values, left=0.0, right=0.0)

    return KernelProfile(kind="table", a=a, rule=rule,
                         nonnegative=bool(np.all(values >= 0.0)))


@dataclass(frozen=True)
class Kernel:
    """A profile periodized and L1-normalized on a grid.

    `samples` holds J at the grid points; `offsets` holds the same values
    reindexed by grid offset (offsets[d] = J at separation d*spacing), which
    is the first column of the convolution circulant.
    """

    grid: CircleGrid
    profile: KernelProfile
    samples: GridFunction
    offsets: np.ndarray = field(repr=False)
    offsets_rfft: np.ndarray = field(repr=False)
    linf_norm: float
    nonnegative: bool

    @property
    def multipliers(self) -> np.ndarray:
        """Fourier multipliers of the convolution operator (modes 0..n/2).

        Equal to the quadrature cosine coefficients of an even kernel.
        """
        return self.grid.weight * self.offsets_rfft.real


def make_kernel(profile: KernelProfile, grid: CircleGrid) -> Kernel:
    """Sample, periodize and normalize a profile on a grid."""
    if not grid.tau > profile.a:
        raise ValueError("grid half-period must exceed the support half-width")
    n = grid.n
    raw = profile(grid.points)
    # evenness on the grid: index i pairs with (n - i) mod n
    mirror = raw[(-np.arange(n)) % n]
    scale = max(1.0, float(np.max(np.abs(raw))))
    if np.max(np.abs(raw - mirror)) > EVENNESS_TOL * scale:
        raise ValueError("profile is not even about x = 0 on the grid")
    z = grid.weight * float(np.sum(raw))
    if not z > 0.0:
        raise ValueError(f"profile quadrature must be positive, got {z}")
    vals = raw / z
    samples = GridFunction(grid, vals)
    offsets = np.roll(vals, -(n // 2))
    return Kernel(
        grid=grid,
        profile=profile,
        samples=samples,
        offsets=offsets,
        offsets_rfft=np.fft.rfft(offsets),
        linf_norm=float(np.max(np.abs(vals))),
        nonnegative=profile.nonnegative,
    )


def _check_kernel_grid(kernel: Kernel, u: GridFunction) -> None:
    if kernel.grid != u.grid:
        raise ValueError("grid mismatch")


def convolve(kernel: Kernel, u: GridFunction) -> GridFunction:
    """Circular convolution (J * u) via FFT."""
    _check_kernel_grid(kernel, u)
    return GridFunction(kernel.grid, convolve_values(kernel, u.values))


def convolve_values(kernel: Kernel, values: np.ndarray) -> np.ndarray:
    """FFT convolution on a raw sample vector (hot path for time stepping)."""
    n = kernel.grid.n
    return kernel.grid.weight * np.fft.irfft(kernel.offsets_rfft * np.fft.rfft(values), n)


def convolve_direct(kernel: Kernel, u: GridFunction) -> GridFunction:
    """Reference O(n^2) convolution; the FFT path must agree with this."""
    _check_kernel_grid(kernel, u)
    n = kernel.grid.n
    idx = np.arange(n)
    out = np.empty(n)
    for i in range(n):
        out[i] = np.dot(kernel.offsets[(i - idx) % n], u.values)
    return GridFunction(kernel.grid, kernel.grid.weight * out)


def fourier_coefficients(kernel: Kernel, kmax: int) -> np.ndarray:
    """Cosine coefficients J_hat_k = integral of J(x) cos(pi k x / tau), k = 0..kmax."""
    n, tau, w = kernel.grid.n, kernel.grid.tau, kernel.grid.weight
    if not 0 <= kmax < n // 2:
        raise ValueError(f"kmax must lie in [0, n/2), got {kmax}")
    x = kernel.grid.points
    vals = kernel.samples.values
    return np.array([w * np.sum(vals * np.cos(np.pi * k * x / tau))
                     for k in range(kmax + 1)])


def l1_distance(k1: Kernel, k2: Kernel) -> float:
    """Quadrature of |J1 - J2| over the circle."""
    if k1.grid != k2.grid:
        raise ValueError("grid mismatch")
    return float(k1.grid.weight * np.sum(np.abs(k1.samples.values - k2.samples.values)))


def class_checks(kernel: Kernel) -> dict:
    """Admissibility report: L1 normalization, evenness, support, mean coefficient."""
    grid = kernel.grid
    vals = kernel.samples.values
    n = grid.n
    abs_l1 = grid.weight * float(np.sum(np.abs(vals)))
    mirror = vals[(-np.arange(n)) % n]
    evenness = float(np.max(np.abs(vals - mirror)))
    outside = np.abs(grid.points) > 1.0
    support_exact = bool(np.all(vals[outside] == 0.0))
    j0 = grid.weight * float(np.sum(vals))
    checks = {
        "nonnegative": kernel.nonnegative,
        "l1_norm": abs_l1,
        "l1_norm_ok": bool(abs(abs_l1 - 1.0) <= 1e-10) if kernel.nonnegative else None,
        "evenness_defect": evenness,
        "even_ok": bool(evenness <= EVENNESS_TOL * max(1.0, kernel.linf_norm)),
        "support_exact": support_exact,
        "jhat0": j0,
        "jhat0_ok": bool(abs(j0 - 1.0) <= 1e-10),
    }
    applicable = [checks["even_ok"], checks["support_exact"], checks["jhat0_ok"]]
    if kernel.nonnegative:
        applicable.append(checks["l1_norm_ok"])
    checks["all_ok"] = bool(all(applicable))
    return checks


def shift_equivariance_defect(kernel: Kernel, u: GridFunction, k: int) -> float:
    """Sup-norm of convolve(rotate(u)) - rotate(convolve(u)); diagnostics for tests."""
    lhs = convolve(kernel, rotate(u, k)).values
    rhs = rotate(convolve(kernel, u), k).values
    return float(np.max(np.abs(lhs - rhs)))
