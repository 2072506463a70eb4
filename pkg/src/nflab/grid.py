"""Uniform periodic grid on the circle, chart [-tau, tau), and sampled functions.

The circle carries total measure 2*tau; all integrals use the equal-weight
rectangle rule, which is the trapezoid rule on a periodic grid and is
spectrally accurate for smooth periodic integrands.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

__all__ = [
    "CircleGrid",
    "GridFunction",
    "Norms",
    "build_grid",
    "integrate",
    "norms_and_inner",
    "rotate",
    "spectral_derivative",
    "save_gridfunction_csv",
    "load_gridfunction_csv",
]

MIN_POINTS = 8


@dataclass(frozen=True)
class CircleGrid:
    """n equally spaced points x_i = -tau + i*(2*tau/n), i = 0..n-1."""

    tau: float
    n: int

    def __post_init__(self) -> None:
        if not self.tau > 1.0:
            raise ValueError(f"tau must exceed 1 (got {self.tau}): the kernel "
                             "support [-1, 1] must fit in one period")
        if self.n < MIN_POINTS or self.n % 2 != 0:
            raise ValueError(f"n must be an even integer >= {MIN_POINTS} (got {self.n})")

    @property
    def weight(self) -> float:
        """Quadrature weight per point; weights sum to the measure 2*tau."""
        return 2.0 * self.tau / self.n

    @cached_property
    def points(self) -> np.ndarray:
        return -self.tau + self.weight * np.arange(self.n)


def build_grid(tau: float, n: int) -> CircleGrid:
    """Validated grid constructor."""
    return CircleGrid(float(tau), int(n))


@dataclass(frozen=True)
class GridFunction:
    """Real-valued function sampled on a CircleGrid."""

    grid: CircleGrid
    values: np.ndarray

    def __post_init__(self) -> None:
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.shape != (self.grid.n,):
            raise ValueError(f"values must have shape ({self.grid.n},), got {vals.shape}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("values must be finite")
        object.__setattr__(self, "values", vals)

    @staticmethod
    def constant(grid: CircleGrid, c: float) -> "GridFunction":
        return GridFunction(grid, np.full(grid.n, float(c)))

    @staticmethod
    def from_callable(grid: CircleGrid, fn) -> "GridFunction":
        return GridFunction(grid, np.asarray(fn(grid.points), dtype=np.float64))


def _check_same_grid(u: GridFunction, v: GridFunction) -> None:
    if u.grid != v.grid:
        raise ValueError("grid mismatch")


def integrate(u: GridFunction) -> float:
    """Rectangle-rule integral over the circle."""
    return float(u.grid.weight * np.sum(u.values))


@dataclass(frozen=True)
class Norms:
    l1: float
    l2: float
    linf: float
    inner: float


def norms_and_inner(u: GridFunction, v: GridFunction | None = None) -> Norms:
    """Weighted L1/L2/sup norms of u and the weighted inner product (u, v).

    With v omitted the inner product is (u, u), so l2 = sqrt(inner).
    """
    if v is None:
        v = u
    _check_same_grid(u, v)
    w = u.grid.weight
    inner = float(w * np.sum(u.values * v.values))
    return Norms(
        l1=float(w * np.sum(np.abs(u.values))),
        l2=float(np.sqrt(w * np.sum(u.values * u.values))),
        linf=float(np.max(np.abs(u.values))),
        inner=inner,
    )


def l2_norm(values: np.ndarray, weight: float) -> float:
    """Weighted L2 norm of a raw sample vector."""
    return float(np.sqrt(weight * np.sum(values * values)))


def rotate(u: GridFunction, k: int) -> GridFunction:
    """Cyclic shift: result[i] = u[(i + k) mod n]. Exact isometry."""
    return GridFunction(u.grid, np.roll(u.values, -int(k)))


def spectral_derivative(u: GridFunction) -> GridFunction:
    """Fourier-collocation derivative, Nyquist mode zeroed.

    Mode k of a 2*tau-periodic function is multiplied by i*pi*k/tau; exact
    for trigonometric polynomials below the Nyquist frequency.
    """
    n, tau = u.grid.n, u.grid.tau
    coeffs = np.fft.rfft(u.values)
    wavenumbers = np.arange(n // 2 + 1) * (np.pi / tau)
    coeffs *= 1j * wavenumbers
    coeffs[-1] = 0.0
    return GridFunction(u.grid, np.fft.irfft(coeffs, n))


def save_gridfunction_csv(u: GridFunction, path, header_comment: str | None = None) -> None:
    """Write `x,value` rows at full double precision (17 significant digits)."""
    with open(path, "w") as fh:
        if header_comment:
            fh.write(f"# {header_comment}\n")
        fh.write("x,value\n")
        for x, v in zip(u.grid.points, u.values):
            fh.write(f"{x:.17g},{v:.17g}\n")


def load_gridfunction_csv(path) -> GridFunction:
    """Read a file written by save_gridfunction_csv; the grid is inferred."""
    xs, vals = [], []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#") or line.startswith("x,"):
                continue
            sx, sv = line.split(",")
            xs.append(float(sx))
            vals.append(float(sv))
    xs = np.asarray(xs)
    n = len(xs)
    tau = -xs[0]
    grid = build_grid(tau, n)
    if not np.allclose(grid.points, xs, atol=1e-12 * max(1.0, tau)):
        raise ValueError(f"{path}: points are not a uniform grid starting at -tau")
    return GridFunction(grid, np.asarray(vals))
