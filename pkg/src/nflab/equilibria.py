"""Steady states of the flow, their linearization and rotation orbits.

An equilibrium solves F(u) = -u + J*(f(u)) + h = 0. Constant equilibria
solve the scalar equation c = f(c) + h because unit-mass kernels fix
constants. The linearization is

    A v = -v + J*(f'(u0) v)  ->  A = -I + C D,

with C the circulant of the weighted convolution and D = diag(f'(u0)).
A is similar to the symmetric matrix -I + D^{1/2} C D^{1/2} via D^{1/2}
(f' > 0 for logistic rates), so the reported spectrum is real.

Shift equivariance of F means a nonconstant equilibrium generates a whole
curve of equilibria; on the grid these are the n cyclic rotations, with
the spatial derivative of the profile spanning the zero eigendirection.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
import scipy.linalg

from .dynamics import FlowParams, rhs_values
from .firing import f_eval
from .grid import GridFunction, rotate, spectral_derivative
from .kernel import fourier_coefficients

__all__ = [
    "Equilibrium",
    "SpectrumReport",
    "MultistartSpec",
    "solve_constant",
    "constant_roots",
    "constant_mode_eigenvalues",
    "linearization_matrix",
    "spectrum",
    "newton_solve",
    "rotation_orbit",
    "orbit_min_distance",
    "find_equilibria",
    "find_destabilizing_h",
]

CONSTANT_SPREAD_TOL = 1e-8


@dataclass
class Equilibrium:
    """A solved steady state."""

    state: GridFunction
    residual: float
    kind: str                      # "constant" | "nonconstant"
    converged: bool = True
    iterations: int = 0
    orbit_id: int = -1
    spectrum: "SpectrumReport | None" = None

    @property
    def is_constant(self) -> bool:
        return self.kind == "constant"


@dataclass
class SpectrumReport:
    """Eigenvalues (descending) of the linearization at a state.

    zero_index points at the eigenvalue nearest zero when its magnitude is
    below zero_tol; zero_is_simple additionally requires the next-nearest
    magnitude to clear gap_tol. eigvec_alignment is the angle (radians)
    between the near-zero eigenvector and the profile derivative, None for
    constant states.
    """

    eigenvalues: np.ndarray
    zero_index: int | None
    zero_is_simple: bool
    eigvec_alignment: float | None
    hyperbolic: bool
    zero_tol: float
    gap_tol: float
    vectors: np.ndarray | None = field(default=None, repr=False)

    @property
    def max_eigenvalue(self) -> float:
        return float(self.eigenvalues[0])

    def unstable(self, hyp_tol: float = 1e-3) -> list[int]:
        """Indices of eigenvalues >= hyp_tol (sorted descending)."""
        return [i for i, lam in enumerate(self.eigenvalues) if lam >= hyp_tol]


def _classify(values: np.ndarray) -> str:
    return "constant" if float(np.max(values) - np.min(values)) <= CONSTANT_SPREAD_TOL \
        else "nonconstant"


def _scalar_gap(p: FlowParams, c: float) -> float:
    return c - f_eval(p.firing, c, 0) - p.h


def constant_roots(p: FlowParams, scan_points: int = 4001) -> list[float]:
    """All roots of c - f(c) - h on [h, h + s_max] by sign scan plus Brent.

    The map c -> c - f(c) may be non-monotone for beta > 4, so several
    roots can coexist.
    """
    from scipy.optimize import brentq

    lo, hi = p.h, p.h + p.firing.s_max
    cs = np.linspace(lo, hi, scan_points)
    gs = np.array([_scalar_gap(p, c) for c in cs])
    roots: list[float] = []
    for i in range(scan_points - 1):
        if gs[i] == 0.0:
            roots.append(float(cs[i]))
        elif gs[i] * gs[i + 1] < 0.0:
            roots.append(float(brentq(lambda c: _scalar_gap(p, c), cs[i], cs[i + 1],
                                      xtol=1e-15, rtol=8.9e-16)))
    if gs[-1] == 0.0:
        roots.append(float(cs[-1]))
    return roots


def solve_constant(p: FlowParams) -> Equilibrium:
    """Constant equilibrium by bisection plus Newton polish on [h, h + s_max].

    Unique for beta <= 4 (the scalar map is then strictly monotone); with
    multiple roots the bisection limit is returned, use constant_roots for
    the full list.
    """
    lo, hi = p.h, p.h + p.firing.s_max
    glo = _scalar_gap(p, lo)
    if glo == 0.0:
        c = lo
    else:
        a, b = lo, hi
        for _ in range(200):
            mid = 0.5 * (a + b)
            gm = _scalar_gap(p, mid)
            if gm == 0.0:
                break
            if glo * gm < 0.0:
                b = mid
            else:
                a, glo = mid, gm
        c = 0.5 * (a + b)
        for _ in range(8):  # Newton polish; g' = 1 - f' never vanishes at a simple root
            gp = 1.0 - f_eval(p.firing, c, 1)
            if gp == 0.0:
                break
            c -= _scalar_gap(p, c) / gp
    state = GridFunction.constant(p.grid, c)
    residual = float(np.max(np.abs(rhs_values(p, state.values))))
    return Equilibrium(state=state, residual=residual, kind="constant")


def constant_mode_eigenvalues(p: FlowParams, c: float, kmax: int | None = None) -> np.ndarray:
    """Analytic eigenvalues -1 + f'(c)*J_hat_k of the linearization at a constant."""
    if kmax is None:
        kmax = p.grid.n // 2
    jhat = fourier_coefficients(p.kernel, min(kmax, p.grid.n // 2 - 1))
    return -1.0 + f_eval(p.firing, c, 1) * jhat


def _circulant(p: FlowParams) -> np.ndarray:
    return p.grid.weight * scipy.linalg.circulant(p.kernel.offsets)


def linearization_matrix(p: FlowParams, u0: GridFunction) -> np.ndarray:
    """Dense A = -I + C D with D = diag(f'(u0))."""
    if u0.grid != p.grid:
        raise ValueError("grid mismatch")
    n = p.grid.n
    fp = f_eval(p.firing, u0.values, 1)
    return -np.eye(n) + _circulant(p) * fp[None, :]


def spectrum(p: FlowParams, u0: GridFunction, *, zero_tol: float = 1e-6,
             gap_tol: float = 1e-3, hyp_tol: float = 1e-3,
             keep_vectors: bool = True) -> SpectrumReport:
    """Real spectrum of the linearization via the symmetrizing similarity.

    Eigenvectors are mapped back through D^{-1/2} (direction only).
    """
    if u0.grid != p.grid:
        raise ValueError("grid mismatch")
    n, w = p.grid.n, p.grid.weight
    fp = f_eval(p.firing, u0.values, 1)
    if np.any(fp <= 0.0):
        raise ValueError("f'(u0) must be positive everywhere to symmetrize")
    sq = np.sqrt(fp)
    sym = -np.eye(n) + sq[:, None] * _circulant(p) * sq[None, :]
    lam, vec = np.linalg.eigh(sym)
    order = np.argsort(lam)[::-1]
    lam = lam[order]
    vec = vec[:, order] / sq[:, None]    # similarity undone; direction only

    absorder = np.argsort(np.abs(lam))
    nearest, second = int(absorder[0]), int(absorder[1])
    zero_index = nearest if abs(lam[nearest]) <= zero_tol else None
    zero_is_simple = bool(zero_index is not None and abs(lam[second]) >= gap_tol)
    hyperbolic = bool(np.min(np.abs(lam)) >= hyp_tol)

    alignment = None
    if _classify(u0.values) == "nonconstant":
        du = spectral_derivative(u0).values
        v0 = vec[:, nearest]
        num = abs(w * np.sum(v0 * du))
        den = np.sqrt(w * np.sum(v0 * v0)) * np.sqrt(w * np.sum(du * du))
        if den > 0.0:
            alignment = float(np.arccos(min(1.0, num / den)))

    return SpectrumReport(eigenvalues=lam, zero_index=zero_index,
                          zero_is_simple=zero_is_simple, eigvec_alignment=alignment,
                          hyperbolic=hyperbolic, zero_tol=zero_tol, gap_tol=gap_tol,
                          vectors=vec if keep_vectors else None)


def newton_solve(p: FlowParams, guess: GridFunction, tol: float = 1e-10,
                 max_iter: int = 50) -> Equilibrium:
    """Damped Newton iteration on F(u) = 0.

    The linear solve uses a truncated least-squares step, which acts in the
    orthogonal complement of any numerically null direction (the rotation
    mode along an orbit of nonconstant equilibria). Non-convergence is
    reported through the converged flag, not raised.
    """
    if guess.grid != p.grid:
        raise ValueError("grid mismatch")
    u = guess.values.copy()
    cmat = _circulant(p)
    n = p.grid.n
    eye = np.eye(n)
    res = float(np.max(np.abs(rhs_values(p, u))))
    it = 0
    while res > tol and it < max_iter:
        fp = f_eval(p.firing, u, 1)
        jac = -eye + cmat * fp[None, :]
        r = rhs_values(p, u)
        step, *_ = np.linalg.lstsq(jac, -r, rcond=1e-10)
        alpha = 1.0
        trial = u + step
        trial_res = float(np.max(np.abs(rhs_values(p, trial))))
        while trial_res >= res and alpha > 2.0 ** -30:
            alpha *= 0.5
            trial = u + alpha * step
            trial_res = float(np.max(np.abs(rhs_values(p, trial))))
        u, res = trial, trial_res
        it += 1
    state = GridFunction(p.grid, u)
    return Equilibrium(state=state, residual=res, kind=_classify(u),
                       converged=bool(res <= tol), iterations=it)


def rotation_orbit(p: FlowParams, eq: Equilibrium) -> list[Equilibrium]:
    """All grid rotations of an equilibrium; a single point for constants."""
    if eq.is_constant:
        return [eq]
    out = []
    for k in range(p.grid.n):
        state = rotate(eq.state, k)
        residual = float(np.max(np.abs(rhs_values(p, state.values))))
        out.append(Equilibrium(state=state, residual=residual, kind=eq.kind,
                               converged=eq.converged, orbit_id=eq.orbit_id))
    return out


def orbit_min_distance(u1: np.ndarray, u2: np.ndarray, weight: float) -> float:
    """min over cyclic shifts k of the weighted L2 distance ||shift(u1, k) - u2||.

    Computed through the circular cross-correlation, O(n log n).
    """
    n1 = np.sum(u1 * u1)
    n2 = np.sum(u2 * u2)
    corr = np.fft.irfft(np.fft.rfft(u1) * np.conj(np.fft.rfft(u2)), len(u1))
    d2 = weight * np.maximum(n1 + n2 - 2.0 * corr, 0.0)
    return float(np.sqrt(np.min(d2)))


@dataclass(frozen=True)
class MultistartSpec:
    """Seeding plan for the global equilibrium search."""

    modes: tuple[int, ...] = (1, 2, 3)
    amplitudes: tuple[float, ...] = (0.1, 0.3)
    n_random: int = 8
    random_amplitude: float = 0.3
    seed: int = 0
    dedup_tol: float = 1e-6


def find_equilibria(p: FlowParams, spec: MultistartSpec | None = None,
                    newton_tol: float = 1e-10, *, zero_tol: float = 1e-6,
                    gap_tol: float = 1e-3, hyp_tol: float = 1e-3,
                    warm_starts: list[GridFunction] | None = None) -> list[Equilibrium]:
    """Multistart search returning one representative per rotation orbit.

    Seeds: every constant root; cosine perturbations of the roots in the
    given modes (always including the analytically destabilized modes of
    each root); seeded random low-mode perturbations; plus any caller
    warm starts. Representatives carry their spectrum report. Coverage is
    inherently incomplete; more seeds can only add orbits.
    """
    spec = spec or MultistartSpec()
    x = p.grid.points
    tau = p.grid.tau
    rng = np.random.default_rng(spec.seed)

    found: list[Equilibrium] = []

    def is_new(candidate: Equilibrium) -> bool:
        for other in found:
            if candidate.is_constant != other.is_constant:
                continue
            d = orbit_min_distance(candidate.state.values, other.state.values,
                                   p.grid.weight)
            if d <= spec.dedup_tol:
                return False
        return True

    def register(eq: Equilibrium) -> None:
        if eq.converged and is_new(eq):
            eq.orbit_id = len(found)
            eq.spectrum = spectrum(p, eq.state, zero_tol=zero_tol,
                                   gap_tol=gap_tol, hyp_tol=hyp_tol)
            found.append(eq)

    roots = constant_roots(p)
    for c in roots:
        state = GridFunction.constant(p.grid, c)
        residual = float(np.max(np.abs(rhs_values(p, state.values))))
        register(Equilibrium(state=state, residual=residual, kind="constant"))

    guesses: list[np.ndarray] = []
    for c in roots:
        lam = constant_mode_eigenvalues(p, c, kmax=max(spec.modes) + 1)
        active = set(spec.modes) | {k for k in range(1, len(lam)) if lam[k] > 0.0}
        for k in sorted(active):
            for amp in spec.amplitudes:
                guesses.append(c + amp * np.cos(np.pi * k * x / tau))
        for _ in range(spec.n_random):
            pert = np.zeros_like(x)
            for k in sorted(active):
                pert += rng.normal() * np.cos(np.pi * k * x / tau) \
                    + rng.normal() * np.sin(np.pi * k * x / tau)
            scale = np.max(np.abs(pert))
            if scale > 0:
                guesses.append(c + spec.random_amplitude * pert / scale)
    for g in warm_starts or []:
        guesses.append(g.values.copy())

    for g in guesses:
        register(newton_solve(p, GridFunction(p.grid, g), tol=newton_tol))

    found.sort(key=lambda e: (e.kind != "constant", float(np.min(e.state.values))))
    for i, eq in enumerate(found):
        eq.orbit_id = i
    return found


@dataclass(frozen=True)
class DestabilizationScan:
    """Result of scanning the stimulus for a mode instability."""

    h: float
    c: float
    eigenvalue: float
    mode: int


def find_destabilizing_h(p: FlowParams, mode: int = 1,
                         hs: np.ndarray | None = None,
                         margin: float = 0.0) -> DestabilizationScan:
    """Scan h until some constant root destabilizes in the given Fourier mode.

    Returns the first h in the scan where -1 + f'(c)*J_hat_mode > margin
    for a constant root c, together with that root and eigenvalue.
    """
    if hs is None:
        hs = np.round(np.arange(0.01, 0.25, 0.01), 10)
    jhat = fourier_coefficients(p.kernel, mode)[mode]
    for h in hs:
        candidate = replace(p, h=float(h))
        for c in constant_roots(candidate):
            lam = -1.0 + f_eval(p.firing, c, 1) * jhat
            if lam > margin:
                return DestabilizationScan(h=float(h), c=c, eigenvalue=float(lam),
                                           mode=mode)
    raise ValueError(f"no h in the scan destabilizes mode {mode}")
